// Copyright 2026 The hlmetro Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hlmetro/exact_engine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "hlmetro/errors.hpp"

namespace hlm {

namespace {
const cplx kI{0.0, 1.0};
}

int qubit_count(const StateVector& psi) {
  const auto dim = static_cast<std::uint64_t>(psi.size());
  if (dim == 0 || !std::has_single_bit(dim)) throw StructuralError("state length is not a power of two");
  return std::countr_zero(dim);
}

StateVector basis_state(int n, Mask bits) {
  StateVector v = StateVector::Zero(Eigen::Index{1} << n);
  v[static_cast<Eigen::Index>(bits)] = 1.0;
  return v;
}

StateVector product_state(const std::vector<Eigen::Vector2cd>& sites) {
  StateVector v = StateVector::Ones(1);
  for (std::size_t q = 0; q < sites.size(); ++q) {
    StateVector next(v.size() * 2);
    // qubit q is the new highest bit
    next.head(v.size()) = sites[q][0] * v;
    next.tail(v.size()) = sites[q][1] * v;
    v = std::move(next);
  }
  return v;
}

Spectrum diagonalize(const Eigen::MatrixXcd& h) {
  Spectrum sp;
  sp.n = qubit_count(h.col(0));
  if (h.imag().cwiseAbs().maxCoeff() == 0.0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.real());
    if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
    sp.energies = es.eigenvalues();
    sp.vectors = es.eigenvectors().cast<cplx>();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
    sp.energies = es.eigenvalues();
    sp.vectors = es.eigenvectors();
  }
  return sp;
}

Spectrum diagonalize(const PerturbedHamiltonian& H, int cap) {
  return diagonalize(assemble_dense(H, cap));
}

StateVector evolve(const StateVector& psi, const Spectrum& sp, double t) {
  if (psi.size() != sp.vectors.rows()) throw StructuralError("state and Hamiltonian dimensions differ");
  StateVector c = sp.vectors.adjoint() * psi;
  c.array() *= (sp.energies.cast<cplx>() * (-kI * t)).array().exp();
  return sp.vectors * c;
}

StateVector evolve(const StateVector& psi, const PerturbedHamiltonian& H, double t) {
  if (psi.size() != (Eigen::Index{1} << H.n()))
    throw StructuralError("state and Hamiltonian dimensions differ");
  return evolve(psi, diagonalize(H), t);
}

Eigen::MatrixXcd propagator(const Spectrum& sp, double t) {
  Eigen::VectorXcd ph = (sp.energies.cast<cplx>() * (-kI * t)).array().exp();
  return sp.vectors * ph.asDiagonal() * sp.vectors.adjoint();
}

StateVector evolve_action(const StateVector& psi, const std::vector<PauliString>& H, double t,
                          double tol) {
  double bound = 0.0;
  for (const auto& p : H) bound += std::abs(p.coeff);
  if (bound == 0.0 || t == 0.0) return psi;
  const int sub = std::max(1, static_cast<int>(std::ceil(std::abs(t) * bound)));
  const double dt = t / sub;
  StateVector v = psi;
  for (int s = 0; s < sub; ++s) {
    StateVector term = v;
    StateVector acc = v;
    const double ref = v.norm();
    for (int k = 1; k < 60; ++k) {
      term = apply_pauli_sum(H, term) * (-kI * dt / static_cast<double>(k));
      acc += term;
      if (term.norm() <= tol * ref) break;
      if (k == 59) throw NumericalError("Taylor series did not converge");
    }
    v = std::move(acc);
  }
  return v;
}

int default_td_steps(const TimeDependentHamiltonian& H, double t) {
  double total = 0.0;
  for (const auto& term : H.terms) total += term.amplitude();
  return std::max(1, static_cast<int>(std::ceil(std::abs(t) * total * 1e3)));
}

StateVector evolve_time_dependent(const StateVector& psi, const TimeDependentHamiltonian& H,
                                  double t, int steps) {
  if (steps < 1) throw ValidationError("time-dependent evolution needs at least one step");
  if (psi.size() != (Eigen::Index{1} << H.n)) throw StructuralError("state and Hamiltonian dimensions differ");
  const double ds = t / steps;
  StateVector v = psi;
  for (int k = 0; k < steps; ++k) v = evolve_action(v, H.at((k + 0.5) * ds), ds);
  return v;
}

StateVector contract_one(const StateVector& v, int pos, const Eigen::Vector2cd& e) {
  const Eigen::Index half = v.size() / 2;
  const Eigen::Index low = Eigen::Index{1} << pos;
  const cplx c0 = std::conj(e[0]), c1 = std::conj(e[1]);
  StateVector out(half);
  for (Eigen::Index i = 0; i < half; ++i) {
    const Eigen::Index lo = i & (low - 1);
    const Eigen::Index hi = (i >> pos) << (pos + 1);
    out[i] = c0 * v[hi | lo] + c1 * v[hi | low | lo];
  }
  return out;
}

StateVector contract(const StateVector& psi, int n, std::vector<Projector> record) {
  if (psi.size() != (Eigen::Index{1} << n)) throw StructuralError("state length does not match qubit count");
  std::sort(record.begin(), record.end(),
            [](const Projector& a, const Projector& b) { return a.first > b.first; });
  for (std::size_t k = 0; k < record.size(); ++k) {
    if (record[k].first < 0 || record[k].first >= n) throw StructuralError("measured qubit out of range");
    if (k > 0 && record[k].first == record[k - 1].first) throw StructuralError("qubit measured twice");
  }
  StateVector v = psi;
  // descending order keeps lower packed positions unchanged
  for (const auto& [q, e] : record) v = contract_one(v, q, e);
  return v;
}

Eigen::Matrix2cd reduced_cross(const StateVector& ket, const StateVector& bra, int pos) {
  const Eigen::Index half = ket.size() / 2;
  const Eigen::Index low = Eigen::Index{1} << pos;
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  for (Eigen::Index i = 0; i < half; ++i) {
    const Eigen::Index lo = i & (low - 1);
    const Eigen::Index hi = (i >> pos) << (pos + 1);
    const Eigen::Index i0 = hi | lo, i1 = hi | low | lo;
    m(0, 0) += ket[i0] * std::conj(bra[i0]);
    m(0, 1) += ket[i0] * std::conj(bra[i1]);
    m(1, 0) += ket[i1] * std::conj(bra[i0]);
    m(1, 1) += ket[i1] * std::conj(bra[i1]);
  }
  return m;
}

ReducedDensity conditioned_reduced_density(const StateVector& psi, int n,
                                           const std::vector<Projector>& record, int target) {
  if (target < 0 || target >= n) throw StructuralError("target qubit out of range");
  int pos = target;
  for (const auto& [q, e] : record) {
    if (q == target) throw StructuralError("target qubit is already measured");
    if (q < target) --pos;
  }
  StateVector chi = contract(psi, n, record);
  ReducedDensity r;
  r.weight = chi.squaredNorm();
  if (r.weight < kZeroWeight) throw DegenerateBranchError("measurement record has zero weight");
  r.rho = reduced_cross(chi, chi, pos) / r.weight;
  return r;
}

double expectation(const StateVector& psi, const std::vector<PauliString>& op) {
  return psi.dot(apply_pauli_sum(op, psi)).real();
}

Eigen::MatrixXcd heisenberg_operator(const Spectrum& sp, const Eigen::MatrixXcd& O, double s) {
  Eigen::MatrixXcd o = sp.vectors.adjoint() * O * sp.vectors;
  const Eigen::Index d = o.rows();
  for (Eigen::Index l = 0; l < d; ++l)
    for (Eigen::Index k = 0; k < d; ++k)
      o(k, l) *= std::exp(kI * (s * (sp.energies[k] - sp.energies[l])));
  return sp.vectors * o * sp.vectors.adjoint();
}

double operator_norm(const Eigen::MatrixXcd& m) {
  const double scale = 1e-13 * std::max(1.0, m.norm());
  if ((m - m.adjoint()).norm() <= scale) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  if ((m + m.adjoint()).norm() <= scale) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(kI * m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues()(0);
}

double heisenberg_deviation(const Spectrum& sp, const Eigen::MatrixXcd& O, double s) {
  // unitarily invariant, so stay in the eigenbasis
  Eigen::MatrixXcd o = sp.vectors.adjoint() * O * sp.vectors;
  const Eigen::Index d = o.rows();
  Eigen::MatrixXcd diff(d, d);
  for (Eigen::Index l = 0; l < d; ++l)
    for (Eigen::Index k = 0; k < d; ++k)
      diff(k, l) = o(k, l) * (std::exp(kI * (s * (sp.energies[k] - sp.energies[l]))) - 1.0);
  return operator_norm(diff);
}

double heisenberg_deviation(const PerturbedHamiltonian& H, const Eigen::MatrixXcd& O, double s) {
  return heisenberg_deviation(diagonalize(H), O, s);
}

}  // namespace hlm
