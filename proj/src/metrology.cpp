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

#include "hlmetro/metrology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hlmetro/errors.hpp"

namespace hlm {

namespace {

const cplx kI{0.0, 1.0};
constexpr double kPi = std::numbers::pi;

std::vector<PauliString> with_field(std::vector<PauliString> V, int n, double omega) {
  for (int q = 0; q < n; ++q) V.push_back(single_pauli('Z', q, omega));
  return simplify(std::move(V));
}

}  // namespace

PriorInterval prior_interval(double omega, int n, double t) {
  if (n < 1 || !(t > 0)) throw DomainError("prior interval needs N >= 1 and t > 0");
  const double k = std::floor(2.0 * n * omega * t / kPi);
  return prior_interval_at(kPi / (2.0 * n * t) * (k + 0.5), n, t);
}

PriorInterval prior_interval_at(double omega_prime, int n, double t) {
  if (n < 1 || !(t > 0)) throw DomainError("prior interval needs N >= 1 and t > 0");
  return PriorInterval{omega_prime, kPi / (4.0 * n * t), n, t};
}

PrecisionLimits precision_limits(int n, double M, double t) {
  if (n < 1 || !(M > 0) || !(t > 0)) throw DomainError("precision limits need positive N, M, t");
  return {1.0 / std::sqrt(M * n * t * t), 1.0 / std::sqrt(4.0 * M * n * n * t * t)};
}

Eigen::MatrixXcd time_averaged_operator(const Spectrum& sp, const Eigen::MatrixXcd& O, double t) {
  Eigen::MatrixXcd o = sp.vectors.adjoint() * O * sp.vectors;
  if (t != 0.0) {
    for (Eigen::Index l = 0; l < o.cols(); ++l)
      for (Eigen::Index k = 0; k < o.rows(); ++k) {
        const double d = (sp.energies[k] - sp.energies[l]) * t;
        // (e^{id} - 1) / (id), with its series near zero
        const cplx avg = std::abs(d) < 1e-6 ? cplx(1.0 - d * d / 6.0, d / 2.0)
                                            : (std::exp(kI * d) - 1.0) / (kI * d);
        o(k, l) *= avg;
      }
  }
  return sp.vectors * o * sp.vectors.adjoint();
}

namespace {

// Zbar psi in the eigenbasis of H.
Eigen::VectorXcd zbar_eigen(const Spectrum& sp, const Eigen::VectorXcd& c, double t, double rel_tol) {
  const Eigen::VectorXd zd = total_z_diagonal(sp.n);
  auto integrand = [&](double s) -> Eigen::VectorXcd {
    Eigen::VectorXcd v = c.array() * (sp.energies.cast<cplx>() * (-kI * s)).array().exp();
    Eigen::VectorXcd w = sp.vectors * v;
    w.array() *= zd.cast<cplx>().array();
    Eigen::VectorXcd r = sp.vectors.adjoint() * w;
    return r.array() * (sp.energies.cast<cplx>() * (kI * s)).array().exp();
  };
  Eigen::VectorXcd prev = integrate_gl(integrand, 0.0, t, 1) / t;
  for (int panels = 2; panels <= 4096; panels *= 2) {
    Eigen::VectorXcd cur = integrate_gl(integrand, 0.0, t, panels) / t;
    if ((cur - prev).norm() <= rel_tol * std::max(1.0, cur.norm())) return cur;
    prev = std::move(cur);
  }
  throw IntegrationFailure("time-averaged Z did not converge");
}

}  // namespace

StateVector time_averaged_z_action(const Spectrum& sp, const StateVector& psi, double t,
                                   double rel_tol) {
  if (t == 0.0) return total_z_diagonal(sp.n).cast<cplx>().cwiseProduct(psi);
  return sp.vectors * zbar_eigen(sp, sp.vectors.adjoint() * psi, t, rel_tol);
}

double qfi(const StateVector& psi_in, const Spectrum& sp, double t) {
  if (t == 0.0) return 0.0;
  if (psi_in.size() != sp.vectors.rows()) throw StructuralError("state and Hamiltonian dimensions differ");
  const Eigen::VectorXcd c = sp.vectors.adjoint() * psi_in;
  const Eigen::VectorXcd zc = zbar_eigen(sp, c, t, 1e-10);
  const double f = 4.0 * t * t * (zc.squaredNorm() - std::norm(c.dot(zc)));
  return std::max(0.0, f);
}

double qfi(const StateVector& psi_in, const PerturbedHamiltonian& H, double t) {
  return qfi(psi_in, diagonalize(H), t);
}

double qfi_lower_bound_coherence(double c_in, double J, double t, int n) {
  if (J > 0 && t >= c_in / J) throw DomainError("bound requires t < c_in / J");
  const double g = c_in - J * t;
  return 4.0 * t * t * n * n * g * g;
}

double qfi_lower_bound_fluctuation(double c_prime, double J, double t, int n) {
  return 4.0 * t * t * n * n * (c_prime - 4.0 * J * t);
}

QfiReport qfi_report(const SuperposedPair& pair, const PerturbedHamiltonian& H, double t) {
  QfiReport r;
  r.n = H.n();
  r.t = t;
  r.J = H.local_strength;
  const StateVector psi = pair.combined();
  r.value = qfi(psi, H, t);
  try {
    r.lower_bound_coherence = qfi_lower_bound_coherence(pair.c_in, r.J, t, r.n);
  } catch (const DomainError&) {
    r.lower_bound_coherence = std::numeric_limits<double>::quiet_NaN();
  }
  r.lower_bound_fluctuation = qfi_lower_bound_fluctuation(zz_fluctuation(psi), r.J, t, r.n);
  return r;
}

SlopeInterval phase_slope_interval(double c_in, double J, double t, int n) {
  return {2.0 * t * (c_in - J * t) * n, 2.0 * t * n};
}

double z_gap_integral(const SuperposedPair& pair, const std::vector<PauliString>& V, double omega,
                      double t, double tol) {
  const int n = pair.n;
  const auto H = with_field(V, n, omega);
  const Eigen::VectorXd zd = total_z_diagonal(n);
  auto rule = [&](int panels) {
    static const auto gl = gauss_legendre(16);
    std::vector<double> s, w;
    const double h = t / panels;
    for (int p = 0; p < panels; ++p)
      for (int k = 0; k < 16; ++k) {
        s.push_back((p + 0.5) * h + h / 2 * gl.first[k]);
        w.push_back(h / 2 * gl.second[k]);
      }
    double acc = 0.0;
    for (const StateVector* b : {&pair.branch0, &pair.branch1}) {
      StateVector v = *b;
      double last = 0.0, part = 0.0;
      for (std::size_t k = 0; k < s.size(); ++k) {
        v = evolve_action(v, H, s[k] - last);
        last = s[k];
        part += w[k] * (v.cwiseAbs2().dot(zd));
      }
      acc += b == &pair.branch0 ? part : -part;
    }
    return acc;
  };
  double prev = rule(1);
  for (int panels = 2; panels <= 1024; panels *= 2) {
    const double cur = rule(panels);
    if (std::abs(cur - prev) <= tol * std::max(1.0, std::abs(cur))) return cur;
    prev = cur;
  }
  throw IntegrationFailure("Z-gap integral did not converge");
}

double phase_function_eval(double omega_tilde, const SuperposedPair& pair,
                           const std::vector<PauliString>& V, double t,
                           const PriorInterval& prior, double tol) {
  if (!prior.contains(omega_tilde)) throw DomainError("omega outside the prior interval");
  const double a = prior.omega_prime;
  if (omega_tilde == a) return 0.0;
  auto g = [&](double w) { return z_gap_integral(pair, V, w, t, tol * 1e-2); };
  double prev = integrate_gl(g, a, omega_tilde, 1);
  double f = prev;
  for (int panels = 2;; panels *= 2) {
    if (panels > 64) throw IntegrationFailure("phase function quadrature did not converge");
    f = integrate_gl(g, a, omega_tilde, panels);
    if (std::abs(f - prev) <= tol * std::max(1.0, std::abs(f))) break;
    prev = f;
  }
  if (std::abs(f) > kPi / 2 + 1e-6) throw IntegrationFailure("phase function left [-pi/2, pi/2]");
  return f;
}

PhaseFunction::PhaseFunction(const SuperposedPair& pair, std::vector<PauliString> V, double t,
                             PriorInterval prior, double tol)
    : pair_(pair), V_(std::move(V)), t_(t), prior_(prior), tol_(tol) {
  auto g = [&](double w) { return z_gap_integral(pair_, V_, w, t_, tol_ * 1e-2); };
  const double scale = 2.0 * pair_.n * t_;
  const double probes[2] = {prior_.lo() + 0.37 * prior_.half_width, prior_.hi() - 0.21 * prior_.half_width};
  const double want[2] = {g(probes[0]), g(probes[1])};
  for (int k = 12;; k *= 2) {
    g_ = chebyshev_fit(g, prior_.lo(), prior_.hi(), k);
    const double err = std::max(std::abs(g_(probes[0]) - want[0]), std::abs(g_(probes[1]) - want[1]));
    if (err <= tol_ * scale) break;
    if (k >= 96) throw IntegrationFailure("phase-function tabulation did not converge");
  }
  f_ = g_.integral(prior_.omega_prime);
}

double PhaseFunction::operator()(double w) const {
  if (!prior_.contains(w)) throw DomainError("omega outside the prior interval");
  if (w == prior_.omega_prime) return 0.0;
  const double f = f_(w);
  if (std::abs(f) > kPi / 2 + 1e-6) throw IntegrationFailure("phase function left [-pi/2, pi/2]");
  return f;
}

double PhaseFunction::direct(double w) const {
  return phase_function_eval(w, pair_, V_, t_, prior_, tol_);
}

double PhaseFunction::min_slope(int grid) const {
  double m = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= grid; ++k) m = std::min(m, g_(prior_.lo() + 2 * prior_.half_width * k / grid));
  return m;
}

WeakBound weak_perturbation_slope_bound(double c_in, double J, double omega, double t, int n) {
  if (2.0 * J >= c_in * omega) throw DomainError("bound requires 2J < c_in omega");
  const double c = c_in - 2.0 * J / omega;
  return {t * c, {2.0 * c * t * n, 2.0 * t * n}};
}

double prethermal_time(double J, double omega, double c_pre) {
  if (!(J > 0)) throw DomainError("prethermal time needs J > 0");
  return std::exp(c_pre * omega / J) / J;
}

}  // namespace hlm
