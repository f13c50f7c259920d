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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "hlmetro/errors.hpp"
#include "hlmetro/exact_engine.hpp"
#include "oracle.hpp"

using namespace hlm;

namespace {

StateVector random_state(int n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  StateVector v(1 << n);
  for (auto& a : v) a = cplx(g(rng), g(rng));
  return v.normalized();
}

PerturbedHamiltonian random_hamiltonian(int n, double omega, std::mt19937& rng) {
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  const std::string axes = "XYZ";
  std::vector<LocalTerm> terms;
  for (int q = 0; q + 1 < n; ++q)
    terms.push_back(make_local_term({single_pauli(axes[rng() % 3], q, U(rng)) * single_pauli(axes[rng() % 3], q + 1)}));
  for (int q = 0; q < n; ++q) terms.push_back(make_local_term({single_pauli(axes[rng() % 3], q, U(rng))}));
  return make_hamiltonian(chain_graph(n), terms, omega);
}

}  // namespace

TEST_CASE("evolve basics") {
  auto H = ising_chain(3, 0.4, 1.2);
  StateVector psi = oracle::ghz(3);
  CHECK((evolve(psi, H, 0.0) - psi).norm() < 1e-14);
  // single qubit Rabi rotation
  const double w = 0.7;
  StateVector plus(2);
  plus << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  for (double t : {0.1, 0.9, 2.5}) {
    StateVector out = evolve(plus, field_only(1, w), t);
    CHECK(expectation(out, {pauli("X0")}) == doctest::Approx(std::cos(2 * w * t)).epsilon(1e-12));
  }
  // GHZ parity under the bare field
  for (int n = 1; n <= 6; ++n) {
    PauliString P;
    for (int q = 0; q < n; ++q) P = P * single_pauli('X', q);
    StateVector out = evolve(oracle::ghz(n), field_only(n, w), 0.8);
    CHECK(expectation(out, {P}) == doctest::Approx(std::cos(2 * n * w * 0.8)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(evolve(oracle::ghz(2), H, 1.0), StructuralError);
}

TEST_CASE("evolution invariants") {
  std::mt19937 rng(3);
  for (int n = 2; n <= 6; ++n) {
    auto H = random_hamiltonian(n, 0.9, rng);
    auto sp = diagonalize(H);
    StateVector psi = random_state(n, rng);
    StateVector a = evolve(psi, sp, 1.3);
    CHECK(std::abs(a.norm() - 1) < 1e-10);
    CHECK(oracle::fidelity(evolve(a, sp, -1.3), psi) >= 1 - 1e-10);
    CHECK((evolve(psi, sp, 2.0) - evolve(evolve(psi, sp, 0.7), sp, 1.3)).norm() < 1e-9);
    auto U = propagator(sp, 0.4);
    CHECK((U.adjoint() * U - Eigen::MatrixXcd::Identity(U.rows(), U.cols())).norm() < 1e-9);
    CHECK((U - oracle::expm_herm(assemble_dense(H), 0.4)).norm() < 1e-10);
    // Taylor action agrees with the spectral route
    CHECK((evolve_action(psi, pauli_terms(H), 1.3) - a).norm() < 1e-11);
  }
}

TEST_CASE("time-dependent evolution") {
  std::mt19937 rng(5);
  // constant generator
  for (int n = 1; n <= 4; ++n) {
    auto H = random_hamiltonian(n, 0.0, rng);
    auto still = interaction_picture(pauli_terms(H, false), n, 0.0, 1.0);
    StateVector psi = random_state(n, rng);
    CHECK((evolve_time_dependent(psi, still, 1.0, 2000) - evolve(psi, H, 1.0)).norm() < 1e-8);
  }
  // interaction picture on |0...0>
  for (int n = 1; n <= 4; ++n) {
    auto H = ising_chain(n, 0.3, 1.1);
    const double t = 1.0;
    auto Hs = interaction_picture(H, t);
    StateVector zero = basis_state(n, 0);
    StateVector a = evolve_time_dependent(zero, Hs, t, 4000);
    StateVector b = evolve(zero, H, t);
    CHECK(oracle::fidelity(a, b) >= 1 - 1e-8);
  }
  // rotating transverse field on one qubit vs a fine RK4 reference
  const double w = 0.6, t = 0.4;
  auto rot = rotate_interaction({pauli("X0")}, 1, w);
  Eigen::Vector2cd y(1, 0);
  const int fine = 20000;
  const double h = t / fine;
  auto f = [&](double s, const Eigen::Vector2cd& v) -> Eigen::Vector2cd { return cplx(0, -1) * (rot.dense_at(s) * v); };
  for (int k = 0; k < fine; ++k) {
    double s = k * h;
    Eigen::Vector2cd k1 = f(s, y), k2 = f(s + h / 2, y + h / 2 * k1), k3 = f(s + h / 2, y + h / 2 * k2), k4 = f(s + h, y + h * k3);
    y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  StateVector got = evolve_time_dependent(basis_state(1, 0), rot, t, 4000);
  CHECK((got - y).norm() < 1e-8);
  CHECK_THROWS_AS(evolve_time_dependent(basis_state(1, 0), rot, t, 0), ValidationError);
}

TEST_CASE("conditioned reduced density") {
  auto r = conditioned_reduced_density(basis_state(3, 0), 3, {}, 1);
  CHECK((r.rho - Eigen::Matrix2cd{{1, 0}, {0, 0}}).norm() < 1e-15);
  Eigen::Vector2cd plus(1 / std::sqrt(2.0), 1 / std::sqrt(2.0));
  auto g2 = conditioned_reduced_density(oracle::ghz(2), 2, {{0, plus}}, 1);
  Eigen::Matrix2cd want = 0.5 * (Eigen::Matrix2cd::Identity() + oracle::pauli2('X'));
  CHECK((g2.rho - want).norm() < 1e-14);
  CHECK(g2.weight == doctest::Approx(0.5));
  auto g3 = conditioned_reduced_density(oracle::ghz(3), 3, {{0, Eigen::Vector2cd(1, 0)}}, 1);
  CHECK((g3.rho - Eigen::Matrix2cd{{1, 0}, {0, 0}}).norm() < 1e-15);
  CHECK_THROWS_AS(conditioned_reduced_density(basis_state(2, 0), 2, {{0, Eigen::Vector2cd(0, 1)}}, 1),
                  DegenerateBranchError);
  CHECK_THROWS_AS(conditioned_reduced_density(basis_state(2, 0), 2, {{1, plus}}, 1), StructuralError);
}

TEST_CASE("conditioned reduced density matches projector oracle") {
  std::mt19937 rng(9);
  const int n = 4;
  StateVector psi = random_state(n, rng);
  std::vector<Projector> rec;
  Eigen::MatrixXcd E = Eigen::MatrixXcd::Identity(1 << n, 1 << n);
  for (int q : {3, 0}) {
    Eigen::Vector2cd e = Eigen::Vector2cd::Random().normalized();
    rec.emplace_back(q, e);
    E = E * oracle::site_op(e * e.adjoint(), q, n);
  }
  const int target = 2;
  auto r = conditioned_reduced_density(psi, n, rec, target);
  Eigen::MatrixXcd rho = E * psi * psi.adjoint() * E;
  double w = rho.trace().real();
  Eigen::Matrix2cd want = Eigen::Matrix2cd::Zero();
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      Eigen::Matrix2cd ket_bra = Eigen::Matrix2cd::Zero();
      ket_bra(b, a) = 1;  // <a|rho|b> = Tr(|b><a| rho)
      want(a, b) = (oracle::site_op(ket_bra, target, n) * rho).trace() / w;
    }
  CHECK(r.weight == doctest::Approx(w).epsilon(1e-12));
  CHECK((r.rho - want).norm() < 1e-12);
}

TEST_CASE("heisenberg deviation") {
  auto Zt = oracle::total_z(4);
  auto H = ising_chain(4, 0.3, 2.0);
  auto sp = diagonalize(H);
  CHECK(heisenberg_deviation(sp, Zt, 0.0) < 1e-12);
  CHECK(heisenberg_deviation(field_only(4, 1.0), Zt, 0.8) < 1e-12);
  const double J = H.local_strength, w = H.omega;
  for (double s : {0.05, 0.2, 1.0, 3.0}) {
    auto U = oracle::expm_herm(assemble_dense(H), -s);
    Eigen::MatrixXcd diff = U * Zt * U.adjoint() - Zt;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(diff);
    double d = heisenberg_deviation(sp, Zt, s);
    CHECK(d == doctest::Approx(svd.singularValues()(0)).epsilon(1e-9));
    CHECK(d <= 2 * 4 * J * s + 1e-12);
    CHECK(d <= 2 * 4 * J / w + 1e-12);
  }
}

TEST_CASE("Lieb-Robinson smallness at n = 10") {
  const int n = 10;
  auto H = ising_chain(n, 0.1, 1.0);
  auto sp = diagonalize(H);
  auto U = propagator(sp, 1.0);
  Eigen::VectorXd z1 = total_z_diagonal(1), zq(1 << n);
  auto zdiag = [&](int q) {
    for (int b = 0; b < (1 << n); ++b) zq[b] = ((b >> q) & 1) ? -1.0 : 1.0;
    return zq;
  };
  Eigen::MatrixXcd z1t = U.adjoint() * (zdiag(0).cast<cplx>().asDiagonal() * U);
  // [A, Z_q]_{kl} = A_{kl} (z_l - z_k) for diagonal Z_q
  auto comm_norm = [&](int q) {
    Eigen::VectorXd d = zdiag(q);
    Eigen::MatrixXcd c(z1t.rows(), z1t.cols());
    for (Eigen::Index l = 0; l < c.cols(); ++l)
      for (Eigen::Index k = 0; k < c.rows(); ++k) c(k, l) = z1t(k, l) * (d[l] - d[k]);
    return operator_norm(c);
  };
  double c = comm_norm(n - 1);
  CHECK(c <= 1e-3);
  CHECK(comm_norm(1) > c);
}

TEST_CASE("product state layout") {
  Eigen::Vector2cd a(0.6, 0.8), b(1, 0);
  StateVector v = product_state({a, b});
  // qubit 0 in bit 0
  CHECK(std::abs(v[1] - cplx(0.8)) < 1e-15);
  CHECK(std::abs(v[2]) < 1e-15);
  CHECK(qubit_count(v) == 2);
}
