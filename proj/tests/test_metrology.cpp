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

#include <numbers>
#include <random>

#include "hlmetro/errors.hpp"
#include "hlmetro/metrology.hpp"
#include "oracle.hpp"

using namespace hlm;
using std::numbers::pi;

namespace {

// 4(<d psi|d psi> - |<psi|d psi>|^2) with a central difference in omega.
double qfi_fd(const Eigen::MatrixXcd& V, const Eigen::VectorXcd& psi, double omega, double t, double h = 1e-5) {
  const int n = static_cast<int>(std::log2(psi.size()));
  auto Z = oracle::total_z(n);
  auto state = [&](double w) -> Eigen::VectorXcd { return oracle::expm_herm(V + w * Z, t) * psi; };
  Eigen::VectorXcd p = state(omega);
  Eigen::VectorXcd d = (state(omega + h) - state(omega - h)) / (2 * h);
  return 4 * (d.squaredNorm() - std::norm(p.dot(d)));
}

PerturbedHamiltonian random_hamiltonian(int n, double omega, std::mt19937& rng) {
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  const std::string axes = "XYZ";
  std::vector<LocalTerm> terms;
  for (int q = 0; q + 1 < n; ++q)
    terms.push_back(make_local_term({single_pauli(axes[rng() % 3], q, U(rng)) * single_pauli(axes[rng() % 3], q + 1)}));
  for (int q = 0; q < n; ++q) terms.push_back(make_local_term({single_pauli(axes[rng() % 2], q, U(rng))}));
  return make_hamiltonian(chain_graph(n), terms, omega);
}

}  // namespace

TEST_CASE("prior interval") {
  for (double w : {0.1, 0.77, 1.3, 2.9}) {
    for (int n : {2, 5, 8}) {
      auto p = prior_interval(w, n, 0.9);
      CHECK(p.contains(w));
      CHECK(p.half_width == doctest::Approx(pi / (4 * n * 0.9)));
      // omega' sits at an odd multiple of pi/(4Nt)
      double k = p.omega_prime / (pi / (2 * n * 0.9)) - 0.5;
      CHECK(std::abs(k - std::round(k)) < 1e-12);
    }
  }
  CHECK_THROWS_AS(prior_interval(1.0, 0, 1.0), DomainError);
}

TEST_CASE("precision limits") {
  auto l = precision_limits(1, 1, 1);
  CHECK(l.sql == doctest::Approx(1.0));
  CHECK(l.hl == doctest::Approx(0.5));
  auto a = precision_limits(3, 10, 2), b = precision_limits(12, 10, 2);
  CHECK(b.hl == doctest::Approx(a.hl / 4));
  CHECK(b.sql == doctest::Approx(a.sql / 2));
  CHECK(precision_limits(8, 1e4, 1).hl == doctest::Approx(6.25e-4));
}

TEST_CASE("qfi closed forms") {
  for (int n = 1; n <= 10; ++n) {
    auto pair = make_ghz(n);
    double t = 0.7;
    double F = qfi(pair.combined(), field_only(n, 1.3), t);
    CHECK(std::abs(F / (4.0 * n * n * t * t) - 1) < 1e-6);
  }
  for (int n = 1; n <= 6; ++n) {
    std::vector<Eigen::Vector2cd> plus(n, Eigen::Vector2cd(1, 1) / std::sqrt(2.0));
    double F = qfi(product_state(plus), field_only(n, 0.4), 1.1);
    CHECK(F == doctest::Approx(4.0 * n * 1.1 * 1.1).epsilon(1e-8));
  }
  CHECK(qfi(make_ghz(3).combined(), ising_chain(3, 0.2, 1.0), 0.0) == 0.0);
}

TEST_CASE("qfi matches finite differences") {
  std::mt19937 rng(17);
  for (int n = 1; n <= 6; ++n) {
    auto H = random_hamiltonian(n, 0.0, rng);
    const double w = 0.8, t = 0.9;
    auto Hw = make_hamiltonian(H.graph, H.terms, w);
    Eigen::VectorXcd psi = Eigen::VectorXcd::Random(1 << n).normalized();
    double F = qfi(psi, Hw, t);
    double Ffd = qfi_fd(assemble_dense(H), psi, w, t);
    CHECK(std::abs(F - Ffd) <= 1e-4 * std::abs(Ffd));
    CHECK(F <= 4 * t * t * n * n + 1e-9);
  }
}

TEST_CASE("time-averaged operator") {
  std::mt19937 rng(2);
  const int n = 4;
  auto Zt = oracle::total_z(n);
  for (double J : {0.05, 0.2, 0.5})
    for (double t : {0.1, 0.5, 1.0, 2.0}) {
      auto H = ising_chain(n, J, 1.3);
      auto sp = diagonalize(H);
      auto Zbar = time_averaged_operator(sp, Zt, t);
      // crude Riemann oracle of the same integral
      Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(16, 16);
      const int K = 4000;
      for (int k = 0; k < K; ++k) R += heisenberg_operator(sp, Zt, (k + 0.5) * t / K) / K;
      CHECK((R - Zbar).norm() < 1e-6);
      CHECK(operator_norm(Zbar - Zt) <= n * J * t + 1e-12);
      Eigen::VectorXcd psi = Eigen::VectorXcd::Random(16).normalized();
      CHECK((time_averaged_z_action(sp, psi, t) - Zbar * psi).norm() < 1e-9);
    }
}

TEST_CASE("qfi lower bounds") {
  CHECK(qfi_lower_bound_coherence(1.0, 0.0, 0.7, 5) == doctest::Approx(4 * 0.49 * 25));
  CHECK(qfi_lower_bound_coherence(0.8, 0.5, 0.8, 6) == doctest::Approx(0.64 * 36 * 0.64));
  CHECK(qfi_lower_bound_coherence(1.0, 0.5, 0.1, 8) == doctest::Approx(2.3104));
  CHECK_THROWS_AS(qfi_lower_bound_coherence(1.0, 1.0, 1.0, 4), DomainError);
  CHECK(qfi_lower_bound_fluctuation(0.7, 0.0, 0.5, 4) == doctest::Approx(4 * 0.25 * 16 * 0.7));
  CHECK(qfi_lower_bound_fluctuation(1.0, 1.0, 0.05, 6) == doctest::Approx(0.288));
  auto pair = make_ghz(6);
  auto H = ising_chain(6, 1.0, 1.0);
  auto rep = qfi_report(pair, H, 0.05);
  CHECK(rep.lower_bound_fluctuation == doctest::Approx(0.288));
  CHECK(rep.value >= rep.lower_bound_fluctuation);
  CHECK(rep.value >= rep.lower_bound_coherence - 0.05 * std::pow(6, 1.5));
  CHECK(rep.value <= 4 * 0.05 * 0.05 * 36 + 1e-12);
}

TEST_CASE("phase function") {
  const double t = 1.0;
  {
    const int n = 4;
    auto pair = make_ghz(n);
    auto prior = prior_interval(1.0, n, t);
    CHECK(phase_function_eval(prior.omega_prime, pair, {}, t, prior) == 0.0);
    for (double d : {-0.9, -0.3, 0.5, 1.0}) {
      double w = prior.omega_prime + d * prior.half_width;
      CHECK(phase_function_eval(w, pair, {}, t, prior) == doctest::Approx(2 * n * t * (w - prior.omega_prime)).epsilon(1e-10));
    }
    CHECK_THROWS_AS(phase_function_eval(prior.hi() + 0.1, pair, {}, t, prior), DomainError);
  }
  {
    const int n = 6;
    auto pair = make_ghz(n);
    auto H = ising_chain(n, 0.2, 1.0);
    auto prior = prior_interval(1.0, n, t);
    auto V = pauli_terms(H, false);
    auto slope = phase_slope_interval(pair.c_in, H.local_strength, t, n);
    PhaseFunction f(pair, V, t, prior);
    CHECK(std::abs(f(prior.omega_prime)) < 1e-10);
    CHECK(f.min_slope() > 0);
    for (double d : {-1.0, -0.4, 0.3, 0.8}) {
      double w = prior.omega_prime + d * prior.half_width;
      double direct = phase_function_eval(w, pair, V, t, prior);
      CHECK(std::abs(f(w) - direct) < 1e-9);
      double lo = slope.lo * (w - prior.omega_prime), hi = slope.hi * (w - prior.omega_prime);
      CHECK(direct >= std::min(lo, hi) - 1e-9);
      CHECK(direct <= std::max(lo, hi) + 1e-9);
      CHECK(f.slope(w) >= slope.lo);
      CHECK(f.slope(w) <= slope.hi);
    }
  }
}

TEST_CASE("weak perturbation utilities") {
  auto b0 = weak_perturbation_slope_bound(1.0, 0.0, 2.0, 1.5, 4);
  CHECK(b0.slope.lo == doctest::Approx(2 * 1.5 * 4));
  CHECK(b0.slope.hi == doctest::Approx(2 * 1.5 * 4));
  auto b = weak_perturbation_slope_bound(1.0, 0.1, 1.0, 1.0, 5);
  CHECK(b.slope.lo == doctest::Approx(1.6 * 5));
  CHECK(b.c_omega_lower == doctest::Approx(0.8));
  CHECK_THROWS_AS(weak_perturbation_slope_bound(1.0, 0.5, 1.0, 1.0, 5), DomainError);
  CHECK(prethermal_time(0.5, 0.0) == doctest::Approx(2.0));
  CHECK(prethermal_time(0.5, 1.0) == doctest::Approx(std::exp(2.0) / 0.5));
  double a = prethermal_time(1.0, 2.0) * 1.0, c = prethermal_time(1.0, 4.0);
  CHECK(c == doctest::Approx(a * a));
  CHECK_THROWS_AS(prethermal_time(0.0, 1.0), DomainError);
}

TEST_CASE("energy conservation bound at n = 4") {
  const int n = 4;
  auto Zt = oracle::total_z(n);
  for (double J : {0.05, 0.1, 0.3})
    for (double w : {1.0, 2.0, 4.0}) {
      if (!(2 * J < w)) continue;
      auto H = ising_chain(n, J, w);
      auto sp = diagonalize(H);
      for (double s : {0.3, 1.0, 5.0, 20.0}) CHECK(heisenberg_deviation(sp, Zt, s) <= 2 * n * J / w + 1e-12);
    }
}
