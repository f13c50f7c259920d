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

#include <bit>
#include <numbers>

#include "hlmetro/baselines.hpp"
#include "hlmetro/errors.hpp"
#include "hlmetro/metrology.hpp"
#include "oracle.hpp"

using namespace hlm;
using std::numbers::pi;

namespace {

struct DenseNaive {
  std::vector<double> p, p_mix;
};

// Bit q of the string is 1 for outcome |-> on qubit q.
DenseNaive dense_naive(int n, double omega, double J, double t) {
  Eigen::MatrixXcd H = omega * oracle::total_z(n);
  for (int q = 0; q < n; ++q) H += J * oracle::site_op(oracle::pauli2('X'), q, n);
  const Eigen::MatrixXcd U = oracle::expm_herm(H, t);
  const Eigen::Matrix2cd h = (oracle::pauli2('X') + oracle::pauli2('Z')) / std::sqrt(2.0);
  const Eigen::MatrixXcd Hn = oracle::kron_ops(std::vector<Eigen::Matrix2cd>(n, h));
  const Eigen::VectorXcd psi = Hn * U * oracle::ghz(n);
  const Eigen::VectorXcd b0 = Hn * U * oracle::basis(n, 0);
  const Eigen::VectorXcd b1 = Hn * U * oracle::basis(n, (1UL << n) - 1);
  DenseNaive d;
  for (Eigen::Index x = 0; x < psi.size(); ++x) {
    d.p.push_back(std::norm(psi[x]));
    d.p_mix.push_back(0.5 * (std::norm(b0[x]) + std::norm(b1[x])));
  }
  return d;
}

}  // namespace

TEST_CASE("tv_distance uses the full 1-norm") {
  CHECK(tv_distance({0.2, 0.8}, {0.2, 0.8}) == 0.0);
  CHECK(tv_distance({1, 0}, {0, 1}) == 2.0);
  CHECK(tv_distance({0.5, 0.5}, {1, 0}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(tv_distance({1}, {0.5, 0.5}), StructuralError);
}

TEST_CASE("tilted rotation parameters") {
  auto a = tilted_rotation(pi / 4, 0.0, 1.0);  // 2 w t = pi / 2
  CHECK(std::abs(a.eta0 - 1 / std::sqrt(2.0)) < 1e-14);
  CHECK(std::abs(a.f_eta - 1) < 1e-14);
  auto d = naive_distribution(6, pi / 4, 0.0, 1.0);
  CHECK(std::abs(d.coherence_sum - 1) < 1e-12);
  auto g = tilted_rotation(0.7, 0.3, 1.1);
  CHECK(g.eta0 >= 0);
  CHECK(g.eta0 <= 1);
  CHECK(g.f_eta <= 1 + 1e-15);
  CHECK_FALSE(g.recurrence);
  CHECK(tilted_rotation(0.3, 0.4, pi / 0.5).recurrence);
  // phi1 is orthogonal to phi0
  CHECK(std::abs(std::conj(g.a_plus) * g.b_plus + std::conj(g.a_minus) * g.b_minus) < 1e-14);
}

TEST_CASE("naive distribution against the dense oracle") {
  for (int n : {1, 3, 6, 8})
    for (auto [w, J, t] : {std::tuple{0.7, 0.3, 1.1}, std::tuple{0.2, 0.05, 2.0}, std::tuple{pi / 4, 0.0, 1.0}}) {
      const auto d = naive_distribution(n, w, J, t);
      const auto o = dense_naive(n, w, J, t);
      double l1 = 0.0, worst = 0.0;
      for (std::size_t x = 0; x < o.p.size(); ++x) {
        const int k = n - std::popcount(x);
        worst = std::max({worst, std::abs(o.p[x] - d.p[k]), std::abs(o.p_mix[x] - d.p_mix[k])});
        l1 += std::abs(o.p[x] - o.p_mix[x]);
      }
      CHECK(worst < 1e-12);
      CHECK(std::abs(l1 - d.l1) < 1e-10);
      double total = 0.0;
      for (double c : d.count_distribution()) total += c;
      CHECK(std::abs(total - 1) < 1e-12);
    }
}

TEST_CASE("naive coherence and the exponential bound") {
  for (int n : {4, 10, 16, 20}) {
    for (auto [w, J, t] : {std::tuple{0.7, 0.3, 1.1}, std::tuple{0.2, 0.05, 2.0}, std::tuple{1.3, 0.6, 0.4}}) {
      const auto d = naive_distribution(n, w, J, t);
      CHECK(std::abs(d.coherence_sum - d.bound) <= 1e-10);
      CHECK(d.l1 <= d.bound + 1e-12);
      CHECK(std::abs(d.l1 - naive_l1_closed_form(d.params, n)) <= 1e-10);
    }
  }
  const auto d16 = naive_distribution(16, 0.7, 0.3, 1.1);
  CHECK(d16.params.f_eta < 1);
  CHECK(d16.l1 <= std::pow(d16.params.f_eta, 16));
}

TEST_CASE("naive statistic is smooth in omega") {
  const double a = naive_statistic(8, 0.30, 0.1, 1.0), b = naive_statistic(8, 0.31, 0.1, 1.0);
  CHECK(a != b);
  CHECK(a >= 0);
  CHECK(a <= 1);
}

TEST_CASE("time-reversal readout") {
  SUBCASE("perfect reversal") {
    for (int n : {2, 4}) {
      const auto V = pauli_terms(ising_chain(n, 0.2, 0.0), false);
      const double wp = 0.31, t = 1.0;
      CHECK(std::abs(undo_protocol_expectation(oracle::ghz(n), V, wp, wp, t) - std::cos(2 * n * wp * t)) < 1e-10);
    }
  }
  SUBCASE("V=0") {
    const int n = 4;
    const double t = 0.8;
    for (double w : {0.1, 0.25, 0.4}) {
      CHECK(std::abs(undo_protocol_expectation(oracle::ghz(n), {}, w, 0.3, t) - std::cos(2 * n * w * t)) < 1e-10);
      const double s = undo_protocol_slope(oracle::ghz(n), {}, w, 0.3, t);
      const double want = 2 * n * t * std::abs(std::sin(2 * n * w * t));
      CHECK(std::abs(s - want) <= 1e-6 * want);
    }
  }
  SUBCASE("N=6 Ising, Jt=0.1") {
    const int n = 6;
    const double t = 1.0, J = 0.1;
    const PriorInterval prior = prior_interval(0.2, n, t);
    UndoProtocol up(oracle::ghz(n), pauli_terms(ising_chain(n, J, 0.0), false), prior.omega_prime, t);
    const double w = prior.omega_prime + pi / (8 * n * t);
    CHECK(std::abs(up.expectation(w) - std::cos(2 * n * w * t)) <= up.deviation_bound(J));
  }
  SUBCASE("slope bound near the steep point") {
    const int n = 6;
    const double t = 1.0, J = 0.05;
    const double wp = pi / (4.0 * n * t);  // 2 N w' t = pi / 2
    UndoProtocol up(oracle::ghz(n), pauli_terms(ising_chain(n, J, 0.0), false), wp, t);
    for (double d : {-0.02, 0.0, 0.02}) {
      const double w = wp + d;
      const double rhs = up.slope_bound(w, J);
      REQUIRE(rhs > 0);
      CHECK(up.slope(w) >= rhs);
    }
    CHECK(up.slope_bound(wp, J) == doctest::Approx(n * t * (2 - J * t * (pi + 2))));
  }
  SUBCASE("vacuous bound is reported, not asserted") {
    UndoProtocol up(oracle::ghz(3), pauli_terms(ising_chain(3, 0.9, 0.0), false), 0.0, 1.0);
    CHECK(up.slope_bound(0.0, 0.9) <= 0);
    CHECK(up.slope(0.0) >= 0);
  }
}

TEST_CASE("time-reversal bounds on a grid") {
  for (int n : {2, 4, 6})
    for (double t : {0.5, 1.0, 2.0})
      for (double J : {0.0, 0.02, 0.05, 0.1, 0.2}) {
        const PriorInterval prior = prior_interval(0.37 / t, n, t);
        UndoProtocol up(oracle::ghz(n), pauli_terms(ising_chain(n, J, 0.0), false), prior.omega_prime, t);
        for (double s : {-0.9, -0.45, 0.0, 0.45, 0.9}) {
          const double w = prior.omega_prime + s * prior.half_width;
          CHECK(std::abs(up.expectation(w) - std::cos(2 * n * w * t)) <= up.deviation_bound(J) + 1e-12);
          const double rhs = up.slope_bound(w, J);
          // J = 0 saturates the bound; allow the finite-difference error
          if (rhs > 0) CHECK(up.slope(w) >= rhs * (1 - 1e-6));
        }
      }
}
