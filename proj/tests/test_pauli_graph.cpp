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

#include <algorithm>
#include <random>

#include "hlmetro/errors.hpp"
#include "hlmetro/pauli_graph.hpp"
#include "oracle.hpp"

using namespace hlm;

TEST_CASE("graph builders") {
  auto c = chain_graph(4);
  CHECK(c.edges.size() == 3);
  CHECK(c.distance(0, 3) == 3);
  CHECK(c.max_degree == 2);
  auto g = grid_graph(2, 2);
  CHECK(g.n == 4);
  CHECK(g.edges.size() == 4);
  CHECK(g.max_degree == 2);
  auto r = ring_graph(3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(r.distance(i, j) <= 1);
  CHECK_THROWS_AS(graph_from_edges(3, {{0, 3}}), StructuralError);
  CHECK_THROWS_AS(graph_from_edges(3, {{1, 1}}), StructuralError);
  CHECK_THROWS_AS(graph_from_edges(3, {{0, 1}, {1, 0}}), StructuralError);
  CHECK_THROWS_AS(build_graph("star", 3), ValidationError);
}

TEST_CASE("graph distance is a metric") {
  auto g = grid_graph(3, 4);
  for (int i = 0; i < g.n; ++i) {
    CHECK(g.distance(i, i) == 0);
    for (int j = 0; j < g.n; ++j) {
      CHECK(g.distance(i, j) == g.distance(j, i));
      for (int k = 0; k < g.n; ++k) CHECK(g.distance(i, k) <= g.distance(i, j) + g.distance(j, k));
    }
  }
}

TEST_CASE("pauli products match dense matrices") {
  const std::string axes = "IXYZ";
  std::mt19937 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::string la(3, 'I'), lb(3, 'I');
    std::string sa, sb;
    for (int q = 0; q < 3; ++q) {
      la[q] = axes[rng() % 4];
      lb[q] = axes[rng() % 4];
      if (la[q] != 'I') sa += std::string(1, la[q]) + std::to_string(q) + " ";
      if (lb[q] != 'I') sb += std::string(1, lb[q]) + std::to_string(q) + " ";
    }
    PauliString a = pauli(sa), b = pauli(sb);
    PauliString ab = a * b;
    auto want = (oracle::label_op(la) * oracle::label_op(lb)).eval();
    auto got = dense_matrix({ab}, 3);
    CHECK((want - got).norm() < 1e-12);
    cplx ph = ab.coeff;
    bool unit_phase = std::abs(std::abs(ph) - 1) < 1e-14 &&
                      (std::abs(ph.real()) < 1e-14 || std::abs(ph.imag()) < 1e-14);
    CHECK(unit_phase);
    auto comm = (oracle::label_op(la) * oracle::label_op(lb) - oracle::label_op(lb) * oracle::label_op(la)).norm();
    CHECK(commutes(a, b) == (comm < 1e-12));
  }
}

TEST_CASE("local strength") {
  CHECK(local_strength({}, 3) == 0.0);
  const double g = 0.3;
  std::vector<LocalTerm> v{make_local_term({pauli("X0 X1", g)}), make_local_term({pauli("X1 X2", g)})};
  CHECK(local_strength(v, 3) == doctest::Approx(2 * g));
  auto H = ising_chain_coupling(12, g, 1.0);
  CHECK(H.local_strength == doctest::Approx(2 * g));
  CHECK(ising_chain(8, 0.2, 1.0).local_strength == doctest::Approx(0.2));
  // permutation invariance
  std::reverse(v.begin(), v.end());
  CHECK(local_strength(v, 3) == doctest::Approx(2 * g));
  // splitting a term on the same support never decreases J
  LocalTerm whole = make_local_term({pauli("X0 X1", 0.5), pauli("Z0 Z1", 0.5)});
  std::vector<LocalTerm> split{make_local_term({pauli("X0 X1", 0.5)}), make_local_term({pauli("Z0 Z1", 0.5)})};
  CHECK(whole.norm == doctest::Approx(1.0));
  CHECK(local_strength(split, 2) >= local_strength({whole}, 2) - 1e-12);
}

TEST_CASE("term norm from dense block") {
  LocalTerm t = make_local_term({pauli("X0 X1", 1.0), pauli("Y0 Y1", 1.0), pauli("Z0", 0.5)});
  auto m = (oracle::label_op("XX") + oracle::label_op("YY") + 0.5 * oracle::label_op("ZI")).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  CHECK(t.norm == doctest::Approx(es.eigenvalues().cwiseAbs().maxCoeff()).epsilon(1e-12));
}

TEST_CASE("dense assembly") {
  auto h1 = assemble_dense(field_only(1, 0.5));
  CHECK(std::abs(h1(0, 0) - 0.5) < 1e-15);
  CHECK(std::abs(h1(1, 1) + 0.5) < 1e-15);
  auto h2 = assemble_dense(field_only(2, 1.0));
  Eigen::Vector4d want(2, 0, 0, -2);
  CHECK((h2.diagonal().real() - want).norm() < 1e-15);
  const double g = 0.7;
  auto hx = assemble_dense(ising_chain_coupling(2, g, 0.0));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hx);
  CHECK(es.eigenvalues()(0) == doctest::Approx(-g));
  CHECK(es.eigenvalues()(3) == doctest::Approx(g));
  CHECK((hx - g * oracle::label_op("XX")).norm() < 1e-14);
  auto H = ising_chain_coupling(5, 0.3, 1.1);
  auto d = assemble_dense(H);
  CHECK((d - d.adjoint()).norm() <= 1e-12 * d.norm());
  CHECK((d - oracle::ising_dense(5, 0.3, 1.1)).norm() < 1e-12);
  // linearity in the field
  auto d0 = assemble_dense(ising_chain_coupling(5, 0.3, 0.0));
  CHECK((d - d0 - 1.1 * oracle::total_z(5)).norm() < 1e-12);
  CHECK_THROWS_AS(dense_matrix({}, 15), ResourceError);
  CHECK_NOTHROW(dense_matrix({}, 3, 3));
}

TEST_CASE("hamiltonian validation") {
  auto g = chain_graph(4);
  CHECK_THROWS_AS(make_hamiltonian(g, {make_local_term({pauli("X0 X5")})}, 1.0), StructuralError);
  CHECK_THROWS_AS(make_hamiltonian(g, {make_local_term({pauli("X0 X3")})}, 1.0, 2), StructuralError);
  CHECK_NOTHROW(make_hamiltonian(g, {make_local_term({pauli("X0 X3")})}, 1.0, 3));
  CHECK_THROWS_AS(make_hamiltonian(g, {make_local_term({pauli("X0", cplx(0, 1))})}, 1.0), ValidationError);
  CHECK_THROWS_AS(pauli("Q1"), ValidationError);
  CHECK_THROWS_AS(pauli("X1 Z1"), ValidationError);
}

TEST_CASE("interaction picture frequencies") {
  auto z = rotate_interaction({pauli("Z0")}, 1, 0.8);
  CHECK(z.frequencies == std::vector<int>{0});
  auto x = rotate_interaction({pauli("X0")}, 1, 0.8);
  CHECK(x.frequencies == std::vector<int>{-1, 1});
  CHECK(x.base == doctest::Approx(1.6));
  auto xx = rotate_interaction({pauli("X0 X1")}, 2, 0.8);
  CHECK(xx.frequencies == std::vector<int>{-2, 0, 2});
  auto still = rotate_interaction({pauli("X0 X1")}, 2, 0.0);
  CHECK(still.frequencies == std::vector<int>{0});
}

TEST_CASE("single-qubit rotation identity") {
  const double w = 0.9;
  auto x = rotate_interaction({pauli("X0")}, 1, w);
  for (double s : {0.0, 0.3, 1.7}) {
    Eigen::Matrix2cd want = std::cos(2 * w * s) * oracle::pauli2('X') + std::sin(2 * w * s) * oracle::pauli2('Y');
    Eigen::Matrix2cd u = oracle::expm_herm(oracle::pauli2('Z'), w * s);
    CHECK((x.dense_at(s) - want).norm() < 1e-14);
    CHECK((u * oracle::pauli2('X') * u.adjoint() - want).norm() < 1e-14);
  }
}

TEST_CASE("interaction picture matches conjugation") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> U(0, 1);
  for (int n = 1; n <= 4; ++n) {
    std::vector<PauliString> V;
    const std::string axes = "XYZ";
    for (int q = 0; q < n; ++q) {
      V.push_back(single_pauli(axes[rng() % 3], q, U(rng) - 0.5));
      if (q + 1 < n) V.push_back(single_pauli(axes[rng() % 3], q, U(rng)) * single_pauli(axes[rng() % 3], q + 1));
    }
    const double w = 0.3 + U(rng), t = 1.3;
    auto Hs = interaction_picture(V, n, w, t);
    auto Vd = dense_matrix(V, n);
    auto Z = oracle::total_z(n);
    for (int k = 0; k < 20; ++k) {
      double s = t * U(rng);
      auto u = oracle::expm_herm(Z, w * (t - s));
      CHECK((Hs.dense_at(s) - u * Vd * u.adjoint()).norm() <= 1e-10);
      for (const auto& term : Hs.terms) CHECK(std::abs(term.value(s, Hs.base)) <= Hs.j_tilde + 1e-12);
    }
  }
}

TEST_CASE("hamiltonian file round trip") {
  const std::string text = R"({"graph": {"kind": "chain", "n": 3},
    "terms": [{"paulis": "X1 X2", "coefficient": 0.1}, {"paulis": "X2 X3", "coefficient": 0.1}],
    "omega": 1.5})";
  auto H = parse_hamiltonian(text);
  CHECK(H.n() == 3);
  CHECK(H.local_strength == doctest::Approx(0.2));
  auto again = parse_hamiltonian(dump_hamiltonian(H));
  CHECK((assemble_dense(again) - assemble_dense(H)).norm() < 1e-15);
  CHECK(dump_hamiltonian(again) == dump_hamiltonian(H));
  CHECK_THROWS_AS(parse_hamiltonian(R"({"graph": {"kind": "chain", "n": 3}, "terms": [], "omega": 1, "x": 2})"), ValidationError);
  CHECK_THROWS_AS(parse_hamiltonian(R"({"graph": {"kind": "chain", "n": 3}, "terms": [{"paulis": "X4", "coefficient": 1}], "omega": 1})"), StructuralError);
  CHECK_THROWS_AS(parse_hamiltonian("{oops"), ValidationError);
}
