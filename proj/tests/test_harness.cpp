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
#include <cmath>
#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

#include "hlmetro/errors.hpp"
#include "hlmetro/harness.hpp"
#include "hlmetro/metrology.hpp"

using namespace hlm;

TEST_CASE("splitmix64 reference outputs") {
  // reference generator seeded with 0
  SplitMix64 g(0);
  CHECK(g() == 0xe220a8397b1dcdafULL);
  CHECK(g() == 0x6e789e6aa1b965f4ULL);
  CHECK(g() == 0x06c45d188009454fULL);
  CHECK(stream_key(1, 4, 0) != stream_key(1, 4, 1));
  CHECK(stream_key(1, 4, 0) != stream_key(1, 5, 0));
  CHECK(stream_key(1, 4, 0) == stream_key(1, 4, 0));
}

TEST_CASE("config text round trip and errors") {
  const std::string text = R"(# campaign
model = ising
J = 0.1
backend = "exact"
N = [4, 6, 8]
t = 1
omega = 1.3
M = 500
campaigns = 7
seed = 42
)";
  const ExperimentConfig c = parse_config(text);
  CHECK(c.sizes == std::vector<int>{4, 6, 8});
  CHECK(c.shots == 500);
  CHECK(c.seed == 42);
  CHECK(c.omega == 1.3);
  const ExperimentConfig again = parse_config(c.text());
  CHECK(again.hash() == c.hash());
  CHECK(again.text() == c.text());
  ExperimentConfig other = c;
  other.seed = 43;
  CHECK(other.hash() != c.hash());
  CHECK_THROWS_AS(parse_config("colour = blue\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("J = abc\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("M = 2.5\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("backend = gpu\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("backend = cluster\nstate = rotated_ghz\n"), ValidationError);
  CHECK_THROWS_AS(load_config("/nonexistent/c.toml"), ValidationError);
  CHECK(parse_sizes("2, 4,8") == std::vector<int>{2, 4, 8});
}

TEST_CASE("omega_true must sit inside the prior interval") {
  ExperimentConfig c;
  c.sizes = {4};
  c.omega_prime = 1.0;
  c.omega_true = 1.0 + 2 * prior_interval_at(1.0, 4, 1.0).half_width;
  CHECK_THROWS_AS(run_locc(c), ValidationError);
}

TEST_CASE("ideal protocol lands within a few Heisenberg limits") {
  ExperimentConfig c;
  c.model = "none";
  c.sizes = {4};
  c.campaigns = 20;
  c.seed = 9;
  const CampaignRow row = run_locc_size(c, 4);
  const double hl = 1 / std::sqrt(4.0 * 1e4 * 16);
  CHECK(row.hl == doctest::Approx(hl));
  for (double w : row.estimates) CHECK(std::abs(w - row.omega_true) <= 3 * hl * 1.5);
  CHECK(std::abs(row.omega_est - row.omega_true) <= 3 * hl);
  CHECK(row.clamped == 0);
}

TEST_CASE("single-shot campaigns run") {
  ExperimentConfig c;
  c.sizes = {3};
  c.shots = 1;
  c.campaigns = 4;
  const auto res = run_locc(c);
  REQUIRE(res.rows.size() == 1);
  CHECK(std::isfinite(res.rows[0].delta_omega));
  CHECK(std::abs(res.rows[0].P_hat) <= 1.0);
}

TEST_CASE("campaigns are reproducible across runs and thread counts") {
  ExperimentConfig c;
  c.sizes = {4};
  c.campaigns = 9;
  c.shots = 300;
  c.seed = 5;
  setenv("HLM_THREADS", "1", 1);
  const auto a = run_locc(c);
  setenv("HLM_THREADS", "3", 1);
  const auto b = run_locc(c);
  unsetenv("HLM_THREADS");
  CHECK(a.rows[0].estimates == b.rows[0].estimates);
  CHECK(a.rows[0].P_hat == b.rows[0].P_hat);
  c.seed = 6;
  CHECK(run_locc(c).rows[0].estimates != a.rows[0].estimates);
}

TEST_CASE("scaling fit") {
  std::vector<CampaignRow> rows;
  for (int n : {2, 4, 8, 16}) {
    CampaignRow r;
    r.n = n;
    r.delta_omega = 0.3 / std::pow(n, 0.75);
    rows.push_back(r);
  }
  const ScalingFit f = scaling_study(rows);
  CHECK(f.exponent == doctest::Approx(-0.75).epsilon(1e-12));
  CHECK(f.r2 == doctest::Approx(1.0));
  CHECK(f.ci_lo <= f.exponent);
  rows.resize(2);
  CHECK_THROWS_AS(scaling_study(rows), ValidationError);
}

TEST_CASE("ideal scaling exponent") {
  ExperimentConfig c;
  c.model = "none";
  c.sizes = {2, 4, 8};
  c.campaigns = 150;
  c.seed = 21;
  const auto fit = scaling_study(run_locc(c).rows);
  CHECK(fit.exponent == doctest::Approx(-1.0).epsilon(0.15));
}

TEST_CASE("backend compatibility") {
  ExperimentConfig c;
  c.sizes = {4};
  c.campaigns = 2;
  c.shots = 50;
  c.backend = "cluster";
  CHECK_THROWS_AS(run_locc(c), DomainError);
  // a ring is not a nearest-neighbour chain
  const auto ring = make_hamiltonian(ring_graph(4), {make_local_term({pauli("X0 X1", 0.1)}),
                                                     make_local_term({pauli("X3 X0", 0.1)})},
                                     1.0);
  const std::string path = "harness_ring_test.json";
  std::ofstream(path) << dump_hamiltonian(ring);
  c.backend = "mps";
  c.model = "file";
  c.hamiltonian_file = path;
  CHECK_THROWS_AS(run_locc(c), ValidationError);
  c.backend = "exact";
  CHECK_NOTHROW(run_locc(c));
  c.sizes = {5};
  CHECK_THROWS_AS(run_locc(c), ValidationError);
  std::remove(path.c_str());
}

TEST_CASE("approximate backends agree with the exact one") {
  ExperimentConfig c;
  c.sizes = {4};
  c.campaigns = 3;
  c.shots = 2000;
  c.J = 0.1;
  const auto exact = run_locc(c).rows[0];
  c.backend = "mps";
  const auto mps = run_locc(c).rows[0];
  CHECK(mps.P_hat == exact.P_hat);  // same device statistics, same streams
  c.backend = "cluster";
  c.allow_unsafe = true;
  const auto cl = run_locc(c).rows[0];
  CHECK(cl.P_hat == exact.P_hat);
  CHECK(std::abs(cl.P_prime - exact.P_prime) < 0.1);
}

TEST_CASE("baseline campaigns") {
  ExperimentConfig c;
  c.J = 0.5;
  c.omega = 0.5;
  c.campaigns = 40;
  const auto naive = run_naive_size(c, 6);
  CHECK(naive.protocol == "naive");
  CHECK(std::abs(naive.omega_est - 0.5) < 5 * naive.delta_omega / std::sqrt(40.0) + 1e-12);
  c.J = 0.05;
  c.omega = 1.0;
  const auto undo = run_undo_size(c, 4);
  CHECK(undo.protocol == "undo");
  CHECK(undo.delta_omega < 2 * undo.hl);
}

TEST_CASE("records carry the hash and version") {
  ExperimentConfig c;
  c.sizes = {3};
  c.campaigns = 2;
  c.shots = 10;
  const auto res = run_locc(c);
  const auto j = nlohmann::json::parse(row_json(res.rows[0], res.config_hash));
  CHECK(j.at("config_hash") == c.hash());
  CHECK(j.at("version") == kVersionTag);
  CHECK(j.at("N") == 3);
  const std::string row = row_csv(res.rows[0], res.config_hash);
  const std::string header = csv_header();
  CHECK(std::count(row.begin(), row.end(), ',') == std::count(header.begin(), header.end(), ','));
}
