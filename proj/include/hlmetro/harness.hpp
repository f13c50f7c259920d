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

#pragma once

// Seeded Monte-Carlo campaigns of the estimation protocol, its baselines and
// the scaling fits, plus the plain-text configuration format.

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hlmetro/initial_states.hpp"
#include "hlmetro/pauli_graph.hpp"

namespace hlm {

inline constexpr const char* kVersionTag = "hlmetro-0.1.0";

// Counter-based stream: output k is a fixed mix of (key, k), so a trial's
// randomness depends only on its key and never on scheduling.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t key) : state_(key) {}
  static std::uint64_t mix(std::uint64_t z);
  result_type operator()() { return mix(state_ += 0x9e3779b97f4a7c15ULL); }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

 private:
  std::uint64_t state_;
};

// Key of trial stream (seed, n, index).
std::uint64_t stream_key(std::uint64_t seed, int n, std::uint64_t index);

struct ExperimentConfig {
  std::string model = "ising";  // ising | none | file
  std::string hamiltonian_file;
  double J = 0.1;
  std::string state = "ghz";  // ghz | rotated_ghz
  double theta = 0.0;         // rotated_ghz: branch1 from (cos theta, sin theta)
  std::string backend = "exact";  // exact | mps | cluster
  std::vector<int> sizes = {4};
  double t = 1.0;
  // omega' is the centre of the prior cell containing omega; the true
  // frequency sits at omega' + offset * half_width unless omega_true is set.
  double omega = 1.0;
  double offset = 0.2;
  std::optional<double> omega_true;
  std::optional<double> omega_prime;
  int shots = 10000;
  int campaigns = 100;
  int reference_shots = 0;  // 0: same as shots
  std::uint64_t seed = 1;
  std::string output;
  double bisection_tol = 1e-3;  // in units of the Heisenberg limit
  int cluster_order = 6;
  double c_m = 0.5;
  int d_max = 64;
  double naive_window = 0.1;  // bracket half width of the naive inversion
  bool allow_unsafe = false;  // cluster backend beyond t_star

  // Canonical key = value text; the hash is taken over this.
  std::string text() const;
  std::string hash() const;
  void validate() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::vector<int> parse_sizes(const std::string& list);

PerturbedHamiltonian build_model(const ExperimentConfig& cfg, int n, double omega);
SuperposedPair build_state(const ExperimentConfig& cfg, int n);

struct CampaignRow {
  std::string protocol;
  std::string backend;
  int n = 0;
  double t = 0.0, J = 0.0;
  double omega_true = 0.0, omega_prime = 0.0;
  double P_hat = 0.0;    // mean over campaigns
  double P_prime = 0.0;  // mean over campaigns
  double omega_est = 0.0;
  double delta_omega = 0.0;  // rms error over campaigns
  double hl = 0.0, sql = 0.0;
  double wall_time = 0.0;
  int shots = 0, campaigns = 0;
  int clamped = 0;
  std::uint64_t seed = 0;
  std::vector<double> estimates;
};

struct CampaignResult {
  std::string config_hash;
  std::vector<CampaignRow> rows;
};

// Prepare, evolve, measure adaptively M times, average the parity, obtain
// <P>' and invert the phase function; repeated `campaigns` times per size.
CampaignResult run_locc(const ExperimentConfig& cfg);
CampaignRow run_locc_size(const ExperimentConfig& cfg, int n);

// x-basis counting statistic of the GHZ state under omega Z + J X per spin.
CampaignRow run_naive_size(const ExperimentConfig& cfg, int n);
CampaignResult run_naive(const ExperimentConfig& cfg);
// Time-reversal readout of prod X.
CampaignRow run_undo_size(const ExperimentConfig& cfg, int n);
CampaignResult run_undo(const ExperimentConfig& cfg);

struct ScalingFit {
  double exponent = 0.0;
  double stderr_ = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;  // 95 percent, normal approximation
  double r2 = 0.0;
};

// log delta_omega against log N; needs three distinct sizes.
ScalingFit scaling_study(const std::vector<CampaignRow>& rows);

std::string row_json(const CampaignRow& row, const std::string& hash);
std::string fit_json(const ScalingFit& fit, const std::string& hash);
std::string csv_header();
std::string row_csv(const CampaignRow& row, const std::string& hash);

}  // namespace hlm
