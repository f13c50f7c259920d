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

#include <string>
#include <utility>
#include <vector>

#include "hlmetro/exact_engine.hpp"
#include "hlmetro/numerics.hpp"

namespace hlm {

struct SuperposedPair {
  StateVector branch0;
  StateVector branch1;
  double c_in = 0.0;
  double xi = 0.0;
  int n = 0;

  StateVector combined() const { return (branch0 + branch1) / std::sqrt(2.0); }
};

// Validates orthonormality and recomputes c_in = (<Z>_0 - <Z>_1) / (2N).
SuperposedPair make_pair(StateVector branch0, StateVector branch1, double xi = 0.0);
SuperposedPair make_ghz(int n);
// branch1 is (alpha|0> + beta|1>)^{⊗N} orthogonalized against |0...0>.
SuperposedPair make_rotated_ghz(int n, cplx alpha, cplx beta);

struct MixedState {
  std::vector<std::pair<double, StateVector>> branches;
};

MixedState make_mixed_ghz(int n);

double polarization_gap(const StateVector& branch0, const StateVector& branch1);
// (<ZZ> - <Z>^2) / N^2 on a pure state, with Z the total magnetization.
double zz_fluctuation(const StateVector& psi);

struct CorrelationFit {
  std::vector<double> max_corr;  // index d holds the maximum at graph distance d
  double c_xi = 0.0;
  double xi = 0.0;
  double r2 = 1.0;
  bool warning = false;
  std::string note;
};

// Max connected single-site Pauli-pair correlation per graph distance and a
// log-linear fit c_xi exp(-d / xi).
CorrelationFit verify_correlation_decay(const StateVector& psi, const InteractionGraph& graph);

// 4x4 reduced density of qubits (i, j), basis index bit 0 = qubit i.
Eigen::Matrix4cd two_site_density(const StateVector& psi, int i, int j);
Eigen::Matrix2cd one_site_density(const StateVector& psi, int i);

}  // namespace hlm
