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

#include <vector>

#include "hlmetro/exact_engine.hpp"
#include "hlmetro/pauli_graph.hpp"

namespace hlm {

// Single spin under omega Z + J X for time t; phi0 = U|0>, phi1 = U|1>.
struct TiltedRotationParams {
  double omega = 0.0, J = 0.0, t = 0.0;
  double eta0 = 0.0;   // |<+|phi0>|
  double f_eta = 0.0;  // 2 eta0 sqrt(1 - eta0^2)
  cplx a_plus, a_minus;  // <+|phi0>, <-|phi0>
  cplx b_plus, b_minus;  // <+|phi1>, <-|phi1>
  bool recurrence = false;  // t sqrt(omega^2 + J^2) / pi is an integer
};

TiltedRotationParams tilted_rotation(double omega, double J, double t);

// x-basis statistics of the GHZ state under omega Z + J X, binned by N+.
// Per-string probabilities depend on x only through N+ = k.
struct NaiveDistribution {
  int n = 0;
  TiltedRotationParams params;
  std::vector<double> p;      // pure state, per string with N+ = k
  std::vector<double> p_mix;  // two-branch mixture
  std::vector<double> multiplicity;  // binomial(n, k)
  double l1 = 0.0;              // sum_x |p_x - p_mix_x|
  double coherence_sum = 0.0;   // sum_x |<phi0^N|x><x|phi1^N>|
  double bound = 0.0;           // f_eta^N

  std::vector<double> count_distribution() const;  // probability of N+ = k under p
};

NaiveDistribution naive_distribution(int n, double omega, double J, double t);
double naive_l1_closed_form(const TiltedRotationParams& p, int n);

// Mean of ((2 N+ - N) / N)^2 under the mixture; the naive estimator inverts this.
double naive_statistic(int n, double omega, double J, double t);

// Full 1-norm, no factor 1/2.
double tv_distance(const std::vector<double>& p, const std::vector<double>& q);

// Time-reversal readout: measure prod X on R_{w'} psi_w,
// R_{w'} = exp(-i t w' Z) exp(i t H_{w'}).
class UndoProtocol {
 public:
  UndoProtocol(StateVector psi_in, std::vector<PauliString> V, double omega_prime, double t);

  double expectation(double omega) const;
  // Central difference with step 1e-6 pi / (4 N t).
  double slope(double omega) const;
  // N t (2 |sin(2 N w t)| - (pi + 2) J t); vacuous when not positive.
  double slope_bound(double omega, double J) const;
  double deviation_bound(double J) const;  // pi J t / 2

 private:
  StateVector evolved(double omega) const;
  std::vector<PauliString> with_field(double omega) const;
  StateVector psi_in_;
  std::vector<PauliString> V_;
  double omega_prime_, t_;
  int n_;
};

double undo_protocol_expectation(const StateVector& psi_in, const std::vector<PauliString>& V,
                                 double omega, double omega_prime, double t);
double undo_protocol_slope(const StateVector& psi_in, const std::vector<PauliString>& V, double omega,
                           double omega_prime, double t);

}  // namespace hlm
