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
#include "hlmetro/initial_states.hpp"
#include "hlmetro/numerics.hpp"

namespace hlm {

// omega' = pi/(2Nt) (floor(2N omega t / pi) + 1/2), half width pi/(4Nt).
struct PriorInterval {
  double omega_prime = 0.0;
  double half_width = 0.0;
  int n = 0;
  double t = 0.0;

  double lo() const { return omega_prime - half_width; }
  double hi() const { return omega_prime + half_width; }
  bool contains(double w, double slack = 1e-12) const {
    return w >= lo() - slack && w <= hi() + slack;
  }
};

PriorInterval prior_interval(double omega, int n, double t);
PriorInterval prior_interval_at(double omega_prime, int n, double t);

struct PrecisionLimits {
  double sql = 0.0;
  double hl = 0.0;
};
PrecisionLimits precision_limits(int n, double M, double t);

// (1/t) int_0^t e^{isH} O e^{-isH} ds in closed form.
Eigen::MatrixXcd time_averaged_operator(const Spectrum& sp, const Eigen::MatrixXcd& O, double t);
// Zbar psi for the total magnetization, by composite Gauss-Legendre in s
// with panel doubling.
StateVector time_averaged_z_action(const Spectrum& sp, const StateVector& psi, double t,
                                   double rel_tol = 1e-10);

// 4 t^2 (|Zbar psi|^2 - |<psi|Zbar psi>|^2)
double qfi(const StateVector& psi_in, const Spectrum& sp, double t);
double qfi(const StateVector& psi_in, const PerturbedHamiltonian& H, double t);

double qfi_lower_bound_coherence(double c_in, double J, double t, int n);
double qfi_lower_bound_fluctuation(double c_prime, double J, double t, int n);

struct QfiReport {
  double value = 0.0;
  double lower_bound_coherence = 0.0;  // NaN outside t < c_in / J
  double lower_bound_fluctuation = 0.0;
  int n = 0;
  double t = 0.0;
  double J = 0.0;
};
QfiReport qfi_report(const SuperposedPair& pair, const PerturbedHamiltonian& H, double t);

struct SlopeInterval {
  double lo = 0.0;
  double hi = 0.0;
};
// [2t(c_in - Jt)N, 2tN]
SlopeInterval phase_slope_interval(double c_in, double J, double t, int n);

// g(omega) = int_0^t (<Z(s)>_0 - <Z(s)>_1) ds under V + omega Z; equals f'(omega).
double z_gap_integral(const SuperposedPair& pair, const std::vector<PauliString>& V,
                      double omega, double t, double tol = 1e-12);

// f(omega~) = int_{omega'}^{omega~} g, nested Gauss-Legendre.
double phase_function_eval(double omega_tilde, const SuperposedPair& pair,
                           const std::vector<PauliString>& V, double t,
                           const PriorInterval& prior, double tol = 1e-10);

// Chebyshev tabulation of g on the prior interval with an exact antiderivative.
class PhaseFunction {
 public:
  PhaseFunction(const SuperposedPair& pair, std::vector<PauliString> V, double t,
                PriorInterval prior, double tol = 1e-10);

  double operator()(double w) const;
  double slope(double w) const { return g_(w); }
  double direct(double w) const;
  const PriorInterval& prior() const { return prior_; }
  int nodes() const { return static_cast<int>(g_.c.size()); }
  // min over a grid of the tabulated slope; positive means monotone
  double min_slope(int grid = 64) const;

 private:
  SuperposedPair pair_;
  std::vector<PauliString> V_;
  double t_;
  PriorInterval prior_;
  double tol_;
  Chebyshev<double> g_;
  Chebyshev<double> f_;
};

struct WeakBound {
  double c_omega_lower = 0.0;
  SlopeInterval slope;
};
WeakBound weak_perturbation_slope_bound(double c_in, double J, double omega, double t, int n);

double prethermal_time(double J, double omega, double c_pre = 1.0);

}  // namespace hlm
