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

#include "hlmetro/baselines.hpp"

#include <cmath>
#include <numbers>

#include "hlmetro/errors.hpp"

namespace hlm {

using std::numbers::pi;

TiltedRotationParams tilted_rotation(double omega, double J, double t) {
  TiltedRotationParams r;
  r.omega = omega;
  r.J = J;
  r.t = t;
  const double w = std::hypot(omega, J);
  Eigen::Matrix2cd U = Eigen::Matrix2cd::Identity();
  if (w > 0) {
    // exp(-i t w n.sigma) = cos(wt) - i sin(wt) n.sigma
    const double c = std::cos(w * t), s = std::sin(w * t);
    U << cplx(c, -s * omega / w), cplx(0, -s * J / w), cplx(0, -s * J / w), cplx(c, s * omega / w);
  }
  const double h = 1.0 / std::sqrt(2.0);
  r.a_plus = h * (U(0, 0) + U(1, 0));
  r.a_minus = h * (U(0, 0) - U(1, 0));
  r.b_plus = h * (U(0, 1) + U(1, 1));
  r.b_minus = h * (U(0, 1) - U(1, 1));
  r.eta0 = std::abs(r.a_plus);
  r.f_eta = 2 * r.eta0 * std::sqrt(std::max(0.0, 1 - r.eta0 * r.eta0));
  const double cyc = t * w / pi;
  r.recurrence = w > 0 && std::abs(cyc - std::round(cyc)) < 1e-12;
  return r;
}

NaiveDistribution naive_distribution(int n, double omega, double J, double t) {
  if (n < 1 || n > 1000) throw DomainError("naive distribution needs 1 <= N <= 1000");
  NaiveDistribution d;
  d.n = n;
  d.params = tilted_rotation(omega, J, t);
  const auto& q = d.params;
  double lc = 0.0;  // log binomial
  for (int k = 0; k <= n; ++k) {
    if (k > 0) lc += std::log(static_cast<double>(n - k + 1) / k);
    const cplx A = std::pow(q.a_plus, k) * std::pow(q.a_minus, n - k);
    const cplx B = std::pow(q.b_plus, k) * std::pow(q.b_minus, n - k);
    const double mix = 0.5 * (std::norm(A) + std::norm(B));
    const cplx coh = std::conj(A) * B;
    d.p.push_back(mix + coh.real());
    d.p_mix.push_back(mix);
    d.multiplicity.push_back(std::exp(lc));
    d.l1 += d.multiplicity.back() * std::abs(coh.real());
    d.coherence_sum += d.multiplicity.back() * std::abs(coh);
  }
  d.bound = std::pow(q.f_eta, n);
  return d;
}

std::vector<double> NaiveDistribution::count_distribution() const {
  std::vector<double> c(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) c[k] = multiplicity[k] * p[k];
  return c;
}

double naive_l1_closed_form(const TiltedRotationParams& p, int n) {
  return std::pow(p.f_eta, n) * std::abs(std::cos(n * std::arg(p.a_plus * p.a_minus)));
}

double naive_statistic(int n, double omega, double J, double t) {
  const auto d = naive_distribution(n, omega, J, t);
  double s = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double m = (2.0 * k - n) / n;
    s += d.multiplicity[k] * d.p_mix[k] * m * m;
  }
  return s;
}

double tv_distance(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw StructuralError("distributions have different supports");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return s;
}

UndoProtocol::UndoProtocol(StateVector psi_in, std::vector<PauliString> V, double omega_prime, double t)
    : psi_in_(std::move(psi_in)), V_(std::move(V)), omega_prime_(omega_prime), t_(t), n_(qubit_count(psi_in_)) {
  if (n_ > kDenseCap) throw ResourceError("time-reversal readout is dense; N too large");
}

std::vector<PauliString> UndoProtocol::with_field(double omega) const {
  std::vector<PauliString> h = V_;
  for (int q = 0; q < n_; ++q) h.push_back(single_pauli('Z', q, omega));
  return h;
}

StateVector UndoProtocol::evolved(double omega) const {
  StateVector v = evolve_action(psi_in_, with_field(omega), t_);
  v = evolve_action(v, with_field(omega_prime_), -t_);
  // exp(-i t w' Z) is diagonal
  const auto zd = total_z_diagonal(n_);
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] *= std::exp(cplx(0, -t_ * omega_prime_ * zd[i]));
  return v;
}

double UndoProtocol::expectation(double omega) const {
  const StateVector v = evolved(omega);
  const Eigen::Index all = v.size() - 1;
  cplx s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += std::conj(v[i ^ all]) * v[i];
  return s.real();
}

double UndoProtocol::slope(double omega) const {
  const double h = 1e-6 * pi / (4.0 * n_ * t_);
  return std::abs(expectation(omega + h) - expectation(omega - h)) / (2 * h);
}

double UndoProtocol::slope_bound(double omega, double J) const {
  return n_ * t_ * (2 * std::abs(std::sin(2 * n_ * omega * t_)) - (pi + 2) * J * t_);
}

double UndoProtocol::deviation_bound(double J) const { return pi * J * t_ / 2; }

double undo_protocol_expectation(const StateVector& psi_in, const std::vector<PauliString>& V,
                                 double omega, double omega_prime, double t) {
  return UndoProtocol(psi_in, V, omega_prime, t).expectation(omega);
}

double undo_protocol_slope(const StateVector& psi_in, const std::vector<PauliString>& V, double omega,
                           double omega_prime, double t) {
  return UndoProtocol(psi_in, V, omega_prime, t).slope(omega);
}

}  // namespace hlm
