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

#include "hlmetro/initial_states.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "hlmetro/errors.hpp"

namespace hlm {

namespace {

double total_z_expectation(const StateVector& psi) {
  const int n = qubit_count(psi);
  double z = 0.0;
  for (Eigen::Index b = 0; b < psi.size(); ++b)
    z += std::norm(psi[b]) * (n - 2.0 * std::popcount(static_cast<Mask>(b)));
  return z;
}

const Eigen::Matrix2cd& pauli_matrix(int a) {
  static const Eigen::Matrix2cd m[3] = {
      (Eigen::Matrix2cd() << 0, 1, 1, 0).finished(),
      (Eigen::Matrix2cd() << 0, cplx(0, -1), cplx(0, 1), 0).finished(),
      (Eigen::Matrix2cd() << 1, 0, 0, -1).finished()};
  return m[a];
}

}  // namespace

double polarization_gap(const StateVector& branch0, const StateVector& branch1) {
  const int n = qubit_count(branch0);
  return (total_z_expectation(branch0) - total_z_expectation(branch1)) / (2.0 * n);
}

double zz_fluctuation(const StateVector& psi) {
  const int n = qubit_count(psi);
  double z = 0.0, zz = 0.0;
  for (Eigen::Index b = 0; b < psi.size(); ++b) {
    const double m = n - 2.0 * std::popcount(static_cast<Mask>(b));
    z += std::norm(psi[b]) * m;
    zz += std::norm(psi[b]) * m * m;
  }
  return (zz - z * z) / (static_cast<double>(n) * n);
}

SuperposedPair make_pair(StateVector branch0, StateVector branch1, double xi) {
  if (branch0.size() != branch1.size()) throw StructuralError("branches differ in dimension");
  SuperposedPair p;
  p.n = qubit_count(branch0);
  if (std::abs(branch0.norm() - 1) > 1e-8 || std::abs(branch1.norm() - 1) > 1e-8)
    throw ValidationError("branches must be normalized");
  if (std::abs(branch0.dot(branch1)) > 1e-8) throw ValidationError("branches must be orthogonal");
  p.branch0 = std::move(branch0);
  p.branch1 = std::move(branch1);
  p.c_in = polarization_gap(p.branch0, p.branch1);
  p.xi = xi;
  return p;
}

SuperposedPair make_ghz(int n) {
  if (n < 1 || n > kDenseCap) throw ResourceError("GHZ size outside 1.." + std::to_string(kDenseCap));
  const Mask ones = (Mask{1} << n) - 1;
  return make_pair(basis_state(n, 0), basis_state(n, ones));
}

SuperposedPair make_rotated_ghz(int n, cplx alpha, cplx beta) {
  if (n < 1 || n > kDenseCap) throw ResourceError("state size outside 1.." + std::to_string(kDenseCap));
  if (std::abs(std::norm(alpha) + std::norm(beta) - 1) > 1e-12)
    throw ValidationError("|alpha|^2 + |beta|^2 must equal 1");
  if (std::abs(beta) == 0.0) throw ValidationError("beta must be nonzero");
  StateVector b0 = basis_state(n, 0);
  StateVector raw = product_state(std::vector<Eigen::Vector2cd>(n, Eigen::Vector2cd(alpha, beta)));
  const cplx ov = b0.dot(raw);
  if (std::abs(ov) > 1 - 1e-12)
    throw DegenerateBranchError("rotated branch is numerically parallel to |0...0>");
  StateVector b1 = raw - ov * b0;
  b1.normalize();
  b1[0] = 0.0;
  return make_pair(std::move(b0), std::move(b1));
}

MixedState make_mixed_ghz(int n) {
  const Mask ones = (Mask{1} << n) - 1;
  return MixedState{{{0.5, basis_state(n, 0)}, {0.5, basis_state(n, ones)}}};
}

Eigen::Matrix4cd two_site_density(const StateVector& psi, int i, int j) {
  Eigen::Matrix4cd r = Eigen::Matrix4cd::Zero();
  const Eigen::Index bi = Eigen::Index{1} << i, bj = Eigen::Index{1} << j;
  for (Eigen::Index b = 0; b < psi.size(); ++b) {
    if (b & (bi | bj)) continue;
    const Eigen::Index idx[4] = {b, b | bi, b | bj, b | bi | bj};
    for (int k = 0; k < 4; ++k)
      for (int l = 0; l < 4; ++l) r(k, l) += psi[idx[k]] * std::conj(psi[idx[l]]);
  }
  return r;
}

Eigen::Matrix2cd one_site_density(const StateVector& psi, int i) {
  return reduced_cross(psi, psi, i);
}

CorrelationFit verify_correlation_decay(const StateVector& psi, const InteractionGraph& graph) {
  const int n = qubit_count(psi);
  if (n != graph.n) throw StructuralError("state and graph sizes differ");
  if (n > kDenseCap) throw ResourceError("correlation scan exceeds the dense cap");
  CorrelationFit fit;
  int dmax = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) dmax = std::max(dmax, graph.distance(i, j));
  fit.max_corr.assign(dmax + 1, 0.0);
  std::vector<Eigen::Vector3d> single(n);
  for (int i = 0; i < n; ++i) {
    Eigen::Matrix2cd r = one_site_density(psi, i);
    for (int a = 0; a < 3; ++a) single[i][a] = (r * pauli_matrix(a)).trace().real();
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const int d = graph.distance(i, j);
      if (d < 0) continue;
      Eigen::Matrix4cd r = two_site_density(psi, i, j);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          // qubit i is the low bit of the 4x4 index
          Eigen::Matrix4cd op;
          for (int k = 0; k < 4; ++k)
            for (int l = 0; l < 4; ++l)
              op(k, l) = pauli_matrix(a)(k & 1, l & 1) * pauli_matrix(b)(k >> 1, l >> 1);
          const double c = std::abs((r * op).trace().real() - single[i][a] * single[j][b]);
          fit.max_corr[d] = std::max(fit.max_corr[d], c);
        }
    }
  std::vector<double> xs, ys;
  bool any = false;
  for (int d = 1; d <= dmax; ++d) {
    if (fit.max_corr[d] > 1e-10) any = true;
    if (fit.max_corr[d] > 1e-12) {
      xs.push_back(d);
      ys.push_back(std::log(fit.max_corr[d]));
    }
  }
  if (!any) {
    fit.note = "product-like: all connected correlations below 1e-10";
    return fit;
  }
  if (xs.size() < 2) {
    fit.c_xi = std::exp(ys.front());
    fit.note = "single distance above the floor, xi not fitted";
    return fit;
  }
  LineFit lf = fit_line(xs, ys);
  fit.r2 = lf.r2;
  fit.c_xi = std::exp(lf.intercept);
  fit.xi = lf.slope < 0 ? -1.0 / lf.slope : std::numeric_limits<double>::infinity();
  const int K = graph.max_degree;
  if (K > 2 && fit.xi >= 1.0 / std::log(K - 1.0)) {
    fit.warning = true;
    fit.note = "correlation length exceeds 1/log(K-1)";
  }
  return fit;
}

}  // namespace hlm
