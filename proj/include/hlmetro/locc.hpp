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

#include <algorithm>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "hlmetro/exact_engine.hpp"
#include "hlmetro/metrology.hpp"

namespace hlm {

struct QubitBasis {
  Eigen::Vector2cd e0;
  Eigen::Vector2cd e1;
  const Eigen::Vector2cd& operator[](int k) const { return k == 0 ? e0 : e1; }
};

QubitBasis computational_basis();
QubitBasis x_basis();
// e0 is the +1 eigenstate of n.sigma; phases fixed so the first nonzero
// component of each vector is real and nonnegative.
QubitBasis basis_from_axis(const Eigen::Vector3d& n);
Eigen::Vector3d bloch_axis(const QubitBasis& b);  // axis of e0
// Coefficients of a traceless Hermitian 2x2 in the Pauli basis.
Eigen::Vector3d bloch_vector(const Eigen::Matrix2cd& A);
Eigen::Matrix2cd strip_trace(const Eigen::Matrix2cd& A);

inline constexpr double kBlochFloor = 1e-12;
// Components smaller than this fraction of the dominant Bloch vector are
// treated as zero, so approximate backends make the same discrete choices.
inline constexpr double kBlochRelative = 1e-6;

// Basis on which both A and B have zero diagonal. The labelling puts
// sign(Im <e0|Mt|e0>) = sign_selector when that imaginary part is nonzero.
// Throws DegenerateBasisError when both Bloch vectors vanish.
QubitBasis zero_diagonalize(const Eigen::Matrix2cd& A, const Eigen::Matrix2cd& B,
                            int sign_selector, const Eigen::Matrix2cd& Mt_ref);

// M = rho0 - rho1 and Mt = Tr_rest |phi1><phi0|, both divided by the branch weight.
struct MatrixPair {
  Eigen::Matrix2cd M;
  Eigen::Matrix2cd Mt;
  double weight = 0.0;
};

QubitBasis basis_from_pair(const MatrixPair& mp, int sign_selector, bool* fell_back = nullptr);

struct MeasurementRecord {
  std::vector<int> order;
  std::vector<int> outcomes;
  std::vector<QubitBasis> bases;
  int parity() const;
  std::vector<Projector> projectors() const;
};

// Measurement step k acts on qubit order[k]; prefixes pack outcome k in bit k.
class BasisProvider {
 public:
  explicit BasisProvider(std::vector<int> order);
  virtual ~BasisProvider() = default;
  int n() const { return static_cast<int>(order_.size()); }
  const std::vector<int>& order() const { return order_; }
  virtual QubitBasis next_basis(int len, Mask outcomes) = 0;
  virtual std::string tag() const = 0;
  // Bases along the path of a full or partial outcome string.
  std::vector<QubitBasis> path_bases(int len, Mask outcomes);
  int fallbacks() const { return fallbacks_; }

 protected:
  int fallbacks_ = 0;

 private:
  std::vector<int> order_;
};

std::vector<int> default_order(int n);

class FixedProvider : public BasisProvider {
 public:
  FixedProvider(std::vector<QubitBasis> per_step, std::vector<int> order);
  static FixedProvider uniform(const QubitBasis& b, int n);
  QubitBasis next_basis(int len, Mask outcomes) override;
  std::string tag() const override { return "fixed"; }

 private:
  std::vector<QubitBasis> bases_;
};

// Basis rule evaluated on dense branch states |phi^0>, |phi^1>.
class ExactProvider : public BasisProvider {
 public:
  ExactProvider(StateVector phi0, StateVector phi1, std::vector<int> order);
  QubitBasis next_basis(int len, Mask outcomes) override;
  std::string tag() const override { return "exact"; }
  MatrixPair matrix_pair(int len, Mask outcomes);

 private:
  struct Node {
    StateVector c0, c1;
    QubitBasis basis;
    bool has_basis = false;
  };
  Node& node(int len, Mask outcomes);
  int packed_position(int len) const;
  std::unordered_map<std::uint64_t, Node> cache_;
};

// Branch states U(t)|0...0> and U(t)|1...1> style pair evolved at omega'.
std::pair<StateVector, StateVector> evolved_pair(const SuperposedPair& pair,
                                                 const PerturbedHamiltonian& H_prime, double t);

// Conditional outcome probabilities of the adaptive measurement on psi.
struct OutcomeTree {
  int n = 0;
  std::vector<int> order;
  std::vector<QubitBasis> basis;  // heap index (1 << len) - 1 + prefix
  std::vector<double> p0;
  std::vector<double> weight;  // prefix probability
  static std::size_t index(int len, Mask prefix) { return (std::size_t{1} << len) - 1 + prefix; }
};

OutcomeTree build_outcome_tree(const StateVector& psi, BasisProvider& provider);
// Exact distribution over outcome strings (step k in bit k).
std::vector<double> outcome_distribution(const OutcomeTree& tree);
double parity_expectation(const OutcomeTree& tree);

template <typename Rng>
Mask sample_outcomes(const OutcomeTree& tree, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Mask x = 0;
  for (int len = 0; len < tree.n; ++len) {
    const double p = tree.p0[OutcomeTree::index(len, x)];
    if (u(rng) >= p) x |= Mask{1} << len;
  }
  return x;
}

MeasurementRecord make_record(const OutcomeTree& tree, Mask outcomes);

// Sequential Born sampling on a dense state with bases from the provider.
template <typename Rng>
MeasurementRecord adaptive_measure(const StateVector& psi, BasisProvider& provider, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MeasurementRecord rec;
  rec.order = provider.order();
  const int n = provider.n();
  StateVector chi = psi;
  std::vector<int> remaining(n);
  for (int q = 0; q < n; ++q) remaining[q] = q;
  Mask x = 0;
  for (int len = 0; len < n; ++len) {
    const QubitBasis b = provider.next_basis(len, x);
    const int q = rec.order[len];
    const int pos = static_cast<int>(std::find(remaining.begin(), remaining.end(), q) - remaining.begin());
    StateVector c0 = contract_one(chi, pos, b.e0);
    const double w0 = c0.squaredNorm(), w = chi.squaredNorm();
    const int out = u(rng) * w < w0 ? 0 : 1;
    chi = out == 0 ? std::move(c0) : contract_one(chi, pos, b.e1);
    remaining.erase(remaining.begin() + pos);
    rec.outcomes.push_back(out);
    rec.bases.push_back(b);
    x |= static_cast<Mask>(out) << len;
  }
  return rec;
}

// max_x |<E_x|phi1> - (-1)^{|x|} i <E_x|phi0>| over all 2^N strings.
double verify_basis_condition(BasisProvider& provider, const StateVector& phi0,
                              const StateVector& phi1);

// Sum over all strings of |E_x><E_x|; identity for a complete measurement.
Eigen::MatrixXcd povm_sum(BasisProvider& provider);

struct OmegaEstimate {
  double omega = 0.0;
  int calls = 0;
  bool clamped = false;
  double target = 0.0;  // f value matched
};

// Bisection for -sin f(omega) = P_hat - P_prime on the prior interval.
OmegaEstimate estimate_omega(double P_hat, double P_prime, const std::function<double(double)>& f,
                             const PriorInterval& prior, double tol, double stat_tol = 0.0);

}  // namespace hlm
