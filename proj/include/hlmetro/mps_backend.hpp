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

#include <array>
#include <iosfwd>
#include <random>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "hlmetro/exact_engine.hpp"
#include "hlmetro/locc.hpp"
#include "hlmetro/pauli_graph.hpp"

namespace hlm {

// Site tensor A[s] is a Dl x Dr matrix; qubit q lives on site q.
using SiteTensor = std::array<Eigen::MatrixXcd, 2>;

struct MatrixProductState {
  std::vector<SiteTensor> sites;
  int center = -1;  // -1 when no gauge is known
  double truncation_error = 0.0;

  int n() const { return static_cast<int>(sites.size()); }
  std::vector<int> bond_dims() const;  // n - 1 internal bonds
  int max_bond() const;
};

MatrixProductState mps_from_bits(const std::vector<int>& bits);
MatrixProductState mps_from_product(const std::vector<Eigen::Vector2cd>& sites);
// Successive SVD; exact up to the relative cutoff.
MatrixProductState mps_from_dense(const StateVector& psi, int d_max = 1 << 10, double cutoff = 1e-14);
StateVector to_dense(const MatrixProductState& m);
// a * |A> + b * |B> with block-diagonal bonds.
MatrixProductState mps_sum(const MatrixProductState& A, const MatrixProductState& B, cplx a, cplx b);
MatrixProductState random_mps(int n, int d, std::mt19937_64& rng);

void canonicalize(MatrixProductState& m, int center);
double mps_norm(const MatrixProductState& m);
void normalize(MatrixProductState& m);

// Rescale bond k by an invertible X: A_k <- A_k X, A_{k+1} <- X^{-1} A_{k+1}.
void gauge_transform(MatrixProductState& m, int bond, const Eigen::MatrixXcd& X);

// Per-site single-qubit operators; empty entries are identity.
using StringOperator = std::vector<Eigen::Matrix2cd>;
StringOperator string_from_pauli(const PauliString& p, int n);
cplx contract_string_expectation(const MatrixProductState& bra, const MatrixProductState& ket,
                                 const StringOperator& op = {});
cplx overlap(const MatrixProductState& bra, const MatrixProductState& ket);
// Tr_rest |ket><bra| on one site.
Eigen::Matrix2cd reduced_cross(const MatrixProductState& ket, const MatrixProductState& bra, int site);

struct TruncationPolicy {
  int d_max = 64;
  double cutoff = 1e-10;  // relative singular value
  double budget = 1e-6;   // cumulative discarded weight
};

// Contracts <e| on a site, absorbs into a neighbour and renormalizes.
// Returns the squared norm before renormalization.
double project_qubit(MatrixProductState& m, int site, const Eigen::Vector2cd& e);

struct BondGate {
  int bond;  // acts on sites bond, bond + 1
  Eigen::Matrix4cd U;  // index s_bond + 2 s_{bond+1}
};
using GateLayer = std::vector<BondGate>;

void apply_gate(MatrixProductState& m, const BondGate& g, const TruncationPolicy& pol);
void apply_site_gate(MatrixProductState& m, int site, const Eigen::Matrix2cd& U);
void apply_layer(MatrixProductState& m, const GateLayer& layer, const TruncationPolicy& pol);

struct ChainSplit {
  std::vector<Eigen::Matrix4cd> bonds;  // n - 1 bond Hamiltonians
  std::vector<Eigen::Matrix2cd> single;  // used only when n == 1
};
ChainSplit split_chain(const PerturbedHamiltonian& H);

struct TrotterOptions {
  int steps = 0;  // 0 picks a default from the bond norms
  int order = 4;  // 2 or 4
  double tolerance = 1e-12;  // target state error for the default step count
  TruncationPolicy trunc;
};
int default_trotter_steps(const PerturbedHamiltonian& H, double t, int order, double tolerance = 1e-12);
MatrixProductState evolve_mps(MatrixProductState m, const PerturbedHamiltonian& H, double t,
                              const TrotterOptions& opt = {});

MatrixProductState mps_ghz(int n);

// Basis rule evaluated on MPS branches with cached projected copies per prefix.
class MpsProvider : public BasisProvider {
 public:
  MpsProvider(MatrixProductState phi0, MatrixProductState phi1, std::vector<int> order);
  QubitBasis next_basis(int len, Mask outcomes) override;
  std::string tag() const override { return "mps"; }
  MatrixPair matrix_pair(int len, Mask outcomes);

 private:
  struct Node {
    MatrixProductState c0, c1;
    double w0 = 1.0, w1 = 1.0;  // squared norms relative to the root
    QubitBasis basis;
    bool has_basis = false;
  };
  Node& node(int len, Mask outcomes);
  int packed_position(int len) const;
  std::unordered_map<std::uint64_t, Node> cache_;
};

OutcomeTree build_outcome_tree(const MatrixProductState& psi, BasisProvider& provider);

// One sequential Born step on a normalized state; returns the outcome and
// leaves the projected, renormalized remainder in state.
int mps_sample_step(MatrixProductState& state, int pos, const QubitBasis& b, double u);

template <typename Rng>
MeasurementRecord sample_mps(MatrixProductState state, BasisProvider& provider, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  normalize(state);
  MeasurementRecord rec;
  rec.order = provider.order();
  std::vector<int> remaining(provider.n());
  for (int q = 0; q < provider.n(); ++q) remaining[q] = q;
  Mask x = 0;
  for (int len = 0; len < provider.n(); ++len) {
    const QubitBasis b = provider.next_basis(len, x);
    const auto it = std::find(remaining.begin(), remaining.end(), rec.order[len]);
    const int out = mps_sample_step(state, static_cast<int>(it - remaining.begin()), b, u(rng));
    remaining.erase(it);
    rec.outcomes.push_back(out);
    rec.bases.push_back(b);
    x |= static_cast<Mask>(out) << len;
  }
  return rec;
}

// Sectioned binary dump with shape headers and an FNV-1a checksum.
void write_checkpoint(std::ostream& os, const MatrixProductState& m);
MatrixProductState read_checkpoint(std::istream& is);

}  // namespace hlm
