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

#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace hlm {

using cplx = std::complex<double>;
using Mask = std::uint64_t;

inline constexpr int kDenseCap = 14;
inline constexpr int kMaxQubits = 64;

// Qubits are 0-based internally; a state index stores qubit q in bit q.
struct InteractionGraph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<std::vector<int>> adj;
  int max_degree = 0;
  std::vector<int> dist;  // row-major n*n, -1 when disconnected

  int distance(int i, int j) const { return dist[static_cast<std::size_t>(i) * n + j]; }
};

InteractionGraph chain_graph(int n);
InteractionGraph ring_graph(int n);
InteractionGraph grid_graph(int w, int h);
InteractionGraph graph_from_edges(int n, const std::vector<std::pair<int, int>>& edges);
// kind is one of "chain", "ring", "grid"; grid uses (w, h), the others use w.
InteractionGraph build_graph(const std::string& kind, int w, int h = 1);

// coeff * i^{|x&z|} X^x Z^z, so a site with both bits set carries Y.
struct PauliString {
  Mask x = 0;
  Mask z = 0;
  cplx coeff{1.0, 0.0};

  Mask support() const { return x | z; }
  int weight() const;
  char axis(int q) const;
  bool same_ops(const PauliString& o) const { return x == o.x && z == o.z; }
};

PauliString pauli(const std::string& ops, cplx coeff = 1.0);  // e.g. "X0 Y2"
PauliString single_pauli(char axis, int q, cplx coeff = 1.0);
PauliString operator*(const PauliString& a, const PauliString& b);
bool commutes(const PauliString& a, const PauliString& b);
std::string to_string(const PauliString& p);

// Merge equal operator strings and drop coefficients below tol.
std::vector<PauliString> simplify(std::vector<PauliString> terms, double tol = 1e-15);

struct LocalTerm {
  std::vector<PauliString> paulis;
  Mask support = 0;
  double norm = 0.0;
};

LocalTerm make_local_term(std::vector<PauliString> paulis);

struct PerturbedHamiltonian {
  InteractionGraph graph;
  std::vector<LocalTerm> terms;
  double omega = 0.0;
  double local_strength = 0.0;
  int n() const { return graph.n; }
};

double local_strength(const std::vector<LocalTerm>& terms, int n);

// Validates supports against the graph, the interaction range (0 disables the
// check) and hermiticity.
PerturbedHamiltonian make_hamiltonian(InteractionGraph graph, std::vector<LocalTerm> terms,
                                      double omega, int range = 3);

// Nearest-neighbour XX chain with local strength J (coupling J/2 for n >= 3).
PerturbedHamiltonian ising_chain(int n, double J, double omega);
// Same with an explicit coupling per bond.
PerturbedHamiltonian ising_chain_coupling(int n, double g, double omega);
PerturbedHamiltonian field_only(int n, double omega);

std::vector<PauliString> pauli_terms(const PerturbedHamiltonian& H, bool with_field = true);

Eigen::MatrixXcd dense_matrix(const std::vector<PauliString>& terms, int n,
                              int cap = kDenseCap);
Eigen::MatrixXcd assemble_dense(const PerturbedHamiltonian& H, int cap = kDenseCap);

// out += P psi
void apply_pauli(const PauliString& p, const Eigen::VectorXcd& psi, Eigen::VectorXcd& out);
Eigen::VectorXcd apply_pauli_sum(const std::vector<PauliString>& terms,
                                 const Eigen::VectorXcd& psi);
// Eigenvalues of sum_q Z_q, indexed by basis state.
Eigen::VectorXd total_z_diagonal(int n);

// Term with real coefficient function J(s) = sum_k a_k exp(i k Omega s).
struct TDTerm {
  PauliString op;  // coeff fixed to 1
  std::map<int, cplx> fourier;
  double amplitude() const;  // sum |a_k|, a bound on |J(s)|
  double value(double s, double base) const;
};

struct TimeDependentHamiltonian {
  int n = 0;
  double base = 0.0;  // Omega = 2 omega
  double t = 0.0;
  std::vector<TDTerm> terms;
  std::vector<int> frequencies;  // distinct k over all terms
  double j_tilde = 0.0;

  Eigen::MatrixXcd dense_at(double s) const;
  std::vector<PauliString> at(double s) const;
};

// V(s) = exp(-i omega s Z) V exp(i omega s Z), frequencies in units of 2 omega.
TimeDependentHamiltonian rotate_interaction(const std::vector<PauliString>& V, int n,
                                            double omega);
// H(s) = V(t - s).
TimeDependentHamiltonian interaction_picture(const std::vector<PauliString>& V, int n,
                                             double omega, double t);
TimeDependentHamiltonian interaction_picture(const PerturbedHamiltonian& H, double t);

// Structured text (JSON) with fields graph, terms, omega. Vertices are 1-based.
PerturbedHamiltonian parse_hamiltonian(const std::string& text);
std::string dump_hamiltonian(const PerturbedHamiltonian& H);

}  // namespace hlm
