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

#include <map>
#include <random>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "hlmetro/locc.hpp"

namespace hlm {

// Operators as vectors with (A|B) = Tr(A^dag B). Dense, small n only.
struct OperatorVector {
  Eigen::MatrixXcd op;
  int n() const;
};

cplx inner(const OperatorVector& a, const OperatorVector& b);
double norm2(const OperatorVector& o);
// sites[q] acts on qubit q.
OperatorVector product_operator(const std::vector<Eigen::Matrix2cd>& sites);
// L_h |O) = -i |[h, O]).
OperatorVector liouvillian(const PauliString& h, const OperatorVector& o);

// Terms are adjacent when their supports share a qubit.
struct DualGraph {
  std::vector<Mask> support;
  std::vector<std::vector<int>> adj;
  int frak_d = 0;  // max degree
  int k = 0;       // max support size
  int size() const { return static_cast<int>(support.size()); }
};

DualGraph term_overlap_graph(const std::vector<PauliString>& terms);
DualGraph term_overlap_graph(const TimeDependentHamiltonian& H);

// Connected multiset of terms; (term, multiplicity) pairs sorted by term.
struct Cluster {
  std::vector<std::pair<int, int>> terms;
  int size = 0;
  Mask support = 0;
  auto operator<=>(const Cluster& o) const { return terms <=> o.terms; }
  bool operator==(const Cluster& o) const { return terms == o.terms; }
};

std::vector<Cluster> enumerate_clusters(const DualGraph& g, int m);
// Only clusters with a term acting on `qubit`.
std::vector<Cluster> enumerate_clusters_at(const DualGraph& g, int m, int qubit);

struct SamplerParams {
  double c_m = 0.7071067811865476;
  int k = 1;
  int frak_d = 0;
  double j_tilde = 0.0;
  double t_star = 0.0;
  int order = 8;
  double clip = 1e-12;
  bool allow_unsafe = false;  // permit t >= t_star for diagnostics
  bool degree_substituted = false;  // frak_d = 0 replaced d(d+1) by 1
};

double t_star(double c_m, int k, int frak_d, double j_tilde);
double t_star(const SamplerParams& p);
SamplerParams make_sampler_params(const TimeDependentHamiltonian& H, double c_m, int order);
// sum_{m > order} m x^m with x = t / t_star.
double tail_bound(double t, double t_star, int order);
// Smallest order with order x^{order+1} / (1 - x) below tol.
int default_truncation_order(double t, double t_star, double tol);

// int_{0 < s_1 < ... < s_K < t} exp(sum_j c_j s_j) ds, via divided differences
// of the exponential at the partial sums (bidiagonal matrix exponential).
cplx simplex_integral(const std::vector<cplx>& c, double t);

struct ClusterSeries {
  cplx zeroth{0.0, 0.0};
  std::vector<cplx> gamma;  // gamma[m - 1] multiplies t^m
  int order = 0;
  double t = 0.0;
  double t_star = 0.0;
  double tail = 0.0;         // certified truncation error
  double bound_ratio = 0.0;  // max_m |gamma_m| t_star^m / m
  cplx value{0.0, 0.0};
};

std::string series_json(const ClusterSeries& s);

// Taylor coefficients in a uniform coupling scale lambda of
// T exp(-i lambda int_0^t H(s) ds) |alpha ... alpha>, restricted to `qubits`
// and to the listed terms (whose supports must lie inside).
struct RegionDyson {
  std::vector<int> qubits;
  std::vector<StateVector> u;  // u[a] multiplies lambda^a
  int alpha = 0;
};

inline constexpr int kRegionCap = 14;

RegionDyson region_dyson(const TimeDependentHamiltonian& H, const std::vector<int>& terms,
                         const std::vector<int>& qubits, int alpha, int order);
// Qubits reachable from `seeds` through chains of at most `order` terms.
std::vector<int> locality_region(const TimeDependentHamiltonian& H, Mask seeds, int order);
std::vector<int> terms_inside(const TimeDependentHamiltonian& H, const std::vector<int>& qubits,
                              int max_term = -1);
// sum_{a+b=K} <bra_b| F |ket_a>, F the product of per-qubit operators
// (identity where absent).
std::vector<cplx> pair_series(const RegionDyson& bra, const RegionDyson& ket,
                              const std::map<int, Eigen::Matrix2cd>& F);

// Projector |e><e| per measured qubit of a record prefix.
std::map<int, Eigen::Matrix2cd> prefix_functional(const MeasurementRecord& prefix);

struct Marginal {
  ClusterSeries series;
  double raw = 0.0;  // unclipped series value
  double p0 = 0.0;   // clipped probability of outcome 0
};

// p(0 | prefix) for the state T exp(-i int H) |alpha...alpha> with the target
// measured in `e`.
Marginal marginal_expansion(const MeasurementRecord& prefix, int target, const QubitBasis& e,
                            const TimeDependentHamiltonian& H, const SamplerParams& params,
                            int alpha = 0);
// Reuses expansion vectors computed on locality_region(target, params.order).
Marginal marginal_expansion(const MeasurementRecord& prefix, int target, const QubitBasis& e,
                            const RegionDyson& dyson, const TimeDependentHamiltonian& H,
                            const SamplerParams& params);

// Cross analogue with initial operator |1...1><0...0|. Unmeasured qubits carry
// the dual functional |0><1| in numerator and denominator.
struct TildeMarginal {
  ClusterSeries series;
  cplx value{0.0, 0.0};
};

TildeMarginal tilde_marginal_expansion(const MeasurementRecord& prefix, int target,
                                       const QubitBasis& e, const TimeDependentHamiltonian& H,
                                       const SamplerParams& params);

// Same coefficients assembled cluster by cluster: for each connected multiset
// touching the target, the multivariate coefficient of N/D is obtained by
// division over its sub-multiset lattice. Element m-1 holds gamma_m t^m.
struct ClusterAssembly {
  std::vector<cplx> coefficient;
  std::vector<std::size_t> clusters;  // per order, clusters touching the target
};

ClusterAssembly cluster_assembly(const MeasurementRecord& prefix, int target, const QubitBasis& e,
                                 const TimeDependentHamiltonian& H, int order, int alpha = 0);

// Sequential sampler over the marginals; bases come from `provider`.
class ClusterSampler {
 public:
  ClusterSampler(TimeDependentHamiltonian H, BasisProvider& provider, SamplerParams params);
  ClusterSampler(const PerturbedHamiltonian& H, double t, BasisProvider& provider,
                 SamplerParams params);

  double p0(int len, Mask prefix);
  const Marginal& marginal(int len, Mask prefix);
  // Exact distribution implied by the marginal chain (n <= 16).
  std::vector<double> distribution();

  template <typename Rng>
  Mask next(Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Mask x = 0;
    for (int len = 0; len < provider_.n(); ++len)
      if (u(rng) >= p0(len, x)) x |= Mask{1} << len;
    return x;
  }

  const TimeDependentHamiltonian& hamiltonian() const { return H_; }
  const SamplerParams& params() const { return params_; }

 private:
  MeasurementRecord record(int len, Mask prefix);
  TimeDependentHamiltonian H_;
  BasisProvider& provider_;
  SamplerParams params_;
  std::map<int, RegionDyson> dyson_;
  std::unordered_map<std::uint64_t, Marginal> cache_;
};

template <typename Rng>
Mask sample(ClusterSampler& sampler, Rng& rng) {
  return sampler.next(rng);
}

// Basis provider driven by cluster marginals, for the GHZ pair evolved under H_prime. M comes
// from conditioned branch densities, Mt from cross ratios with dual
// functionals on unmeasured qubits and the return amplitudes of both branches.
class ClusterProvider : public BasisProvider {
 public:
  ClusterProvider(const PerturbedHamiltonian& H_prime, double t, SamplerParams params,
                  std::vector<int> order);
  QubitBasis next_basis(int len, Mask outcomes) override;
  std::string tag() const override { return "cluster"; }
  MatrixPair matrix_pair(int len, Mask outcomes);
  // <phi^0|0...0><1...1|phi^1> from telescoped return amplitudes.
  cplx dual_overlap() const { return g0_; }
  // Nodes whose cross region exceeded kRegionCap; their Mt was set to zero.
  int dropped_cross() const { return dropped_; }

 private:
  struct Node {
    double w0 = 1.0, w1 = 1.0;
    cplx g{0.0, 0.0};  // <phi0| P_prefix (x) |0><1| rest |phi1>
    QubitBasis basis;
    bool has_basis = false;
    MatrixPair pair;
    bool has_pair = false;
  };
  Node& node(int len, Mask outcomes);
  const RegionDyson& dyson(const std::vector<int>& qubits, int max_term, int alpha);
  cplx return_amplitude(int alpha);
  TimeDependentHamiltonian H_;
  SamplerParams params_;
  int n_;
  int dropped_ = 0;
  cplx g0_;
  std::map<std::tuple<std::vector<int>, int, int>, RegionDyson> dyson_;
  std::unordered_map<std::uint64_t, Node> cache_;
};

// max over Pauli pairs of |<O_i O_j> - <O_i><O_j>| in the state conditioned on
// the prefix projectors. i, j are original qubit labels.
double conditional_correlation(const StateVector& psi, int n, const std::vector<Projector>& prefix,
                               int i, int j);
double conditional_correlation(const PerturbedHamiltonian& H, double t,
                               const std::vector<Projector>& prefix, int i, int j);

}  // namespace hlm
