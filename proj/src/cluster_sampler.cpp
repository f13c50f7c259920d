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

#include "hlmetro/cluster_sampler.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <set>

#include <nlohmann/json.hpp>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "hlmetro/errors.hpp"
#include "hlmetro/numerics.hpp"
#include "hlmetro/parallel.hpp"

namespace hlm {

namespace {

const cplx kI{0.0, 1.0};

Mask qubit_mask(const std::vector<int>& qubits) {
  Mask m = 0;
  for (int q : qubits) m |= Mask{1} << q;
  return m;
}

// Bits of `m` at positions qubits[i] moved to position i.
Mask compress(Mask m, const std::vector<int>& qubits) {
  Mask r = 0;
  for (std::size_t i = 0; i < qubits.size(); ++i)
    if ((m >> qubits[i]) & 1U) r |= Mask{1} << i;
  return r;
}

PauliString remap(const PauliString& p, const std::vector<int>& qubits, cplx coeff) {
  PauliString r;
  r.x = compress(p.x, qubits);
  r.z = compress(p.z, qubits);
  r.coeff = coeff;
  return r;
}

void apply_site(StateVector& v, int pos, const Eigen::Matrix2cd& m) {
  const Eigen::Index bit = Eigen::Index{1} << pos;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i & bit) continue;
    const cplx a = v[i], b = v[i | bit];
    v[i] = m(0, 0) * a + m(0, 1) * b;
    v[i | bit] = m(1, 0) * a + m(1, 1) * b;
  }
}

StateVector apply_functional(const StateVector& v, const std::vector<int>& qubits,
                             const std::map<int, Eigen::Matrix2cd>& F) {
  StateVector r = v;
  for (const auto& [q, m] : F) {
    const auto it = std::find(qubits.begin(), qubits.end(), q);
    if (it == qubits.end()) continue;
    apply_site(r, static_cast<int>(it - qubits.begin()), m);
  }
  return r;
}

Eigen::Matrix2cd outer(const Eigen::Vector2cd& a, const Eigen::Vector2cd& b) {
  return a * b.adjoint();
}

// |0><1| pairs a bra-side |0> with a ket-side |1>.
Eigen::Matrix2cd dual_functional() {
  Eigen::Matrix2cd q = Eigen::Matrix2cd::Zero();
  q(0, 1) = 1.0;
  return q;
}

cplx evaluate(const std::vector<cplx>& r) {
  cplx s = 0.0;
  for (const cplx& c : r) s += c;
  return s;
}

ClusterSeries make_series(const std::vector<cplx>& r, double t, const SamplerParams& params) {
  ClusterSeries s;
  s.order = static_cast<int>(r.size()) - 1;
  s.t = t;
  s.t_star = params.t_star;
  s.zeroth = r[0];
  s.value = evaluate(r);
  s.tail = tail_bound(t, params.t_star, s.order);
  s.gamma.assign(s.order, cplx(0.0, 0.0));
  for (int m = 1; m <= s.order; ++m) {
    if (t > 0) s.gamma[m - 1] = r[m] / std::pow(t, m);
    // |gamma_m| t_star^m / m, computed without forming t^-m.
    const double scale = m * std::pow(t / params.t_star, m);
    if (scale > 0) s.bound_ratio = std::max(s.bound_ratio, std::abs(r[m]) / scale);
  }
  if (s.bound_ratio > 1.0 + 1e-6)
    throw NumericalError("cluster coefficient exceeds m t_star^-m (ratio " +
                         std::to_string(s.bound_ratio) + ")");
  return s;
}

void check_floor(const Eigen::Vector2cd& e, int alpha, double c_m) {
  if (std::abs(e[alpha]) < c_m * (1 - 1e-9))
    throw DomainError("measurement basis violates the overlap floor c_m");
}

void check_inputs(const MeasurementRecord& prefix, int target, const QubitBasis& e,
                  const TimeDependentHamiltonian& H, const SamplerParams& params, int alpha) {
  if (target < 0 || target >= H.n) throw StructuralError("target qubit out of range");
  for (std::size_t k = 0; k < prefix.outcomes.size(); ++k) {
    if (prefix.order[k] == target) throw StructuralError("target already measured");
    check_floor(prefix.bases[k][prefix.outcomes[k]], alpha, params.c_m);
  }
  check_floor(e.e0, alpha, params.c_m);
  check_floor(e.e1, alpha, params.c_m);
  if (!(params.t_star > 0)) throw DomainError("sampler parameters lack t_star");
  if (H.t >= params.t_star && !params.allow_unsafe)
    throw DomainError("t >= t_star: the expansion is not guaranteed to converge");
}

}  // namespace

int OperatorVector::n() const { return std::countr_zero(static_cast<unsigned long>(op.rows())); }

cplx inner(const OperatorVector& a, const OperatorVector& b) {
  return (a.op.adjoint() * b.op).trace();
}

double norm2(const OperatorVector& o) { return o.op.norm(); }

OperatorVector product_operator(const std::vector<Eigen::Matrix2cd>& sites) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(1, 1);
  for (int q = static_cast<int>(sites.size()) - 1; q >= 0; --q) {
    Eigen::MatrixXcd next = Eigen::kroneckerProduct(m, sites[q]).eval();
    m = std::move(next);
  }
  return {m};
}

OperatorVector liouvillian(const PauliString& h, const OperatorVector& o) {
  const Eigen::MatrixXcd H = dense_matrix({h}, o.n());
  return {-kI * (H * o.op - o.op * H)};
}

DualGraph term_overlap_graph(const std::vector<PauliString>& terms) {
  DualGraph g;
  for (const auto& p : terms) g.support.push_back(p.support());
  const int n = g.size();
  g.adj.assign(n, {});
  for (int a = 0; a < n; ++a) {
    g.k = std::max(g.k, std::popcount(g.support[a]));
    for (int b = 0; b < n; ++b)
      if (a != b && (g.support[a] & g.support[b])) g.adj[a].push_back(b);
    g.frak_d = std::max(g.frak_d, static_cast<int>(g.adj[a].size()));
  }
  return g;
}

DualGraph term_overlap_graph(const TimeDependentHamiltonian& H) {
  std::vector<PauliString> ops;
  for (const auto& t : H.terms) ops.push_back(t.op);
  return term_overlap_graph(ops);
}

namespace {

// Wernicke's ESU: every connected vertex set of size <= max_size exactly once.
void connected_sets(const DualGraph& g, const std::vector<char>& allowed, int max_size,
                    const std::function<void(const std::vector<int>&)>& emit) {
  const int n = g.size();
  std::vector<int> current;
  std::vector<char> in_set(n, 0), near(n, 0);
  std::function<void(std::vector<int>, int)> extend = [&](std::vector<int> ext, int root) {
    emit(current);
    if (static_cast<int>(current.size()) == max_size) return;
    while (!ext.empty()) {
      const int w = ext.back();
      ext.pop_back();
      std::vector<int> next = ext;
      std::vector<int> marked;
      for (int u : g.adj[w]) {
        if (u <= root || !allowed[u] || in_set[u] || near[u]) continue;
        if (std::find(next.begin(), next.end(), u) != next.end()) continue;
        next.push_back(u);
      }
      // exclusive neighbourhood bookkeeping: mark w's neighbours as near
      current.push_back(w);
      in_set[w] = 1;
      for (int u : g.adj[w])
        if (!near[u]) {
          near[u] = 1;
          marked.push_back(u);
        }
      extend(next, root);
      for (int u : marked) near[u] = 0;
      in_set[w] = 0;
      current.pop_back();
    }
  };
  for (int v = 0; v < n; ++v) {
    if (!allowed[v]) continue;
    current = {v};
    in_set[v] = 1;
    std::vector<int> marked;
    for (int u : g.adj[v])
      if (!near[u]) {
        near[u] = 1;
        marked.push_back(u);
      }
    std::vector<int> ext;
    for (int u : g.adj[v])
      if (u > v && allowed[u]) ext.push_back(u);
    extend(ext, v);
    for (int u : marked) near[u] = 0;
    in_set[v] = 0;
  }
}

void compositions(int total, int parts, std::vector<int>& cur,
                  const std::function<void(const std::vector<int>&)>& emit) {
  if (parts == 1) {
    cur.push_back(total);
    emit(cur);
    cur.pop_back();
    return;
  }
  for (int first = 1; first <= total - parts + 1; ++first) {
    cur.push_back(first);
    compositions(total - first, parts - 1, cur, emit);
    cur.pop_back();
  }
}

std::vector<Cluster> clusters_from(const DualGraph& g, int m, const std::vector<char>& allowed,
                                   Mask must_touch) {
  if (m < 1) throw DomainError("cluster size must be positive");
  std::vector<Cluster> out;
  connected_sets(g, allowed, m, [&](const std::vector<int>& set) {
    Mask supp = 0;
    for (int a : set) supp |= g.support[a];
    if (must_touch && !(supp & must_touch)) return;
    std::vector<int> sorted = set;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> cur;
    compositions(m, static_cast<int>(sorted.size()), cur, [&](const std::vector<int>& mult) {
      Cluster c;
      for (std::size_t i = 0; i < sorted.size(); ++i) c.terms.emplace_back(sorted[i], mult[i]);
      c.size = m;
      c.support = supp;
      out.push_back(std::move(c));
    });
  });
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<Cluster> enumerate_clusters(const DualGraph& g, int m) {
  return clusters_from(g, m, std::vector<char>(g.size(), 1), 0);
}

std::vector<Cluster> enumerate_clusters_at(const DualGraph& g, int m, int qubit) {
  const Mask q = Mask{1} << qubit;
  // terms more than m-1 hops from an anchor cannot join a size-m cluster
  std::vector<int> dist(g.size(), -1);
  std::vector<int> queue;
  for (int a = 0; a < g.size(); ++a)
    if (g.support[a] & q) {
      dist[a] = 0;
      queue.push_back(a);
    }
  for (std::size_t h = 0; h < queue.size(); ++h)
    for (int b : g.adj[queue[h]])
      if (dist[b] < 0) {
        dist[b] = dist[queue[h]] + 1;
        queue.push_back(b);
      }
  std::vector<char> allowed(g.size(), 0);
  for (int a = 0; a < g.size(); ++a) allowed[a] = dist[a] >= 0 && dist[a] <= m - 1;
  return clusters_from(g, m, allowed, q);
}

double t_star(double c_m, int k, int frak_d, double j_tilde) {
  if (!(c_m > 0) || c_m > 1 / std::numbers::sqrt2 + 1e-12)
    throw DomainError("c_m must lie in (0, 1/sqrt 2]");
  if (k < 1) throw DomainError("locality k must be at least 1");
  if (frak_d < 0) throw DomainError("overlap degree must be nonnegative");
  if (!(j_tilde > 0)) throw DomainError("J tilde must be positive");
  const double dd = frak_d == 0 ? 1.0 : static_cast<double>(frak_d) * (frak_d + 1);
  const double e2 = std::exp(2.0);
  return 1.0 / (4.0 * e2 * std::pow(c_m, -2.0 * k) * dd * j_tilde);
}

double t_star(const SamplerParams& p) { return t_star(p.c_m, p.k, p.frak_d, p.j_tilde); }

SamplerParams make_sampler_params(const TimeDependentHamiltonian& H, double c_m, int order) {
  const DualGraph g = term_overlap_graph(H);
  SamplerParams p;
  p.c_m = c_m;
  p.k = std::max(1, g.k);
  p.frak_d = g.frak_d;
  p.degree_substituted = g.frak_d == 0;
  p.j_tilde = H.j_tilde;
  p.order = order;
  p.t_star = t_star(p);
  return p;
}

double tail_bound(double t, double t_star, int order) {
  const double x = t / t_star;
  if (x >= 1) return std::numeric_limits<double>::infinity();
  const double M = order;
  return std::pow(x, M + 1) * ((M + 1) - M * x) / ((1 - x) * (1 - x));
}

int default_truncation_order(double t, double t_star, double tol) {
  const double x = t / t_star;
  if (x >= 1) throw DomainError("t >= t_star: no truncation order certifies the tail");
  for (int M = 1; M <= 200; ++M)
    if (M * std::pow(x, M + 1) / (1 - x) < tol) return M;
  throw DomainError("tolerance unreachable within 200 orders");
}

cplx simplex_integral(const std::vector<cplx>& c, double t) {
  const int K = static_cast<int>(c.size());
  if (K == 0) return 1.0;
  // y' = B y on [0, 1] with B lower bidiagonal, diag -sigma_j t, subdiagonal 1.
  Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(K + 1, K + 1);
  cplx sigma = 0.0;
  for (int j = 1; j <= K; ++j) {
    sigma += c[j - 1] * t;
    B(j, j) = -sigma;
    B(j, j - 1) = 1.0;
  }
  const Eigen::MatrixXcd E = B.exp();
  return std::pow(t, K) * std::exp(sigma) * E(K, 0);
}

std::string series_json(const ClusterSeries& s) {
  nlohmann::json j;
  j["order"] = s.order;
  j["t"] = s.t;
  j["t_star"] = s.t_star;
  j["tail_bound"] = s.tail;
  j["bound_ratio"] = s.bound_ratio;
  j["zeroth"] = {s.zeroth.real(), s.zeroth.imag()};
  j["value"] = {s.value.real(), s.value.imag()};
  nlohmann::json g = nlohmann::json::array();
  for (const cplx& c : s.gamma) g.push_back({c.real(), c.imag()});
  j["gamma"] = g;
  return j.dump();
}

std::vector<int> locality_region(const TimeDependentHamiltonian& H, Mask seeds, int order) {
  Mask cur = seeds;
  for (int h = 0; h < order; ++h) {
    Mask next = cur;
    for (const auto& term : H.terms)
      if (term.op.support() & cur) next |= term.op.support();
    if (next == cur) break;
    cur = next;
  }
  std::vector<int> q;
  for (int i = 0; i < H.n; ++i)
    if ((cur >> i) & 1U) q.push_back(i);
  return q;
}

std::vector<int> terms_inside(const TimeDependentHamiltonian& H, const std::vector<int>& qubits,
                              int max_term) {
  const Mask m = qubit_mask(qubits);
  std::vector<int> ids;
  const int last = max_term < 0 ? static_cast<int>(H.terms.size()) - 1 : max_term;
  for (int a = 0; a <= last && a < static_cast<int>(H.terms.size()); ++a)
    if ((H.terms[a].op.support() & ~m) == 0) ids.push_back(a);
  return ids;
}

RegionDyson region_dyson(const TimeDependentHamiltonian& H, const std::vector<int>& terms,
                         const std::vector<int>& qubits, int alpha, int order) {
  const int R = static_cast<int>(qubits.size());
  if (R > kRegionCap)
    throw ResourceError("expansion region of " + std::to_string(R) + " qubits exceeds the cap");
  const Mask m = qubit_mask(qubits);
  // Fourier component operators H_k = sum_a a_{a,k} P_a on the region
  std::map<int, std::vector<PauliString>> comp;
  for (int id : terms) {
    const auto& term = H.terms.at(id);
    if (term.op.support() & ~m) throw StructuralError("term leaves the expansion region");
    for (const auto& [k, a] : term.fourier) comp[k].push_back(remap(term.op, qubits, a));
  }
  RegionDyson d;
  d.qubits = qubits;
  d.alpha = alpha;
  const Eigen::Index dim = Eigen::Index{1} << R;
  d.u.assign(order + 1, StateVector::Zero(dim));
  d.u[0][alpha ? dim - 1 : 0] = 1.0;
  if (order == 0 || comp.empty()) return d;
  std::vector<std::pair<int, const std::vector<PauliString>*>> freqs;
  for (const auto& [k, ops] : comp) freqs.emplace_back(k, &ops);
  std::vector<cplx> seq;
  std::vector<StateVector> stack(order + 1, StateVector::Zero(dim));
  stack[0] = d.u[0];
  cplx phase = 1.0;
  // depth-first over frequency sequences k_1 ... k_j, earliest factor first
  std::function<void(int)> descend = [&](int depth) {
    for (const auto& [k, ops] : freqs) {
      StateVector& w = stack[depth + 1];
      w.setZero();
      for (const auto& p : *ops) apply_pauli(p, stack[depth], w);
      if (w.squaredNorm() == 0.0) continue;
      seq.push_back(kI * (k * H.base));
      const cplx saved = phase;
      phase *= -kI;
      d.u[depth + 1] += (phase * simplex_integral(seq, H.t)) * w;
      if (depth + 1 < order) descend(depth + 1);
      phase = saved;
      seq.pop_back();
    }
  };
  descend(0);
  return d;
}

std::vector<cplx> pair_series(const RegionDyson& bra, const RegionDyson& ket,
                              const std::map<int, Eigen::Matrix2cd>& F) {
  if (bra.qubits != ket.qubits || bra.u.size() != ket.u.size())
    throw StructuralError("expansions live on different regions");
  const std::size_t len = ket.u.size();
  std::vector<StateVector> fk;
  fk.reserve(len);
  for (const auto& v : ket.u) fk.push_back(apply_functional(v, ket.qubits, F));
  std::vector<cplx> s(len, cplx(0.0, 0.0));
  for (std::size_t K = 0; K < len; ++K)
    for (std::size_t a = 0; a <= K; ++a) s[K] += bra.u[K - a].dot(fk[a]);
  return s;
}

std::map<int, Eigen::Matrix2cd> prefix_functional(const MeasurementRecord& prefix) {
  std::map<int, Eigen::Matrix2cd> F;
  for (std::size_t k = 0; k < prefix.outcomes.size(); ++k) {
    const Eigen::Vector2cd& e = prefix.bases[k][prefix.outcomes[k]];
    F[prefix.order[k]] = outer(e, e);
  }
  return F;
}

Marginal marginal_expansion(const MeasurementRecord& prefix, int target, const QubitBasis& e,
                            const RegionDyson& dyson, const TimeDependentHamiltonian& H,
                            const SamplerParams& params) {
  check_inputs(prefix, target, e, H, params, dyson.alpha);
  auto F = prefix_functional(prefix);
  const auto D = pair_series(dyson, dyson, F);
  if (std::abs(D[0]) < 1e-300) throw DegenerateBranchError("prefix has zero weight at t = 0");
  F[target] = outer(e.e0, e.e0);
  const auto N = pair_series(dyson, dyson, F);
  const auto r = series_div(N, D, N.size());
  Marginal out;
  out.series = make_series(r, H.t, params);
  out.raw = out.series.value.real();
  out.p0 = std::clamp(out.raw, params.clip, 1.0 - params.clip);
  return out;
}

Marginal marginal_expansion(const MeasurementRecord& prefix, int target, const QubitBasis& e,
                            const TimeDependentHamiltonian& H, const SamplerParams& params,
                            int alpha) {
  check_inputs(prefix, target, e, H, params, alpha);
  const auto region = locality_region(H, Mask{1} << target, params.order);
  const auto d = region_dyson(H, terms_inside(H, region), region, alpha, params.order);
  return marginal_expansion(prefix, target, e, d, H, params);
}

TildeMarginal tilde_marginal_expansion(const MeasurementRecord& prefix, int target,
                                       const QubitBasis& e, const TimeDependentHamiltonian& H,
                                       const SamplerParams& params) {
  check_inputs(prefix, target, e, H, params, 0);
  check_inputs(prefix, target, e, H, params, 1);
  const auto region = locality_region(H, Mask{1} << target, params.order);
  const auto terms = terms_inside(H, region);
  const auto d0 = region_dyson(H, terms, region, 0, params.order);
  const auto d1 = region_dyson(H, terms, region, 1, params.order);
  auto F = prefix_functional(prefix);
  for (int q : region)
    if (!F.count(q)) F[q] = dual_functional();
  const auto D = pair_series(d0, d1, F);
  if (std::abs(D[0]) < 1e-300) throw DegenerateBranchError("dual prefix weight vanishes");
  F[target] = outer(e.e0, e.e0);
  const auto N = pair_series(d0, d1, F);
  TildeMarginal out;
  out.series = make_series(series_div(N, D, N.size()), H.t, params);
  out.value = out.series.value;
  return out;
}

namespace {

// Multi-index over the distinct terms of a cluster, mixed radix mu_i + 1.
struct Lattice {
  std::vector<int> mu, stride;
  int size = 1;
  explicit Lattice(std::vector<int> m) : mu(std::move(m)) {
    for (int v : mu) {
      stride.push_back(size);
      size *= v + 1;
    }
  }
  std::vector<int> digits(int idx) const {
    std::vector<int> d(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) d[i] = (idx / stride[i]) % (mu[i] + 1);
    return d;
  }
  int degree(int idx) const {
    int s = 0;
    for (int v : digits(idx)) s += v;
    return s;
  }
  // rho <= nu componentwise
  bool below(int rho, int nu) const {
    const auto a = digits(rho), b = digits(nu);
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] > b[i]) return false;
    return true;
  }
};

using SimplexTable = std::map<std::vector<int>, cplx>;

void fill_table(SimplexTable& table, const std::vector<int>& freqs, int order, double base,
                double t) {
  std::vector<int> seq;
  std::function<void()> rec = [&] {
    if (!seq.empty()) {
      std::vector<cplx> c;
      for (int k : seq) c.push_back(kI * (k * base));
      table[seq] = simplex_integral(c, t);
    }
    if (static_cast<int>(seq.size()) == order) return;
    for (int k : freqs) {
      seq.push_back(k);
      rec();
      seq.pop_back();
    }
  };
  rec();
}

cplx cluster_coefficient(const Cluster& c, const MeasurementRecord& prefix, int target,
                         const QubitBasis& e, const TimeDependentHamiltonian& H,
                         const SimplexTable& table, int alpha) {
  std::vector<int> qubits;
  for (int q = 0; q < H.n; ++q)
    if (((c.support >> q) & 1U) || q == target) qubits.push_back(q);
  const int R = static_cast<int>(qubits.size());
  const Eigen::Index dim = Eigen::Index{1} << R;
  std::vector<int> ids, mu;
  std::vector<PauliString> ops;
  for (const auto& [a, mult] : c.terms) {
    ids.push_back(a);
    mu.push_back(mult);
    ops.push_back(remap(H.terms[a].op, qubits, 1.0));
  }
  const Lattice L(mu);
  StateVector v0 = StateVector::Zero(dim);
  v0[alpha ? dim - 1 : 0] = 1.0;
  std::vector<StateVector> u(L.size, StateVector::Zero(dim));
  for (int idx = 0; idx < L.size; ++idx) {
    const auto nu = L.digits(idx);
    std::vector<int> word;
    for (std::size_t i = 0; i < nu.size(); ++i) word.insert(word.end(), nu[i], static_cast<int>(i));
    const int K = static_cast<int>(word.size());
    if (K == 0) {
      u[idx] = v0;
      continue;
    }
    do {
      // scalar: (-i)^K sum over frequency sequences of the simplex integral
      // times the Fourier amplitudes along the word
      cplx coef = 0.0;
      std::vector<int> seq(K);
      std::function<void(int, cplx)> rec = [&](int j, cplx amp) {
        if (j == K) {
          coef += amp * table.at(seq);
          return;
        }
        for (const auto& [k, a] : H.terms[ids[word[j]]].fourier) {
          seq[j] = k;
          rec(j + 1, amp * a);
        }
      };
      rec(0, 1.0);
      coef *= std::pow(-kI, K);
      StateVector w = v0;
      for (int j = 0; j < K; ++j) {
        StateVector nw = StateVector::Zero(dim);
        apply_pauli(ops[word[j]], w, nw);
        w = std::move(nw);
      }
      u[idx] += coef * w;
    } while (std::next_permutation(word.begin(), word.end()));
  }
  auto F = prefix_functional(prefix);
  std::map<int, Eigen::Matrix2cd> Floc;
  for (const auto& [q, m] : F) {
    const auto it = std::find(qubits.begin(), qubits.end(), q);
    if (it != qubits.end()) Floc[static_cast<int>(it - qubits.begin())] = m;
  }
  auto contract = [&](const std::map<int, Eigen::Matrix2cd>& G) {
    std::vector<StateVector> fu;
    for (const auto& x : u) {
      StateVector y = x;
      for (const auto& [pos, m] : G) apply_site(y, pos, m);
      fu.push_back(std::move(y));
    }
    std::vector<cplx> s(L.size, cplx(0.0, 0.0));
    for (int nu = 0; nu < L.size; ++nu)
      for (int beta = 0; beta < L.size; ++beta) {
        if (!L.below(beta, nu)) continue;
        s[nu] += u[beta].dot(fu[nu - beta]);
      }
    return s;
  };
  const auto D = contract(Floc);
  const int tpos = static_cast<int>(std::find(qubits.begin(), qubits.end(), target) - qubits.begin());
  Floc[tpos] = outer(e.e0, e.e0);
  const auto N = contract(Floc);
  // q = N / D over the sub-multiset lattice, graded by total degree
  std::vector<int> order(L.size);
  for (int i = 0; i < L.size; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return L.degree(a) < L.degree(b); });
  std::vector<cplx> q(L.size, cplx(0.0, 0.0));
  for (int nu : order) {
    cplx acc = N[nu];
    for (int rho = 1; rho <= nu; ++rho)
      if (L.below(rho, nu)) acc -= D[rho] * q[nu - rho];
    q[nu] = acc / D[0];
  }
  return q[L.size - 1];
}

}  // namespace

ClusterAssembly cluster_assembly(const MeasurementRecord& prefix, int target, const QubitBasis& e,
                                 const TimeDependentHamiltonian& H, int order, int alpha) {
  const DualGraph g = term_overlap_graph(H);
  SimplexTable table;
  fill_table(table, H.frequencies, order, H.base, H.t);
  ClusterAssembly out;
  for (int m = 1; m <= order; ++m) {
    const auto clusters = enumerate_clusters_at(g, m, target);
    std::vector<cplx> part(clusters.size());
    parallel_for(clusters.size(), [&](std::size_t i) {
      part[i] = cluster_coefficient(clusters[i], prefix, target, e, H, table, alpha);
    });
    cplx s = 0.0;
    for (const cplx& c : part) s += c;  // fixed canonical order
    out.coefficient.push_back(s);
    out.clusters.push_back(clusters.size());
  }
  return out;
}

ClusterSampler::ClusterSampler(TimeDependentHamiltonian H, BasisProvider& provider,
                               SamplerParams params)
    : H_(std::move(H)), provider_(provider), params_(params) {
  if (provider_.n() != H_.n) throw StructuralError("provider and Hamiltonian sizes differ");
}

ClusterSampler::ClusterSampler(const PerturbedHamiltonian& H, double t, BasisProvider& provider,
                               SamplerParams params)
    : ClusterSampler(interaction_picture(H, t), provider, params) {}

MeasurementRecord ClusterSampler::record(int len, Mask prefix) {
  MeasurementRecord rec;
  rec.order.assign(provider_.order().begin(), provider_.order().begin() + len);
  rec.bases = provider_.path_bases(len, prefix);
  for (int k = 0; k < len; ++k) rec.outcomes.push_back(static_cast<int>((prefix >> k) & 1U));
  return rec;
}

const Marginal& ClusterSampler::marginal(int len, Mask prefix) {
  const auto key = OutcomeTree::index(len, prefix);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  const int target = provider_.order()[len];
  auto dit = dyson_.find(target);
  if (dit == dyson_.end()) {
    const auto region = locality_region(H_, Mask{1} << target, params_.order);
    dit = dyson_.emplace(target, region_dyson(H_, terms_inside(H_, region), region, 0,
                                              params_.order)).first;
  }
  const QubitBasis e = provider_.next_basis(len, prefix);
  Marginal m = marginal_expansion(record(len, prefix), target, e, dit->second, H_, params_);
  return cache_.emplace(key, std::move(m)).first->second;
}

double ClusterSampler::p0(int len, Mask prefix) { return marginal(len, prefix).p0; }

std::vector<double> ClusterSampler::distribution() {
  const int n = provider_.n();
  if (n > 16) throw ResourceError("exact marginal-chain distribution limited to 16 qubits");
  std::vector<double> p(std::size_t{1} << n, 0.0);
  std::function<void(int, Mask, double)> walk = [&](int len, Mask x, double w) {
    if (len == n) {
      p[x] = w;
      return;
    }
    const double q = p0(len, x);
    walk(len + 1, x, w * q);
    walk(len + 1, x | (Mask{1} << len), w * (1 - q));
  };
  walk(0, 0, 1.0);
  return p;
}

ClusterProvider::ClusterProvider(const PerturbedHamiltonian& H_prime, double t,
                                 SamplerParams params, std::vector<int> order)
    : BasisProvider(std::move(order)), H_(interaction_picture(H_prime, t)), params_(params),
      n_(H_prime.n()) {
  if (n() != n_) throw StructuralError("order does not cover every qubit");
  if (H_.t >= params_.t_star && !params_.allow_unsafe)
    throw DomainError("t >= t_star: the expansion is not guaranteed to converge");
  // phi^a = e^{-i omega t Z} leaves the phases e^{-+ i omega t N} on the branches
  const cplx frame = std::exp(kI * (2.0 * H_prime.omega * t * n_));
  g0_ = frame * std::conj(return_amplitude(0)) * return_amplitude(1);
}

const RegionDyson& ClusterProvider::dyson(const std::vector<int>& qubits, int max_term,
                                          int alpha) {
  const auto key = std::make_tuple(qubits, max_term, alpha);
  if (auto it = dyson_.find(key); it != dyson_.end()) return it->second;
  auto d = region_dyson(H_, terms_inside(H_, qubits, max_term), qubits, alpha, params_.order);
  return dyson_.emplace(key, std::move(d)).first->second;
}

cplx ClusterProvider::return_amplitude(int alpha) {
  // <a|U|a> = prod_k A(terms <= k) / A(terms < k); each factor is local to term k
  cplx A = 1.0;
  for (int k = 0; k < static_cast<int>(H_.terms.size()); ++k) {
    const auto region = locality_region(H_, H_.terms[k].op.support(), params_.order);
    const Eigen::Index idx = alpha ? (Eigen::Index{1} << region.size()) - 1 : 0;
    std::vector<cplx> num, den;
    for (const auto& v : dyson(region, k, alpha).u) num.push_back(v[idx]);
    for (const auto& v : dyson(region, k - 1, alpha).u) den.push_back(v[idx]);
    if (k == 0) {
      den.assign(num.size(), cplx(0.0, 0.0));
      den[0] = 1.0;
    }
    A *= evaluate(series_div(num, den, num.size()));
  }
  return A;
}

ClusterProvider::Node& ClusterProvider::node(int len, Mask outcomes) {
  const auto key = OutcomeTree::index(len, outcomes);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  Node child;
  if (len == 0) {
    child.g = g0_;
  } else {
    const Mask parent = outcomes & ((Mask{1} << (len - 1)) - 1);
    const int bit = static_cast<int>((outcomes >> (len - 1)) & 1U);
    const QubitBasis pb = next_basis(len - 1, parent);
    const MatrixPair pp = matrix_pair(len - 1, parent);
    const Node& p = node(len - 1, parent);
    const int q = order()[len - 1];
    // branch densities from M and the stored weights
    const auto region = locality_region(H_, Mask{1} << q, params_.order);
    const auto& d0 = dyson(region, -1, 0);
    const auto& d1 = dyson(region, -1, 1);
    MeasurementRecord rec;
    rec.order.assign(order().begin(), order().begin() + (len - 1));
    rec.bases = path_bases(len - 1, parent);
    for (int k = 0; k < len - 1; ++k) rec.outcomes.push_back(static_cast<int>((parent >> k) & 1U));
    auto F = prefix_functional(rec);
    const Eigen::Matrix2cd Ex = outer(pb[bit], pb[bit]);
    for (int a = 0; a < 2; ++a) {
      const auto& d = a == 0 ? d0 : d1;
      auto G = F;
      const auto D = pair_series(d, d, G);
      G[q] = Ex;
      const double pa = std::clamp(evaluate(series_div(pair_series(d, d, G), D, D.size())).real(),
                                   params_.clip, 1.0 - params_.clip);
      (a == 0 ? child.w0 : child.w1) = (a == 0 ? p.w0 : p.w1) * pa;
    }
    auto G = F;
    for (int r : region)
      if (!G.count(r)) G[r] = dual_functional();
    const auto D = pair_series(d0, d1, G);
    G[q] = Ex;
    child.g = p.g * evaluate(series_div(pair_series(d0, d1, G), D, D.size()));
    (void)pp;
  }
  return cache_.emplace(key, std::move(child)).first->second;
}

MatrixPair ClusterProvider::matrix_pair(int len, Mask outcomes) {
  {
    Node& nd = node(len, outcomes);
    if (nd.has_pair) return nd.pair;
  }
  const Node nd = node(len, outcomes);
  const int q = order()[len];
  MeasurementRecord rec;
  rec.order.assign(order().begin(), order().begin() + len);
  rec.bases = path_bases(len, outcomes);
  for (int k = 0; k < len; ++k) rec.outcomes.push_back(static_cast<int>((outcomes >> k) & 1U));
  const auto F = prefix_functional(rec);
  MatrixPair mp;
  mp.weight = 0.5 * (nd.w0 + nd.w1);
  if (mp.weight < kZeroWeight) throw DegenerateBranchError("prefix has zero weight on both branches");
  const auto region = locality_region(H_, Mask{1} << q, params_.order);
  Eigen::Matrix2cd rho[2];
  for (int a = 0; a < 2; ++a) {
    const auto& d = dyson(region, -1, a);
    const auto D = pair_series(d, d, F);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        auto G = F;
        G[q] = Eigen::Matrix2cd::Zero();
        G[q](j, i) = 1.0;  // Tr(rho |j><i|) = <i|rho|j>
        rho[a](i, j) = evaluate(series_div(pair_series(d, d, G), D, D.size()));
      }
  }
  mp.M = (nd.w0 * rho[0] - nd.w1 * rho[1]) / mp.weight;
  mp.Mt.setZero();
  // unmeasured qubits other than the target carry the identity in Mt
  std::vector<int> rest;
  Mask seeds = Mask{1} << q;
  for (int k = len + 1; k < n(); ++k) {
    rest.push_back(order()[k]);
    seeds |= Mask{1} << order()[k];
  }
  const int k_loc = std::max(1, term_overlap_graph(H_).k);
  if (static_cast<int>(rest.size()) <= k_loc * params_.order) {
    const auto cross = locality_region(H_, seeds, params_.order);
    if (static_cast<int>(cross.size()) > kRegionCap) {
      ++dropped_;
    } else {
      const auto& d0 = dyson(cross, -1, 0);
      const auto& d1 = dyson(cross, -1, 1);
      auto G = F;
      for (int r : cross)
        if (!G.count(r)) G[r] = dual_functional();
      const auto D = pair_series(d0, d1, G);
      for (int r : rest) G[r] = Eigen::Matrix2cd::Identity();
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          G[q] = Eigen::Matrix2cd::Zero();
          G[q](j, i) = 1.0;
          mp.Mt(i, j) = nd.g * evaluate(series_div(pair_series(d0, d1, G), D, D.size())) / mp.weight;
        }
    }
  }
  Node& again = node(len, outcomes);
  again.pair = mp;
  again.has_pair = true;
  return mp;
}

QubitBasis ClusterProvider::next_basis(int len, Mask outcomes) {
  if (len < 0 || len >= n()) throw StructuralError("prefix length out of range");
  {
    Node& nd = node(len, outcomes);
    if (nd.has_basis) return nd.basis;
  }
  QubitBasis b;
  try {
    const int sign = (std::popcount(outcomes) & 1) ? -1 : 1;
    bool fb = false;
    b = basis_from_pair(matrix_pair(len, outcomes), sign, &fb);
    fallbacks_ += fb;
  } catch (const DegenerateBranchError&) {
    b = x_basis();
    ++fallbacks_;
  }
  Node& again = node(len, outcomes);
  again.basis = b;
  again.has_basis = true;
  return b;
}

double conditional_correlation(const StateVector& psi, int n, const std::vector<Projector>& prefix,
                               int i, int j) {
  if (n > 12) throw ResourceError("conditional correlation is dense; n <= 12");
  if (i == j) throw StructuralError("correlation needs two distinct qubits");
  for (const auto& [q, e] : prefix)
    if (q == i || q == j) throw StructuralError("correlated qubits must be unmeasured");
  StateVector chi = contract(psi, n, prefix);
  const double w = chi.squaredNorm();
  if (w < kZeroWeight) throw DegenerateBranchError("prefix has zero probability");
  chi /= std::sqrt(w);
  // packed positions of i and j among the survivors
  auto packed = [&](int q) {
    int p = q;
    for (const auto& pr : prefix)
      if (pr.first < q) --p;
    return p;
  };
  const int m = n - static_cast<int>(prefix.size());
  const int pi = packed(i), pj = packed(j);
  const char axes[3] = {'X', 'Y', 'Z'};
  auto single = [&](char a, int pos) {
    PauliString p = single_pauli(a, pos);
    StateVector out = StateVector::Zero(chi.size());
    apply_pauli(p, chi, out);
    return chi.dot(out).real();
  };
  double best = 0.0;
  for (char a : axes)
    for (char b : axes) {
      PauliString p = single_pauli(a, pi) * single_pauli(b, pj);
      StateVector out = StateVector::Zero(chi.size());
      apply_pauli(p, chi, out);
      const double c = chi.dot(out).real() - single(a, pi) * single(b, pj);
      best = std::max(best, std::abs(c));
    }
  (void)m;
  return best;
}

double conditional_correlation(const PerturbedHamiltonian& H, double t,
                               const std::vector<Projector>& prefix, int i, int j) {
  const StateVector psi = evolve(basis_state(H.n(), 0), H, t);
  return conditional_correlation(psi, H.n(), prefix, i, j);
}

}  // namespace hlm
