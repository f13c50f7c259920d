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

#include "hlmetro/pauli_graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <queue>
#include <sstream>

#include <json.hpp>

#include "hlmetro/errors.hpp"

namespace hlm {

namespace {

const cplx kI{0.0, 1.0};

cplx i_pow(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return {1, 0};
    case 1: return {0, 1};
    case 2: return {-1, 0};
    default: return {0, -1};
  }
}

void finish_graph(InteractionGraph& g) {
  g.adj.assign(g.n, {});
  std::vector<std::pair<int, int>> seen;
  for (auto [a, b] : g.edges) {
    if (a < 0 || b < 0 || a >= g.n || b >= g.n)
      throw StructuralError("edge (" + std::to_string(a + 1) + "," + std::to_string(b + 1) +
                            ") references a vertex outside 1.." + std::to_string(g.n));
    if (a == b) throw StructuralError("self-loop at vertex " + std::to_string(a + 1));
    std::pair<int, int> key{std::min(a, b), std::max(a, b)};
    if (std::find(seen.begin(), seen.end(), key) != seen.end())
      throw StructuralError("duplicate edge");
    seen.emplace_back(key);
    g.adj[a].push_back(b);
    g.adj[b].push_back(a);
  }
  g.max_degree = 0;
  for (const auto& nb : g.adj) g.max_degree = std::max<int>(g.max_degree, nb.size());
  if (g.n > kMaxQubits) return;
  g.dist.assign(static_cast<std::size_t>(g.n) * g.n, -1);
  for (int s = 0; s < g.n; ++s) {
    int* row = &g.dist[static_cast<std::size_t>(s) * g.n];
    std::queue<int> q;
    row[s] = 0;
    q.push(s);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v : g.adj[u])
        if (row[v] < 0) {
          row[v] = row[u] + 1;
          q.push(v);
        }
    }
  }
}

void check_qubits(int n) {
  if (n <= 0) throw StructuralError("graph needs a positive vertex count");
  if (n > kMaxQubits) throw ResourceError("at most 64 qubits are supported");
}

}  // namespace

InteractionGraph chain_graph(int n) {
  check_qubits(n);
  InteractionGraph g;
  g.n = n;
  for (int i = 0; i + 1 < n; ++i) g.edges.emplace_back(i, i + 1);
  finish_graph(g);
  return g;
}

InteractionGraph ring_graph(int n) {
  check_qubits(n);
  InteractionGraph g;
  g.n = n;
  for (int i = 0; i + 1 < n; ++i) g.edges.emplace_back(i, i + 1);
  if (n >= 3) g.edges.emplace_back(n - 1, 0);
  finish_graph(g);
  return g;
}

InteractionGraph grid_graph(int w, int h) {
  if (w <= 0 || h <= 0) throw StructuralError("grid dimensions must be positive");
  check_qubits(w * h);
  InteractionGraph g;
  g.n = w * h;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      int v = r * w + c;
      if (c + 1 < w) g.edges.emplace_back(v, v + 1);
      if (r + 1 < h) g.edges.emplace_back(v, v + w);
    }
  finish_graph(g);
  return g;
}

InteractionGraph graph_from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
  check_qubits(n);
  InteractionGraph g;
  g.n = n;
  g.edges = edges;
  finish_graph(g);
  return g;
}

InteractionGraph build_graph(const std::string& kind, int w, int h) {
  if (kind == "chain") return chain_graph(w);
  if (kind == "ring") return ring_graph(w);
  if (kind == "grid") return grid_graph(w, h);
  throw ValidationError("unknown graph kind '" + kind + "'");
}

int PauliString::weight() const { return std::popcount(x | z); }

char PauliString::axis(int q) const {
  bool bx = (x >> q) & 1U, bz = (z >> q) & 1U;
  if (bx && bz) return 'Y';
  if (bx) return 'X';
  if (bz) return 'Z';
  return 'I';
}

PauliString single_pauli(char axis, int q, cplx coeff) {
  if (q < 0 || q >= kMaxQubits) throw StructuralError("qubit index out of range");
  PauliString p;
  p.coeff = coeff;
  Mask b = Mask{1} << q;
  switch (axis) {
    case 'X': p.x = b; break;
    case 'Y': p.x = b; p.z = b; break;
    case 'Z': p.z = b; break;
    case 'I': break;
    default: throw ValidationError(std::string("unknown Pauli axis '") + axis + "'");
  }
  return p;
}

PauliString pauli(const std::string& ops, cplx coeff) {
  PauliString p;
  p.coeff = coeff;
  std::istringstream in(ops);
  std::string tok;
  while (in >> tok) {
    if (tok.size() < 2) throw ValidationError("bad Pauli token '" + tok + "'");
    int q = 0;
    try {
      std::size_t used = 0;
      q = std::stoi(tok.substr(1), &used);
      if (used + 1 != tok.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ValidationError("bad Pauli token '" + tok + "'");
    }
    PauliString s = single_pauli(tok[0], q);
    if (s.support() & p.support()) throw ValidationError("qubit repeated in '" + ops + "'");
    p.x |= s.x;
    p.z |= s.z;
  }
  return p;
}

PauliString operator*(const PauliString& a, const PauliString& b) {
  // X^x1 Z^z1 X^x2 Z^z2 = (-1)^{|z1 & x2|} X^{x1^x2} Z^{z1^z2}
  PauliString r;
  r.x = a.x ^ b.x;
  r.z = a.z ^ b.z;
  int k = std::popcount(a.x & a.z) + std::popcount(b.x & b.z) - std::popcount(r.x & r.z) +
          2 * std::popcount(a.z & b.x);
  r.coeff = a.coeff * b.coeff * i_pow(k);
  return r;
}

bool commutes(const PauliString& a, const PauliString& b) {
  return ((std::popcount(a.x & b.z) + std::popcount(a.z & b.x)) & 1) == 0;
}

std::string to_string(const PauliString& p) {
  std::ostringstream out;
  out << "(" << p.coeff.real() << (p.coeff.imag() < 0 ? "-" : "+") << std::abs(p.coeff.imag())
      << "i)";
  for (int q = 0; q < kMaxQubits; ++q)
    if (char a = p.axis(q); a != 'I') out << " " << a << q;
  return out.str();
}

std::vector<PauliString> simplify(std::vector<PauliString> terms, double tol) {
  std::sort(terms.begin(), terms.end(), [](const PauliString& a, const PauliString& b) {
    return std::tie(a.x, a.z) < std::tie(b.x, b.z);
  });
  std::vector<PauliString> out;
  for (const auto& t : terms) {
    if (!out.empty() && out.back().same_ops(t))
      out.back().coeff += t.coeff;
    else
      out.push_back(t);
  }
  std::erase_if(out, [tol](const PauliString& p) { return std::abs(p.coeff) <= tol; });
  return out;
}

namespace {

// Dense block of a Pauli sum restricted to the qubits in `support`.
Eigen::MatrixXcd local_block(const std::vector<PauliString>& paulis, Mask support) {
  std::vector<int> qs;
  for (int q = 0; q < kMaxQubits; ++q)
    if ((support >> q) & 1U) qs.push_back(q);
  std::vector<PauliString> packed;
  for (const auto& p : paulis) {
    PauliString c;
    c.coeff = p.coeff;
    for (std::size_t k = 0; k < qs.size(); ++k) {
      c.x |= ((p.x >> qs[k]) & 1U) << k;
      c.z |= ((p.z >> qs[k]) & 1U) << k;
    }
    packed.push_back(c);
  }
  return dense_matrix(packed, static_cast<int>(qs.size()), 12);
}

}  // namespace

LocalTerm make_local_term(std::vector<PauliString> paulis) {
  LocalTerm t;
  t.paulis = simplify(std::move(paulis));
  for (const auto& p : t.paulis) t.support |= p.support();
  if (t.paulis.empty()) return t;
  Eigen::MatrixXcd block = local_block(t.paulis, t.support);
  if ((block - block.adjoint()).norm() <= 1e-12 * std::max(1.0, block.norm())) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(block, Eigen::EigenvaluesOnly);
    t.norm = es.eigenvalues().cwiseAbs().maxCoeff();
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(block);
    t.norm = svd.singularValues()(0);
  }
  return t;
}

double local_strength(const std::vector<LocalTerm>& terms, int n) {
  std::vector<double> acc(n, 0.0);
  for (const auto& t : terms)
    for (int q = 0; q < n; ++q)
      if ((t.support >> q) & 1U) acc[q] += t.norm;
  return acc.empty() ? 0.0 : *std::max_element(acc.begin(), acc.end());
}

PerturbedHamiltonian make_hamiltonian(InteractionGraph graph, std::vector<LocalTerm> terms,
                                      double omega, int range) {
  if (!std::isfinite(omega)) throw ValidationError("omega must be finite");
  const int n = graph.n;
  Mask all = n == 64 ? ~Mask{0} : (Mask{1} << n) - 1;
  for (const auto& t : terms) {
    if (t.paulis.empty()) continue;
    if (t.support & ~all) throw StructuralError("term acts outside the graph's vertices");
    for (const auto& p : t.paulis) {
      if (!std::isfinite(p.coeff.real()) || !std::isfinite(p.coeff.imag()))
        throw ValidationError("non-finite coefficient");
      if (std::abs(p.coeff.imag()) > 1e-12 * std::max(1.0, std::abs(p.coeff)))
        throw ValidationError("term " + to_string(p) + " is not Hermitian");
    }
    if (range > 0 && !graph.dist.empty()) {
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
          if (((t.support >> a) & 1U) && ((t.support >> b) & 1U)) {
            int d = graph.distance(a, b);
            if (d < 0 || d > range)
              throw StructuralError("term support has diameter beyond the interaction range");
          }
    }
  }
  PerturbedHamiltonian H;
  H.graph = std::move(graph);
  for (auto& t : terms) {
    for (auto& p : t.paulis) p.coeff = p.coeff.real();
    if (!t.paulis.empty()) H.terms.push_back(std::move(t));
  }
  H.omega = omega;
  H.local_strength = local_strength(H.terms, n);
  return H;
}

PerturbedHamiltonian ising_chain_coupling(int n, double g, double omega) {
  std::vector<LocalTerm> terms;
  for (int i = 0; i + 1 < n; ++i) {
    PauliString p = single_pauli('X', i, g) * single_pauli('X', i + 1);
    terms.push_back(make_local_term({p}));
  }
  return make_hamiltonian(chain_graph(n), std::move(terms), omega);
}

PerturbedHamiltonian ising_chain(int n, double J, double omega) {
  return ising_chain_coupling(n, n >= 3 ? J / 2 : J, omega);
}

PerturbedHamiltonian field_only(int n, double omega) {
  return make_hamiltonian(chain_graph(n), {}, omega);
}

std::vector<PauliString> pauli_terms(const PerturbedHamiltonian& H, bool with_field) {
  std::vector<PauliString> out;
  for (const auto& t : H.terms) out.insert(out.end(), t.paulis.begin(), t.paulis.end());
  if (with_field && H.omega != 0.0)
    for (int q = 0; q < H.n(); ++q) out.push_back(single_pauli('Z', q, H.omega));
  return simplify(std::move(out));
}

void apply_pauli(const PauliString& p, const Eigen::VectorXcd& psi, Eigen::VectorXcd& out) {
  const Eigen::Index dim = psi.size();
  const cplx base = p.coeff * i_pow(std::popcount(p.x & p.z));
  for (Eigen::Index b = 0; b < dim; ++b) {
    const cplx v = psi[b];
    if (v == cplx{}) continue;
    const Mask ub = static_cast<Mask>(b);
    out[static_cast<Eigen::Index>(ub ^ p.x)] += (std::popcount(ub & p.z) & 1) ? -base * v : base * v;
  }
}

Eigen::VectorXcd apply_pauli_sum(const std::vector<PauliString>& terms,
                                 const Eigen::VectorXcd& psi) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(psi.size());
  for (const auto& p : terms) apply_pauli(p, psi, out);
  return out;
}

Eigen::MatrixXcd dense_matrix(const std::vector<PauliString>& terms, int n, int cap) {
  if (n > cap)
    throw ResourceError("dense assembly of " + std::to_string(n) + " qubits exceeds the cap of " +
                        std::to_string(cap));
  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& p : terms) {
    const cplx base = p.coeff * i_pow(std::popcount(p.x & p.z));
    for (Eigen::Index b = 0; b < dim; ++b) {
      const Mask ub = static_cast<Mask>(b);
      m(static_cast<Eigen::Index>(ub ^ p.x), b) += (std::popcount(ub & p.z) & 1) ? -base : base;
    }
  }
  return m;
}

Eigen::MatrixXcd assemble_dense(const PerturbedHamiltonian& H, int cap) {
  return dense_matrix(pauli_terms(H, true), H.n(), cap);
}

Eigen::VectorXd total_z_diagonal(int n) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::VectorXd d(dim);
  for (Eigen::Index b = 0; b < dim; ++b)
    d[b] = n - 2.0 * std::popcount(static_cast<Mask>(b));
  return d;
}

double TDTerm::amplitude() const {
  double s = 0.0;
  for (const auto& [k, a] : fourier) s += std::abs(a);
  return s;
}

double TDTerm::value(double s, double base) const {
  cplx v{};
  for (const auto& [k, a] : fourier) v += a * std::exp(kI * (k * base * s));
  return v.real();
}

std::vector<PauliString> TimeDependentHamiltonian::at(double s) const {
  std::vector<PauliString> out;
  out.reserve(terms.size());
  for (const auto& term : terms) {
    PauliString p = term.op;
    p.coeff = term.value(s, base);
    out.push_back(p);
  }
  return out;
}

Eigen::MatrixXcd TimeDependentHamiltonian::dense_at(double s) const {
  return dense_matrix(at(s), n);
}

namespace {

using Fourier = std::map<int, cplx>;

Fourier convolve(const Fourier& a, const Fourier& b) {
  Fourier r;
  for (const auto& [ka, va] : a)
    for (const auto& [kb, vb] : b) r[ka + kb] += va * vb;
  return r;
}

void finalize(TimeDependentHamiltonian& h, std::map<std::pair<Mask, Mask>, Fourier>& acc) {
  int kmax = 0;
  std::vector<int> ks;
  for (auto& [key, f] : acc) {
    TDTerm term;
    term.op.x = key.first;
    term.op.z = key.second;
    for (auto& [k, a] : f)
      if (std::abs(a) > 1e-15) term.fourier[k] = a;
    if (term.fourier.empty()) continue;
    for (const auto& [k, a] : term.fourier) {
      ks.push_back(k);
      kmax = std::max(kmax, std::abs(k));
    }
    h.j_tilde = std::max(h.j_tilde, term.amplitude());
    h.terms.push_back(std::move(term));
  }
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  h.frequencies = std::move(ks);
}

}  // namespace

TimeDependentHamiltonian rotate_interaction(const std::vector<PauliString>& V, int n,
                                            double omega) {
  TimeDependentHamiltonian h;
  h.n = n;
  h.base = 2.0 * omega;
  const bool still = omega == 0.0;
  // cos(2 w s) = (e^{+} + e^{-})/2, sin(2 w s) = (e^{+} - e^{-})/(2i)
  const Fourier cos_f{{-1, 0.5}, {1, 0.5}};
  const Fourier sin_f{{-1, cplx(0, 0.5)}, {1, cplx(0, -0.5)}};
  const Fourier msin_f{{-1, cplx(0, -0.5)}, {1, cplx(0, 0.5)}};
  std::map<std::pair<Mask, Mask>, Fourier> acc;
  for (const auto& p : V) {
    if (std::abs(p.coeff.imag()) > 1e-12)
      throw ValidationError("interaction picture needs real Pauli coefficients");
    std::vector<std::pair<PauliString, Fourier>> parts{{p, Fourier{{0, p.coeff.real()}}}};
    if (!still) {
      for (int q = 0; q < kMaxQubits; ++q) {
        const char a = p.axis(q);
        if (a != 'X' && a != 'Y') continue;
        const Mask b = Mask{1} << q;
        std::vector<std::pair<PauliString, Fourier>> next;
        for (const auto& [s, f] : parts) {
          PauliString sx = s, sy = s;
          sx.z &= ~b;
          sy.z |= b;
          // X -> cos X + sin Y ; Y -> cos Y - sin X
          next.emplace_back(sx, convolve(f, a == 'X' ? cos_f : msin_f));
          next.emplace_back(sy, convolve(f, a == 'X' ? sin_f : cos_f));
        }
        parts = std::move(next);
      }
    }
    for (auto& [s, f] : parts) {
      Fourier& dst = acc[{s.x, s.z}];
      for (const auto& [k, a] : f) dst[k] += a;
    }
  }
  finalize(h, acc);
  return h;
}

TimeDependentHamiltonian interaction_picture(const std::vector<PauliString>& V, int n,
                                             double omega, double t) {
  TimeDependentHamiltonian r = rotate_interaction(V, n, omega);
  // J(t - s) = sum_k a_k e^{i k W t} e^{-i k W s}
  std::map<std::pair<Mask, Mask>, Fourier> acc;
  for (const auto& term : r.terms) {
    Fourier& dst = acc[{term.op.x, term.op.z}];
    for (const auto& [k, a] : term.fourier) dst[-k] += a * std::exp(kI * (k * r.base * t));
  }
  TimeDependentHamiltonian h;
  h.n = n;
  h.base = r.base;
  h.t = t;
  finalize(h, acc);
  return h;
}

TimeDependentHamiltonian interaction_picture(const PerturbedHamiltonian& H, double t) {
  return interaction_picture(pauli_terms(H, false), H.n(), H.omega, t);
}

PerturbedHamiltonian parse_hamiltonian(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("hamiltonian file: ") + e.what());
  }
  auto require = [&](const nlohmann::json& o, const char* key) -> const nlohmann::json& {
    if (!o.is_object() || !o.contains(key))
      throw ValidationError(std::string("hamiltonian file: missing field '") + key + "'");
    return o.at(key);
  };
  for (const auto& [key, v] : j.items())
    if (key != "graph" && key != "terms" && key != "omega")
      throw ValidationError("hamiltonian file: unknown field '" + key + "'");
  const auto& g = require(j, "graph");
  InteractionGraph graph;
  try {
    const std::string kind = require(g, "kind").get<std::string>();
    if (kind == "explicit") {
      int n = require(g, "n").get<int>();
      std::vector<std::pair<int, int>> edges;
      for (const auto& e : require(g, "edges")) {
        if (!e.is_array() || e.size() != 2) throw ValidationError("edge must be a pair");
        edges.emplace_back(e[0].get<int>() - 1, e[1].get<int>() - 1);
      }
      graph = graph_from_edges(n, edges);
    } else if (kind == "grid") {
      graph = grid_graph(require(g, "w").get<int>(), require(g, "h").get<int>());
    } else {
      graph = build_graph(kind, require(g, "n").get<int>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("hamiltonian file graph: ") + e.what());
  }
  std::vector<LocalTerm> terms;
  double omega = 0.0;
  try {
    omega = require(j, "omega").get<double>();
    for (const auto& t : require(j, "terms")) {
      std::string ops = require(t, "paulis").get<std::string>();
      // files use 1-based vertex labels
      std::istringstream in(ops);
      std::string tok, shifted;
      while (in >> tok) {
        if (tok.size() < 2) throw ValidationError("bad Pauli token '" + tok + "'");
        int q = 0;
        try {
          q = std::stoi(tok.substr(1));
        } catch (const std::exception&) {
          throw ValidationError("bad Pauli token '" + tok + "'");
        }
        if (q < 1 || q > graph.n) throw StructuralError("Pauli token '" + tok + "' out of range");
        shifted += tok.substr(0, 1) + std::to_string(q - 1) + " ";
      }
      terms.push_back(make_local_term({pauli(shifted, require(t, "coefficient").get<double>())}));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("hamiltonian file terms: ") + e.what());
  }
  return make_hamiltonian(std::move(graph), std::move(terms), omega);
}

std::string dump_hamiltonian(const PerturbedHamiltonian& H) {
  nlohmann::json j;
  j["graph"] = {{"kind", "explicit"}, {"n", H.n()}, {"edges", nlohmann::json::array()}};
  for (auto [a, b] : H.graph.edges) j["graph"]["edges"].push_back({a + 1, b + 1});
  j["omega"] = H.omega;
  j["terms"] = nlohmann::json::array();
  for (const auto& t : H.terms)
    for (const auto& p : t.paulis) {
      std::string ops;
      for (int q = 0; q < H.n(); ++q)
        if (char a = p.axis(q); a != 'I') ops += (ops.empty() ? "" : " ") + std::string(1, a) +
                                                   std::to_string(q + 1);
      j["terms"].push_back({{"paulis", ops}, {"coefficient", p.coeff.real()}});
    }
  return j.dump(2);
}

}  // namespace hlm
