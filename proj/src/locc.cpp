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

#include "hlmetro/locc.hpp"

#include <bit>
#include <cmath>
#include <numbers>

#include "hlmetro/errors.hpp"

namespace hlm {

namespace {

Eigen::Vector2cd fix_phase(Eigen::Vector2cd v) {
  v.normalize();
  for (int k = 0; k < 2; ++k)
    if (std::abs(v[k]) > 1e-14) {
      v *= std::conj(v[k]) / std::abs(v[k]);
      v[k] = std::abs(v[k]);
      break;
    }
  return v;
}

Eigen::Vector2cd plus_eigenstate(const Eigen::Vector3d& n) {
  if (n.z() >= 0) return {1.0 + n.z(), cplx(n.x(), n.y())};
  return {cplx(n.x(), -n.y()), 1.0 - n.z()};
}

// Deterministic orientation for tie-break axes: first of (z, x, y) above
// roundoff is made positive.
Eigen::Vector3d orient(Eigen::Vector3d n) {
  for (int k : {2, 0, 1})
    if (std::abs(n[k]) > 1e-12) return n[k] < 0 ? Eigen::Vector3d(-n) : n;
  return n;
}

}  // namespace

QubitBasis computational_basis() { return {Eigen::Vector2cd(1, 0), Eigen::Vector2cd(0, 1)}; }

QubitBasis x_basis() {
  const double h = 1.0 / std::sqrt(2.0);
  return {Eigen::Vector2cd(h, h), Eigen::Vector2cd(h, -h)};
}

QubitBasis basis_from_axis(const Eigen::Vector3d& n_in) {
  const Eigen::Vector3d n = n_in.normalized();
  return {fix_phase(plus_eigenstate(n)), fix_phase(plus_eigenstate(-n))};
}

Eigen::Vector3d bloch_axis(const QubitBasis& b) {
  const Eigen::Vector2cd& e = b.e0;
  const cplx c = std::conj(e[0]) * e[1];
  return {2 * c.real(), 2 * c.imag(), std::norm(e[0]) - std::norm(e[1])};
}

Eigen::Vector3d bloch_vector(const Eigen::Matrix2cd& A) {
  return {A(0, 1).real(), -A(0, 1).imag(), 0.5 * (A(0, 0) - A(1, 1)).real()};
}

Eigen::Matrix2cd strip_trace(const Eigen::Matrix2cd& A) {
  return A - 0.5 * A.trace() * Eigen::Matrix2cd::Identity();
}

QubitBasis zero_diagonalize(const Eigen::Matrix2cd& A, const Eigen::Matrix2cd& B, int sign_selector,
                            const Eigen::Matrix2cd& Mt_ref) {
  const Eigen::Vector3d a = bloch_vector(A), b = bloch_vector(B);
  const double na = a.norm(), nb = b.norm();
  if (na < kBlochFloor && nb < kBlochFloor)
    throw DegenerateBasisError("both matrices vanish; basis is underdetermined");
  const double big = std::max(na, nb);
  const bool use_a = na >= kBlochRelative * big, use_b = nb >= kBlochRelative * big;
  Eigen::Vector3d n = a.cross(b);
  if (!(use_a && use_b) || n.norm() < kBlochRelative * na * nb) {
    // rotate the polar angle of the surviving vector by pi/2
    const Eigen::Vector3d v = use_a ? a : b;
    const double theta = std::acos(std::clamp(v.z() / v.norm(), -1.0, 1.0)) + std::numbers::pi / 2;
    const double rho = std::hypot(v.x(), v.y());
    const double phi = rho < kBlochRelative * v.norm() ? 0.0 : std::atan2(v.y(), v.x());
    n = orient({std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)});
  }
  QubitBasis basis = basis_from_axis(n);
  const double im = basis.e0.dot(Mt_ref * basis.e0).imag();
  if (std::abs(im) > kBlochRelative * big && (im > 0) != (sign_selector > 0))
    std::swap(basis.e0, basis.e1);
  return basis;
}

QubitBasis basis_from_pair(const MatrixPair& mp, int sign_selector, bool* fell_back) {
  if (fell_back) *fell_back = false;
  try {
    return zero_diagonalize(strip_trace(mp.M), strip_trace(mp.Mt + mp.Mt.adjoint()), sign_selector, mp.Mt);
  } catch (const DegenerateBasisError&) {
    if (fell_back) *fell_back = true;
    return x_basis();
  }
}

int MeasurementRecord::parity() const {
  int s = 0;
  for (int x : outcomes) s += x;
  return (s & 1) ? -1 : 1;
}

std::vector<Projector> MeasurementRecord::projectors() const {
  std::vector<Projector> r;
  for (std::size_t k = 0; k < outcomes.size(); ++k) r.emplace_back(order[k], bases[k][outcomes[k]]);
  return r;
}

std::vector<int> default_order(int n) {
  std::vector<int> o(n);
  for (int q = 0; q < n; ++q) o[q] = q;
  return o;
}

BasisProvider::BasisProvider(std::vector<int> order) : order_(std::move(order)) {
  std::vector<int> sorted = order_;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t k = 0; k < sorted.size(); ++k)
    if (sorted[k] != static_cast<int>(k)) throw ValidationError("measurement order must be a permutation");
}

std::vector<QubitBasis> BasisProvider::path_bases(int len, Mask outcomes) {
  std::vector<QubitBasis> r;
  for (int k = 0; k < len; ++k) r.push_back(next_basis(k, outcomes & ((Mask{1} << k) - 1)));
  return r;
}

FixedProvider::FixedProvider(std::vector<QubitBasis> per_step, std::vector<int> order)
    : BasisProvider(std::move(order)), bases_(std::move(per_step)) {
  if (static_cast<int>(bases_.size()) != n()) throw ValidationError("one basis per step is required");
}

FixedProvider FixedProvider::uniform(const QubitBasis& b, int n) {
  return FixedProvider(std::vector<QubitBasis>(n, b), default_order(n));
}

QubitBasis FixedProvider::next_basis(int len, Mask) { return bases_.at(len); }

ExactProvider::ExactProvider(StateVector phi0, StateVector phi1, std::vector<int> order)
    : BasisProvider(std::move(order)) {
  if (phi0.size() != phi1.size() || qubit_count(phi0) != n())
    throw StructuralError("branch states do not match the measurement order");
  Node root;
  root.c0 = std::move(phi0);
  root.c1 = std::move(phi1);
  cache_.emplace(OutcomeTree::index(0, 0), std::move(root));
}

int ExactProvider::packed_position(int len) const {
  const int q = order()[len];
  int pos = q;
  for (int k = 0; k < len; ++k)
    if (order()[k] < q) --pos;
  return pos;
}

ExactProvider::Node& ExactProvider::node(int len, Mask outcomes) {
  const auto key = OutcomeTree::index(len, outcomes);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  const Mask parent = outcomes & ((Mask{1} << (len - 1)) - 1);
  const int bit = static_cast<int>((outcomes >> (len - 1)) & 1U);
  const QubitBasis pb = next_basis(len - 1, parent);
  Node& p = node(len - 1, parent);
  const int pos = packed_position(len - 1);
  Node child;
  child.c0 = contract_one(p.c0, pos, pb[bit]);
  child.c1 = contract_one(p.c1, pos, pb[bit]);
  return cache_.emplace(key, std::move(child)).first->second;
}

MatrixPair ExactProvider::matrix_pair(int len, Mask outcomes) {
  Node& nd = node(len, outcomes);
  const int pos = packed_position(len);
  MatrixPair mp;
  mp.weight = 0.5 * (nd.c0.squaredNorm() + nd.c1.squaredNorm());
  if (mp.weight < kZeroWeight) throw DegenerateBranchError("prefix has zero weight on both branches");
  mp.M = (reduced_cross(nd.c0, nd.c0, pos) - reduced_cross(nd.c1, nd.c1, pos)) / mp.weight;
  mp.Mt = reduced_cross(nd.c1, nd.c0, pos) / mp.weight;
  return mp;
}

QubitBasis ExactProvider::next_basis(int len, Mask outcomes) {
  if (len < 0 || len >= n()) throw StructuralError("prefix length out of range");
  Node& nd = node(len, outcomes);
  if (nd.has_basis) return nd.basis;
  QubitBasis b;
  try {
    const int sign = (std::popcount(outcomes) & 1) ? -1 : 1;
    bool fb = false;
    b = basis_from_pair(matrix_pair(len, outcomes), sign, &fb);
    fallbacks_ += fb;
  } catch (const DegenerateBranchError&) {
    // unreachable under the branch pair; any basis keeps the identity
    b = x_basis();
    ++fallbacks_;
  }
  Node& again = node(len, outcomes);
  again.basis = b;
  again.has_basis = true;
  return b;
}

std::pair<StateVector, StateVector> evolved_pair(const SuperposedPair& pair,
                                                 const PerturbedHamiltonian& H_prime, double t) {
  if (pair.n <= 10) {
    const Spectrum sp = diagonalize(H_prime);
    return {evolve(pair.branch0, sp, t), evolve(pair.branch1, sp, t)};
  }
  const auto terms = pauli_terms(H_prime);
  return {evolve_action(pair.branch0, terms, t), evolve_action(pair.branch1, terms, t)};
}

namespace {

void visit(OutcomeTree& tree, BasisProvider& provider, int len, Mask x, const StateVector& chi,
           std::vector<int>& remaining) {
  const std::size_t idx = OutcomeTree::index(len, x);
  const QubitBasis b = provider.next_basis(len, x);
  tree.basis[idx] = b;
  const int q = tree.order[len];
  const int pos = static_cast<int>(std::find(remaining.begin(), remaining.end(), q) - remaining.begin());
  StateVector c0 = contract_one(chi, pos, b.e0);
  StateVector c1 = contract_one(chi, pos, b.e1);
  const double w0 = c0.squaredNorm(), w1 = c1.squaredNorm();
  tree.weight[idx] = w0 + w1;
  if (w0 < kZeroWeight)
    tree.p0[idx] = 0.0;
  else if (w1 < kZeroWeight)
    tree.p0[idx] = 1.0;
  else
    tree.p0[idx] = w0 / (w0 + w1);
  if (len + 1 == tree.n) return;
  remaining.erase(remaining.begin() + pos);
  if (w0 >= kZeroWeight) visit(tree, provider, len + 1, x, c0, remaining);
  if (w1 >= kZeroWeight) visit(tree, provider, len + 1, x | (Mask{1} << len), c1, remaining);
  remaining.insert(remaining.begin() + pos, q);
}

}  // namespace

OutcomeTree build_outcome_tree(const StateVector& psi, BasisProvider& provider) {
  const int n = provider.n();
  if (qubit_count(psi) != n) throw StructuralError("state size differs from the provider");
  if (n > 20) throw ResourceError("outcome tree limited to 20 qubits");
  OutcomeTree tree;
  tree.n = n;
  tree.order = provider.order();
  const std::size_t nodes = (std::size_t{1} << n) - 1;
  tree.basis.assign(nodes, x_basis());
  tree.p0.assign(nodes, 0.5);
  tree.weight.assign(nodes, 0.0);
  std::vector<int> remaining = default_order(n);
  visit(tree, provider, 0, 0, psi / psi.norm(), remaining);
  return tree;
}

std::vector<double> outcome_distribution(const OutcomeTree& tree) {
  std::vector<double> p(std::size_t{1} << tree.n, 1.0);
  for (std::size_t x = 0; x < p.size(); ++x)
    for (int len = 0; len < tree.n; ++len) {
      const double q = tree.p0[OutcomeTree::index(len, x & ((Mask{1} << len) - 1))];
      p[x] *= ((x >> len) & 1U) ? 1.0 - q : q;
      if (p[x] == 0.0) break;
    }
  return p;
}

double parity_expectation(const OutcomeTree& tree) {
  const auto p = outcome_distribution(tree);
  double e = 0.0;
  for (std::size_t x = 0; x < p.size(); ++x) e += (std::popcount(x) & 1) ? -p[x] : p[x];
  return e;
}

MeasurementRecord make_record(const OutcomeTree& tree, Mask outcomes) {
  MeasurementRecord r;
  r.order = tree.order;
  for (int len = 0; len < tree.n; ++len) {
    r.outcomes.push_back(static_cast<int>((outcomes >> len) & 1U));
    r.bases.push_back(tree.basis[OutcomeTree::index(len, outcomes & ((Mask{1} << len) - 1))]);
  }
  return r;
}

double verify_basis_condition(BasisProvider& provider, const StateVector& phi0,
                              const StateVector& phi1) {
  const int n = provider.n();
  if (n > 12) throw ResourceError("basis condition enumeration limited to 12 qubits");
  double worst = 0.0;
  std::vector<int> remaining = default_order(n);
  std::function<void(int, Mask, const StateVector&, const StateVector&)> rec =
      [&](int len, Mask x, const StateVector& a0, const StateVector& a1) {
        if (len == n) {
          const double s = (std::popcount(x) & 1) ? -1.0 : 1.0;
          worst = std::max(worst, std::abs(a1[0] - s * cplx(0, 1) * a0[0]));
          return;
        }
        const QubitBasis b = provider.next_basis(len, x);
        const int q = provider.order()[len];
        const int pos = static_cast<int>(std::find(remaining.begin(), remaining.end(), q) - remaining.begin());
        remaining.erase(remaining.begin() + pos);
        for (int k = 0; k < 2; ++k)
          rec(len + 1, x | (static_cast<Mask>(k) << len), contract_one(a0, pos, b[k]), contract_one(a1, pos, b[k]));
        remaining.insert(remaining.begin() + pos, q);
      };
  rec(0, 0, phi0, phi1);
  return worst;
}

Eigen::MatrixXcd povm_sum(BasisProvider& provider) {
  const int n = provider.n();
  if (n > 8) throw ResourceError("POVM sum limited to 8 qubits");
  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(dim, dim);
  for (Mask x = 0; x < (Mask{1} << n); ++x) {
    std::vector<Eigen::Vector2cd> sites(n);
    for (int len = 0; len < n; ++len) {
      const QubitBasis b = provider.next_basis(len, x & ((Mask{1} << len) - 1));
      sites[provider.order()[len]] = b[static_cast<int>((x >> len) & 1U)];
    }
    const StateVector e = product_state(sites);
    S += e * e.adjoint();
  }
  return S;
}

OmegaEstimate estimate_omega(double P_hat, double P_prime, const std::function<double(double)>& f,
                             const PriorInterval& prior, double tol, double stat_tol) {
  if (!(tol > 0)) throw ValidationError("bisection tolerance must be positive");
  if (std::abs(P_hat) > 1 + 1e-12 || std::abs(P_prime) > 1 + 1e-12)
    throw ValidationError("parity expectations must lie in [-1, 1]");
  OmegaEstimate r;
  double lo = prior.lo(), hi = prior.hi();
  const double f_lo = f(lo), f_hi = f(hi);
  r.calls = 2;
  if (!(f_lo < f_hi)) throw ProtocolViolation("phase function is not increasing on the prior interval");
  const double d = P_hat - P_prime;
  double target = -std::asin(std::clamp(d, -1.0, 1.0));
  if (std::abs(d) > 1 || target < f_lo || target > f_hi) {
    r.clamped = true;
    target = std::clamp(target, f_lo, f_hi);
  }
  r.target = target;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    ++r.calls;
    if (fm < f_lo || fm > f_hi) throw ProtocolViolation("phase function is not monotone on the prior interval");
    if (std::abs(fm - target) <= stat_tol) {
      r.omega = mid;
      return r;
    }
    (fm < target ? lo : hi) = mid;
  }
  r.omega = 0.5 * (lo + hi);
  return r;
}

}  // namespace hlm
