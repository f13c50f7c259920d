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

#include "hlmetro/mps_backend.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <iterator>
#include <ostream>
#include <string>

#include "hlmetro/errors.hpp"

namespace hlm {

using Eigen::MatrixXcd;

std::vector<int> MatrixProductState::bond_dims() const {
  std::vector<int> d;
  for (int k = 0; k + 1 < n(); ++k) d.push_back(static_cast<int>(sites[k][0].cols()));
  return d;
}

int MatrixProductState::max_bond() const {
  int m = 1;
  for (int d : bond_dims()) m = std::max(m, d);
  return m;
}

MatrixProductState mps_from_product(const std::vector<Eigen::Vector2cd>& v) {
  if (v.empty()) throw DomainError("MPS needs at least one site");
  MatrixProductState m;
  for (const auto& s : v) {
    SiteTensor A{MatrixXcd::Constant(1, 1, s[0]), MatrixXcd::Constant(1, 1, s[1])};
    m.sites.push_back(std::move(A));
  }
  m.center = 0;
  normalize(m);
  return m;
}

MatrixProductState mps_from_bits(const std::vector<int>& bits) {
  std::vector<Eigen::Vector2cd> v;
  for (int b : bits) v.emplace_back(b ? 0.0 : 1.0, b ? 1.0 : 0.0);
  return mps_from_product(v);
}

namespace {

struct Truncated {
  MatrixXcd U, V;  // V holds V^dagger rows
  Eigen::VectorXd s;
  double discarded = 0.0;
};

Truncated truncated_svd(const MatrixXcd& theta, int d_max, double cutoff) {
  Eigen::BDCSVD<MatrixXcd> svd(theta, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double total = s.squaredNorm();
  int k = 0;
  while (k < s.size() && k < d_max && s[k] > cutoff * s[0]) ++k;
  k = std::max(k, 1);
  Truncated r;
  r.U = svd.matrixU().leftCols(k);
  r.V = svd.matrixV().leftCols(k).adjoint();
  r.s = s.head(k);
  r.discarded = total > 0 ? 1.0 - r.s.squaredNorm() / total : 0.0;
  if (r.discarded > 0 && r.s.squaredNorm() > 0) r.s *= std::sqrt(total / r.s.squaredNorm());
  return r;
}

// Thin QR with a nonnegative real diagonal of R, so isometries map to themselves.
void positive_qr(const MatrixXcd& X, MatrixXcd& Q, MatrixXcd& R) {
  const Eigen::Index k = std::min(X.rows(), X.cols());
  Eigen::HouseholderQR<MatrixXcd> qr(X);
  Q = qr.householderQ() * MatrixXcd::Identity(X.rows(), k);
  R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < k; ++j) {
    const double a = std::abs(R(j, j));
    if (a == 0) continue;
    const cplx ph = R(j, j) / a;
    Q.col(j) *= ph;
    R.row(j) *= std::conj(ph);
  }
}

void left_step(MatrixProductState& m, int k) {
  auto& A = m.sites[k];
  const Eigen::Index dl = A[0].rows(), dr = A[0].cols();
  MatrixXcd X(2 * dl, dr), Q, R;
  X << A[0], A[1];
  positive_qr(X, Q, R);
  A[0] = Q.topRows(dl);
  A[1] = Q.bottomRows(dl);
  for (auto& B : m.sites[k + 1]) B = R * B;
}

void right_step(MatrixProductState& m, int k) {
  auto& A = m.sites[k];
  const Eigen::Index dl = A[0].rows(), dr = A[0].cols();
  MatrixXcd X(dl, 2 * dr), Q, R;
  X << A[0], A[1];
  positive_qr(X.adjoint(), Q, R);
  const MatrixXcd Qd = Q.adjoint();
  A[0] = Qd.leftCols(dr);
  A[1] = Qd.rightCols(dr);
  const MatrixXcd Rd = R.adjoint();
  for (auto& B : m.sites[k - 1]) B = B * Rd;
}

void move_center(MatrixProductState& m, int target) {
  if (m.center < 0) {
    canonicalize(m, target);
    return;
  }
  while (m.center < target) left_step(m, m.center++);
  while (m.center > target) right_step(m, m.center--);
}

}  // namespace

MatrixProductState mps_from_dense(const StateVector& psi, int d_max, double cutoff) {
  const int n = qubit_count(psi);
  MatrixProductState m;
  MatrixXcd rest = psi.transpose();  // Dl x 2^(remaining), low bit is the next site
  for (int k = 0; k < n; ++k) {
    const Eigen::Index dl = rest.rows(), cols = rest.cols() / 2;
    if (k == n - 1) {
      m.sites.push_back({rest.col(0), rest.col(1)});
      break;
    }
    MatrixXcd theta(2 * dl, cols);
    for (int s = 0; s < 2; ++s)
      for (Eigen::Index c = 0; c < cols; ++c) theta.block(s * dl, c, dl, 1) = rest.col(2 * c + s);
    auto t = truncated_svd(theta, d_max, cutoff);
    m.truncation_error += t.discarded;
    m.sites.push_back({t.U.topRows(dl), t.U.bottomRows(dl)});
    rest = t.s.asDiagonal() * t.V;
  }
  m.center = n - 1;
  return m;
}

StateVector to_dense(const MatrixProductState& m) {
  if (m.n() > 24) throw ResourceError("dense conversion limited to 24 qubits");
  if (m.n() == 0) return StateVector::Ones(1);
  MatrixXcd L = MatrixXcd::Ones(1, 1);
  for (const auto& A : m.sites) {
    MatrixXcd Ln(2 * L.rows(), A[0].cols());
    Ln.topRows(L.rows()) = L * A[0];
    Ln.bottomRows(L.rows()) = L * A[1];
    L = std::move(Ln);
  }
  return L.col(0);
}

MatrixProductState mps_sum(const MatrixProductState& A, const MatrixProductState& B, cplx a, cplx b) {
  if (A.n() != B.n() || A.n() == 0) throw StructuralError("MPS sum needs equal, nonzero lengths");
  const int n = A.n();
  MatrixProductState m;
  for (int k = 0; k < n; ++k) {
    SiteTensor T;
    for (int s = 0; s < 2; ++s) {
      const MatrixXcd &x = A.sites[k][s], &y = B.sites[k][s];
      if (n == 1) {
        T[s] = a * x + b * y;
      } else if (k == 0) {
        T[s].resize(1, x.cols() + y.cols());
        T[s] << a * x, b * y;
      } else if (k == n - 1) {
        T[s].resize(x.rows() + y.rows(), 1);
        T[s] << x, y;
      } else {
        T[s] = MatrixXcd::Zero(x.rows() + y.rows(), x.cols() + y.cols());
        T[s].topLeftCorner(x.rows(), x.cols()) = x;
        T[s].bottomRightCorner(y.rows(), y.cols()) = y;
      }
    }
    m.sites.push_back(std::move(T));
  }
  m.truncation_error = A.truncation_error + B.truncation_error;
  return m;
}

MatrixProductState random_mps(int n, int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  MatrixProductState m;
  auto dim = [&](int bond) {  // bond between sites bond-1 and bond
    if (bond <= 0 || bond >= n) return 1;
    return std::min({d, 1 << std::min(bond, 20), 1 << std::min(n - bond, 20)});
  };
  for (int k = 0; k < n; ++k) {
    SiteTensor A;
    for (auto& x : A) {
      x.resize(dim(k), dim(k + 1));
      for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = cplx(g(rng), g(rng));
    }
    m.sites.push_back(std::move(A));
  }
  normalize(m);
  return m;
}

void canonicalize(MatrixProductState& m, int center) {
  if (center < 0 || center >= m.n()) throw DomainError("canonical center out of range");
  for (int k = 0; k < center; ++k) left_step(m, k);
  for (int k = m.n() - 1; k > center; --k) right_step(m, k);
  m.center = center;
}

cplx contract_string_expectation(const MatrixProductState& bra, const MatrixProductState& ket,
                                 const StringOperator& op) {
  if (bra.n() != ket.n()) throw StructuralError("bra and ket lengths differ");
  if (!op.empty() && static_cast<int>(op.size()) != ket.n()) throw StructuralError("operator length differs");
  MatrixXcd L = MatrixXcd::Ones(1, 1);
  for (int k = 0; k < ket.n(); ++k) {
    const auto &A = ket.sites[k], &B = bra.sites[k];
    if (A[0].rows() != L.cols() || B[0].rows() != L.rows()) throw StructuralError("bond dimension mismatch");
    MatrixXcd LA[2] = {L * A[0], L * A[1]};
    MatrixXcd Ln = MatrixXcd::Zero(B[0].cols(), A[0].cols());
    for (int sp = 0; sp < 2; ++sp) {
      MatrixXcd acc;
      if (op.empty())
        acc = LA[sp];
      else
        acc = op[k](sp, 0) * LA[0] + op[k](sp, 1) * LA[1];
      Ln.noalias() += B[sp].adjoint() * acc;
    }
    L = std::move(Ln);
  }
  return L(0, 0);
}

cplx overlap(const MatrixProductState& bra, const MatrixProductState& ket) {
  return contract_string_expectation(bra, ket);
}

double mps_norm(const MatrixProductState& m) { return std::sqrt(std::max(0.0, overlap(m, m).real())); }

void normalize(MatrixProductState& m) {
  if (m.n() == 0) return;
  const double nr = mps_norm(m);
  if (nr == 0) throw DegenerateBranchError("cannot normalize a zero MPS");
  const int k = m.center >= 0 ? m.center : 0;
  for (auto& A : m.sites[k]) A /= nr;
}

void gauge_transform(MatrixProductState& m, int bond, const Eigen::MatrixXcd& X) {
  if (bond < 0 || bond + 1 >= m.n()) throw DomainError("bond out of range");
  const MatrixXcd Xi = X.inverse();
  for (auto& A : m.sites[bond]) A = A * X;
  for (auto& A : m.sites[bond + 1]) A = Xi * A;
  m.center = -1;
}

StringOperator string_from_pauli(const PauliString& p, int n) {
  StringOperator op(n, Eigen::Matrix2cd::Identity());
  Eigen::Matrix2cd X, Y, Z;
  X << 0, 1, 1, 0;
  Y << 0, cplx(0, -1), cplx(0, 1), 0;
  Z << 1, 0, 0, -1;
  for (int q = 0; q < n; ++q) {
    const char a = p.axis(q);
    if (a == 'X') op[q] = X;
    if (a == 'Y') op[q] = Y;
    if (a == 'Z') op[q] = Z;
  }
  if (n > 0) op[0] *= p.coeff;
  return op;
}

Eigen::Matrix2cd reduced_cross(const MatrixProductState& ket, const MatrixProductState& bra, int site) {
  if (ket.n() != bra.n()) throw StructuralError("bra and ket lengths differ");
  if (site < 0 || site >= ket.n()) throw DomainError("site out of range");
  MatrixXcd L = MatrixXcd::Ones(1, 1);
  for (int k = 0; k < site; ++k) {
    MatrixXcd Ln = bra.sites[k][0].adjoint() * L * ket.sites[k][0];
    Ln.noalias() += bra.sites[k][1].adjoint() * L * ket.sites[k][1];
    L = std::move(Ln);
  }
  MatrixXcd R = MatrixXcd::Ones(1, 1);
  for (int k = ket.n() - 1; k > site; --k) {
    MatrixXcd Rn = ket.sites[k][0] * R * bra.sites[k][0].adjoint();
    Rn.noalias() += ket.sites[k][1] * R * bra.sites[k][1].adjoint();
    R = std::move(Rn);
  }
  Eigen::Matrix2cd out;
  for (int a = 0; a < 2; ++a) {
    const MatrixXcd LAR = L * ket.sites[site][a] * R;
    for (int b = 0; b < 2; ++b) out(a, b) = (bra.sites[site][b].adjoint() * LAR).trace();
  }
  return out;
}

double project_qubit(MatrixProductState& m, int site, const Eigen::Vector2cd& e) {
  if (site < 0 || site >= m.n()) throw DomainError("site out of range");
  const MatrixXcd T = std::conj(e[0]) * m.sites[site][0] + std::conj(e[1]) * m.sites[site][1];
  if (m.n() == 1) {
    m.sites.clear();
    m.center = -1;
    const double w = std::norm(T(0, 0));
    if (w < kZeroWeight) throw DegenerateBranchError("projection has zero weight");
    return w;
  }
  int merged;
  if (site + 1 < m.n()) {
    merged = site;  // index after erase
    for (auto& B : m.sites[site + 1]) B = T * B;
  } else {
    merged = site - 1;
    for (auto& B : m.sites[site - 1]) B = B * T;
  }
  m.sites.erase(m.sites.begin() + site);
  // the canonical form survives when the center absorbed the contraction
  const bool keep = m.center == site;
  m.center = keep ? merged : -1;
  const double w = overlap(m, m).real();
  if (w < kZeroWeight) throw DegenerateBranchError("projection has zero weight");
  for (auto& B : m.sites[merged]) B /= std::sqrt(w);
  return w;
}

int mps_sample_step(MatrixProductState& state, int pos, const QubitBasis& b, double u) {
  MatrixProductState c0 = state;
  double w0 = 0.0;
  try {
    w0 = project_qubit(c0, pos, b.e0);
  } catch (const DegenerateBranchError&) {
    w0 = 0.0;
  }
  if (u < w0) {
    state = std::move(c0);
    return 0;
  }
  project_qubit(state, pos, b.e1);
  return 1;
}

void apply_site_gate(MatrixProductState& m, int site, const Eigen::Matrix2cd& U) {
  auto& A = m.sites.at(site);
  const MatrixXcd a0 = U(0, 0) * A[0] + U(0, 1) * A[1];
  const MatrixXcd a1 = U(1, 0) * A[0] + U(1, 1) * A[1];
  A[0] = a0;
  A[1] = a1;
}

void apply_gate(MatrixProductState& m, const BondGate& g, const TruncationPolicy& pol) {
  const int i = g.bond;
  if (i < 0 || i + 1 >= m.n()) throw DomainError("gate bond out of range");
  if (m.center != i && m.center != i + 1) move_center(m, m.center > i + 1 ? i + 1 : i);
  const bool rightward = m.center == i;
  auto &A = m.sites[i], &B = m.sites[i + 1];
  const Eigen::Index dl = A[0].rows(), dr = B[0].cols();
  MatrixXcd blk[2][2];
  for (int s1 = 0; s1 < 2; ++s1)
    for (int s2 = 0; s2 < 2; ++s2) blk[s1][s2] = A[s1] * B[s2];
  MatrixXcd theta(2 * dl, 2 * dr);
  for (int s1 = 0; s1 < 2; ++s1)
    for (int s2 = 0; s2 < 2; ++s2) {
      MatrixXcd acc = MatrixXcd::Zero(dl, dr);
      for (int t1 = 0; t1 < 2; ++t1)
        for (int t2 = 0; t2 < 2; ++t2) {
          const cplx u = g.U(s1 + 2 * s2, t1 + 2 * t2);
          if (u != cplx(0)) acc += u * blk[t1][t2];
        }
      theta.block(s1 * dl, s2 * dr, dl, dr) = acc;
    }
  auto t = truncated_svd(theta, pol.d_max, pol.cutoff);
  m.truncation_error += t.discarded;
  if (m.truncation_error > pol.budget)
    throw ResourceError("MPS truncation budget exceeded; raise d_max");
  if (rightward) {
    const MatrixXcd SV = t.s.asDiagonal() * t.V;
    A = {t.U.topRows(dl), t.U.bottomRows(dl)};
    B = {SV.leftCols(dr), SV.rightCols(dr)};
    m.center = i + 1;
  } else {
    const MatrixXcd US = t.U * t.s.asDiagonal();
    A = {US.topRows(dl), US.bottomRows(dl)};
    B = {t.V.leftCols(dr), t.V.rightCols(dr)};
    m.center = i;
  }
}

void apply_layer(MatrixProductState& m, const GateLayer& layer, const TruncationPolicy& pol) {
  if (layer.empty()) return;
  const bool ascending = m.center < 0 || m.center <= m.n() / 2;
  if (ascending)
    for (auto it = layer.begin(); it != layer.end(); ++it) apply_gate(m, *it, pol);
  else
    for (auto it = layer.rbegin(); it != layer.rend(); ++it) apply_gate(m, *it, pol);
}

ChainSplit split_chain(const PerturbedHamiltonian& H) {
  const int n = H.n();
  ChainSplit c;
  c.bonds.assign(std::max(0, n - 1), Eigen::Matrix4cd::Zero());
  c.single.assign(n == 1 ? 1 : 0, Eigen::Matrix2cd::Zero());
  for (const auto& p : pauli_terms(H, true)) {
    const Mask sup = p.support();
    if (sup == 0) throw StructuralError("identity terms are not supported on the MPS path");
    const int lo = std::countr_zero(sup), hi = 63 - std::countl_zero(sup);
    if (hi - lo > 1) throw StructuralError("MPS evolution needs nearest-neighbour chain terms");
    PauliString local = p;
    if (lo == hi) {
      if (n == 1) {
        c.single[0] += dense_matrix({local}, 1);
        continue;
      }
      // on-site terms split evenly over the adjacent bonds
      const bool interior = lo > 0 && lo < n - 1;
      if (interior) local.coeff *= 0.5;
      for (int b : {lo - 1, lo}) {
        if (b < 0 || b >= n - 1) continue;
        PauliString s = local;
        s.x >>= b;
        s.z >>= b;
        c.bonds[b] += dense_matrix({s}, 2);
      }
    } else {
      local.x >>= lo;
      local.z >>= lo;
      c.bonds[lo] += dense_matrix({local}, 2);
    }
  }
  return c;
}

namespace {

Eigen::Matrix4cd expm4(const Eigen::Matrix4cd& h, double tau) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(h);
  const Eigen::Vector4cd ph = (es.eigenvalues().cast<cplx>() * cplx(0, -tau)).array().exp();
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

Eigen::Matrix2cd expm2(const Eigen::Matrix2cd& h, double tau) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(h);
  const Eigen::Vector2cd ph = (es.eigenvalues().cast<cplx>() * cplx(0, -tau)).array().exp();
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

GateLayer bond_layer(const ChainSplit& c, int parity, double tau) {
  GateLayer l;
  for (int b = parity; b < static_cast<int>(c.bonds.size()); b += 2) l.push_back({b, expm4(c.bonds[b], tau)});
  return l;
}

void second_order_step(MatrixProductState& m, const ChainSplit& c, double dt, const TruncationPolicy& pol) {
  apply_layer(m, bond_layer(c, 0, dt / 2), pol);
  apply_layer(m, bond_layer(c, 1, dt), pol);
  apply_layer(m, bond_layer(c, 0, dt / 2), pol);
}

}  // namespace

int default_trotter_steps(const PerturbedHamiltonian& H, double t, int order, double tolerance) {
  const ChainSplit c = split_chain(H);
  double lam = 0.0;
  for (const auto& b : c.bonds) lam = std::max(lam, Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd>(b).eigenvalues().cwiseAbs().maxCoeff());
  const double scale = H.n() * std::abs(t) * lam / tolerance;
  const double per = order == 4 ? std::pow(scale, 0.25) : std::sqrt(scale);
  return std::max(1, static_cast<int>(std::ceil(std::abs(t) * lam * per)));
}

MatrixProductState evolve_mps(MatrixProductState m, const PerturbedHamiltonian& H, double t,
                              const TrotterOptions& opt) {
  if (H.n() != m.n()) throw StructuralError("Hamiltonian and MPS sizes differ");
  if (opt.order != 2 && opt.order != 4) throw ValidationError("Trotter order must be 2 or 4");
  if (t == 0.0) return m;
  const ChainSplit c = split_chain(H);
  if (m.n() == 1) {
    apply_site_gate(m, 0, expm2(c.single[0], t));
    return m;
  }
  const int steps = opt.steps > 0 ? opt.steps : default_trotter_steps(H, t, opt.order, opt.tolerance);
  const double dt = t / steps;
  const double p = 1.0 / (4.0 - std::cbrt(4.0));
  for (int k = 0; k < steps; ++k) {
    if (opt.order == 2) {
      second_order_step(m, c, dt, opt.trunc);
    } else {
      for (double w : {p, p, 1 - 4 * p, p, p}) second_order_step(m, c, w * dt, opt.trunc);
    }
  }
  return m;
}

MatrixProductState mps_ghz(int n) {
  const double h = 1.0 / std::sqrt(2.0);
  return mps_sum(mps_from_bits(std::vector<int>(n, 0)), mps_from_bits(std::vector<int>(n, 1)), h, h);
}

MpsProvider::MpsProvider(MatrixProductState phi0, MatrixProductState phi1, std::vector<int> order)
    : BasisProvider(std::move(order)) {
  if (phi0.n() != n() || phi1.n() != n()) throw StructuralError("branch MPS do not match the order");
  Node root;
  root.w0 = overlap(phi0, phi0).real();
  root.w1 = overlap(phi1, phi1).real();
  normalize(phi0);
  normalize(phi1);
  root.c0 = std::move(phi0);
  root.c1 = std::move(phi1);
  cache_.emplace(OutcomeTree::index(0, 0), std::move(root));
}

int MpsProvider::packed_position(int len) const {
  const int q = order()[len];
  int pos = q;
  for (int k = 0; k < len; ++k)
    if (order()[k] < q) --pos;
  return pos;
}

MpsProvider::Node& MpsProvider::node(int len, Mask outcomes) {
  const auto key = OutcomeTree::index(len, outcomes);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  const Mask parent = outcomes & ((Mask{1} << (len - 1)) - 1);
  const int bit = static_cast<int>((outcomes >> (len - 1)) & 1U);
  const QubitBasis pb = next_basis(len - 1, parent);
  const Node& p = node(len - 1, parent);
  const int pos = packed_position(len - 1);
  Node child;
  child.c0 = p.c0;
  child.c1 = p.c1;
  auto project = [&](MatrixProductState& c, double w) {
    if (w == 0.0) {
      c.sites.erase(c.sites.begin() + pos);
      return 0.0;
    }
    try {
      return w * project_qubit(c, pos, pb[bit]);
    } catch (const DegenerateBranchError&) {
      return 0.0;
    }
  };
  child.w0 = project(child.c0, p.w0);
  child.w1 = project(child.c1, p.w1);
  return cache_.emplace(key, std::move(child)).first->second;
}

MatrixPair MpsProvider::matrix_pair(int len, Mask outcomes) {
  const Node& nd = node(len, outcomes);
  const int pos = packed_position(len);
  MatrixPair mp;
  mp.weight = 0.5 * (nd.w0 + nd.w1);
  if (mp.weight < kZeroWeight) throw DegenerateBranchError("prefix has zero weight on both branches");
  Eigen::Matrix2cd r0 = Eigen::Matrix2cd::Zero(), r1 = Eigen::Matrix2cd::Zero(), x = Eigen::Matrix2cd::Zero();
  if (nd.w0 > 0) r0 = nd.w0 * reduced_cross(nd.c0, nd.c0, pos);
  if (nd.w1 > 0) r1 = nd.w1 * reduced_cross(nd.c1, nd.c1, pos);
  if (nd.w0 > 0 && nd.w1 > 0) x = std::sqrt(nd.w0 * nd.w1) * reduced_cross(nd.c1, nd.c0, pos);
  mp.M = (r0 - r1) / mp.weight;
  mp.Mt = x / mp.weight;
  return mp;
}

QubitBasis MpsProvider::next_basis(int len, Mask outcomes) {
  if (len < 0 || len >= n()) throw StructuralError("prefix length out of range");
  if (Node& nd = node(len, outcomes); nd.has_basis) return nd.basis;
  QubitBasis b;
  try {
    bool fb = false;
    b = basis_from_pair(matrix_pair(len, outcomes), (std::popcount(outcomes) & 1) ? -1 : 1, &fb);
    fallbacks_ += fb;
  } catch (const DegenerateBranchError&) {
    b = x_basis();
    ++fallbacks_;
  }
  Node& nd = node(len, outcomes);
  nd.basis = b;
  nd.has_basis = true;
  return b;
}

namespace {

void visit_mps(OutcomeTree& tree, BasisProvider& provider, int len, Mask x, const MatrixProductState& chi,
               std::vector<int>& remaining) {
  const std::size_t idx = OutcomeTree::index(len, x);
  const QubitBasis b = provider.next_basis(len, x);
  tree.basis[idx] = b;
  const int q = tree.order[len];
  const int pos = static_cast<int>(std::find(remaining.begin(), remaining.end(), q) - remaining.begin());
  MatrixProductState c[2] = {chi, chi};
  double w[2];
  for (int k = 0; k < 2; ++k) {
    try {
      w[k] = project_qubit(c[k], pos, b[k]);
    } catch (const DegenerateBranchError&) {
      w[k] = 0.0;
    }
  }
  const double total = w[0] + w[1];
  tree.weight[idx] = total;
  tree.p0[idx] = w[0] < kZeroWeight ? 0.0 : (w[1] < kZeroWeight ? 1.0 : w[0] / total);
  if (len + 1 == tree.n) return;
  remaining.erase(remaining.begin() + pos);
  for (int k = 0; k < 2; ++k)
    if (w[k] >= kZeroWeight) visit_mps(tree, provider, len + 1, x | (static_cast<Mask>(k) << len), c[k], remaining);
  remaining.insert(remaining.begin() + pos, q);
}

}  // namespace

OutcomeTree build_outcome_tree(const MatrixProductState& psi, BasisProvider& provider) {
  const int n = provider.n();
  if (psi.n() != n) throw StructuralError("state size differs from the provider");
  if (n > 20) throw ResourceError("outcome tree limited to 20 qubits");
  OutcomeTree tree;
  tree.n = n;
  tree.order = provider.order();
  const std::size_t nodes = (std::size_t{1} << n) - 1;
  tree.basis.assign(nodes, x_basis());
  tree.p0.assign(nodes, 0.5);
  tree.weight.assign(nodes, 0.0);
  MatrixProductState root = psi;
  normalize(root);
  std::vector<int> remaining = default_order(n);
  visit_mps(tree, provider, 0, 0, root, remaining);
  // weights above are conditional; convert to prefix probabilities
  for (int len = 1; len < n; ++len)
    for (Mask x = 0; x < (Mask{1} << len); ++x) {
      const std::size_t parent = OutcomeTree::index(len - 1, x & ((Mask{1} << (len - 1)) - 1));
      const bool one = (x >> (len - 1)) & 1U;
      const double pp = tree.weight[parent] * (one ? 1 - tree.p0[parent] : tree.p0[parent]);
      tree.weight[OutcomeTree::index(len, x)] = pp;
    }
  return tree;
}

namespace {

constexpr char kMagic[8] = {'H', 'L', 'M', 'M', 'P', 'S', '0', '1'};

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

template <typename T>
void put(std::string& buf, T v) {
  buf.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(const std::string& buf, std::size_t& at) {
  if (at + sizeof(T) > buf.size()) throw ValidationError("checkpoint truncated");
  T v;
  std::memcpy(&v, buf.data() + at, sizeof(T));
  at += sizeof(T);
  return v;
}

}  // namespace

void write_checkpoint(std::ostream& os, const MatrixProductState& m) {
  std::string buf(kMagic, sizeof kMagic);
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(m.n()));
  put<std::int32_t>(buf, m.center);
  put<double>(buf, m.truncation_error);
  for (const auto& A : m.sites) {
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(A[0].rows()));
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(A[0].cols()));
    for (const auto& x : A)
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        put<double>(buf, x.data()[i].real());
        put<double>(buf, x.data()[i].imag());
      }
  }
  put<std::uint64_t>(buf, fnv1a(buf));
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!os) throw Error("checkpoint write failed");
}

MatrixProductState read_checkpoint(std::istream& is) {
  const std::string buf{std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
  if (buf.size() < sizeof kMagic + 8 || std::memcmp(buf.data(), kMagic, sizeof kMagic) != 0)
    throw ValidationError("not an MPS checkpoint");
  std::size_t tail = buf.size() - 8;
  const std::string body = buf.substr(0, tail);
  if (take<std::uint64_t>(buf, tail) != fnv1a(body)) throw ValidationError("checkpoint checksum mismatch");
  std::size_t at = sizeof kMagic;
  MatrixProductState m;
  const auto n = take<std::uint32_t>(body, at);
  m.center = take<std::int32_t>(body, at);
  m.truncation_error = take<double>(body, at);
  for (std::uint32_t k = 0; k < n; ++k) {
    const auto dl = take<std::uint32_t>(body, at), dr = take<std::uint32_t>(body, at);
    SiteTensor A;
    for (auto& x : A) {
      x.resize(dl, dr);
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double re = take<double>(body, at);
        x.data()[i] = cplx(re, take<double>(body, at));
      }
    }
    m.sites.push_back(std::move(A));
  }
  if (at != body.size()) throw ValidationError("trailing bytes in checkpoint");
  return m;
}

}  // namespace hlm
