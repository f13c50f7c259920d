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

// Independent dense reference constructions shared by the unit tests.

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace oracle {

using cplx = std::complex<double>;
using Eigen::Matrix2cd;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

inline Matrix2cd pauli2(char a) {
  Matrix2cd m;
  switch (a) {
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, cplx(0, -1), cplx(0, 1), 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: m.setIdentity();
  }
  return m;
}

// ops[q] acts on qubit q; qubit q is bit q of the basis index, so the
// Kronecker product runs from the highest qubit down.
inline MatrixXcd kron_ops(const std::vector<Matrix2cd>& ops) {
  MatrixXcd m = MatrixXcd::Identity(1, 1);
  for (int q = static_cast<int>(ops.size()) - 1; q >= 0; --q) {
    MatrixXcd next = Eigen::kroneckerProduct(m, ops[q]).eval();
    m = next;
  }
  return m;
}

inline MatrixXcd site_op(const Matrix2cd& a, int q, int n) {
  std::vector<Matrix2cd> ops(n, Matrix2cd::Identity());
  ops[q] = a;
  return kron_ops(ops);
}

// "XIZ" style label, character q acts on qubit q.
inline MatrixXcd label_op(const std::string& label) {
  std::vector<Matrix2cd> ops;
  for (char c : label) ops.push_back(pauli2(c));
  return kron_ops(ops);
}

inline MatrixXcd total_z(int n) {
  MatrixXcd z = MatrixXcd::Zero(1 << n, 1 << n);
  for (int q = 0; q < n; ++q) z += site_op(pauli2('Z'), q, n);
  return z;
}

inline MatrixXcd expm_herm(const MatrixXcd& h, double t) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h);
  VectorXcd ph = (es.eigenvalues().cast<cplx>() * cplx(0, -t)).array().exp();
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

inline VectorXcd basis(int n, unsigned long b) {
  VectorXcd v = VectorXcd::Zero(1 << n);
  v[static_cast<Eigen::Index>(b)] = 1;
  return v;
}

inline VectorXcd ghz(int n) {
  VectorXcd v = VectorXcd::Zero(1 << n);
  v[0] = v[(1 << n) - 1] = 1 / std::sqrt(2.0);
  return v;
}

inline double fidelity(const VectorXcd& a, const VectorXcd& b) {
  return std::norm(a.dot(b)) / (a.squaredNorm() * b.squaredNorm());
}

// Nearest-neighbour XX chain with coupling g plus omega * sum Z.
inline MatrixXcd ising_dense(int n, double g, double omega) {
  MatrixXcd h = omega * total_z(n);
  for (int q = 0; q + 1 < n; ++q) {
    std::vector<Matrix2cd> ops(n, Matrix2cd::Identity());
    ops[q] = ops[q + 1] = pauli2('X');
    h += g * kron_ops(ops);
  }
  return h;
}

}  // namespace oracle
