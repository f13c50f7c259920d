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

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hlmetro/pauli_graph.hpp"

namespace hlm {

using StateVector = Eigen::VectorXcd;

inline constexpr double kZeroWeight = 1e-14;

int qubit_count(const StateVector& psi);
StateVector basis_state(int n, Mask bits);
StateVector product_state(const std::vector<Eigen::Vector2cd>& sites);

// Eigendecomposition of a dense Hermitian generator, reused across times.
struct Spectrum {
  Eigen::VectorXd energies;
  Eigen::MatrixXcd vectors;
  int n = 0;
};

Spectrum diagonalize(const Eigen::MatrixXcd& h);
Spectrum diagonalize(const PerturbedHamiltonian& H, int cap = kDenseCap);

StateVector evolve(const StateVector& psi, const Spectrum& sp, double t);
StateVector evolve(const StateVector& psi, const PerturbedHamiltonian& H, double t);
Eigen::MatrixXcd propagator(const Spectrum& sp, double t);

// exp(-i t H) psi by a substepped Taylor series on the Pauli sum. Used where
// a dense factorization is too slow (roughly n > 10).
StateVector evolve_action(const StateVector& psi, const std::vector<PauliString>& H, double t,
                          double tol = 1e-15);

// Midpoint rule, each step exp(-i ds H(s_mid)) applied by evolve_action.
StateVector evolve_time_dependent(const StateVector& psi, const TimeDependentHamiltonian& H,
                                  double t, int steps);
int default_td_steps(const TimeDependentHamiltonian& H, double t);

// Projective outcome on one qubit: the state is contracted with <e|.
using Projector = std::pair<int, Eigen::Vector2cd>;

// Removes qubit `pos` (packed index among the remaining qubits) by <e|.
StateVector contract_one(const StateVector& v, int pos, const Eigen::Vector2cd& e);
// Contracts every projector; the survivors keep their relative order.
StateVector contract(const StateVector& psi, int n, std::vector<Projector> record);

// Tr_rest |ket><bra| on qubit `pos` of packed vectors of equal size.
Eigen::Matrix2cd reduced_cross(const StateVector& ket, const StateVector& bra, int pos);

struct ReducedDensity {
  Eigen::Matrix2cd rho;
  double weight = 0.0;
};

// rho = Tr_rest(E psi E) / Tr(E psi), E the product of rank-one projectors.
ReducedDensity conditioned_reduced_density(const StateVector& psi, int n,
                                           const std::vector<Projector>& record, int target);

double expectation(const StateVector& psi, const std::vector<PauliString>& op);

// e^{isH} O e^{-isH}
Eigen::MatrixXcd heisenberg_operator(const Spectrum& sp, const Eigen::MatrixXcd& O, double s);
// || e^{isH} O e^{-isH} - O || (largest singular value)
double heisenberg_deviation(const Spectrum& sp, const Eigen::MatrixXcd& O, double s);
double heisenberg_deviation(const PerturbedHamiltonian& H, const Eigen::MatrixXcd& O, double s);

double operator_norm(const Eigen::MatrixXcd& m);

}  // namespace hlm
