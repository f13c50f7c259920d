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

#include <stdexcept>
#include <string>

namespace hlm {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed graphs, supports, out-of-range qubits.
struct StructuralError : Error {
  using Error::Error;
};
// Requested size exceeds a dense or bond-dimension cap.
struct ResourceError : Error {
  using Error::Error;
};
// Parameters outside the regime where a formula is defined.
struct DomainError : Error {
  using Error::Error;
};
// Conditional branch with vanishing weight.
struct DegenerateBranchError : Error {
  using Error::Error;
};
struct NumericalError : Error {
  using Error::Error;
};
// Both matrices of a basis-selection pair vanish, so no axis is singled out.
struct DegenerateBasisError : NumericalError {
  using NumericalError::NumericalError;
};
// Bad configuration or user input.
struct ValidationError : Error {
  using Error::Error;
};
// Phase function not monotone on the bracket, or a similar protocol breach.
struct ProtocolViolation : Error {
  using Error::Error;
};
struct IntegrationFailure : Error {
  using Error::Error;
};

}  // namespace hlm
