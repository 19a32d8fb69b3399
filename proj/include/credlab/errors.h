// Copyright 2026 The Credlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CREDLAB_ERRORS_H_
#define CREDLAB_ERRORS_H_

#include <stdexcept>
#include <string>

namespace credlab {

// Base class for every error raised by the library. Callers that only care
// about "something went wrong in credlab" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An argument lies outside the domain of a generator or distribution.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A derivative was requested from a non-differentiable approval function.
class NotDifferentiableError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

// The perturbation payoff is constant, so there is nothing to trade off.
class NoConflictError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

// Quadrature or root finding failed to reach its tolerance.
class NumericsError : public Error {
 public:
  using Error::Error;
};

// The optimal step threshold falls outside the report space.
class DegenerateRegimeError : public Error {
 public:
  using Error::Error;
};

// A capacity table is not a valid monotone submodular function.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// A finite-difference step crossed a breakpoint of the greedy order.
class OrderingChangedError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace credlab

#endif  // CREDLAB_ERRORS_H_
