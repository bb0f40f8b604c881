// Copyright 2026 The Consortium Authors
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

#ifndef CONSORTIUM_ERRORS_H_
#define CONSORTIUM_ERRORS_H_

#include <stdexcept>
#include <string>

namespace consortium {

// Input errors use std::invalid_argument (bad parameters, unparseable
// configuration) and std::domain_error (a formula evaluated outside its
// domain). The two types below signal failures that are not the caller's
// fault.

// An algebraic identity that must hold did not hold to tolerance.
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A precondition of an operation was violated by the calling code, e.g.
// requesting egalitarian payoffs for a game that fails admission.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace consortium

#endif  // CONSORTIUM_ERRORS_H_
