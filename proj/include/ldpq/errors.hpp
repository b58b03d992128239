// Copyright 2026 The ldpq Authors
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

#ifndef LDPQ_ERRORS_HPP_
#define LDPQ_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace ldpq {

// Invalid configuration or parameters: bad budgets, intervals, dimensions,
// malformed option sets.  Maps to process exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Bad input data: non-finite responses, values outside their declared domain,
// unreadable or malformed data files.  Maps to process exit code 3.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure: non-finite objective, optimizer breakdown.  Maps to
// process exit code 4.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Near-singular curvature matrix in the variance plug-in.  Carries the
// offending condition number.
class SingularMatrixError : public NumericalError {
 public:
  SingularMatrixError(const std::string& what, double condition_number)
      : NumericalError(what), condition_number_(condition_number) {}
  double condition_number() const { return condition_number_; }

 private:
  double condition_number_;
};

// Request outside the supported problem envelope (for example a mixture
// enumeration beyond the hard dimension cap).  Maps to exit code 2.
class CapabilityError : public std::invalid_argument {
 public:
  explicit CapabilityError(const std::string& what)
      : std::invalid_argument(what) {}
};

}  // namespace ldpq

#endif  // LDPQ_ERRORS_HPP_
