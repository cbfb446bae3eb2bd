// Copyright 2026 The ghl Authors
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

#ifndef GHL_ERRORS_HPP_
#define GHL_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace ghl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Violated precondition on user-supplied input (sizes, counts, names).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A mean outside the family's mean domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

class SingularInformation : public Error {
 public:
  using Error::Error;
};

// A noncanonical-link iterate left the mean domain and step-halving could
// not bring it back.
class DomainEscape : public Error {
 public:
  using Error::Error;
};

class InfeasibleGrouping : public Error {
 public:
  using Error::Error;
};

class DegenerateGroup : public Error {
 public:
  using Error::Error;
};

class DegenerateRank : public Error {
 public:
  using Error::Error;
};

class UnsupportedFamily : public Error {
 public:
  using Error::Error;
};

// Unreadable file or malformed CSV.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace ghl

#endif  // GHL_ERRORS_HPP_
