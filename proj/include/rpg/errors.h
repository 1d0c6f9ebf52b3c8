// Copyright 2026 The RPG Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RPG_ERRORS_H_
#define RPG_ERRORS_H_

#include <stdexcept>
#include <string>

namespace rpg {

// Caller passed something the operation cannot accept (shape mismatch,
// out-of-range label, bad parameter).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A statistic is undefined on this input (zero deviation, zero denominator).
class DegenerateError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed text or binary input. Messages carry the line or byte position.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Training produced a non-finite loss or gradient.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rpg

#endif  // RPG_ERRORS_H_
