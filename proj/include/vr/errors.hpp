// Copyright 2026 The vr Authors
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

#ifndef VR_ERRORS_HPP_
#define VR_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace vr {

// A named argument violates its domain (e.g. a probability outside [0,1]).
class ParameterError : public std::invalid_argument {
 public:
  explicit ParameterError(const std::string& what)
      : std::invalid_argument(what) {}
};

// Parameters are valid but outside the regime the fast paths support
// (r >= 1/2). The brute-force oracle still accepts them.
class UnsupportedRegimeError : public std::domain_error {
 public:
  explicit UnsupportedRegimeError(const std::string& what)
      : std::domain_error(what) {}
};

// A quadratic-cost oracle was asked for an instance above its size cap.
class SizeError : public std::length_error {
 public:
  explicit SizeError(const std::string& what) : std::length_error(what) {}
};

// A blanket distribution assigns zero mass to an output the first user's
// randomizer can emit, so no finite ratio bound exists.
class UnboundedRatioError : public std::domain_error {
 public:
  explicit UnboundedRatioError(const std::string& what)
      : std::domain_error(what) {}
};

// A privacy curve does not cover the grid required by a discretization.
class RangeError : public std::out_of_range {
 public:
  explicit RangeError(const std::string& what) : std::out_of_range(what) {}
};

}  // namespace vr

#endif  // VR_ERRORS_HPP_
