// Copyright 2026 The wsnthin Authors.
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

#ifndef WSNTHIN_ERRORS_HPP_
#define WSNTHIN_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace wsnthin {

// Pipeline error taxonomy. These map onto the process exit codes used by the
// CLI (config -> 2, data -> 3, numeric -> 4). Pure-math domain violations in
// the conversion helpers use std::domain_error / std::range_error directly.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace wsnthin

#endif  // WSNTHIN_ERRORS_HPP_
