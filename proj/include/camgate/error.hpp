// Copyright 2026 The camgate Authors.
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

namespace camgate
{

enum class ErrorKind
{
  Configuration,  // bad manifest, weights, annotations or run config
  Input,          // bad image, out-of-range class, shape mismatch at call time
  Usage,          // API misuse, e.g. backward without a recorded forward pass
};

/// The single exception type thrown by the library. The kind decides the CLI exit code.
class Error : public std::runtime_error
{
public:
  Error(ErrorKind kind, const std::string & message) : std::runtime_error(message), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void config_error(const std::string & message)
{
  throw Error(ErrorKind::Configuration, message);
}

[[noreturn]] inline void input_error(const std::string & message)
{
  throw Error(ErrorKind::Input, message);
}

[[noreturn]] inline void usage_error(const std::string & message)
{
  throw Error(ErrorKind::Usage, message);
}

}  // namespace camgate
