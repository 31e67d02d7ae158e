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

#include "camgate/harness.hpp"
#include "camgate/model.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace camgate
{

/// Name of the environment variable that overrides the output directory.
inline constexpr const char * kOutputDirEnv = "CAMGATE_OUTPUT_DIR";

/// Every setting of a run. Each field has one command-line flag and one key in
/// the JSON config file; precedence is flag > config file > default, except that
/// CAMGATE_OUTPUT_DIR sits between the flag and the config file for `output`.
struct RunConfig
{
  std::filesystem::path model;  // manifest
  std::filesystem::path weights;
  std::filesystem::path dataset;  // annotation file
  std::filesystem::path output = "camgate-out";
  double threshold = 0.5;
  double dilation = 1.0;
  TargetClass target_class;
  std::optional<LayerRef> target_layer;
  double alpha = 0.4;
  std::string colormap = "heat";
  InconclusivePolicy inconclusive = InconclusivePolicy::Fail;
  std::size_t threads = 0;  // 0 = available parallelism
  bool require_correct_class = false;
  std::string background_label = "empty";
  bool sidecars = false;
};

TargetClass parse_target_class(const std::string & text);
LayerRef parse_layer_ref(const std::string & text);

/// Applies the keys of a JSON config document; relative paths resolve against `base_dir`.
void apply_config_file(RunConfig & config, const std::filesystem::path & path);

/// Runs the command line; returns the process exit code (0 pass, 1 gate failure, 2 configuration error).
int run_cli(const std::vector<std::string> & args, std::ostream & out, std::ostream & err);

}  // namespace camgate
