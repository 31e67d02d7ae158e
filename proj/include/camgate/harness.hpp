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

// The heatmap gate: annotated samples in, per-sample verdicts and CI reports out.

#include "camgate/gradcam.hpp"
#include "camgate/model.hpp"

#include <json.hpp>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace camgate
{

/// Pixel rectangle in original-image coordinates, half-open on the max edges.
struct BoundingBox
{
  std::size_t x_min = 0;
  std::size_t y_min = 0;
  std::size_t x_max = 0;
  std::size_t y_max = 0;

  [[nodiscard]] std::size_t area() const noexcept { return (x_max - x_min) * (y_max - y_min); }
  bool operator==(const BoundingBox &) const = default;
};

struct AnnotatedSample
{
  std::string sample_id;
  std::filesystem::path image;  // resolved against the annotation file's directory
  std::string true_label;
  std::string odd_tag;
  std::vector<BoundingBox> boxes;

  bool operator==(const AnnotatedSample &) const = default;
};

enum class Status
{
  Pass,
  Fail,
  Inconclusive,
};

std::string to_string(Status status);

inline constexpr const char * kReasonOutsideRegion = "activation outside ground-truth region";
inline constexpr const char * kReasonDegenerate = "all-zero activation map";
inline constexpr const char * kReasonNoBoxes = "no ground-truth boxes for a non-background label";

struct Verdict
{
  std::string sample_id;
  std::string true_label;
  std::string odd_tag;
  std::optional<std::string> predicted_label;
  std::optional<double> confidence;
  bool classification_correct = false;
  std::optional<std::string> heatmap_label;
  std::optional<double> overlap_score;
  Status status = Status::Inconclusive;
  std::vector<std::string> reasons;
  std::optional<std::string> overlay;  // file name inside the output directory

  bool operator==(const Verdict &) const = default;
};

struct GatePolicy
{
  double threshold = 0.5;  // minimum overlap score
  double dilation = 1.0;  // box scale factor about its centre, >= 1
  bool require_correct_class = false;
  std::string background_label = "empty";
};

/// Throws a configuration error for a threshold outside [0,1] or dilation below 1.
void validate(const GatePolicy & policy);

/// Parses the JSON-lines annotation file. Errors name the offending line.
std::vector<AnnotatedSample> load_annotations(
  const std::filesystem::path & path, const std::vector<std::string> & class_labels,
  const std::string & background_label);

/// One annotation line; `line` is used in error messages only.
AnnotatedSample parse_annotation(
  const std::string & text, std::size_t line, const std::filesystem::path & base_dir);

nlohmann::json annotation_to_json(const AnnotatedSample & sample, const std::filesystem::path & base_dir);

/// Scales the box about its centre and snaps outward to whole pixels, clamped
/// to the image. Factor 1 returns the box unchanged.
BoundingBox dilate(const BoundingBox & box, double factor, std::size_t width, std::size_t height);

/// Membership mask of the union of the dilated boxes.
std::vector<bool> region_mask(
  const std::vector<BoundingBox> & boxes, double dilation, std::size_t width, std::size_t height);

/// Fraction of heatmap mass inside the union of dilated boxes, or nullopt for a
/// degenerate map. Boxes outside the map are an input error.
std::optional<double> overlap_score(const Heatmap & map, const std::vector<BoundingBox> & boxes, double dilation);

Verdict judge(
  const AnnotatedSample & sample, const InferenceRecord & record, const std::vector<std::string> & class_labels,
  const Heatmap & map, const GatePolicy & policy);

enum class TargetClassMode
{
  Predicted,
  True,
  Explicit,
};

struct TargetClass
{
  TargetClassMode mode = TargetClassMode::Predicted;
  std::size_t index = 0;  // Explicit only
};

std::string to_string(const TargetClass & target);

enum class InconclusivePolicy
{
  Fail,  // INCONCLUSIVE breaks the build and is a JUnit <failure>
  Tolerate,  // INCONCLUSIVE is a JUnit <skipped>
};

struct SuiteOptions
{
  GatePolicy policy;
  TargetClass target;
  double alpha = 0.4;
  std::string colormap = "heat";
  InconclusivePolicy inconclusive = InconclusivePolicy::Fail;
  std::size_t threads = 1;
  bool sidecars = false;
  /// Echoed verbatim into report.json (model and dataset provenance).
  nlohmann::json metadata = nlohmann::json::object();
};

struct Summary
{
  std::size_t total = 0;
  std::size_t pass = 0;
  std::size_t fail = 0;
  std::size_t inconclusive = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  std::optional<double> mean_overlap;
};

struct TestReport
{
  nlohmann::json suite;  // metadata plus resolved configuration
  std::vector<Verdict> verdicts;  // ordered by sample_id
  Summary summary;
  std::optional<CombinedHeatmap> combined;
  std::optional<std::string> combined_error;
  int exit_status = 0;
};

Summary summarize(const std::vector<Verdict> & verdicts);

/// 0 when nothing failed and INCONCLUSIVE is tolerated or absent, else 1.
int exit_status(const Summary & summary, InconclusivePolicy policy);

/// Decodes nothing: runs forward and Grad-CAM on an already decoded sample
/// image and returns the heatmap at the image's resolution.
Heatmap sample_heatmap(
  const Model & model, const AnnotatedSample & sample, const Image & image, const TargetClass & target,
  InferenceRecord * record_out = nullptr);

/// Combined heatmap over a dataset, folded in sample_id order. Samples that
/// cannot be read are skipped and described in `failures`.
CombinedHeatmap combine_dataset(
  const Model & model, const std::vector<AnnotatedSample> & dataset, const TargetClass & target,
  std::size_t threads, std::vector<std::string> * failures = nullptr);

/// Runs every sample through forward, Grad-CAM and the gate; writes overlays,
/// the combined heatmap, report.json and report.xml into `output_dir`.
TestReport run_suite(
  const Model & model, const std::vector<AnnotatedSample> & dataset, const SuiteOptions & options,
  const std::filesystem::path & output_dir);

nlohmann::json report_to_json(const TestReport & report);
std::string report_to_junit(const TestReport & report, InconclusivePolicy policy);

/// Hex SHA-256 of a file's bytes.
std::string file_sha256(const std::filesystem::path & path);

}  // namespace camgate
