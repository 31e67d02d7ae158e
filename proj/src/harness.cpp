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

#include "camgate/harness.hpp"

#include "camgate/error.hpp"
#include "camgate/imaging.hpp"
#include "camgate/ordered_parallel.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

namespace camgate
{

using nlohmann::json;

std::string to_string(Status status)
{
  switch (status) {
    case Status::Pass:
      return "PASS";
    case Status::Fail:
      return "FAIL";
    case Status::Inconclusive:
      return "INCONCLUSIVE";
  }
  return "UNKNOWN";
}

std::string to_string(const TargetClass & target)
{
  switch (target.mode) {
    case TargetClassMode::Predicted:
      return "predicted";
    case TargetClassMode::True:
      return "true";
    case TargetClassMode::Explicit:
      return std::to_string(target.index);
  }
  return "unknown";
}

void validate(const GatePolicy & policy)
{
  if (!(policy.threshold >= 0.0 && policy.threshold <= 1.0)) {
    config_error("threshold must lie in [0,1]");
  }
  if (!(policy.dilation >= 1.0) || !std::isfinite(policy.dilation)) {
    config_error("dilation must be a finite factor >= 1");
  }
}

// ---------------------------------------------------------------------------
// Annotations

namespace
{

std::string line_prefix(std::size_t line) { return "annotations line " + std::to_string(line) + ": "; }

const json & required(const json & obj, const char * key, std::size_t line)
{
  const auto it = obj.find(key);
  if (it == obj.end()) {
    config_error(line_prefix(line) + "missing field '" + key + "'");
  }
  return *it;
}

std::string required_string(const json & obj, const char * key, std::size_t line)
{
  const json & v = required(obj, key, line);
  if (!v.is_string() || v.get<std::string>().empty()) {
    config_error(line_prefix(line) + "field '" + key + "' must be a non-empty string");
  }
  return v.get<std::string>();
}

BoundingBox parse_box(const json & v, std::size_t line, std::size_t index)
{
  const std::string where = line_prefix(line) + "boxes[" + std::to_string(index) + "] ";
  if (!v.is_array() || v.size() != 4) {
    config_error(where + "must be [x_min,y_min,x_max,y_max]");
  }
  std::size_t c[4];
  for (std::size_t i = 0; i < 4; ++i) {
    if (!v[i].is_number_integer() || v[i].get<std::int64_t>() < 0) {
      config_error(where + "coordinates must be non-negative integers");
    }
    c[i] = v[i].get<std::size_t>();
  }
  if (c[0] >= c[2]) {
    config_error(where + "has x_min >= x_max");
  }
  if (c[1] >= c[3]) {
    config_error(where + "has y_min >= y_max");
  }
  return {c[0], c[1], c[2], c[3]};
}

}  // namespace

AnnotatedSample parse_annotation(const std::string & text, std::size_t line, const std::filesystem::path & base_dir)
{
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error & e) {
    config_error(line_prefix(line) + "not valid JSON: " + e.what());
  }
  if (!doc.is_object()) {
    config_error(line_prefix(line) + "expected a JSON object");
  }
  for (const auto & [key, value] : doc.items()) {
    (void)value;
    if (key != "sample_id" && key != "image" && key != "true_label" && key != "odd_tag" && key != "boxes") {
      config_error(line_prefix(line) + "unknown field '" + key + "'");
    }
  }
  AnnotatedSample sample;
  sample.sample_id = required_string(doc, "sample_id", line);
  const std::filesystem::path image = required_string(doc, "image", line);
  sample.image = image.is_absolute() ? image : base_dir / image;
  sample.true_label = required_string(doc, "true_label", line);
  if (const auto it = doc.find("odd_tag"); it != doc.end()) {
    if (!it->is_string()) {
      config_error(line_prefix(line) + "field 'odd_tag' must be a string");
    }
    sample.odd_tag = it->get<std::string>();
  }
  const json & boxes = required(doc, "boxes", line);
  if (!boxes.is_array()) {
    config_error(line_prefix(line) + "field 'boxes' must be an array");
  }
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    sample.boxes.push_back(parse_box(boxes[i], line, i));
  }
  return sample;
}

json annotation_to_json(const AnnotatedSample & sample, const std::filesystem::path & base_dir)
{
  json boxes = json::array();
  for (const BoundingBox & b : sample.boxes) {
    boxes.push_back({b.x_min, b.y_min, b.x_max, b.y_max});
  }
  return {
    {"sample_id", sample.sample_id},
    {"image", sample.image.lexically_relative(base_dir).generic_string()},
    {"true_label", sample.true_label},
    {"odd_tag", sample.odd_tag},
    {"boxes", boxes},
  };
}

std::vector<AnnotatedSample> load_annotations(
  const std::filesystem::path & path, const std::vector<std::string> & class_labels,
  const std::string & background_label)
{
  std::ifstream in(path);
  if (!in) {
    config_error("cannot open annotations '" + path.string() + "'");
  }
  const std::filesystem::path base_dir = path.parent_path();
  std::vector<AnnotatedSample> samples;
  std::set<std::string> ids;
  std::string text;
  for (std::size_t line = 1; std::getline(in, text); ++line) {
    if (text.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    AnnotatedSample sample = parse_annotation(text, line, base_dir);
    if (!ids.insert(sample.sample_id).second) {
      config_error(line_prefix(line) + "duplicate sample_id '" + sample.sample_id + "'");
    }
    if (std::find(class_labels.begin(), class_labels.end(), sample.true_label) == class_labels.end()) {
      config_error(line_prefix(line) + "label '" + sample.true_label + "' is not a model class");
    }
    if (sample.boxes.empty() && sample.true_label != background_label) {
      config_error(
        line_prefix(line) + "label '" + sample.true_label + "' needs at least one box (only '" +
        background_label + "' may have none)");
    }
    samples.push_back(std::move(sample));
  }
  return samples;
}

// ---------------------------------------------------------------------------
// Overlap

BoundingBox dilate(const BoundingBox & box, double factor, std::size_t width, std::size_t height)
{
  const auto grow = [factor](std::size_t lo, std::size_t hi, std::size_t limit) {
    const double centre = (static_cast<double>(lo) + static_cast<double>(hi)) / 2.0;
    const double half = (static_cast<double>(hi) - static_cast<double>(lo)) / 2.0 * factor;
    const double a = std::max(0.0, std::floor(centre - half));
    const double b = std::min(static_cast<double>(limit), std::ceil(centre + half));
    return std::pair{static_cast<std::size_t>(a), static_cast<std::size_t>(b)};
  };
  const auto [x0, x1] = grow(box.x_min, box.x_max, width);
  const auto [y0, y1] = grow(box.y_min, box.y_max, height);
  return {x0, y0, x1, y1};
}

std::vector<bool> region_mask(
  const std::vector<BoundingBox> & boxes, double dilation, std::size_t width, std::size_t height)
{
  std::vector<bool> mask(width * height, false);
  for (const BoundingBox & box : boxes) {
    if (box.x_max > width || box.y_max > height) {
      input_error(
        "bounding box [" + std::to_string(box.x_min) + "," + std::to_string(box.y_min) + "," +
        std::to_string(box.x_max) + "," + std::to_string(box.y_max) + "] exceeds image bounds " +
        std::to_string(width) + "x" + std::to_string(height));
    }
    const BoundingBox d = dilate(box, dilation, width, height);
    for (std::size_t y = d.y_min; y < d.y_max; ++y) {
      for (std::size_t x = d.x_min; x < d.x_max; ++x) {
        mask[y * width + x] = true;
      }
    }
  }
  return mask;
}

std::optional<double> overlap_score(const Heatmap & map, const std::vector<BoundingBox> & boxes, double dilation)
{
  const std::vector<bool> mask = region_mask(boxes, dilation, map.map.width, map.map.height);
  if (map.degenerate) {
    return std::nullopt;
  }
  double total = 0.0;
  for (const double v : map.map.values) {
    total += v;
  }
  if (!(total > 0.0)) {
    return std::nullopt;
  }
  return std::min(1.0, masked_mass(map.map, mask) / total);
}

// ---------------------------------------------------------------------------
// Verdicts

Verdict judge(
  const AnnotatedSample & sample, const InferenceRecord & record, const std::vector<std::string> & class_labels,
  const Heatmap & map, const GatePolicy & policy)
{
  Verdict v;
  v.sample_id = sample.sample_id;
  v.true_label = sample.true_label;
  v.odd_tag = sample.odd_tag;
  v.predicted_label = class_labels.at(record.predicted_class);
  v.confidence = record.confidence;
  v.classification_correct = *v.predicted_label == sample.true_label;
  v.heatmap_label = map.class_label;

  const bool background = sample.true_label == policy.background_label;
  const std::string misclassified =
    "misclassified: predicted '" + *v.predicted_label + "', expected '" + sample.true_label + "'";
  const bool class_gate = background || policy.require_correct_class;

  if (map.degenerate || (!background && sample.boxes.empty())) {
    v.status = Status::Inconclusive;
    v.reasons.emplace_back(map.degenerate ? kReasonDegenerate : kReasonNoBoxes);
    if (class_gate && !v.classification_correct) {
      v.reasons.push_back(misclassified);
    }
    return v;
  }

  v.status = Status::Pass;
  if (!background) {
    v.overlap_score = overlap_score(map, sample.boxes, policy.dilation);
    if (!v.overlap_score) {
      v.status = Status::Inconclusive;
      v.reasons.emplace_back(kReasonDegenerate);
      return v;
    }
    if (*v.overlap_score < policy.threshold) {
      v.status = Status::Fail;
      v.reasons.emplace_back(kReasonOutsideRegion);
    }
  }
  if (class_gate && !v.classification_correct) {
    v.status = Status::Fail;
    v.reasons.push_back(misclassified);
  }
  return v;
}

Summary summarize(const std::vector<Verdict> & verdicts)
{
  Summary s;
  s.total = verdicts.size();
  double overlap_sum = 0.0;
  std::size_t overlap_count = 0;
  for (const Verdict & v : verdicts) {
    switch (v.status) {
      case Status::Pass:
        ++s.pass;
        break;
      case Status::Fail:
        ++s.fail;
        break;
      case Status::Inconclusive:
        ++s.inconclusive;
        break;
    }
    s.correct += v.classification_correct ? 1 : 0;
    if (v.overlap_score) {
      overlap_sum += *v.overlap_score;
      ++overlap_count;
    }
  }
  s.accuracy = s.total == 0 ? 0.0 : static_cast<double>(s.correct) / static_cast<double>(s.total);
  if (overlap_count > 0) {
    s.mean_overlap = overlap_sum / static_cast<double>(overlap_count);
  }
  return s;
}

int exit_status(const Summary & summary, InconclusivePolicy policy)
{
  if (summary.fail > 0) {
    return 1;
  }
  if (summary.inconclusive > 0 && policy == InconclusivePolicy::Fail) {
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Suite

namespace
{

void write_text(const std::filesystem::path & path, const std::string & text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    input_error("cannot write '" + path.string() + "'");
  }
  out << text;
  if (!out) {
    input_error("failed writing '" + path.string() + "'");
  }
}

std::string sidecar_name(const std::string & overlay)
{
  const std::string suffix = ".png";
  return overlay.substr(0, overlay.size() - suffix.size()) + ".json";
}

json config_json(const SuiteOptions & o)
{
  return {
    {"threshold", o.policy.threshold},
    {"dilation", o.policy.dilation},
    {"require_correct_class", o.policy.require_correct_class},
    {"background_label", o.policy.background_label},
    {"target_class", to_string(o.target)},
    {"alpha", o.alpha},
    {"colormap", o.colormap},
    {"inconclusive", o.inconclusive == InconclusivePolicy::Fail ? "fail" : "tolerate"},
    {"sidecars", o.sidecars},
  };
}

std::vector<std::size_t> sample_id_order(const std::vector<AnnotatedSample> & dataset)
{
  std::vector<std::size_t> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    order[i] = i;
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dataset[a].sample_id < dataset[b].sample_id;
  });
  return order;
}

struct SampleResult
{
  Verdict verdict;
  std::optional<Heatmap> heatmap;
};

SampleResult evaluate_sample(
  const Model & model, const AnnotatedSample & sample, const SuiteOptions & options, const ColorMap & cmap,
  const std::filesystem::path & output_dir)
{
  SampleResult result;
  Verdict & v = result.verdict;
  v.sample_id = sample.sample_id;
  v.true_label = sample.true_label;
  v.odd_tag = sample.odd_tag;
  try {
    const Image image = decode(sample.image);
    InferenceRecord record;
    Heatmap heat = sample_heatmap(model, sample, image, options.target, &record);
    v = judge(sample, record, model.class_labels(), heat, options.policy);

    const std::string overlay = heatmap_filename(sample.sample_id, heat.class_label);
    write_png(output_dir / overlay, superimpose(to_rgb(image), colorize(heat.map, cmap), options.alpha));
    if (options.sidecars) {
      write_text(output_dir / sidecar_name(overlay), heatmap_sidecar(heat).dump() + "\n");
    }
    v.overlay = overlay;
    result.heatmap = std::move(heat);
  } catch (const Error & e) {
    if (e.kind() == ErrorKind::Configuration) {
      throw;
    }
    v.status = Status::Inconclusive;
    v.overlap_score.reset();
    v.reasons = {e.what()};
  }
  return result;
}

}  // namespace

Heatmap sample_heatmap(
  const Model & model, const AnnotatedSample & sample, const Image & image, const TargetClass & target,
  InferenceRecord * record_out)
{
  InferenceRecord record = forward(model, image_to_tensor(image, model.input_shape(), model.normalization()));
  std::optional<std::size_t> cls;
  if (target.mode == TargetClassMode::True) {
    cls = model.class_index(sample.true_label);
    if (!cls) {
      config_error("sample '" + sample.sample_id + "': label '" + sample.true_label + "' is not a model class");
    }
  } else if (target.mode == TargetClassMode::Explicit) {
    cls = target.index;
  }
  Heatmap heat = gradcam_for(model, record, cls, image.width, image.height);
  heat.sample_id = sample.sample_id;
  if (record_out != nullptr) {
    *record_out = std::move(record);
  }
  return heat;
}

CombinedHeatmap combine_dataset(
  const Model & model, const std::vector<AnnotatedSample> & dataset, const TargetClass & target,
  std::size_t threads, std::vector<std::string> * failures)
{
  if (dataset.empty()) {
    config_error("dataset is empty");
  }
  if (target.mode == TargetClassMode::Explicit && target.index >= model.class_count()) {
    config_error(
      "target class index " + std::to_string(target.index) + " out of range for " +
      std::to_string(model.class_count()) + " classes");
  }
  const std::vector<std::size_t> order = sample_id_order(dataset);
  CombinedAccumulator accumulator;
  struct Outcome
  {
    std::optional<Heatmap> heatmap;
    std::string failure;
  };
  ordered_parallel(
    order.size(), threads,
    [&](std::size_t k) {
      const AnnotatedSample & sample = dataset[order[k]];
      Outcome out;
      try {
        out.heatmap = sample_heatmap(model, sample, decode(sample.image), target);
      } catch (const Error & e) {
        if (e.kind() == ErrorKind::Configuration) {
          throw;
        }
        out.failure = sample.sample_id + ": " + e.what();
      }
      return out;
    },
    [&](std::size_t, Outcome && out) {
      if (out.heatmap) {
        accumulator.add(*out.heatmap);
      } else if (failures != nullptr) {
        failures->push_back(std::move(out.failure));
      }
    });
  return accumulator.finish();
}

TestReport run_suite(
  const Model & model, const std::vector<AnnotatedSample> & dataset, const SuiteOptions & options,
  const std::filesystem::path & output_dir)
{
  validate(options.policy);
  if (!(options.alpha >= 0.0 && options.alpha <= 1.0)) {
    config_error("alpha must lie in [0,1]");
  }
  const ColorMap cmap = ColorMap::by_name(options.colormap);
  if (dataset.empty()) {
    config_error("dataset is empty");
  }
  if (options.target.mode == TargetClassMode::Explicit && options.target.index >= model.class_count()) {
    config_error(
      "target class index " + std::to_string(options.target.index) + " out of range for " +
      std::to_string(model.class_count()) + " classes");
  }
  std::set<std::string> ids;
  std::set<std::string> stems;
  for (const AnnotatedSample & s : dataset) {
    if (!model.class_index(s.true_label)) {
      config_error("sample '" + s.sample_id + "': label '" + s.true_label + "' is not a model class");
    }
    if (!ids.insert(s.sample_id).second) {
      config_error("duplicate sample_id '" + s.sample_id + "'");
    }
    if (!stems.insert(sanitize_filename_part(s.sample_id)).second) {
      config_error("sample_id '" + s.sample_id + "' collides with another after file-name sanitizing");
    }
  }
  std::error_code ec;
  std::filesystem::create_directories(output_dir, ec);
  if (ec || !std::filesystem::is_directory(output_dir)) {
    config_error("cannot create output directory '" + output_dir.string() + "'");
  }

  const std::vector<std::size_t> order = sample_id_order(dataset);

  // Heatmaps are folded strictly in sample_id order so the combined map does
  // not depend on scheduling.
  std::vector<Verdict> verdicts;
  verdicts.reserve(order.size());
  CombinedAccumulator accumulator;
  std::optional<std::string> combined_error;
  ordered_parallel(
    order.size(), options.threads,
    [&](std::size_t k) { return evaluate_sample(model, dataset[order[k]], options, cmap, output_dir); },
    [&](std::size_t, SampleResult && r) {
      verdicts.push_back(std::move(r.verdict));
      if (r.heatmap && !combined_error) {
        try {
          accumulator.add(*r.heatmap);
        } catch (const Error & e) {
          combined_error = e.what();
        }
      }
    });

  TestReport report;
  report.suite = options.metadata;
  report.suite["config"] = config_json(options);
  report.verdicts = std::move(verdicts);
  report.summary = summarize(report.verdicts);
  report.exit_status = exit_status(report.summary, options.inconclusive);
  if (combined_error) {
    report.combined_error = combined_error;
  } else if (accumulator.contributing() == 0) {
    report.combined_error = "no valid heatmaps to combine";
  } else {
    report.combined = accumulator.finish();
    write_png(output_dir / "combined.heatmap.png", colorize(report.combined->map, cmap));
    write_text(output_dir / "combined.heatmap.json", combined_sidecar(*report.combined).dump() + "\n");
  }

  write_text(output_dir / "report.json", report_to_json(report).dump(2) + "\n");
  write_text(output_dir / "report.xml", report_to_junit(report, options.inconclusive));
  return report;
}

// ---------------------------------------------------------------------------
// Report rendering

namespace
{

template <class T>
json optional_json(const std::optional<T> & v)
{
  return v ? json(*v) : json(nullptr);
}

json verdict_json(const Verdict & v)
{
  return {
    {"sample_id", v.sample_id},
    {"true_label", v.true_label},
    {"odd_tag", v.odd_tag},
    {"predicted_label", optional_json(v.predicted_label)},
    {"confidence", optional_json(v.confidence)},
    {"classification_correct", v.classification_correct},
    {"heatmap_label", optional_json(v.heatmap_label)},
    {"overlap_score", optional_json(v.overlap_score)},
    {"status", to_string(v.status)},
    {"reasons", v.reasons},
    {"overlay", optional_json(v.overlay)},
  };
}

std::string xml_escape(const std::string & text)
{
  std::string out;
  out.reserve(text.size());
  for (const char ch : text) {
    switch (ch) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      case '\'':
        out += "&apos;";
        break;
      default:
        out += ch;
    }
  }
  return out;
}

std::string fixed(double v, int digits)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string join(const std::vector<std::string> & parts, const std::string & sep)
{
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    out += (i == 0 ? "" : sep) + parts[i];
  }
  return out;
}

}  // namespace

json report_to_json(const TestReport & report)
{
  json doc;
  doc["schema_version"] = 1;
  doc["suite"] = report.suite;
  const Summary & s = report.summary;
  doc["summary"] = {
    {"total", s.total},
    {"pass", s.pass},
    {"fail", s.fail},
    {"inconclusive", s.inconclusive},
    {"correct", s.correct},
    {"accuracy", s.accuracy},
    {"mean_overlap", optional_json(s.mean_overlap)},
  };
  json verdicts = json::array();
  for (const Verdict & v : report.verdicts) {
    verdicts.push_back(verdict_json(v));
  }
  doc["verdicts"] = std::move(verdicts);
  if (report.combined) {
    doc["combined_heatmap"] = {
      {"overlay", "combined.heatmap.png"},
      {"sidecar", "combined.heatmap.json"},
      {"sample_count", report.combined->sample_count},
      {"sample_ids", report.combined->sample_ids},
      {"excluded_ids", report.combined->excluded_ids},
    };
  } else {
    doc["combined_heatmap"] = nullptr;
  }
  doc["combined_error"] = optional_json(report.combined_error);
  doc["exit_status"] = report.exit_status;
  return doc;
}

std::string report_to_junit(const TestReport & report, InconclusivePolicy policy)
{
  const Summary & s = report.summary;
  const bool inconclusive_fails = policy == InconclusivePolicy::Fail;
  const std::size_t failures = s.fail + (inconclusive_fails ? s.inconclusive : 0);
  const std::size_t skipped = inconclusive_fails ? 0 : s.inconclusive;
  const std::string counts = " tests=\"" + std::to_string(s.total) + "\" failures=\"" + std::to_string(failures) +
                             "\" errors=\"0\" skipped=\"" + std::to_string(skipped) + "\"";

  std::ostringstream xml;
  xml << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  xml << "<testsuites name=\"camgate\"" << counts << ">\n";
  xml << "  <testsuite name=\"camgate.heatmap_gate\"" << counts << ">\n";
  xml << "    <properties>\n";
  if (report.suite.contains("config")) {
    for (const auto & [key, value] : report.suite["config"].items()) {
      const std::string text = value.is_string() ? value.get<std::string>() : value.dump();
      xml << "      <property name=\"" << xml_escape(key) << "\" value=\"" << xml_escape(text) << "\"/>\n";
    }
  }
  xml << "    </properties>\n";
  for (const Verdict & v : report.verdicts) {
    xml << "    <testcase name=\"" << xml_escape(v.sample_id) << "\" classname=\"camgate."
        << xml_escape(sanitize_filename_part(v.true_label)) << "\"";
    std::string detail = "true=" + v.true_label;
    if (v.predicted_label) {
      detail += " predicted=" + *v.predicted_label + " confidence=" + fixed(*v.confidence, 6);
    }
    if (v.overlap_score) {
      detail += " overlap=" + fixed(*v.overlap_score, 6);
    }
    const std::string message = xml_escape(join(v.reasons, "; "));
    if (v.status == Status::Pass) {
      xml << "/>\n";
    } else if (v.status == Status::Fail || inconclusive_fails) {
      xml << ">\n      <failure message=\"" << message << "\" type=\"" << to_string(v.status) << "\">"
          << xml_escape(detail) << "</failure>\n    </testcase>\n";
    } else {
      xml << ">\n      <skipped message=\"" << message << "\"/>\n    </testcase>\n";
    }
  }
  xml << "  </testsuite>\n";
  xml << "</testsuites>\n";
  return xml.str();
}

std::string file_sha256(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    config_error("cannot open '" + path.string() + "' for hashing");
  }
  const std::vector<char> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    usage_error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0x0f];
  }
  return out;
}

}  // namespace camgate
