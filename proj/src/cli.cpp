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

#include "camgate/cli.hpp"

#include "camgate/error.hpp"
#include "camgate/gradcam.hpp"
#include "camgate/imaging.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <thread>

namespace camgate
{

using nlohmann::json;

namespace
{

bool is_unsigned_integer(const std::string & text)
{
  return !text.empty() && std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::size_t parse_index(const std::string & text, const char * what)
{
  try {
    return static_cast<std::size_t>(std::stoull(text));
  } catch (const std::exception &) {
    config_error(std::string(what) + " '" + text + "' is out of range");
  }
}

InconclusivePolicy parse_inconclusive(const std::string & text)
{
  if (text == "fail") {
    return InconclusivePolicy::Fail;
  }
  if (text == "tolerate") {
    return InconclusivePolicy::Tolerate;
  }
  config_error("inconclusive policy must be 'fail' or 'tolerate', got '" + text + "'");
}

}  // namespace

TargetClass parse_target_class(const std::string & text)
{
  if (text == "predicted") {
    return {TargetClassMode::Predicted, 0};
  }
  if (text == "true") {
    return {TargetClassMode::True, 0};
  }
  if (is_unsigned_integer(text)) {
    return {TargetClassMode::Explicit, parse_index(text, "target class")};
  }
  config_error("target class must be 'predicted', 'true' or a class index, got '" + text + "'");
}

LayerRef parse_layer_ref(const std::string & text)
{
  if (is_unsigned_integer(text)) {
    return parse_index(text, "target layer");
  }
  if (text.empty()) {
    config_error("target layer must be a layer index or name");
  }
  return text;
}

void apply_config_file(RunConfig & config, const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    config_error("cannot open config file '" + path.string() + "'");
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error & e) {
    config_error("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) {
    config_error("config file '" + path.string() + "' must hold a JSON object");
  }
  const std::filesystem::path base = path.parent_path();
  const auto where = [&](const std::string & key) { return "config file '" + path.string() + "': " + key; };
  const auto str = [&](const std::string & key, const json & v) {
    if (!v.is_string()) {
      config_error(where(key) + " must be a string");
    }
    return v.get<std::string>();
  };
  const auto num = [&](const std::string & key, const json & v) {
    if (!v.is_number()) {
      config_error(where(key) + " must be a number");
    }
    return v.get<double>();
  };
  const auto flag = [&](const std::string & key, const json & v) {
    if (!v.is_boolean()) {
      config_error(where(key) + " must be true or false");
    }
    return v.get<bool>();
  };
  const auto file = [&](const std::string & key, const json & v) {
    const std::filesystem::path p = str(key, v);
    return p.is_absolute() ? p : base / p;
  };
  const auto index_or_text = [&](const std::string & key, const json & v) {
    if (v.is_number_unsigned()) {
      return std::to_string(v.get<std::size_t>());
    }
    return str(key, v);
  };

  for (const auto & [key, v] : doc.items()) {
    if (key == "model") {
      config.model = file(key, v);
    } else if (key == "weights") {
      config.weights = file(key, v);
    } else if (key == "dataset") {
      config.dataset = file(key, v);
    } else if (key == "output") {
      config.output = file(key, v);
    } else if (key == "threshold") {
      config.threshold = num(key, v);
    } else if (key == "dilation") {
      config.dilation = num(key, v);
    } else if (key == "target_class") {
      config.target_class = parse_target_class(index_or_text(key, v));
    } else if (key == "target_layer") {
      config.target_layer = parse_layer_ref(index_or_text(key, v));
    } else if (key == "alpha") {
      config.alpha = num(key, v);
    } else if (key == "colormap") {
      config.colormap = str(key, v);
    } else if (key == "inconclusive") {
      config.inconclusive = parse_inconclusive(str(key, v));
    } else if (key == "threads") {
      if (!v.is_number_unsigned()) {
        config_error(where(key) + " must be a non-negative integer");
      }
      config.threads = v.get<std::size_t>();
    } else if (key == "require_correct_class") {
      config.require_correct_class = flag(key, v);
    } else if (key == "background_label") {
      config.background_label = str(key, v);
    } else if (key == "sidecars") {
      config.sidecars = flag(key, v);
    } else {
      config_error(where(key) + " is not a known setting");
    }
  }
}

namespace
{

enum class Command
{
  Explain,
  Combined,
  Test,
};

// Raw flag values; only the ones the user actually passed are applied.
struct Flags
{
  std::string config;
  std::string model;
  std::string weights;
  std::string dataset;
  std::string output;
  double threshold = 0.0;
  double dilation = 0.0;
  std::string target_class;
  std::string target_layer;
  double alpha = 0.0;
  std::string colormap;
  std::string inconclusive;
  std::size_t threads = 0;
  bool require_correct_class = false;
  std::string background_label;
  bool sidecars = false;
  std::string image;
  std::string explain_class;
};

struct Options
{
  CLI::Option * config = nullptr;
  CLI::Option * model = nullptr;
  CLI::Option * weights = nullptr;
  CLI::Option * dataset = nullptr;
  CLI::Option * output = nullptr;
  CLI::Option * threshold = nullptr;
  CLI::Option * dilation = nullptr;
  CLI::Option * target_class = nullptr;
  CLI::Option * target_layer = nullptr;
  CLI::Option * alpha = nullptr;
  CLI::Option * colormap = nullptr;
  CLI::Option * inconclusive = nullptr;
  CLI::Option * threads = nullptr;
  CLI::Option * require_correct_class = nullptr;
  CLI::Option * background_label = nullptr;
  CLI::Option * sidecars = nullptr;
  CLI::Option * image = nullptr;
  CLI::Option * explain_class = nullptr;
};

Options add_run_options(CLI::App & sub, Flags & f, Command command)
{
  Options o;
  o.config = sub.add_option("--config", f.config, "JSON config file; its keys mirror these flags");
  o.model = sub.add_option("-m,--model", f.model, "model manifest (JSON)");
  o.weights = sub.add_option("-w,--weights", f.weights, "model weights (raw little-endian float32)");
  if (command != Command::Explain) {
    o.dataset = sub.add_option("-d,--dataset", f.dataset, "annotation file (JSON lines)");
  }
  o.output = sub.add_option(
    "-o,--output", f.output, std::string("output directory (default camgate-out, env ") + kOutputDirEnv + ")");
  if (command == Command::Test) {
    o.threshold = sub.add_option("--threshold", f.threshold, "minimum overlap score to pass, in [0,1] (default 0.5)");
    o.dilation = sub.add_option("--dilation", f.dilation, "bounding-box scale factor, >= 1 (default 1.0)");
    o.require_correct_class = sub.add_flag(
      "--require-correct-class,!--no-require-correct-class", f.require_correct_class,
      "also fail misclassified samples (default off)");
    o.inconclusive = sub.add_option(
      "--inconclusive", f.inconclusive, "INCONCLUSIVE handling: fail | tolerate (default fail)");
  }
  if (command != Command::Explain) {
    o.background_label = sub.add_option(
      "--background-label", f.background_label, "class judged on classification only (default empty)");
  }
  o.target_class = sub.add_option(
    "--target-class", f.target_class, "heatmap class: predicted | true | <index> (default predicted)");
  o.target_layer = sub.add_option("--target-layer", f.target_layer, "conv2d layer name or index (default last conv2d)");
  o.alpha = sub.add_option("--alpha", f.alpha, "overlay opacity in [0,1] (default 0.4)");
  o.colormap = sub.add_option("--colormap", f.colormap, "heat | grayscale (default heat)");
  o.threads = sub.add_option("-j,--threads", f.threads, "worker threads, 0 = available parallelism (default 0)");
  if (command == Command::Test) {
    o.sidecars = sub.add_flag(
      "--sidecars,!--no-sidecars", f.sidecars, "write a JSON value grid next to every overlay (default off)");
  }
  if (command == Command::Explain) {
    o.image = sub.add_option("-i,--image", f.image, "input image (PNG or binary PPM)")->required();
    o.explain_class = sub.add_option("--class", f.explain_class, "class index or label to explain");
  }
  return o;
}

bool given(const CLI::Option * option) { return option != nullptr && option->count() > 0; }

RunConfig resolve(const Flags & f, const Options & o)
{
  RunConfig c;
  if (given(o.config)) {
    apply_config_file(c, f.config);
  }
  if (const char * env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') {
    c.output = env;
  }
  if (given(o.model)) c.model = f.model;
  if (given(o.weights)) c.weights = f.weights;
  if (given(o.dataset)) c.dataset = f.dataset;
  if (given(o.output)) c.output = f.output;
  if (given(o.threshold)) c.threshold = f.threshold;
  if (given(o.dilation)) c.dilation = f.dilation;
  if (given(o.target_class)) c.target_class = parse_target_class(f.target_class);
  if (given(o.target_layer)) c.target_layer = parse_layer_ref(f.target_layer);
  if (given(o.alpha)) c.alpha = f.alpha;
  if (given(o.colormap)) c.colormap = f.colormap;
  if (given(o.inconclusive)) c.inconclusive = parse_inconclusive(f.inconclusive);
  if (given(o.threads)) c.threads = f.threads;
  if (given(o.require_correct_class)) c.require_correct_class = f.require_correct_class;
  if (given(o.background_label)) c.background_label = f.background_label;
  if (given(o.sidecars)) c.sidecars = f.sidecars;
  if (c.threads == 0) {
    c.threads = std::max(1U, std::thread::hardware_concurrency());
  }
  return c;
}

void require_file(const std::filesystem::path & path, const char * what)
{
  if (path.empty()) {
    config_error(std::string(what) + " path is required");
  }
  if (!std::filesystem::is_regular_file(path)) {
    config_error(std::string(what) + " not found: '" + path.string() + "'");
  }
}

void validate_common(const RunConfig & c, bool needs_dataset)
{
  require_file(c.model, "model manifest");
  require_file(c.weights, "weights file");
  if (needs_dataset) {
    require_file(c.dataset, "dataset");
  }
  validate(GatePolicy{c.threshold, c.dilation, c.require_correct_class, c.background_label});
  if (!(c.alpha >= 0.0 && c.alpha <= 1.0)) {
    config_error("alpha must lie in [0,1]");
  }
  ColorMap::by_name(c.colormap);
}

Model load_configured_model(const RunConfig & c)
{
  Model model = load_model(c.model, c.weights);
  return c.target_layer ? model.with_target_layer(*c.target_layer) : model;
}

void ensure_output_dir(const std::filesystem::path & dir)
{
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    config_error("cannot create output directory '" + dir.string() + "'");
  }
}

void write_json_file(const std::filesystem::path & path, const json & doc)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    input_error("cannot write '" + path.string() + "'");
  }
  out << doc.dump() << "\n";
}

std::string format_fixed(double v, int digits)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

int cmd_explain(const RunConfig & c, const Flags & f, const Options & o, std::ostream & out)
{
  validate_common(c, false);
  require_file(f.image, "image");
  const Model model = load_configured_model(c);

  std::optional<std::size_t> cls;
  if (given(o.explain_class)) {
    if (is_unsigned_integer(f.explain_class)) {
      cls = parse_index(f.explain_class, "class index");
    } else {
      cls = model.class_index(f.explain_class);
      if (!cls) {
        config_error("class '" + f.explain_class + "' is not a model class");
      }
    }
  } else if (c.target_class.mode == TargetClassMode::Explicit) {
    cls = c.target_class.index;
  } else if (c.target_class.mode == TargetClassMode::True) {
    config_error("target class 'true' needs ground truth; use --class with explain");
  }
  if (cls && *cls >= model.class_count()) {
    config_error(
      "class index " + std::to_string(*cls) + " out of range for " + std::to_string(model.class_count()) +
      " classes");
  }

  const Image image = decode(f.image);
  const InferenceRecord record =
    forward(model, image_to_tensor(image, model.input_shape(), model.normalization()));
  Heatmap heat = gradcam_for(model, record, cls, image.width, image.height);
  heat.sample_id = std::filesystem::path(f.image).stem().string();

  ensure_output_dir(c.output);
  const std::string name = heatmap_filename(heat.sample_id, heat.class_label);
  const std::filesystem::path overlay = c.output / name;
  write_png(overlay, superimpose(to_rgb(image), colorize(heat.map, ColorMap::by_name(c.colormap)), c.alpha));
  write_json_file(c.output / (name.substr(0, name.size() - 4) + ".json"), heatmap_sidecar(heat));

  out << model.class_labels()[record.predicted_class] << " " << format_fixed(record.confidence, 6) << " "
      << overlay.string() << "\n";
  return 0;
}

int cmd_combined(const RunConfig & c, std::ostream & out, std::ostream & err)
{
  validate_common(c, true);
  const Model model = load_configured_model(c);
  const auto dataset = load_annotations(c.dataset, model.class_labels(), c.background_label);
  if (dataset.empty()) {
    config_error("dataset '" + c.dataset.string() + "' is empty");
  }
  std::vector<std::string> failures;
  CombinedHeatmap result;
  try {
    result = combine_dataset(model, dataset, c.target_class, c.threads, &failures);
  } catch (const Error & e) {
    if (e.kind() != ErrorKind::Input) {
      throw;
    }
    for (const auto & f : failures) {
      err << "camgate: skipped " << f << "\n";
    }
    err << "camgate: " << e.what() << "\n";
    return 1;
  }
  for (const auto & f : failures) {
    err << "camgate: skipped " << f << "\n";
  }
  ensure_output_dir(c.output);
  const std::filesystem::path png = c.output / "combined.heatmap.png";
  write_png(png, colorize(result.map, ColorMap::by_name(c.colormap)));
  write_json_file(c.output / "combined.heatmap.json", combined_sidecar(result));
  out << "combined " << result.sample_count << " heatmaps, " << result.excluded_ids.size()
      << " degenerate excluded, " << failures.size() << " unreadable -> " << png.string() << "\n";
  return 0;
}

std::string pad(const std::string & text, std::size_t width)
{
  return text.size() >= width ? text + " " : text + std::string(width - text.size(), ' ');
}

void print_summary(const TestReport & report, std::ostream & out)
{
  std::size_t id_width = 9;
  std::size_t label_width = 10;
  for (const Verdict & v : report.verdicts) {
    id_width = std::max(id_width, v.sample_id.size() + 1);
    label_width = std::max(label_width, v.true_label.size() + 1);
    if (v.predicted_label) {
      label_width = std::max(label_width, v.predicted_label->size() + 1);
    }
  }
  out << pad("sample_id", id_width) << pad("true", label_width) << pad("predicted", label_width)
      << pad("conf", 9) << pad("overlap", 9) << "status\n";
  for (const Verdict & v : report.verdicts) {
    out << pad(v.sample_id, id_width) << pad(v.true_label, label_width)
        << pad(v.predicted_label.value_or("-"), label_width)
        << pad(v.confidence ? format_fixed(*v.confidence, 4) : "-", 9)
        << pad(v.overlap_score ? format_fixed(*v.overlap_score, 4) : "-", 9) << to_string(v.status);
    if (!v.reasons.empty()) {
      out << "  (" << v.reasons.front() << (v.reasons.size() > 1 ? "; ..." : "") << ")";
    }
    out << "\n";
  }
  const Summary & s = report.summary;
  out << "total " << s.total << ": " << s.pass << " PASS, " << s.fail << " FAIL, " << s.inconclusive
      << " INCONCLUSIVE; accuracy " << format_fixed(s.accuracy, 4) << "; mean overlap "
      << (s.mean_overlap ? format_fixed(*s.mean_overlap, 4) : "-") << "; exit " << report.exit_status << "\n";
}

int cmd_test(const RunConfig & c, std::ostream & out)
{
  validate_common(c, true);
  const Model model = load_configured_model(c);
  const auto dataset = load_annotations(c.dataset, model.class_labels(), c.background_label);
  if (dataset.empty()) {
    config_error("dataset '" + c.dataset.string() + "' is empty");
  }

  SuiteOptions options;
  options.policy = {c.threshold, c.dilation, c.require_correct_class, c.background_label};
  options.target = c.target_class;
  options.alpha = c.alpha;
  options.colormap = c.colormap;
  options.inconclusive = c.inconclusive;
  options.threads = c.threads;
  options.sidecars = c.sidecars;
  options.metadata = {
    {"tool", "camgate"},
    {"model",
     {
       {"manifest", c.model.generic_string()},
       {"weights", c.weights.generic_string()},
       {"manifest_sha256", file_sha256(c.model)},
       {"weights_sha256", file_sha256(c.weights)},
       {"parameter_count", model.parameter_count()},
       {"class_labels", model.class_labels()},
       {"target_layer", model.layer_display_name(model.target_layer())},
     }},
    {"dataset",
     {
       {"annotations", c.dataset.generic_string()},
       {"sha256", file_sha256(c.dataset)},
       {"samples", dataset.size()},
     }},
  };
  const TestReport report = run_suite(model, dataset, options, c.output);
  print_summary(report, out);
  out << "reports: " << (c.output / "report.json").string() << ", " << (c.output / "report.xml").string() << "\n";
  return report.exit_status;
}

}  // namespace

int run_cli(const std::vector<std::string> & args, std::ostream & out, std::ostream & err)
{
  CLI::App app{"Grad-CAM heatmap gate for CNN image classifiers", "camgate"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "show help for every subcommand");

  Flags flags;
  CLI::App * explain = app.add_subcommand("explain", "explain one image: overlay PNG and value sidecar");
  CLI::App * combined_cmd = app.add_subcommand("combined", "average the heatmaps of a dataset");
  CLI::App * test = app.add_subcommand("test", "run the heatmap gate over an annotated dataset");
  const Options explain_opts = add_run_options(*explain, flags, Command::Explain);
  const Options combined_opts = add_run_options(*combined_cmd, flags, Command::Combined);
  const Options test_opts = add_run_options(*test, flags, Command::Test);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (explain->parsed()) {
      return cmd_explain(resolve(flags, explain_opts), flags, explain_opts, out);
    }
    if (combined_cmd->parsed()) {
      return cmd_combined(resolve(flags, combined_opts), out, err);
    }
    return cmd_test(resolve(flags, test_opts), out);
  } catch (const Error & e) {
    err << "camgate: error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception & e) {
    err << "camgate: internal error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace camgate
