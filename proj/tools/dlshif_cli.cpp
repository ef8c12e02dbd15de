// dlshif: streaming LSH isolation-forest anomaly detection.
//
//   dlshif detect --input data.csv --label-column label --scores-out s.csv
//   dlshif sweep  --config sweep.ini
//   dlshif synth  --n 10000 --dim 6 --output stream.csv
//   dlshif scale  --input raw.csv --output scaled.csv --params-out scaler.txt
//
// Every subcommand takes --config FILE with `key=value` lines named after its
// long flags. Flags on the command line override the file.

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "dlshif/dataset.hpp"
#include "dlshif/experiment.hpp"

namespace {

using namespace dlshif;

const std::map<std::string, ScaleMode> kScaleModes{
    {"offline", ScaleMode::Offline}, {"bootstrap", ScaleMode::Bootstrap}, {"none", ScaleMode::None}};
const std::map<std::string, Normalizer> kNormalizers{
    {"sample", Normalizer::PerTreeSample}, {"window", Normalizer::WindowSize}};

std::optional<std::string> optional_string(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return s;
}

void write_to(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

struct DetectArgs {
  std::string input;
  std::string label_column;
  std::size_t subset_size = 0;
  bool no_sampling = false;
  bool no_latency = false;
  std::string scale = "offline";
  std::string normalizer = "sample";
  std::string scores_out = "-";
  std::string metrics_out;
  EngineConfig engine;
};

void add_engine_flags(CLI::App* app, EngineConfig& e) {
  app->add_option("--window-size,-w", e.window_size, "Window size w (points per rebuild block)")
      ->capture_default_str();
  app->add_option("--num-trees,-t", e.num_trees, "Trees per forest")->capture_default_str();
  app->add_option("--threshold", e.threshold, "Anomaly threshold on the score")
      ->capture_default_str();
  app->add_option("--seed", e.seed, "Master seed")->capture_default_str();
  app->add_option("--bin-width", e.bin_width, "l2 LSH bin width")->capture_default_str();
  app->add_flag("--score-initial-window", e.score_initial_window,
                "Also score the bootstrap block against the initial model");
}

int run_detect(DetectArgs& a) {
  a.engine.sampling_enabled = !a.no_sampling;
  a.engine.normalizer = kNormalizers.at(a.normalizer);

  DetectOptions opts;
  opts.engine = a.engine;
  opts.scale = kScaleModes.at(a.scale);
  if (a.subset_size > 0) opts.subset_size = a.subset_size;

  const auto data = load_csv(a.input, optional_string(a.label_column));
  const auto result = run_detection(data, opts);

  std::ostringstream scores;
  write_scores_csv(scores, result.records, !a.no_latency);
  write_to(a.scores_out, scores.str());

  if (!a.metrics_out.empty()) {
    auto metrics = result.metrics;
    if (a.no_latency) metrics.mean_latency_ns = metrics.p99_latency_ns = 0.0;
    std::ostringstream kv;
    kv << to_key_value(metrics) << "window_size=" << a.engine.window_size
       << "\nnum_trees=" << a.engine.num_trees << "\nseed=" << a.engine.seed
       << "\nrebuilds=" << result.rebuilds << "\nrejected=" << result.rejected << '\n';
    write_to(a.metrics_out, kv.str());
  }
  if (result.rejected > 0)
    std::cerr << "warning: " << result.rejected << " points rejected (bad dimension or value)\n";
  return 0;
}

struct SweepArgs {
  ExperimentSpec spec;
  std::string label_column;
  std::string output_dir = "sweep_out";
  std::string scale = "offline";
  bool no_sampling = false;
  bool no_scores = false;
  bool no_latency = false;
};

int run_sweep(SweepArgs& a) {
  a.spec.label_column = optional_string(a.label_column);
  a.spec.output_dir = a.output_dir;
  a.spec.scale = kScaleModes.at(a.scale);
  a.spec.sampling = !a.no_sampling;
  a.spec.write_scores = !a.no_scores;
  a.spec.record_latency = !a.no_latency;

  const auto result = run_experiment(a.spec);
  std::size_t failed = 0;
  for (const auto& c : result.cells) failed += c.failures.size();
  std::cout << "sweep: " << result.cells.size() << " cells, " << failed
            << " failed runs, summary at " << (a.spec.output_dir / "summary.csv").string() << '\n';
  return 0;
}

struct SynthArgs {
  std::size_t n = 10000;
  Eigen::Index dim = 6;
  double outlier_rate = 0.02;
  std::optional<std::size_t> drift_at;
  double drift_shift = 3.0;
  double box = 12.0;
  std::uint64_t seed = 0;
  std::string label_column = "label";
  std::string output = "-";
};

int run_synth(const SynthArgs& a) {
  auto spec = default_synth_spec(a.dim, a.n, a.outlier_rate, a.seed, a.box);
  if (a.drift_at) {
    spec.drift_at = a.drift_at;
    spec.drift_shift = Eigen::VectorXd::Constant(a.dim, a.drift_shift);
  }
  std::ostringstream out;
  write_csv(out, synth_stream(spec), a.label_column);
  write_to(a.output, out.str());
  return 0;
}

struct ScaleArgs {
  std::string input;
  std::string label_column;
  std::string output = "-";
  std::string params_out;
  std::string params_in;
};

int run_scale(const ScaleArgs& a) {
  const auto data = load_csv(a.input, optional_string(a.label_column));
  ScalerParams params;
  if (!a.params_in.empty()) {
    std::ifstream in(a.params_in);
    if (!in) throw std::runtime_error("cannot open '" + a.params_in + "'");
    params = read_scaler(in);
  } else {
    params = fit_scaler(data);
  }
  for (auto c : params.degenerate_columns())
    std::cerr << "warning: column '" << data.column_names.at(c)
              << "' has zero interquartile range; scaled to 0\n";

  std::ostringstream out;
  write_csv(out, apply_scaler(data, params),
            a.label_column.empty() ? std::string("label") : a.label_column);
  write_to(a.output, out.str());
  if (!a.params_out.empty()) {
    std::ostringstream p;
    write_scaler(p, params);
    write_to(a.params_out, p.str());
  }
  return 0;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Appends `--key value` for every config entry whose option was not given on
// the command line. Keys may use '-' or '_'; '#' starts a comment.
std::vector<std::string> merge_config(CLI::App& app, std::vector<std::string> args) {
  CLI::App* sub = nullptr;
  std::size_t sub_at = 0;
  for (; sub_at < args.size(); ++sub_at)
    if ((sub = app.get_subcommand_no_throw(args[sub_at])) != nullptr) break;
  if (sub == nullptr) return args;

  std::string config;
  std::vector<const CLI::Option*> given;
  for (std::size_t i = sub_at + 1; i < args.size(); ++i) {
    std::string name = args[i];
    if (name.size() < 2 || name[0] != '-') continue;
    std::string value;
    if (auto eq = name.find('='); eq != std::string::npos) {
      value = name.substr(eq + 1);
      name.resize(eq);
    } else if (i + 1 < args.size()) {
      value = args[i + 1];
    }
    if (name == "--config") config = value;
    if (const auto* opt = sub->get_option_no_throw(name)) given.push_back(opt);
  }
  if (config.empty()) return args;

  std::ifstream in(config);
  if (!in) throw std::runtime_error("cannot open config file '" + config + "'");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto body = trim(std::string_view(line).substr(0, line.find('#')));
    if (body.empty() || body.front() == '[') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos)
      throw std::runtime_error(config + ":" + std::to_string(lineno) + ": expected key=value");
    std::string key(trim(body.substr(0, eq)));
    std::string value(trim(body.substr(eq + 1)));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string flag = "--" + key;
    const auto* opt = sub->get_option_no_throw(flag);
    if (opt == nullptr || key == "config")
      throw std::runtime_error(config + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (std::find(given.begin(), given.end(), opt) != given.end()) continue;
    args.push_back(flag + "=" + value);
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming anomaly detection with LSH isolation forests"};
  std::string config_path;
  app.require_subcommand(1);

  DetectArgs detect;
  auto* det = app.add_subcommand("detect", "Score a CSV stream point by point");
  det->add_option("--config", config_path, "key=value config file (flags override it)");
  det->add_option("--input,-i", detect.input, "Input CSV (headered)")->required();
  det->add_option("--label-column", detect.label_column, "Column holding 0/1 ground truth");
  det->add_option("--subset-size,-b", detect.subset_size,
                  "Stream a random contiguous block of this many rows (0 = all)");
  det->add_flag("--no-sampling", detect.no_sampling, "Build every tree on the whole window");
  det->add_flag("--no-latency", detect.no_latency, "Write latency_ns as 0 for reproducible output");
  det->add_option("--scale", detect.scale, "Robust scaling: offline, bootstrap or none")
      ->check(CLI::IsMember({"offline", "bootstrap", "none"}))
      ->capture_default_str();
  det->add_option("--normalizer", detect.normalizer,
                  "Path-length normalizer: sample (per tree) or window")
      ->check(CLI::IsMember({"sample", "window"}))
      ->capture_default_str();
  det->add_option("--scores-out,-o", detect.scores_out, "Scores CSV path ('-' for stdout)")
      ->capture_default_str();
  det->add_option("--metrics-out", detect.metrics_out, "Metrics key=value path");
  add_engine_flags(det, detect.engine);

  SweepArgs sweep;
  auto* sw = app.add_subcommand("sweep", "Run a (w, t, b) grid experiment");
  sw->add_option("--config", config_path, "key=value config file (flags override it)");
  sw->add_option("--input,-i", sweep.spec.input, "Input CSV");
  sw->add_option("--label-column", sweep.label_column, "Column holding 0/1 ground truth");
  sw->add_option("--window-sizes", sweep.spec.window_sizes, "Grid of w")
      ->delimiter(',')
      ->capture_default_str();
  sw->add_option("--tree-counts", sweep.spec.tree_counts, "Grid of t")
      ->delimiter(',')
      ->capture_default_str();
  sw->add_option("--subset-sizes", sweep.spec.subset_sizes, "Grid of b (0 = whole dataset)")
      ->delimiter(',')
      ->capture_default_str();
  sw->add_option("--repeats", sweep.spec.repeats, "Runs per cell")->capture_default_str();
  sw->add_option("--seed", sweep.spec.seed, "Master seed")->capture_default_str();
  sw->add_option("--threshold", sweep.spec.threshold, "Anomaly threshold")->capture_default_str();
  sw->add_option("--bin-width", sweep.spec.bin_width, "l2 LSH bin width")->capture_default_str();
  sw->add_option("--scale", sweep.scale, "Robust scaling: offline, bootstrap or none")
      ->check(CLI::IsMember({"offline", "bootstrap", "none"}))
      ->capture_default_str();
  sw->add_option("--output-dir", sweep.output_dir, "Output directory")->capture_default_str();
  sw->add_flag("--no-sampling", sweep.no_sampling, "Build every tree on the whole window");
  sw->add_flag("--score-initial-window", sweep.spec.score_initial_window,
               "Also score each bootstrap block");
  sw->add_flag("--no-scores", sweep.no_scores, "Skip per-repeat score files");
  sw->add_flag("--no-latency", sweep.no_latency, "Zero all timing fields for reproducible output");

  SynthArgs synth;
  auto* sy = app.add_subcommand("synth", "Generate a labeled synthetic stream");
  sy->add_option("--config", config_path, "key=value config file (flags override it)");
  sy->add_option("--n", synth.n, "Number of points")->capture_default_str();
  sy->add_option("--dim", synth.dim, "Number of streams")->capture_default_str();
  sy->add_option("--outlier-rate", synth.outlier_rate, "Fraction of uniform-box outliers")
      ->capture_default_str();
  sy->add_option("--drift-at", synth.drift_at, "Ordinal at which cluster means shift");
  sy->add_option("--drift-shift", synth.drift_shift, "Shift added to every coordinate after drift")
      ->capture_default_str();
  sy->add_option("--box", synth.box, "Outliers are uniform on [-box, box]^dim")
      ->capture_default_str();
  sy->add_option("--seed", synth.seed, "Seed")->capture_default_str();
  sy->add_option("--label-column", synth.label_column, "Name of the label column")
      ->capture_default_str();
  sy->add_option("--output,-o", synth.output, "Output CSV ('-' for stdout)")->capture_default_str();

  ScaleArgs scale;
  auto* sc = app.add_subcommand("scale", "Fit and/or apply a median/IQR robust scaler");
  sc->add_option("--config", config_path, "key=value config file (flags override it)");
  sc->add_option("--input,-i", scale.input, "Input CSV")->required();
  sc->add_option("--label-column", scale.label_column, "Column passed through unscaled");
  sc->add_option("--output,-o", scale.output, "Scaled CSV ('-' for stdout)")->capture_default_str();
  sc->add_option("--params-out", scale.params_out, "Write fitted median/IQR here");
  sc->add_option("--params-in", scale.params_in, "Apply a previously fitted scaler");

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = merge_config(app, std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (det->parsed()) return run_detect(detect);
    if (sw->parsed()) return run_sweep(sweep);
    if (sy->parsed()) return run_synth(synth);
    if (sc->parsed()) return run_scale(scale);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
