#include "dlshif/experiment.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace dlshif {

void write_scores_csv(std::ostream& out, const std::vector<ScoreRecord>& records,
                      bool with_latency) {
  out << kScoresHeader << '\n';
  out << std::setprecision(12);
  for (const auto& r : records)
    out << r.point_index << ',' << r.score << ',' << (r.is_anomaly ? 1 : 0) << ','
        << (with_latency ? r.latency.count() : 0) << '\n';
}

DetectResult run_detection(const Dataset& data, const DetectOptions& options) {
  options.engine.validate();
  Dataset stream = data;
  if (options.scale == ScaleMode::Offline) stream = robust_scale(stream).data;

  if (options.subset_size) {
    std::mt19937_64 rng(mix_seed(options.engine.seed, 0x5b5e7));
    stream = select_subset(stream, *options.subset_size, rng);
  }
  if (options.scale == ScaleMode::Bootstrap)
    stream = apply_scaler(stream, fit_scaler(stream, options.engine.window_size));

  const auto points = stream.points();
  std::optional<StreamEngine> engine;
  DetectResult result;
  result.records = run_stream(points, options.engine, engine);
  result.rejected = engine->rejected();
  result.rebuilds = engine->rebuild_epoch();
  result.labels = stream.labels;
  result.metrics = evaluate(result.records, stream.labels, options.engine.threshold);
  return result;
}

void ExperimentSpec::validate() const {
  if (window_sizes.empty() || tree_counts.empty() || subset_sizes.empty())
    throw std::invalid_argument("sweep grids must be non-empty");
  if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
  if (input.empty()) throw std::invalid_argument("sweep needs an input file");
}

std::vector<double> running_mean(const std::vector<double>& values) {
  std::vector<double> out;
  out.reserve(values.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += values[i];
    out.push_back(sum / static_cast<double>(i + 1));
  }
  return out;
}

namespace {

std::string cell_name(std::size_t w, std::size_t t, std::size_t b) {
  return "w" + std::to_string(w) + "_t" + std::to_string(t) + "_b" + std::to_string(b);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
}

}  // namespace

void write_summary_csv(std::ostream& out, const SweepResult& result) {
  out << "window_size,num_trees,subset_size,repeats,failed,auc_mean,auc_std,f1_mean,f1_std,"
         "precision_mean,recall_mean,threshold,mean_latency_ns,p99_latency_ns\n";
  out << std::setprecision(12);
  for (const auto& c : result.cells) {
    out << c.window_size << ',' << c.num_trees << ',' << c.subset_size << ',' << c.runs.size()
        << ',' << c.failures.size() << ',';
    if (c.aggregate) {
      const auto& m = c.aggregate->mean;
      const auto& s = c.aggregate->stddev;
      out << m.auc << ',' << s.auc << ',' << m.f1 << ',' << s.f1 << ',' << m.precision << ','
          << m.recall << ',' << m.threshold << ',' << m.mean_latency_ns << ','
          << m.p99_latency_ns;
    } else {
      out << "nan,nan,nan,nan,nan,nan,nan,nan,nan";
    }
    out << '\n';
  }
}

SweepResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const Dataset raw = load_csv(spec.input, spec.label_column);
  const Dataset scaled = spec.scale == ScaleMode::Offline ? robust_scale(raw).data : raw;
  std::filesystem::create_directories(spec.output_dir);

  SweepResult result;
  for (auto w : spec.window_sizes)
    for (auto t : spec.tree_counts)
      for (auto b : spec.subset_sizes) {
        CellResult cell{w, t, b == 0 ? scaled.size() : b, {}, {}, std::nullopt};
        const auto dir = spec.output_dir / cell_name(w, t, cell.subset_size);
        std::filesystem::create_directories(dir);

        std::vector<double> aucs;
        for (std::size_t r = 0; r < spec.repeats; ++r) {
          // Repeat r streams the same subset in every cell so cells compare paired.
          const auto repeat_seed = mix_seed(spec.seed, r);
          try {
            std::mt19937_64 subset_rng(mix_seed(repeat_seed, cell.subset_size));
            Dataset stream = select_subset(scaled, cell.subset_size, subset_rng);
            if (spec.scale == ScaleMode::Bootstrap)
              stream = apply_scaler(stream, fit_scaler(stream, w));

            DetectOptions opts;
            opts.engine.window_size = w;
            opts.engine.num_trees = t;
            opts.engine.threshold = spec.threshold;
            opts.engine.seed = mix_seed(repeat_seed, 0xE);
            opts.engine.sampling_enabled = spec.sampling;
            opts.engine.score_initial_window = spec.score_initial_window;
            opts.engine.bin_width = spec.bin_width;
            opts.scale = ScaleMode::None;
            auto run = run_detection(stream, opts);

            if (!spec.record_latency) {
              run.metrics.mean_latency_ns = 0.0;
              run.metrics.p99_latency_ns = 0.0;
            }
            const auto tag = "_r" + std::to_string(r);
            if (spec.write_scores) {
              std::ostringstream scores;
              write_scores_csv(scores, run.records, spec.record_latency);
              write_file(dir / ("scores" + tag + ".csv"), scores.str());
            }
            write_file(dir / ("metrics" + tag + ".txt"), to_key_value(run.metrics));
            cell.runs.push_back(run.metrics);
            aucs.push_back(run.metrics.auc);
          } catch (const std::exception& e) {
            cell.failures.push_back("repeat " + std::to_string(r) + ": " + e.what());
          }
        }

        if (!cell.runs.empty()) {
          cell.aggregate = aggregate_runs(cell.runs);
          write_file(dir / "metrics.txt", to_key_value(*cell.aggregate));
        }
        std::ostringstream conv;
        conv << "repeat,auc,running_mean_auc\n" << std::setprecision(12);
        const auto means = running_mean(aucs);
        for (std::size_t i = 0; i < aucs.size(); ++i)
          conv << i + 1 << ',' << aucs[i] << ',' << means[i] << '\n';
        write_file(dir / "convergence.csv", conv.str());
        if (!cell.failures.empty()) {
          std::string log;
          for (const auto& f : cell.failures) log += f + '\n';
          write_file(dir / "failures.txt", log);
        }
        result.cells.push_back(std::move(cell));
      }

  std::ostringstream summary;
  write_summary_csv(summary, result);
  write_file(spec.output_dir / "summary.csv", summary.str());
  return result;
}

}  // namespace dlshif
