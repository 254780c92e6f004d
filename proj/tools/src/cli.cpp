#include "wugnn_tools/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "wugnn/bench.hpp"
#include "wugnn/errors.hpp"
#include "wugnn/trainer.hpp"
#include "wugnn_tools/config.hpp"

namespace wugnn::tools {

namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::size_t threads = 1;
};

struct GenerateOptions {
  std::optional<std::size_t> n;
  std::string output;
};

struct TrainOptions {
  std::string dataset;
  std::string model;
  std::optional<std::size_t> n;
  std::optional<std::size_t> epochs;
  std::string output;
};

struct EvalOptions {
  std::string checkpoint;
  std::string split = "test";
  std::string dataset;
  std::optional<std::size_t> n;
  std::string output;
};

struct BenchOptions {
  std::string wugnn;
  std::string gnn;
  std::vector<std::size_t> sizes;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> reps;
  std::optional<std::size_t> warmup;
  std::string format = "both";
};

// Config problems that the user fixes on the command line or in the file.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

AppConfig resolve_config(const GlobalOptions& g) {
  AppConfig config = default_config();
  if (!g.config_path.empty()) {
    if (!fs::exists(g.config_path)) throw UsageError("config file not found: " + g.config_path);
    config = load_config(g.config_path);
  }
  if (g.seed) apply_seed(config, *g.seed);
  return config;
}

std::string out_path(const GlobalOptions& g, const std::string& explicit_path, const std::string& name) {
  if (!explicit_path.empty()) {
    const fs::path parent = fs::path(explicit_path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    return explicit_path;
  }
  fs::create_directories(g.out_dir);
  return (fs::path(g.out_dir) / name).string();
}

int run_generate(const GlobalOptions& g, const GenerateOptions& o, std::ostream& out) {
  AppConfig config = resolve_config(g);
  if (o.n) config.train.channel.n = *o.n;
  const auto ds = train::make_dataset(config.train.channel, config.train.counts, config.train.channel.seed);
  const std::string path = out_path(g, o.output, "dataset.json");
  train::save_dataset(path, ds);
  out << "wrote " << ds.train.size() << "/" << ds.val.size() << "/" << ds.test.size()
      << " train/val/test instances at n = " << ds.channel.n << " to " << path << '\n';
  return kExitOk;
}

int run_train(const GlobalOptions& g, const TrainOptions& o, std::ostream& out) {
  AppConfig config = resolve_config(g);
  if (!o.model.empty()) config.train.kind = model::model_kind_from_string(o.model);
  if (o.epochs) config.train.epochs = *o.epochs;
  if (o.n) config.train.channel.n = *o.n;

  train::Dataset ds;
  if (!o.dataset.empty()) {
    ds = train::load_dataset(o.dataset);
    config.train.channel = ds.channel;
    config.train.counts = ds.counts;
  } else {
    ds = train::make_dataset(config.train.channel, config.train.counts, config.train.channel.seed);
  }
  const train::TrainedModel trained = train::train(config.train, ds);

  const std::string stem = model::to_string(config.train.kind);
  const std::string ckpt = out_path(g, o.output, stem + ".ckpt");
  train::save_trained(ckpt, trained);
  const std::string curve_path = (fs::path(ckpt).parent_path() / (stem + "_curve.csv")).string();
  std::ofstream curve(curve_path);
  if (!curve) throw IoError(curve_path, "cannot open curve file for writing");
  train::write_curve_csv(trained.curve, curve);
  if (!curve) throw IoError(curve_path, "failed writing curve file");

  out << std::setprecision(6) << "trained " << stem << " at n = " << trained.trained_n << ": best epoch "
      << trained.best_epoch << ", val mean sum rate " << trained.best_val_rate << " (initial "
      << trained.initial_val_rate << ")\n"
      << "checkpoint " << ckpt << "\ncurve " << curve_path << '\n';
  return kExitOk;
}

int run_eval(const GlobalOptions& g, const EvalOptions& o, std::ostream& out) {
  AppConfig config = resolve_config(g);
  const train::TrainedModel trained = train::load_trained(o.checkpoint);
  const train::Split split = train::split_from_string(o.split);

  train::SplitData data;
  if (!o.dataset.empty()) {
    if (o.n) throw UsageError("--n cannot be combined with --dataset");
    data = train::load_dataset(o.dataset).split(split);
  } else {
    // Same seeds make_dataset would assign to this split.
    channel::ChannelConfig c = config.train.channel;
    c.n = o.n.value_or(trained.trained_n);
    const auto& counts = config.train.counts;
    std::uint64_t first = c.seed;
    std::size_t count = counts.train;
    if (split == train::Split::val) {
      first += counts.train;
      count = counts.val;
    } else if (split == train::Split::test) {
      first += counts.train + counts.val;
      count = counts.test;
    }
    std::vector<channel::NetworkInstance> instances;
    for (std::size_t k = 0; k < count; ++k) {
      channel::ChannelConfig ck = c;
      ck.seed = first + k;
      instances.push_back(channel::generate_instance(ck));
    }
    data = train::make_split(std::move(instances));
    if (c.sparsify_threshold > 0.0) {
      for (std::size_t k = 0; k < data.size(); ++k) {
        data.graphs[k] = channel::normalize_features(channel::build_graph(data.instances[k], c.sparsify_threshold));
      }
    }
  }

  const train::EvalReport report = train::evaluate(trained.model, data, config.wmmse);
  nlohmann::json j = train::to_json(report);
  j["checkpoint"] = o.checkpoint;
  j["model"] = trained.model.spec_json();
  j["trained_n"] = trained.trained_n;
  j["split"] = o.split;
  j["wmmse"] = {{"tol", config.wmmse.tol}, {"max_iter", config.wmmse.max_iter}};
  const std::string name = "eval_" + model::to_string(trained.model.kind) + "_n" + std::to_string(report.n) + "_" +
                           o.split + ".json";
  const std::string path = out_path(g, o.output, name);
  std::ofstream f(path);
  if (!f) throw IoError(path, "cannot open eval report for writing");
  f << j.dump(2) << '\n';
  if (!f) throw IoError(path, "failed writing eval report");

  out << std::setprecision(6) << "n = " << report.n << ", " << report.instance_count << " instances: model "
      << report.model_mean << ", wmmse " << report.wmmse_mean << ", ratio " << report.ratio << '\n'
      << "report " << path << '\n';
  return kExitOk;
}

bench::Checkpoints bench_checkpoints(const BenchOptions& o) {
  if (o.wugnn.empty() && o.gnn.empty()) throw UsageError("bench needs --wugnn and/or --gnn checkpoints");
  return bench::load_checkpoints(o.wugnn.empty() ? std::nullopt : std::optional<std::string>(o.wugnn),
                                 o.gnn.empty() ? std::nullopt : std::optional<std::string>(o.gnn));
}

template <class Report>
void emit_all(const GlobalOptions& g, const Report& report, const std::string& stem, const std::string& format,
              std::ostream& out) {
  const bool csv = format == "csv" || format == "both";
  const bool json = format == "json" || format == "both";
  if (csv) {
    const std::string path = out_path(g, "", stem + ".csv");
    bench::emit_report(report, path, bench::ReportFormat::csv);
    out << "report " << path << '\n';
  }
  if (json) {
    const std::string path = out_path(g, "", stem + ".json");
    bench::emit_report(report, path, bench::ReportFormat::json);
    out << "report " << path << '\n';
  }
}

int run_scalability(const GlobalOptions& g, const BenchOptions& o, std::ostream& out) {
  AppConfig config = resolve_config(g);
  if (!o.sizes.empty()) config.bench.sizes = o.sizes;
  if (o.trials) config.bench.trials_per_size = *o.trials;
  const auto report = bench::run_scalability(bench_checkpoints(o), config.scalability(g.threads));
  out << std::setprecision(5);
  for (const auto& rec : report.records) {
    out << "n = " << rec.n;
    for (const auto& m : rec.methods) {
      out << "  " << bench::to_string(m.method) << ' ';
      if (m.skipped) {
        out << "skipped";
      } else {
        out << m.mean_rate;
      }
    }
    out << '\n';
  }
  emit_all(g, report, "scalability", o.format, out);
  return kExitOk;
}

int run_timing(const GlobalOptions& g, const BenchOptions& o, std::ostream& out) {
  AppConfig config = resolve_config(g);
  if (!o.sizes.empty()) config.bench.sizes = o.sizes;
  if (o.reps) config.bench.repetitions = *o.reps;
  if (o.warmup) config.bench.warmup = *o.warmup;
  const auto report = bench::run_timing(bench_checkpoints(o), config.timing(g.threads));
  out << std::setprecision(4) << "threads " << report.environment.threads << ", cpu " << report.environment.cpu
      << '\n';
  for (const auto& rec : report.records) {
    out << "n = " << rec.n;
    for (const auto& m : rec.methods) {
      out << "  " << bench::to_string(m.method) << ' ';
      if (m.skipped) {
        out << "skipped";
      } else {
        out << m.median_s << " s";
      }
    }
    out << '\n';
  }
  emit_all(g, report, "timing", o.format, out);
  return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"WMMSE-unrolled GNN power allocation: datasets, training, evaluation and benchmarks", "wugnn"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config_path, "YAML config file")->type_name("FILE");
  app.add_option("--seed", g.seed, "Overrides the dataset, training and bench seeds");
  app.add_option("--out-dir", g.out_dir, "Directory for outputs")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (recorded in bench reports)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "Write a train/val/test dataset to disk");
  generate->add_option("--n", gen.n, "Network size (default: channel.n)");
  generate->add_option("--output", gen.output, "Dataset path (default: <out-dir>/dataset.json)");

  TrainOptions tr;
  auto* train_cmd = app.add_subcommand("train", "Train a model and write its checkpoint and curve");
  train_cmd->add_option("--dataset", tr.dataset, "Dataset file from `generate` (default: generate from config)");
  train_cmd->add_option("--model", tr.model, "wugnn or gnn_baseline (default: model.kind)")
      ->check(CLI::IsMember({"wugnn", "gnn_baseline"}));
  train_cmd->add_option("--n", tr.n, "Network size (default: channel.n)");
  train_cmd->add_option("--epochs", tr.epochs, "Override train.epochs");
  train_cmd->add_option("--output", tr.output, "Checkpoint path (default: <out-dir>/<model>.ckpt)");

  EvalOptions ev;
  auto* eval = app.add_subcommand("eval", "Compare a checkpoint against WMMSE on one split");
  eval->add_option("--checkpoint", ev.checkpoint, "Model checkpoint")->required();
  eval->add_option("--split", ev.split, "train, val or test")
      ->capture_default_str()
      ->check(CLI::IsMember({"train", "val", "test"}));
  eval->add_option("--dataset", ev.dataset, "Dataset file (default: regenerate from config)");
  eval->add_option("--n", ev.n, "Network size when regenerating (default: the trained size)");
  eval->add_option("--output", ev.output, "Report path");

  BenchOptions bo;
  auto* bench_cmd = app.add_subcommand("bench", "Scalability sweep or inference timing");
  bench_cmd->require_subcommand(1);
  bench_cmd->fallthrough();
  auto add_bench_options = [&bo](CLI::App* cmd) {
    cmd->add_option("--wugnn", bo.wugnn, "WUGNN checkpoint");
    cmd->add_option("--gnn", bo.gnn, "Baseline GNN checkpoint");
    cmd->add_option("--sizes", bo.sizes, "Network sizes (default: bench.sizes)")->delimiter(',');
    cmd->add_option("--format", bo.format, "csv, json or both")
        ->capture_default_str()
        ->check(CLI::IsMember({"csv", "json", "both"}));
  };
  auto* scal = bench_cmd->add_subcommand("scalability", "Mean sum rate per method and size");
  add_bench_options(scal);
  scal->add_option("--trials", bo.trials, "Override bench.trials_per_size");
  auto* timing = bench_cmd->add_subcommand("timing", "Wall-clock time of one allocation per method and size");
  add_bench_options(timing);
  timing->add_option("--reps", bo.reps, "Override bench.repetitions");
  timing->add_option("--warmup", bo.warmup, "Override bench.warmup");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kExitOk;
    err << '\n' << app.help();
    return kExitUsage;
  }

  try {
    if (generate->parsed()) return run_generate(g, gen, out);
    if (train_cmd->parsed()) return run_train(g, tr, out);
    if (eval->parsed()) return run_eval(g, ev, out);
    if (scal->parsed()) return run_scalability(g, bo, out);
    if (timing->parsed()) return run_timing(g, bo, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  err << app.help();
  return kExitUsage;
}

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("wugnn");
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace wugnn::tools
