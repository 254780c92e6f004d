#include "wugnn/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "wugnn/errors.hpp"
#include "wugnn/trainer.hpp"

#ifndef WUGNN_BUILD_PROFILE
#define WUGNN_BUILD_PROFILE "unknown"
#endif

namespace wugnn::bench {

using channel::NetworkInstance;

std::string to_string(Method method) {
  switch (method) {
    case Method::wmmse:
      return "wmmse";
    case Method::gnn:
      return "gnn";
    case Method::wugnn:
      return "wugnn";
  }
  return "unknown";
}

Method method_from_string(const std::string& name) {
  if (name == "wmmse") return Method::wmmse;
  if (name == "gnn") return Method::gnn;
  if (name == "wugnn") return Method::wugnn;
  throw FormatError("unknown method '" + name + "'");
}

Environment capture_environment(std::size_t threads) {
  Environment env;
  env.cpu = "unknown";
  std::ifstream cpuinfo("/proc/cpuinfo");
  for (std::string line; std::getline(cpuinfo, line);) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) {
        env.cpu = line.substr(line.find_first_not_of(' ', colon + 1));
        break;
      }
    }
  }
  env.threads = threads;
  env.build_profile = WUGNN_BUILD_PROFILE;
#if defined(__clang__)
  env.compiler = "clang " __clang_version__;
#elif defined(__GNUC__)
  env.compiler = "gcc " __VERSION__;
#else
  env.compiler = "unknown";
#endif
  return env;
}

const RateStats& ScalabilityRecord::at(Method method) const {
  for (const auto& m : methods) {
    if (m.method == method) return m;
  }
  throw ArgumentError("record for n = " + std::to_string(n) + " lacks method " + to_string(method));
}

const TimingStats& TimingRecord::at(Method method) const {
  for (const auto& m : methods) {
    if (m.method == method) return m;
  }
  throw ArgumentError("record for n = " + std::to_string(n) + " lacks method " + to_string(method));
}

Checkpoints load_checkpoints(const std::optional<std::string>& wugnn_path,
                             const std::optional<std::string>& gnn_path) {
  Checkpoints cps;
  if (wugnn_path) {
    auto trained = train::load_trained(*wugnn_path);
    if (trained.model.kind != model::ModelKind::wugnn) throw FormatError("not a WUGNN checkpoint: " + *wugnn_path);
    cps.trained_n = trained.trained_n;
    cps.wugnn = std::move(trained.model);
  }
  if (gnn_path) {
    auto trained = train::load_trained(*gnn_path);
    if (trained.model.kind != model::ModelKind::gnn_baseline) throw FormatError("not a baseline checkpoint: " + *gnn_path);
    if (cps.trained_n == 0) cps.trained_n = trained.trained_n;
    cps.gnn = std::move(trained.model);
  }
  return cps;
}

std::uint64_t instance_seed(std::uint64_t seed, std::size_t n, std::size_t k) {
  // splitmix64 finalizer over the (seed, n, k) triple
  std::uint64_t z = seed ^ (0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(n) + 1)) ^
                    (0xC2B2AE3D27D4EB4FULL * (static_cast<std::uint64_t>(k) + 1));
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

NetworkInstance make_instance(std::uint64_t seed, std::size_t n, double noise_power, double p_max) {
  channel::ChannelConfig c;
  c.n = n;
  c.seed = seed;
  c.noise_power = noise_power;
  c.p_max = p_max;
  return channel::generate_instance(c);
}

// Runs fn(k) for k in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    workers.emplace_back([&, t] {
      try {
        for (std::size_t k = t; k < count; k += threads) fn(k);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

RateStats rate_stats(Method method, const std::vector<double>& rates) {
  RateStats s;
  s.method = method;
  s.trials = rates.size();
  const double count = static_cast<double>(rates.size());
  s.mean_rate = std::accumulate(rates.begin(), rates.end(), 0.0) / count;
  if (rates.size() > 1) {
    double ss = 0.0;
    for (double r : rates) ss += (r - s.mean_rate) * (r - s.mean_rate);
    s.std_rate = std::sqrt(ss / (count - 1.0));
  }
  return s;
}

nlohmann::json wmmse_json(const wmmse::WmmseSettings& w) { return {{"tol", w.tol}, {"max_iter", w.max_iter}}; }

nlohmann::json checkpoint_json(const Checkpoints& cps) {
  nlohmann::json j = {{"trained_n", cps.trained_n}};
  j["wugnn"] = cps.wugnn ? cps.wugnn->spec_json() : nlohmann::json(nullptr);
  j["gnn"] = cps.gnn ? cps.gnn->spec_json() : nlohmann::json(nullptr);
  return j;
}

const model::Model* model_for(const Checkpoints& cps, Method method) {
  if (method == Method::wugnn) return cps.wugnn ? &*cps.wugnn : nullptr;
  if (method == Method::gnn) return cps.gnn ? &*cps.gnn : nullptr;
  return nullptr;
}

void check_sizes(const std::vector<std::size_t>& sizes) {
  if (sizes.empty()) throw ConfigError("bench sizes must be nonempty");
  for (std::size_t n : sizes) {
    if (n < 1) throw ConfigError("bench sizes must be >= 1");
  }
}

}  // namespace

BenchReport run_scalability(const Checkpoints& checkpoints, const ScalabilitySettings& settings) {
  check_sizes(settings.sizes);
  if (settings.trials_per_size < 1) throw ConfigError("trials_per_size must be >= 1");
  BenchReport report;
  report.environment = capture_environment(settings.threads);
  report.config = {{"sizes", settings.sizes},
                   {"trials_per_size", settings.trials_per_size},
                   {"seed", settings.seed},
                   {"noise_power", settings.noise_power},
                   {"p_max", settings.p_max},
                   {"wmmse", wmmse_json(settings.wmmse)},
                   {"checkpoints", checkpoint_json(checkpoints)}};

  const std::size_t trials = settings.trials_per_size;
  for (std::size_t n : settings.sizes) {
    std::vector<std::vector<double>> rates(std::size(kMethods), std::vector<double>(trials, 0.0));
    parallel_for(trials, settings.threads, [&](std::size_t k) {
      const NetworkInstance inst = make_instance(instance_seed(settings.seed, n, k), n, settings.noise_power, settings.p_max);
      rates[0][k] = wmmse::run_wmmse(inst, wmmse::full_power(inst), settings.wmmse).final_sum_rate();
      for (std::size_t m = 1; m < std::size(kMethods); ++m) {
        if (const model::Model* mdl = model_for(checkpoints, kMethods[m])) rates[m][k] = wmmse::sum_rate(inst, mdl->allocate(inst));
      }
    });
    ScalabilityRecord rec;
    rec.n = n;
    for (std::size_t m = 0; m < std::size(kMethods); ++m) {
      if (kMethods[m] != Method::wmmse && !model_for(checkpoints, kMethods[m])) {
        rec.methods.push_back({kMethods[m], true, 0.0, 0.0, 0});
      } else {
        rec.methods.push_back(rate_stats(kMethods[m], rates[m]));
      }
    }
    report.records.push_back(std::move(rec));
  }
  return report;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ArgumentError("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw ArgumentError("quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

TimingStats time_callable(const std::function<void(std::size_t)>& fn, std::size_t reps, std::size_t warmup) {
  if (reps < 1) throw ArgumentError("time_callable needs at least one repetition");
  using clock = std::chrono::steady_clock;
  for (std::size_t r = 0; r < warmup; ++r) fn(reps + r);
  std::vector<double> seconds;
  seconds.reserve(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    const auto t0 = clock::now();
    fn(r);
    const auto t1 = clock::now();
    seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
  }
  TimingStats s;
  s.reps = reps;
  s.median_s = quantile(seconds, 0.5);
  s.p10_s = quantile(seconds, 0.1);
  s.p90_s = quantile(seconds, 0.9);
  return s;
}

TimingReport run_timing(const Checkpoints& checkpoints, const TimingSettings& settings) {
  check_sizes(settings.sizes);
  if (settings.repetitions < 5) throw ConfigError("timing needs repetitions >= 5");
  if (settings.warmup < 1) throw ConfigError("timing needs warmup >= 1");
  TimingReport report;
  report.repetitions = settings.repetitions;
  report.warmup = settings.warmup;
  report.environment = capture_environment(settings.threads);
  report.config = {{"sizes", settings.sizes},
                   {"seed", settings.seed},
                   {"noise_power", settings.noise_power},
                   {"p_max", settings.p_max},
                   {"wmmse", wmmse_json(settings.wmmse)},
                   {"checkpoints", checkpoint_json(checkpoints)}};

  for (std::size_t n : settings.sizes) {
    std::vector<NetworkInstance> instances;
    for (std::size_t r = 0; r < settings.repetitions + settings.warmup; ++r) {
      instances.push_back(make_instance(instance_seed(settings.seed, n, r), n, settings.noise_power, settings.p_max));
    }
    TimingRecord rec;
    rec.n = n;
    double sink = 0.0;
    for (Method method : kMethods) {
      TimingStats stats;
      if (method == Method::wmmse) {
        stats = time_callable(
            [&](std::size_t r) {
              const auto& inst = instances[r];
              sink += wmmse::run_wmmse(inst, wmmse::full_power(inst), settings.wmmse).final_sum_rate();
            },
            settings.repetitions, settings.warmup);
      } else if (const model::Model* mdl = model_for(checkpoints, method)) {
        stats = time_callable([&](std::size_t r) { sink += mdl->allocate(instances[r]).v.front(); },
                              settings.repetitions, settings.warmup);
      } else {
        stats.skipped = true;
      }
      stats.method = method;
      rec.methods.push_back(stats);
    }
    if (!std::isfinite(sink)) throw NumericalDomainError("non-finite result while timing n = " + std::to_string(n));
    report.records.push_back(std::move(rec));
  }
  return report;
}

ReportFormat report_format_from_string(const std::string& name) {
  if (name == "csv") return ReportFormat::csv;
  if (name == "json") return ReportFormat::json;
  throw ConfigError("unknown report format '" + name + "' (expected csv or json)");
}

namespace {

std::string fmt(double x) {
  std::ostringstream oss;
  oss << std::setprecision(std::numeric_limits<double>::max_digits10) << x;
  return oss.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

template <class T>
T parse_number(const std::string& field) {
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) throw FormatError("bad CSV number '" + field + "'");
  return value;
}

std::vector<std::vector<std::string>> read_csv_rows(std::istream& in, const std::string& header, std::size_t width) {
  std::string line;
  if (!std::getline(in, line) || line != header) throw FormatError("CSV header must be \"" + header + "\"");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != width) throw FormatError("CSV row has " + std::to_string(fields.size()) + " fields: " + line);
    rows.push_back(std::move(fields));
  }
  return rows;
}

template <class Record, class Stats>
std::vector<Record> group_rows(std::vector<std::pair<std::size_t, Stats>> rows) {
  std::vector<Record> records;
  for (auto& [n, stats] : rows) {
    if (records.empty() || records.back().n != n) records.push_back(Record{n, {}});
    records.back().methods.push_back(stats);
  }
  return records;
}

template <class Report>
void emit(const Report& report, const std::string& path, ReportFormat format) {
  std::ofstream out(path);
  if (!out) throw IoError(path, "cannot open report for writing");
  if (format == ReportFormat::csv) {
    write_csv(report, out);
  } else {
    out << to_json(report).dump(2) << '\n';
  }
  out.flush();
  if (!out) throw IoError(path, "failed writing report");
}

}  // namespace

void write_csv(const BenchReport& report, std::ostream& out) {
  out << kScalabilityCsvHeader << '\n';
  for (const auto& rec : report.records) {
    for (const auto& m : rec.methods) {
      out << rec.n << ',' << to_string(m.method) << ',';
      if (m.skipped) {
        out << ",,0\n";
      } else {
        out << fmt(m.mean_rate) << ',' << fmt(m.std_rate) << ',' << m.trials << '\n';
      }
    }
  }
}

void write_csv(const TimingReport& report, std::ostream& out) {
  out << kTimingCsvHeader << '\n';
  for (const auto& rec : report.records) {
    for (const auto& m : rec.methods) {
      out << rec.n << ',' << to_string(m.method) << ',';
      if (m.skipped) {
        out << ",,,0\n";
      } else {
        out << fmt(m.median_s) << ',' << fmt(m.p10_s) << ',' << fmt(m.p90_s) << ',' << m.reps << '\n';
      }
    }
  }
}

std::vector<ScalabilityRecord> read_scalability_csv(std::istream& in) {
  std::vector<std::pair<std::size_t, RateStats>> rows;
  for (const auto& f : read_csv_rows(in, kScalabilityCsvHeader, 5)) {
    RateStats s;
    s.method = method_from_string(f[1]);
    s.skipped = f[2].empty();
    if (!s.skipped) {
      s.mean_rate = parse_number<double>(f[2]);
      s.std_rate = parse_number<double>(f[3]);
    }
    s.trials = parse_number<std::size_t>(f[4]);
    rows.emplace_back(parse_number<std::size_t>(f[0]), s);
  }
  return group_rows<ScalabilityRecord>(std::move(rows));
}

std::vector<TimingRecord> read_timing_csv(std::istream& in) {
  std::vector<std::pair<std::size_t, TimingStats>> rows;
  for (const auto& f : read_csv_rows(in, kTimingCsvHeader, 6)) {
    TimingStats s;
    s.method = method_from_string(f[1]);
    s.skipped = f[2].empty();
    if (!s.skipped) {
      s.median_s = parse_number<double>(f[2]);
      s.p10_s = parse_number<double>(f[3]);
      s.p90_s = parse_number<double>(f[4]);
    }
    s.reps = parse_number<std::size_t>(f[5]);
    rows.emplace_back(parse_number<std::size_t>(f[0]), s);
  }
  return group_rows<TimingRecord>(std::move(rows));
}

nlohmann::json to_json(const Environment& env) {
  return {{"cpu", env.cpu}, {"threads", env.threads}, {"build_profile", env.build_profile}, {"compiler", env.compiler}};
}

Environment environment_from_json(const nlohmann::json& j) {
  Environment env;
  env.cpu = j.at("cpu").get<std::string>();
  env.threads = j.at("threads").get<std::size_t>();
  env.build_profile = j.at("build_profile").get<std::string>();
  env.compiler = j.at("compiler").get<std::string>();
  return env;
}

nlohmann::json to_json(const BenchReport& report) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& rec : report.records) {
    nlohmann::json methods = nlohmann::json::array();
    for (const auto& m : rec.methods) {
      methods.push_back({{"method", to_string(m.method)},
                         {"skipped", m.skipped},
                         {"mean_rate", m.mean_rate},
                         {"std_rate", m.std_rate},
                         {"trials", m.trials}});
    }
    records.push_back({{"n", rec.n}, {"methods", methods}});
  }
  return {{"experiment", report.experiment},
          {"records", records},
          {"environment", to_json(report.environment)},
          {"config", report.config}};
}

nlohmann::json to_json(const TimingReport& report) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& rec : report.records) {
    nlohmann::json methods = nlohmann::json::array();
    for (const auto& m : rec.methods) {
      methods.push_back({{"method", to_string(m.method)},
                         {"skipped", m.skipped},
                         {"median_s", m.median_s},
                         {"p10_s", m.p10_s},
                         {"p90_s", m.p90_s},
                         {"reps", m.reps}});
    }
    records.push_back({{"n", rec.n}, {"methods", methods}});
  }
  return {{"experiment", report.experiment},
          {"records", records},
          {"repetitions", report.repetitions},
          {"warmup", report.warmup},
          {"environment", to_json(report.environment)},
          {"config", report.config}};
}

BenchReport bench_report_from_json(const nlohmann::json& j) {
  try {
    BenchReport report;
    report.experiment = j.at("experiment").get<std::string>();
    for (const auto& r : j.at("records")) {
      ScalabilityRecord rec;
      rec.n = r.at("n").get<std::size_t>();
      for (const auto& m : r.at("methods")) {
        rec.methods.push_back({method_from_string(m.at("method").get<std::string>()), m.at("skipped").get<bool>(),
                               m.at("mean_rate").get<double>(), m.at("std_rate").get<double>(),
                               m.at("trials").get<std::size_t>()});
      }
      report.records.push_back(std::move(rec));
    }
    report.environment = environment_from_json(j.at("environment"));
    report.config = j.at("config");
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed scalability report: ") + e.what());
  }
}

TimingReport timing_report_from_json(const nlohmann::json& j) {
  try {
    TimingReport report;
    report.experiment = j.at("experiment").get<std::string>();
    for (const auto& r : j.at("records")) {
      TimingRecord rec;
      rec.n = r.at("n").get<std::size_t>();
      for (const auto& m : r.at("methods")) {
        rec.methods.push_back({method_from_string(m.at("method").get<std::string>()), m.at("skipped").get<bool>(),
                               m.at("median_s").get<double>(), m.at("p10_s").get<double>(),
                               m.at("p90_s").get<double>(), m.at("reps").get<std::size_t>()});
      }
      report.records.push_back(std::move(rec));
    }
    report.repetitions = j.at("repetitions").get<std::size_t>();
    report.warmup = j.at("warmup").get<std::size_t>();
    report.environment = environment_from_json(j.at("environment"));
    report.config = j.at("config");
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed timing report: ") + e.what());
  }
}

void emit_report(const BenchReport& report, const std::string& path, ReportFormat format) { emit(report, path, format); }

void emit_report(const TimingReport& report, const std::string& path, ReportFormat format) { emit(report, path, format); }

}  // namespace wugnn::bench
