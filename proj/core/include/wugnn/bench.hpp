#pragma once

// Scalability sweep and inference timing for WMMSE and the two learned
// allocators, plus CSV/JSON reports.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wugnn/channel.hpp"
#include "wugnn/models.hpp"
#include "wugnn/wmmse.hpp"

namespace wugnn::bench {

enum class Method { wmmse, gnn, wugnn };
inline constexpr Method kMethods[] = {Method::wmmse, Method::gnn, Method::wugnn};

std::string to_string(Method method);
Method method_from_string(const std::string& name);

struct Environment {
  std::string cpu;
  std::size_t threads = 1;
  std::string build_profile;
  std::string compiler;

  bool operator==(const Environment&) const = default;
};

/// CPU model from /proc/cpuinfo when available, "unknown" otherwise.
Environment capture_environment(std::size_t threads);

struct RateStats {
  Method method = Method::wmmse;
  bool skipped = false;
  double mean_rate = 0.0;
  double std_rate = 0.0;  // sample standard deviation, 0 for a single trial
  std::size_t trials = 0;

  bool operator==(const RateStats&) const = default;
};

struct ScalabilityRecord {
  std::size_t n = 0;
  std::vector<RateStats> methods;  // wmmse, gnn, wugnn

  const RateStats& at(Method method) const;
  bool operator==(const ScalabilityRecord&) const = default;
};

struct BenchReport {
  std::string experiment = "scalability";
  std::vector<ScalabilityRecord> records;
  Environment environment;
  nlohmann::json config = nlohmann::json::object();

  bool operator==(const BenchReport&) const = default;
};

struct TimingStats {
  Method method = Method::wmmse;
  bool skipped = false;
  double median_s = 0.0;
  double p10_s = 0.0;
  double p90_s = 0.0;
  std::size_t reps = 0;

  bool operator==(const TimingStats&) const = default;
};

struct TimingRecord {
  std::size_t n = 0;
  std::vector<TimingStats> methods;

  const TimingStats& at(Method method) const;
  bool operator==(const TimingRecord&) const = default;
};

struct TimingReport {
  std::string experiment = "timing";
  std::vector<TimingRecord> records;
  std::size_t repetitions = 0;
  std::size_t warmup = 0;
  Environment environment;
  nlohmann::json config = nlohmann::json::object();

  bool operator==(const TimingReport&) const = default;
};

/// A missing model is reported as skipped.
struct Checkpoints {
  std::optional<model::Model> wugnn;
  std::optional<model::Model> gnn;
  std::size_t trained_n = 0;  // informational, copied into the report config
};

Checkpoints load_checkpoints(const std::optional<std::string>& wugnn_path,
                             const std::optional<std::string>& gnn_path);

struct ScalabilitySettings {
  std::vector<std::size_t> sizes = {10, 20, 30, 50, 70, 100};
  std::size_t trials_per_size = 50;
  std::uint64_t seed = 0;
  double noise_power = 1.0;
  double p_max = 1.0;
  wmmse::WmmseSettings wmmse;
  std::size_t threads = 1;
};

struct TimingSettings {
  std::vector<std::size_t> sizes = {10, 20, 30, 50, 70, 100};
  std::size_t repetitions = 20;
  std::size_t warmup = 2;
  std::uint64_t seed = 0;
  double noise_power = 1.0;
  double p_max = 1.0;
  wmmse::WmmseSettings wmmse{1e-6, 100};
  std::size_t threads = 1;
};

/// Seed of trial k at size n in a sweep seeded with `seed`.
std::uint64_t instance_seed(std::uint64_t seed, std::size_t n, std::size_t k);

/// Every method is evaluated on the same instances; WMMSE starts from full
/// power.
BenchReport run_scalability(const Checkpoints& checkpoints, const ScalabilitySettings& settings);

/// One full allocation per repetition: graph build and forward pass for the
/// models, a WMMSE run for the solver. Repetition r uses its own instance;
/// warmup runs use extra instances and are discarded.
TimingReport run_timing(const Checkpoints& checkpoints, const TimingSettings& settings);

/// Median and p10/p90 (linear interpolation) of `reps` timed calls after
/// `warmup` untimed ones. The callable receives the repetition index.
TimingStats time_callable(const std::function<void(std::size_t)>& fn, std::size_t reps, std::size_t warmup);

/// Linear-interpolation quantile, q in [0, 1].
double quantile(std::vector<double> values, double q);

enum class ReportFormat { csv, json };
ReportFormat report_format_from_string(const std::string& name);

inline constexpr const char* kScalabilityCsvHeader = "n,method,mean_rate,std_rate,trials";
inline constexpr const char* kTimingCsvHeader = "n,method,median_s,p10_s,p90_s,reps";

// Skipped methods appear in CSV with empty numeric fields and trials/reps 0.
void write_csv(const BenchReport& report, std::ostream& out);
void write_csv(const TimingReport& report, std::ostream& out);
/// Parses the records back; environment and config are not part of the CSV.
std::vector<ScalabilityRecord> read_scalability_csv(std::istream& in);
std::vector<TimingRecord> read_timing_csv(std::istream& in);

nlohmann::json to_json(const Environment& env);
nlohmann::json to_json(const BenchReport& report);
nlohmann::json to_json(const TimingReport& report);
Environment environment_from_json(const nlohmann::json& j);
BenchReport bench_report_from_json(const nlohmann::json& j);
TimingReport timing_report_from_json(const nlohmann::json& j);

/// Throws IoError naming the path when the file cannot be written.
void emit_report(const BenchReport& report, const std::string& path, ReportFormat format);
void emit_report(const TimingReport& report, const std::string& path, ReportFormat format);

}  // namespace wugnn::bench
