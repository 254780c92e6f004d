// Acceptance run: one PASS/FAIL line per criterion A1-A8.
//
// Usage: wugnn_acceptance [artifact_dir]
// Trained checkpoints and the bench reports land in artifact_dir (default
// ./acceptance_artifacts). Exit status is 0 only when every criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "model_checks.hpp"
#include "op_cases.hpp"
#include "support.hpp"
#include "wugnn/bench.hpp"
#include "wugnn/gradcheck.hpp"
#include "wugnn/trainer.hpp"
#include "wugnn/wmmse.hpp"

namespace fs = std::filesystem;
using namespace wugnn;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Artifacts {
  fs::path dir;
  std::optional<train::TrainedModel> wugnn;
  std::optional<train::TrainedModel> gnn;
  double wugnn_train_s = 0.0;
  double gnn_train_s = 0.0;

  const train::TrainedModel& trained_wugnn() {
    if (!wugnn) {
      const auto t0 = std::chrono::steady_clock::now();
      train::TrainConfig c;
      wugnn = train::train(c, train::make_dataset(c.channel, c.counts, c.channel.seed));
      wugnn_train_s = seconds_since(t0);
      train::save_trained((dir / "wugnn.ckpt").string(), *wugnn);
    }
    return *wugnn;
  }

  const train::TrainedModel& trained_gnn() {
    if (!gnn) {
      const auto t0 = std::chrono::steady_clock::now();
      train::TrainConfig c;
      c.kind = model::ModelKind::gnn_baseline;
      c.baseline = model::GnnBaselineSpec::matched(c.wugnn.parameter_count());
      gnn = train::train(c, train::make_dataset(c.channel, c.counts, c.channel.seed));
      gnn_train_s = seconds_since(t0);
      train::save_trained((dir / "gnn_baseline.ckpt").string(), *gnn);
    }
    return *gnn;
  }
};

Outcome a1() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_drop = 0.0, worst_w = 1.0, worst_step = 0.0;
  bool monotone = true, weights = true, feasible = true;
  for (std::uint64_t k = 0; k < 200; ++k) {
    const auto inst = testing::random_instance(1 + k % 3, k);
    const auto trace = wmmse::run_wmmse(inst, wmmse::full_power(inst), 10000, 1e-12);
    for (std::size_t i = 1; i < trace.sum_rates.size(); ++i) {
      const double drop = trace.sum_rates[i - 1] - trace.sum_rates[i];
      worst_drop = std::max(worst_drop, drop);
      monotone = monotone && drop <= 1e-9;
    }
    for (const auto& s : trace.states) {
      for (double w : s.w) {
        worst_w = std::min(worst_w, w);
        weights = weights && w >= 1.0 - 1e-12;
      }
    }
    const auto& v = trace.final_state().v;
    feasible = feasible && v.feasible(inst.v_max());
    const auto u = wmmse::update_u(inst, v);
    const auto w = wmmse::update_w(inst, u, v);
    const auto next = wmmse::update_v(inst, u, w);
    for (std::size_t i = 0; i < v.size(); ++i) worst_step = std::max(worst_step, std::abs(next.v[i] - v.v[i]));
  }
  const double elapsed = seconds_since(t0);
  const bool stationary = worst_step < 1e-5;
  return {monotone && weights && feasible && stationary && elapsed < 10.0,
          fmt("worst rate drop %.2e, min w %.15f, feasible %s, extra-sweep step %.2e, %.2f s", worst_drop, worst_w,
              feasible ? "yes" : "no", worst_step, elapsed)};
}

Outcome a2() {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t close = 0;
  double worst_excess = -1e300, worst_gap = 0.0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    const auto inst = testing::random_instance(2, k);
    const double rate = wmmse::run_wmmse(inst, wmmse::full_power(inst), wmmse::WmmseSettings{}).final_sum_rate();
    const double grid = wmmse::grid_oracle(inst, 41).second;
    if (rate >= grid - 0.05) ++close;
    worst_excess = std::max(worst_excess, rate - grid);
    worst_gap = std::max(worst_gap, grid - rate);
  }
  const double elapsed = seconds_since(t0);
  return {close >= 90 && worst_excess <= 1e-6 && elapsed < 30.0,
          fmt("within 0.05 bits on %zu/100 (need 90), max excess over grid %.2e, largest shortfall %.3f bits, %.2f s",
              close, worst_excess, worst_gap, elapsed)};
}

bench::BenchReport sweep(Artifacts& art, bool with_gnn) {
  bench::Checkpoints ck;
  ck.wugnn = art.trained_wugnn().model;
  if (with_gnn) ck.gnn = art.trained_gnn().model;
  ck.trained_n = 10;
  bench::ScalabilitySettings s;
  s.sizes = {10, 20, 30, 50};
  s.trials_per_size = 50;
  return bench::run_scalability(ck, s);
}

std::optional<bench::BenchReport> g_sweep;

const bench::BenchReport& shared_sweep(Artifacts& art) {
  if (!g_sweep) {
    g_sweep = sweep(art, true);
    bench::emit_report(*g_sweep, (art.dir / "scalability.csv").string(), bench::ReportFormat::csv);
    bench::emit_report(*g_sweep, (art.dir / "scalability.json").string(), bench::ReportFormat::json);
  }
  return *g_sweep;
}

Outcome a3(Artifacts& art) {
  const auto& tm = art.trained_wugnn();
  const auto& report = shared_sweep(art);
  bool pass = true, beats_wmmse = true, beats_gnn = true;
  std::string ratios;
  for (const auto& rec : report.records) {
    const double wu = rec.at(bench::Method::wugnn).mean_rate;
    const double wm = rec.at(bench::Method::wmmse).mean_rate;
    const double gn = rec.at(bench::Method::gnn).mean_rate;
    pass = pass && wu >= 0.95 * wm;
    beats_wmmse = beats_wmmse && wu >= wm;
    beats_gnn = beats_gnn && wu >= gn;
    ratios += fmt(" n=%zu %.3f", rec.n, wu / wm);
  }
  return {pass, "WUGNN/WMMSE" + ratios + fmt(" (need >= 0.95); exceeds WMMSE everywhere: %s, exceeds GNN everywhere: "
                                             "%s; trained %.0f s, best epoch %zu",
                                             beats_wmmse ? "yes" : "no", beats_gnn ? "yes" : "no", art.wugnn_train_s,
                                             tm.best_epoch)};
}

Outcome a4(Artifacts& art) {
  const auto& report = shared_sweep(art);
  auto ratio = [&](std::size_t n) {
    for (const auto& rec : report.records) {
      if (rec.n == n) return rec.at(bench::Method::gnn).mean_rate / rec.at(bench::Method::wmmse).mean_rate;
    }
    return std::nan("");
  };
  const double r10 = ratio(10), r50 = ratio(50);
  const auto& gnn = art.trained_gnn().model;
  return {r50 < r10, fmt("GNN/WMMSE n=10 %.3f, n=20 %.3f, n=30 %.3f, n=50 %.3f; %zu vs %zu parameters", r10, ratio(20),
                         ratio(30), r50, gnn.baseline.parameter_count(), art.trained_wugnn().model.wugnn.parameter_count())};
}

Outcome a5(Artifacts& art) {
  const auto t0 = std::chrono::steady_clock::now();
  bench::Checkpoints ck;
  ck.wugnn = art.trained_wugnn().model;
  ck.gnn = art.trained_gnn().model;
  bench::TimingSettings s;
  s.sizes = {100};
  s.threads = 1;
  const auto report = bench::run_timing(ck, s);
  bench::emit_report(report, (art.dir / "timing.csv").string(), bench::ReportFormat::csv);
  bench::emit_report(report, (art.dir / "timing.json").string(), bench::ReportFormat::json);
  const auto& rec = report.records.at(0);
  const double wu = rec.at(bench::Method::wugnn).median_s;
  const double wm = rec.at(bench::Method::wmmse).median_s;
  const double gn = rec.at(bench::Method::gnn).median_s;
  const double elapsed = seconds_since(t0);
  return {wu <= wm / 10.0 && wu <= 1.0 && elapsed < 900.0,
          fmt("n=100 medians: WMMSE %.3e s, WUGNN %.3e s, GNN %.3e s; WMMSE/WUGNN = %.1fx (need >= 10x), %zu reps",
              wm, wu, gn, wm / wu, report.repetitions)};
}

Outcome a6() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::string worst_name;
  for (const auto& c : testing::op_cases()) {
    const auto r = diff::finite_diff_check(c.fn, c.params, 1e-5);
    if (r.max_rel_error >= worst) {
      worst = r.max_rel_error;
      worst_name = c.name;
    }
  }
  const auto m = model::Model::make_wugnn(model::WugnnSpec::make(), 3);
  const auto data = train::make_split({testing::random_instance(3, 33)});
  const auto batch = train::make_train_batch(data);
  model::Model probe = m;
  const auto r = diff::finite_diff_check(
      [&](diff::Tape& tape, const diff::ModelParams& params) {
        probe.params = params;
        return train::loss(tape, probe, batch);
      },
      m.params, 1e-5);
  const double elapsed = seconds_since(t0);
  return {worst < 1e-4 && r.max_rel_error < 1e-4 && elapsed < 60.0,
          fmt("%zu ops, worst %.2e (%s); WUGNN loss at n=3 %.2e over %zu coordinates, %.2f s",
              testing::op_cases().size(), worst, worst_name.c_str(), r.max_rel_error, r.coordinates, elapsed)};
}

Outcome a7() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_gap = 0.0;
  bool feasible = true;
  std::mt19937_64 rng(7);
  for (std::uint64_t k = 0; k < 100; ++k) {
    const std::size_t n = 1 + rng() % 12;
    const double p_max = std::uniform_real_distribution<double>(0.1, 5.0)(rng);
    const double scale = std::uniform_real_distribution<double>(0.5, 4.0)(rng);
    const auto inst = testing::random_instance(n, 70000 + k, 1.0, p_max);
    const auto perm = testing::random_permutation(n, k);
    const auto wu = model::WugnnSpec::make();
    for (const auto& m : {testing::scaled_params(model::Model::make_wugnn(wu, rng()), scale),
                          testing::scaled_params(
                              model::Model::make_baseline(model::GnnBaselineSpec::matched(wu.parameter_count()), rng()),
                              scale)}) {
      worst_gap = std::max(worst_gap, testing::equivariance_gap(m, inst, perm));
      feasible = feasible && testing::feasible(m.allocate(inst).v, p_max) &&
                 testing::feasible(m.allocate(channel::permute_instance(inst, perm)).v, p_max);
    }
  }
  const double elapsed = seconds_since(t0);
  return {worst_gap <= 1e-10 && feasible && elapsed < 60.0,
          fmt("worst permutation gap %.2e over 100 triples x 2 models, all feasible: %s, %.2f s", worst_gap,
              feasible ? "yes" : "no", elapsed)};
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome a8(Artifacts& art) {
  train::TrainConfig c;
  c.epochs = 2;
  c.seed = 12345;
  const auto ds = train::make_dataset(c.channel, c.counts, c.channel.seed);
  const auto a = art.dir / "determinism_a.ckpt";
  const auto b = art.dir / "determinism_b.ckpt";
  train::save_trained(a.string(), train::train(c, ds));
  train::save_trained(b.string(), train::train(c, ds));
  const bool identical = file_bytes(a) == file_bytes(b) && !file_bytes(a).empty();

  bench::Checkpoints ck;
  ck.wugnn = train::load_trained(a.string()).model;
  bench::ScalabilitySettings ss;
  ss.sizes = {1, 4, 9};
  ss.trials_per_size = 5;
  const auto scal = bench::run_scalability(ck, ss);
  bench::TimingSettings ts;
  ts.sizes = {3, 8};
  ts.repetitions = 5;
  ts.warmup = 1;
  const auto timing = bench::run_timing(ck, ts);

  bool lossless = true;
  const auto sc = art.dir / "rt_scalability.csv", sj = art.dir / "rt_scalability.json";
  const auto tc = art.dir / "rt_timing.csv", tj = art.dir / "rt_timing.json";
  bench::emit_report(scal, sc.string(), bench::ReportFormat::csv);
  bench::emit_report(scal, sj.string(), bench::ReportFormat::json);
  bench::emit_report(timing, tc.string(), bench::ReportFormat::csv);
  bench::emit_report(timing, tj.string(), bench::ReportFormat::json);
  {
    std::ifstream in(sc);
    lossless = lossless && bench::read_scalability_csv(in) == scal.records;
  }
  {
    std::ifstream in(sj);
    lossless = lossless && bench::bench_report_from_json(nlohmann::json::parse(in)) == scal;
  }
  {
    std::ifstream in(tc);
    lossless = lossless && bench::read_timing_csv(in) == timing.records;
  }
  {
    std::ifstream in(tj);
    lossless = lossless && bench::timing_report_from_json(nlohmann::json::parse(in)) == timing;
  }
  const bool params_same = train::load_trained(a.string()).model.params.equal_values(ck.wugnn->params);
  for (const auto& p : {a, b, sc, sj, tc, tj}) fs::remove(p);
  return {identical && lossless && params_same,
          fmt("2-epoch checkpoints bit-identical: %s; scalability and timing CSV/JSON round-trips lossless: %s",
              identical ? "yes" : "no", lossless && params_same ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  Artifacts art;
  art.dir = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_artifacts");
  fs::create_directories(art.dir);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"A1", a1},
      {"A2", a2},
      {"A3", [&] { return a3(art); }},
      {"A4", [&] { return a4(art); }},
      {"A5", [&] { return a5(art); }},
      {"A6", a6},
      {"A7", a7},
      {"A8", [&] { return a8(art); }},
  };
  int failures = 0;
  for (const auto& [id, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << id << ' ' << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
