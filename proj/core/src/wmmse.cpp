#include "wugnn/wmmse.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "wugnn/errors.hpp"

namespace wugnn::wmmse {

using channel::NetworkInstance;

namespace {

void check_size(const NetworkInstance& instance, std::size_t size, const char* what) {
  if (size != instance.n()) {
    std::ostringstream oss;
    oss << what << " has length " << size << ", instance has n = " << instance.n();
    throw ArgumentError(oss.str());
  }
}

}  // namespace

std::vector<double> PowerVector::powers() const {
  std::vector<double> p(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) p[i] = v[i] * v[i];
  return p;
}

bool PowerVector::feasible(double v_max, double slack) const {
  for (double x : v) {
    if (!(x >= 0.0) || x > v_max + slack) return false;
  }
  return true;
}

PowerVector full_power(const NetworkInstance& instance) {
  return PowerVector{std::vector<double>(instance.n(), instance.v_max())};
}

double sum_rate(const NetworkInstance& instance, std::span<const double> v) {
  check_size(instance, v.size(), "power vector");
  const std::size_t n = instance.n();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double interference = instance.noise_power();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) interference += instance.power_gain(i, j) * v[j] * v[j];
    }
    const double signal = instance.power_gain(i, i) * v[i] * v[i];
    total += std::log2(1.0 + signal / interference);
  }
  return total;
}

double sum_rate(const NetworkInstance& instance, const PowerVector& v) {
  return sum_rate(instance, std::span<const double>(v.v));
}

std::vector<double> update_u(const NetworkInstance& instance, const PowerVector& v) {
  check_size(instance, v.size(), "power vector");
  const std::size_t n = instance.n();
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) {
    double received = instance.noise_power();
    for (std::size_t j = 0; j < n; ++j) received += instance.power_gain(i, j) * v.v[j] * v.v[j];
    u[i] = instance.gain(i, i) * v.v[i] / received;
  }
  return u;
}

std::vector<double> update_w(const NetworkInstance& instance, std::span<const double> u,
                             const PowerVector& v) {
  check_size(instance, u.size(), "u");
  check_size(instance, v.size(), "power vector");
  const std::size_t n = instance.n();
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double mse = 1.0 - u[i] * instance.gain(i, i) * v.v[i];
    if (!(mse > kWeightDomainTol)) {
      std::ostringstream oss;
      oss << "update_w: 1 - u*h*v = " << mse << " at user " << i << " (inconsistent u/v)";
      throw NumericalDomainError(oss.str());
    }
    w[i] = 1.0 / mse;
  }
  return w;
}

PowerVector update_v(const NetworkInstance& instance, std::span<const double> u,
                     std::span<const double> w) {
  check_size(instance, u.size(), "u");
  check_size(instance, w.size(), "w");
  const std::size_t n = instance.n();
  const double v_max = instance.v_max();
  PowerVector v{std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    double penalty = 0.0;
    for (std::size_t j = 0; j < n; ++j) penalty += instance.power_gain(j, i) * u[j] * u[j] * w[j];
    if (penalty < kDegenerateDenominator) {
      v.v[i] = instance.gain(i, i) > 0.0 ? v_max : 0.0;
      continue;
    }
    const double raw = u[i] * w[i] * instance.gain(i, i) / penalty;
    v.v[i] = std::clamp(raw, 0.0, v_max);
  }
  return v;
}

WmmseTrace run_wmmse(const NetworkInstance& instance, const PowerVector& init, std::size_t max_iter,
                     double tol) {
  check_size(instance, init.size(), "initial power vector");
  if (!init.feasible(instance.v_max())) throw ArgumentError("run_wmmse: infeasible initial power vector");
  if (max_iter < 1) throw ArgumentError("run_wmmse: max_iter must be >= 1");
  if (!(tol > 0.0)) throw ArgumentError("run_wmmse: tol must be > 0");

  WmmseTrace trace;
  trace.states.reserve(max_iter + 1);
  trace.sum_rates.reserve(max_iter + 1);

  auto push_state = [&](PowerVector v) {
    WmmseState state;
    state.u = update_u(instance, v);
    state.w = update_w(instance, state.u, v);
    trace.sum_rates.push_back(sum_rate(instance, v));
    state.v = std::move(v);
    trace.states.push_back(std::move(state));
  };

  push_state(init);
  for (std::size_t k = 1; k <= max_iter; ++k) {
    const WmmseState& prev = trace.states.back();
    push_state(update_v(instance, prev.u, prev.w));
    trace.iterations_run = k;
    const double delta = trace.sum_rates[k] - trace.sum_rates[k - 1];
    if (std::abs(delta) < tol) {
      trace.converged = true;
      break;
    }
  }
  return trace;
}

std::pair<PowerVector, double> grid_oracle(const NetworkInstance& instance, std::size_t grid_points) {
  const std::size_t n = instance.n();
  if (n > kGridOracleMaxUsers) {
    std::ostringstream oss;
    oss << "grid_oracle refuses n = " << n << " (limit " << kGridOracleMaxUsers << ")";
    throw RefusalError(oss.str());
  }
  if (grid_points < 2) throw ArgumentError("grid_oracle needs grid_points >= 2");

  const double v_max = instance.v_max();
  std::vector<double> levels(grid_points);
  for (std::size_t k = 0; k < grid_points; ++k) {
    levels[k] = k + 1 == grid_points ? v_max : v_max * static_cast<double>(k) / static_cast<double>(grid_points - 1);
  }

  // Odometer with the last coordinate fastest visits allocations in
  // lexicographic order, so a strict '>' keeps the smallest on ties.
  std::vector<std::size_t> digits(n, 0);
  std::vector<double> v(n, 0.0);
  PowerVector best{v};
  double best_rate = -std::numeric_limits<double>::infinity();
  while (true) {
    for (std::size_t i = 0; i < n; ++i) v[i] = levels[digits[i]];
    const double rate = sum_rate(instance, std::span<const double>(v));
    if (rate > best_rate) {
      best_rate = rate;
      best.v = v;
    }
    std::size_t pos = n;
    while (pos > 0) {
      --pos;
      if (++digits[pos] < grid_points) break;
      digits[pos] = 0;
      if (pos == 0) return {best, best_rate};
    }
  }
}

void write_trace_csv(const WmmseTrace& trace, std::ostream& out) {
  out << "iter,sum_rate\n";
  out << std::setprecision(17);
  for (std::size_t k = 0; k < trace.sum_rates.size(); ++k) out << k << ',' << trace.sum_rates[k] << '\n';
}

}  // namespace wugnn::wmmse
