#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "wugnn/channel.hpp"

namespace wugnn::wmmse {

/// Transmit amplitudes; the allocated power of user i is v[i]^2.
struct PowerVector {
  std::vector<double> v;

  std::size_t size() const noexcept { return v.size(); }
  std::vector<double> powers() const;
  /// True when every entry lies in [0, v_max + slack].
  bool feasible(double v_max, double slack = 0.0) const;

  bool operator==(const PowerVector&) const = default;
};

PowerVector full_power(const channel::NetworkInstance& instance);

struct WmmseState {
  std::vector<double> u;  // receive scalars
  std::vector<double> w;  // MSE weights
  PowerVector v;
};

/// states[k] holds v after k v-updates together with the u and w computed
/// from that v. states[0] is the initial point.
struct WmmseTrace {
  std::vector<WmmseState> states;
  std::vector<double> sum_rates;
  std::size_t iterations_run = 0;
  bool converged = false;

  const WmmseState& final_state() const { return states.back(); }
  double final_sum_rate() const { return sum_rates.back(); }
};

struct WmmseSettings {
  double tol = 1e-6;
  std::size_t max_iter = 100;
};

/// Denominators below this in the v-update fall back to full power (or zero
/// power for a user with no direct link).
inline constexpr double kDegenerateDenominator = 1e-12;
/// update_w refuses inputs with 1 - u*h*v at or below this.
inline constexpr double kWeightDomainTol = 1e-14;

/// Shannon sum rate in bits/s/Hz.
double sum_rate(const channel::NetworkInstance& instance, const PowerVector& v);
double sum_rate(const channel::NetworkInstance& instance, std::span<const double> v);

std::vector<double> update_u(const channel::NetworkInstance& instance, const PowerVector& v);
std::vector<double> update_w(const channel::NetworkInstance& instance, std::span<const double> u,
                             const PowerVector& v);
PowerVector update_v(const channel::NetworkInstance& instance, std::span<const double> u,
                     std::span<const double> w);

WmmseTrace run_wmmse(const channel::NetworkInstance& instance, const PowerVector& init,
                     std::size_t max_iter = 100, double tol = 1e-6);
inline WmmseTrace run_wmmse(const channel::NetworkInstance& instance, const PowerVector& init,
                            const WmmseSettings& settings) {
  return run_wmmse(instance, init, settings.max_iter, settings.tol);
}

/// Exhaustive search over the uniform amplitude grid {0, ..., v_max}^n.
/// Ties resolve to the lexicographically smallest allocation.
std::pair<PowerVector, double> grid_oracle(const channel::NetworkInstance& instance,
                                           std::size_t grid_points);

inline constexpr std::size_t kGridOracleMaxUsers = 4;

/// CSV with header "iter,sum_rate", one row per trace state.
void write_trace_csv(const WmmseTrace& trace, std::ostream& out);

}  // namespace wugnn::wmmse
