#pragma once

// Independent reference implementations used as test oracles. They share no
// code with the library: plain loops over the gain matrix, straight from the
// closed forms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "wugnn/channel.hpp"

namespace wugnn::testing {

inline channel::NetworkInstance random_instance(std::size_t n, std::uint64_t seed, double noise = 1.0,
                                                double p_max = 1.0) {
  channel::ChannelConfig c;
  c.n = n;
  c.seed = seed;
  c.noise_power = noise;
  c.p_max = p_max;
  return channel::generate_instance(c);
}

/// Instance from a row-major amplitude matrix.
inline channel::NetworkInstance make_instance(std::size_t n, std::vector<double> amplitudes, double noise = 1.0,
                                              double p_max = 1.0) {
  return channel::NetworkInstance(n, std::move(amplitudes), noise, p_max);
}

/// Symmetric instance with the given direct and cross power gains.
inline channel::NetworkInstance symmetric_instance(std::size_t n, double direct_power, double cross_power,
                                                   double noise = 1.0, double p_max = 1.0) {
  std::vector<double> h(n * n, std::sqrt(cross_power));
  for (std::size_t i = 0; i < n; ++i) h[i * n + i] = std::sqrt(direct_power);
  return make_instance(n, std::move(h), noise, p_max);
}

inline double oracle_sum_rate(const channel::NetworkInstance& inst, const std::vector<double>& v) {
  const std::size_t n = inst.n();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double interference = inst.noise_power();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) interference += inst.gain(i, j) * inst.gain(i, j) * v[j] * v[j];
    }
    const double signal = inst.gain(i, i) * inst.gain(i, i) * v[i] * v[i];
    total += std::log2(1.0 + signal / interference);
  }
  return total;
}

struct OracleSweep {
  std::vector<double> u, w, v;
};

/// One u, w, v sweep of the scalar WMMSE closed forms with the clamp and the
/// degenerate-denominator rule.
inline OracleSweep oracle_wmmse_sweep(const channel::NetworkInstance& inst, const std::vector<double>& v) {
  const std::size_t n = inst.n();
  OracleSweep s;
  s.u.resize(n);
  s.w.resize(n);
  s.v.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double denom = inst.noise_power();
    for (std::size_t j = 0; j < n; ++j) denom += inst.gain(i, j) * inst.gain(i, j) * v[j] * v[j];
    s.u[i] = inst.gain(i, i) * v[i] / denom;
    s.w[i] = 1.0 / (1.0 - s.u[i] * inst.gain(i, i) * v[i]);
  }
  const double vmax = std::sqrt(inst.p_max());
  for (std::size_t i = 0; i < n; ++i) {
    double denom = 0.0;
    for (std::size_t j = 0; j < n; ++j) denom += inst.gain(j, i) * inst.gain(j, i) * s.u[j] * s.u[j] * s.w[j];
    if (denom < 1e-12) {
      s.v[i] = inst.gain(i, i) > 0.0 ? vmax : 0.0;
    } else {
      s.v[i] = std::clamp(s.u[i] * s.w[i] * inst.gain(i, i) / denom, 0.0, vmax);
    }
  }
  return s;
}

struct OracleGrid {
  std::vector<double> v;
  double rate = -1.0;
};

/// Brute force over the amplitude grid with an odometer; strict improvement
/// keeps the lexicographically smallest maximizer.
inline OracleGrid oracle_grid(const channel::NetworkInstance& inst, std::size_t points) {
  const std::size_t n = inst.n();
  const double vmax = std::sqrt(inst.p_max());
  std::vector<std::size_t> idx(n, 0);
  OracleGrid best;
  while (true) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = vmax * static_cast<double>(idx[i]) / static_cast<double>(points - 1);
    const double r = oracle_sum_rate(inst, v);
    if (r > best.rate) {
      best.rate = r;
      best.v = v;
    }
    std::size_t pos = n;
    while (pos > 0) {
      --pos;
      if (++idx[pos] < points) break;
      idx[pos] = 0;
      if (pos == 0) return best;
    }
    if (n == 0) return best;
  }
}

inline std::vector<std::size_t> random_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

}  // namespace wugnn::testing
