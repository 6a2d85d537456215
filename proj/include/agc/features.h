#pragma once

#include <array>
#include <span>
#include <string>

#include "agc/plant.h"

namespace agc {

inline constexpr std::size_t kStatsPerSignal = 6;
inline constexpr std::size_t kNumFeatures = 3 * kStatsPerSignal;

// Per-signal statistics in the order mean, std, skewness, slope, min, max;
// signals in the order delta_f1, delta_f2, delta_p_tie. Classifiers and
// prompts index features by this layout.
struct FeatureVector {
  std::array<double, kNumFeatures> values{};

  static const std::array<std::string, kNumFeatures>& names();
  static const std::array<std::string, kStatsPerSignal>& stat_names();
  static std::size_t index(Signal s, std::size_t stat) {
    return static_cast<std::size_t>(s) * kStatsPerSignal + stat;
  }
  double at(Signal s, std::size_t stat) const { return values[index(s, stat)]; }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

double mean(std::span<const double> series);
// Population standard deviation.
double population_std(std::span<const double> series);
// Fisher-Pearson g1 = m3 / m2^1.5; 0 when m2 < 1e-12.
double skewness(std::span<const double> series);
// Least-squares slope against t_k = k * dt.
double slope(std::span<const double> series, double dt);

FeatureVector extract(const SignalTrace& trace);

}  // namespace agc
