#include "agc/features.h"

#include <algorithm>
#include <cmath>

#include "agc/error.h"

namespace agc {

namespace {

void require_length(std::span<const double> series, const char* what) {
  if (series.size() < 2) {
    throw InvalidArgument(std::string(what) + ": series needs >= 2 values");
  }
}

}  // namespace

const std::array<std::string, kStatsPerSignal>& FeatureVector::stat_names() {
  static const std::array<std::string, kStatsPerSignal> names = {
      "mean", "std", "skewness", "slope", "min", "max"};
  return names;
}

const std::array<std::string, kNumFeatures>& FeatureVector::names() {
  static const std::array<std::string, kNumFeatures> names = [] {
    std::array<std::string, kNumFeatures> out;
    for (Signal s : kAllSignals) {
      for (std::size_t j = 0; j < kStatsPerSignal; ++j) {
        out[index(s, j)] =
            std::string(signal_name(s)) + "." + stat_names()[j];
      }
    }
    return out;
  }();
  return names;
}

double mean(std::span<const double> series) {
  if (series.empty()) throw InvalidArgument("mean: empty series");
  double sum = 0.0;
  for (double v : series) sum += v;
  return sum / static_cast<double>(series.size());
}

double population_std(std::span<const double> series) {
  const double mu = mean(series);
  double m2 = 0.0;
  for (double v : series) m2 += (v - mu) * (v - mu);
  return std::sqrt(m2 / static_cast<double>(series.size()));
}

double skewness(std::span<const double> series) {
  require_length(series, "skewness");
  const double mu = mean(series);
  const auto n = static_cast<double>(series.size());
  double m2 = 0.0;
  double m3 = 0.0;
  for (double v : series) {
    const double d = v - mu;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  if (m2 < 1e-12) return 0.0;
  return m3 / std::pow(m2, 1.5);
}

double slope(std::span<const double> series, double dt) {
  require_length(series, "slope");
  if (!(dt > 0)) throw InvalidArgument("slope: dt must be > 0");
  // Centred abscissae c_k = k - (n-1)/2 are exact half-integers. Pairing
  // k with n-1-k gives sum c_k v_k = sum_{k<n/2} c_{n-1-k} (v_{n-1-k} - v_k),
  // which is exactly zero for constant or symmetric series.
  const std::size_t n = series.size();
  const double half_span = static_cast<double>(n - 1) / 2.0;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double c = static_cast<double>(n - 1 - k) - half_span;
    sxy += c * (series[n - 1 - k] - series[k]);
    sxx += 2.0 * c * c;
  }
  return sxy / (sxx * dt);
}

FeatureVector extract(const SignalTrace& trace) {
  if (trace.size() < 2) throw InvalidArgument("extract: trace too short");
  const double dt = trace.t[1] - trace.t[0];
  FeatureVector fv;
  for (Signal s : kAllSignals) {
    const std::vector<double>& x = trace.series(s);
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    // Summation rounding must not push the mean outside [min, max].
    fv.values[FeatureVector::index(s, 0)] = std::clamp(mean(x), *lo, *hi);
    fv.values[FeatureVector::index(s, 1)] = population_std(x);
    fv.values[FeatureVector::index(s, 2)] = skewness(x);
    fv.values[FeatureVector::index(s, 3)] = slope(x, dt);
    fv.values[FeatureVector::index(s, 4)] = *lo;
    fv.values[FeatureVector::index(s, 5)] = *hi;
  }
  return fv;
}

}  // namespace agc
