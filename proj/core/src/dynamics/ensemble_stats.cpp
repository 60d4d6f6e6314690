#include "rave/dynamics/ensemble_stats.hpp"

#include "rave/errors.hpp"

namespace rave::dynamics {

EnsembleStats ensemble_stats(std::span<const double> values) {
  if (values.empty()) throw UsageError("ensemble_stats: no values");
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, sq / n};
}

}  // namespace rave::dynamics
