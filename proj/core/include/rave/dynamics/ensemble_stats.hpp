#pragma once

#include <span>

namespace rave::dynamics {

struct EnsembleStats {
  double mean = 0.0;
  double variance = 0.0;  // population variance (divide by M)
};

// Two-pass mean and population variance. Throws UsageError on an empty span.
EnsembleStats ensemble_stats(std::span<const double> values);

}  // namespace rave::dynamics
