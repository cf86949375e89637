#pragma once

#include <span>
#include <vector>

namespace loadcast::stats {

/// Empirical percentile, `percent` in [0,100], by linear interpolation
/// between order statistics at position percent/100 * (n-1). This is the
/// only percentile definition in the project: initial predictions, quantile
/// leaf values and evaluation statistics all go through it.
/// Throws InvalidInput on an empty sample.
double percentile(std::span<const double> values, double percent);

/// Same as percentile() but on data the caller has already sorted ascending.
double percentile_sorted(std::span<const double> sorted, double percent);

double mean(std::span<const double> values);

/// Sample standard deviation (n-1 denominator); 0 for a single value.
double stddev(std::span<const double> values);

} // namespace loadcast::stats
