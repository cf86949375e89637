#include "loadcast/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "loadcast/errors.hpp"

namespace loadcast::stats {

double percentile_sorted(std::span<const double> sorted, double percent) {
    if (sorted.empty()) {
        throw InvalidInput("percentile of an empty sample");
    }
    if (!(percent >= 0.0 && percent <= 100.0)) {
        throw InvalidInput("percentile must lie in [0,100]");
    }
    const double pos = percent / 100.0 * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    if (frac == 0.0) {
        return sorted[lo];
    }
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double percentile(std::span<const double> values, double percent) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    return percentile_sorted(sorted, percent);
}

double mean(std::span<const double> values) {
    if (values.empty()) {
        throw InvalidInput("mean of an empty sample");
    }
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double stddev(std::span<const double> values) {
    if (values.size() < 2) {
        return 0.0;
    }
    const double m = mean(values);
    double acc = 0.0;
    for (double v : values) {
        acc += (v - m) * (v - m);
    }
    return std::sqrt(acc / static_cast<double>(values.size() - 1));
}

} // namespace loadcast::stats
