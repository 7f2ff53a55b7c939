#pragma once

#include <span>
#include <vector>

namespace parstable {

/// Type-7 empirical quantile (linear interpolation between order statistics)
/// of an already sorted sample.
double quantile_sorted(std::span<const double> sorted, double q);

/// Type-7 empirical quantile; copies and partially sorts the input.
double quantile(std::span<const double> sample, double q);

/// Several quantiles from one sort.
std::vector<double> quantiles(std::span<const double> sample, std::span<const double> qs);

double median(std::span<const double> sample);

}  // namespace parstable
