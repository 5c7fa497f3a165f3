#pragma once

#include <cstddef>
#include <vector>

namespace lplsh {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

inline constexpr double kZ95 = 1.959963984540054;
inline constexpr double kZ99 = 2.5758293035489004;

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::size_t successes, std::size_t trials, double z = kZ95);

/// sqrt(p(1-p)/n).
double binomial_sigma(double p, std::size_t n);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic Kolmogorov p-value.
/// Both inputs are sorted in place.
KsResult ks_two_sample(std::vector<double>& a, std::vector<double>& b);

struct MeanStat {
    double mean = 0.0;
    double std_error = 0.0;
};

MeanStat mean_and_stderr(const std::vector<double>& xs);

}  // namespace lplsh
