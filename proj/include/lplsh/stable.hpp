#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "lplsh/common.hpp"
#include "lplsh/stats.hpp"

/**
 * @file stable.hpp
 *
 * @brief Symmetric p-stable variates and the truncated-moment machinery that
 * defines the projection threshold T(t, eps).
 *
 * Convention throughout: characteristic function exp(-|xi|^p), so that
 * <a, x> with i.i.d. standard entries a_i is distributed as ||x||_p X.
 * At p = 2 this is a Gaussian with variance 2.
 */

namespace lplsh {

struct StableParams {
    double p = 1.5;

    StableParams() = default;
    explicit StableParams(double p_);
};

/// Chambers-Mallows-Stuck draw (one uniform angle, one unit exponential).
double sample_stable(const StableParams& params, Rng& rng);

struct MomentEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n_samples = 0;
};

inline constexpr std::size_t kMomentChunk = 1 << 16;
inline constexpr std::size_t kDefaultThresholdSamples = 10'000'000;

/**
 * Monte Carlo estimate of E[min(|X|, M)^(order * p)].
 *
 * Samples are drawn in fixed chunks of kMomentChunk, chunk c seeded with
 * derive_seed(seed, c), so the estimate depends only on (p, M, order, n, seed).
 * Requires M >= 1 and n_samples >= 10^4.
 */
MomentEstimate truncated_moment(const StableParams& params, double M, int order,
                                std::size_t n_samples, std::uint64_t seed);

struct Threshold {
    double T = 0.0;
    int t = 0;
    double epsilon = 0.0;
    double p = 0.0;
    std::size_t sample_count = 0;
    std::uint64_t seed = 0;
    /// The truncated p-th moment at M = t^eps and its standard error.
    MomentEstimate moment;
};

/// T = t * E[min(|X|, t^eps)^p] / 2.
Threshold compute_threshold(int t, double epsilon, const StableParams& params,
                            std::size_t n_samples, std::uint64_t seed);

/**
 * Versioned (p, t, eps, n_samples, seed) -> T records.
 *
 * File layout: a header line "lplsh-threshold-cache 1", then one record per
 * line with hexadecimal floats so values round-trip exactly.
 */
class ThresholdCache {
public:
    using Key = std::tuple<double, int, double, std::size_t, std::uint64_t>;

    Threshold get_or_compute(int t, double epsilon, const StableParams& params,
                             std::size_t n_samples, std::uint64_t seed);
    std::optional<double> lookup(const Key& key) const;
    void insert(const Key& key, double T);

    std::size_t size() const { return entries_.size(); }

    void save(const std::string& path) const;
    static ThresholdCache load(const std::string& path);

private:
    std::map<Key, double> entries_;
};

/// Constants of the density sandwich a/x^(p+1) - b/x^3 <= phi_p(x) <= 2^((p+1)/2) a/x^(p+1) + b/x^3.
struct TailConstants {
    double a_hat = 0.0;
    double b_hat = 0.0;
    Interval fit_range{10.0, 100.0};
};

struct TailBounds {
    double lower = 0.0;
    double upper = 0.0;
};

/// Bounds on Pr[X > M] from integrating the density sandwich over [M, inf), clamped to [0, 1].
TailBounds tail_probability_bounds(double M, const StableParams& params, const TailConstants& consts);

enum class TailFitStatus {
    ok,
    /// Some grid point saw fewer than kMinTailCount exceedances.
    insufficient_samples,
    /// No observable power tail at the low end of the range (p = 2).
    degenerate,
};

inline constexpr std::size_t kMinTailCount = 10;

struct TailPoint {
    double M = 0.0;
    std::size_t count = 0;
    double tail_prob = 0.0;
    /// p * M^p * tail_prob, ideally flat and equal to a.
    double scaled = 0.0;
};

struct TailFit {
    TailConstants consts;
    TailFitStatus status = TailFitStatus::ok;
    std::vector<TailPoint> points;
    std::size_t n_samples = 0;

    /// max |scaled / mean(scaled) - 1| over the grid.
    double flatness() const;
};

/**
 * Fits a_hat as the geometric mean of p * M^p * Pr[X > M] over a log-spaced
 * grid in fit_range, then b_hat as the smallest nonnegative value for which
 * tail_probability_bounds contains every empirical tail on the grid.
 * Requires fit_range within [5, inf) and n_samples >= 10^6.
 */
TailFit fit_tail_constant(const StableParams& params, std::size_t n_samples, Interval fit_range,
                          std::uint64_t seed, std::size_t grid_points = 10);

struct ConcentrationReport {
    double rate_low = 0.0;
    double rate_high = 0.0;
    Interval ci_low;
    Interval ci_high;
    std::size_t trials = 0;
    /// 2^((4+p)/2) / eps, the multiple of T defining the high event.
    double high_factor = 0.0;
};

/**
 * Empirical frequencies of ||Ax||_p^p < T and ||Ax||_p^p > 2^((4+p)/2) eps^-1 T
 * for a t x d stable matrix A and a fixed unit vector x (default e_1 in R^16).
 */
ConcentrationReport validate_concentration(int t, double epsilon, const StableParams& params,
                                           const Threshold& threshold, std::size_t trials,
                                           std::uint64_t seed,
                                           std::span<const double> x = {});

}  // namespace lplsh
