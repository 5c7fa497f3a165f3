#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lplsh/lsh_scheme.hpp"
#include "lplsh/stats.hpp"

/**
 * @file collision_lab.hpp
 *
 * @brief Monte Carlo estimates of collision probabilities and of
 * rho = ln(1/p1) / ln(1/p2) for the ball-lattice hash family.
 *
 * Every estimator derives one seed per trial from a root seed, so results are
 * identical for any thread count.
 */

namespace lplsh {

struct CollisionEstimate {
    double distance = 0.0;
    std::size_t trials = 0;
    std::size_t collisions = 0;
    double p_hat = 0.0;
    Interval ci95;
    /// Fraction of trials where either point hashed to the fallback value.
    double fallback_rate = 0.0;
    /// Collisions among trials where neither point fell back.
    std::size_t covered_trials = 0;
    std::size_t covered_collisions = 0;

    double covered_p_hat() const {
        return covered_trials ? static_cast<double>(covered_collisions) / static_cast<double>(covered_trials) : 0.0;
    }
};

/// x with generalized-Gaussian coordinates and y = x + distance * random_lp_direction.
std::pair<Vector, Vector> make_pair_at_distance(const LpSpace& space, double distance, Rng& rng);

/// Fresh hash function and fresh pair per trial. trials >= 10^3.
CollisionEstimate estimate_collision(const SchemeParams& scheme, std::size_t d, double distance,
                                     std::size_t trials, std::uint64_t seed);

/**
 * Keeps the projection of base fixed and draws fresh lattices per trial, so
 * the estimate is conditioned on the realized projected pair (A'x, A'y).
 */
CollisionEstimate estimate_collision_fixed_projection(const HashFunction& base, std::span<const double> x,
                                                      std::span<const double> y, std::size_t trials,
                                                      std::uint64_t seed);

struct GeometricEstimate {
    /// Vol(B(x,w) n B(y,w)) / Vol(B(x,w) u B(y,w)).
    double value = 0.0;
    double std_error = 0.0;
    /// Pr[z in B(y,w)] for z uniform in B(x,w) (q-form estimator only).
    double q = 0.0;
    std::size_t samples = 0;
};

/// Estimates q by sampling B(x, w) uniformly and returns q / (2 - q). trials >= 10^4.
GeometricEstimate geometric_collision(std::span<const double> x, std::span<const double> y, double w,
                                      const LpSpace& space, std::size_t trials, Rng& rng);

/// Intersection over union by rejection from the common bounding box. Practical for t <= 3.
GeometricEstimate geometric_collision_direct(std::span<const double> x, std::span<const double> y, double w,
                                             const LpSpace& space, std::size_t trials, Rng& rng);

/// (2w - dist) / (2w + dist) for dist <= 2w, else 0: the t = 1 interval overlap ratio.
double interval_collision_1d(double w, double dist);

struct RhoReport {
    double c = 0.0;
    double p = 0.0;
    double rho_hat = 0.0;
    /// rho evaluated at the 95% endpoints: (p1 hi, p2 lo) and (p1 lo, p2 hi).
    Interval rho_ci;
    /// p2 saw no collision within budget; rho_hat is then the one-sided upper bound.
    bool upper_bounded_only = false;
    CollisionEstimate p1;
    CollisionEstimate p2;
    double baseline_inv_c = 0.0;
    double lower_bound_inv_cp = 0.0;
    /// (ln c)^2 / c^p.
    double bound_shape = 0.0;
    /// Mean geometric collision over projected near pairs; tracks p1 when coverage is complete.
    std::optional<double> geometric_p1;
    SchemeParams scheme;
};

struct RhoOptions {
    std::size_t trials = 10'000;
    /// Far-distance trials double until this many collisions are seen or the budget is spent.
    std::size_t min_far_collisions = 20;
    std::size_t trial_budget = 10'000'000;
    /// Projected pairs averaged for the geometric cross-check; 0 disables it.
    std::size_t geometric_pairs = 0;
    std::size_t geometric_samples = 20'000;
};

/// rho(p1, p2) with the conventions above; 1 when p1 == p2.
double rho_from(double p1, double p2);

/// p1 at distance 1 and p2 at distance c in unit scale.
RhoReport estimate_rho(const SchemeParams& scheme, std::size_t d, const RhoOptions& options, std::uint64_t seed);

struct SweepConfig {
    double p = 1.5;
    std::vector<double> c_list;
    std::size_t d = 16;
    Profile profile = Profile::remark;
    Knobs knobs;
    Overrides overrides;
    DeriveOptions derive;
    RhoOptions rho;
    std::uint64_t seed = 0;
};

std::vector<RhoReport> rho_sweep(const SweepConfig& config);

/// Column order of the sweep CSV.
const std::vector<std::string>& rho_csv_columns();

/// Header row plus one row per report. Leading '#' lines carry tool version and config.
void write_rho_csv(std::ostream& out, const std::vector<RhoReport>& reports,
                   const std::vector<std::pair<std::string, std::string>>& provenance = {});

}  // namespace lplsh
