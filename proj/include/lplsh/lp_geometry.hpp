#pragma once

#include <span>
#include <vector>

#include "lplsh/common.hpp"

/**
 * @file lp_geometry.hpp
 *
 * @brief l_p norms, ball-volume scaling and the uniform smoothness / convexity
 * residuals of l_p for 1 < p <= 2.
 */

namespace lplsh {

using Vector = std::vector<double>;

/**
 * The ambient metric: exponent p and dimension.
 *
 * p = 2 is admitted as a cross-check regime. Every norm computation routes
 * through an LpSpace so dimension checks happen in one place.
 */
class LpSpace {
public:
    LpSpace(double p, std::size_t dim);

    double p() const { return p_; }
    std::size_t dim() const { return dim_; }

    /// Throws ContractError unless v.size() == dim().
    void check(std::span<const double> v) const;

private:
    double p_;
    std::size_t dim_;
};

/// A ball B_p(center, radius).
struct BallSpec {
    Vector center;
    double radius = 0.0;
};

/// (sum |v_i|^p)^(1/p), computed with max-rescaling so large coordinates do not overflow.
double lp_norm(std::span<const double> v, const LpSpace& space);

/// lp_norm(x - y) without allocating.
double lp_distance(std::span<const double> x, std::span<const double> y, const LpSpace& space);

/// sum |v_i|^p, i.e. lp_norm(v)^p.
double lp_norm_pow(std::span<const double> v, double p);

/// Whether x lies in the closed ball of the given radius around center.
/// Early-exits once the partial p-power sum exceeds radius^p.
bool in_lp_ball(std::span<const double> x, std::span<const double> center, double radius, double p);

/// alpha^t: the ratio Vol(B(., alpha w)) / Vol(B(., w)) in R^t.
double ball_volume_ratio(double alpha, int t);

/// ||(x+y)/2||^p + ||(x-y)/2||^p - (||x||^p + ||y||^p)/2, nonnegative by p-uniform smoothness.
double smoothness_residual(std::span<const double> x, std::span<const double> y, const LpSpace& space);

/// (||x||^2 + ||y||^2)/2 - ||(x+y)/2||^2 - (p-1)||(x-y)/2||^2, nonnegative by 2-uniform convexity.
double convexity_residual(std::span<const double> x, std::span<const double> y, const LpSpace& space);

/// Unit l_p vector drawn from the cone measure of the l_p sphere: coordinates
/// with density proportional to exp(-|u|^p), then normalized.
Vector random_lp_direction(const LpSpace& space, Rng& rng);

/// One coordinate with density proportional to exp(-|u|^p).
double sample_generalized_gaussian(double p, Rng& rng);

/// Uniform point in B_p(center, radius) of dimension center.size().
Vector sample_uniform_in_ball(std::span<const double> center, double radius, double p, Rng& rng);

}  // namespace lplsh
