#include "lplsh/lp_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lplsh {

LpSpace::LpSpace(double p, std::size_t dim) : p_(p), dim_(dim) {
    require(p > 1.0 && p <= 2.0, "LpSpace: p must lie in (1, 2], got " + std::to_string(p));
    require(dim >= 1, "LpSpace: dimension must be positive");
}

void LpSpace::check(std::span<const double> v) const {
    if (v.size() != dim_) {
        throw ContractError("dimension mismatch: expected " + std::to_string(dim_) + ", got " +
                            std::to_string(v.size()));
    }
}

namespace {

template <typename Coord>
double rescaled_norm(std::size_t n, double p, Coord coord) {
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        scale = std::max(scale, std::abs(coord(i)));
    }
    if (scale == 0.0 || !std::isfinite(scale)) {
        return scale;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum += std::pow(std::abs(coord(i)) / scale, p);
    }
    return scale * std::pow(sum, 1.0 / p);
}

}  // namespace

double lp_norm(std::span<const double> v, const LpSpace& space) {
    space.check(v);
    return rescaled_norm(v.size(), space.p(), [&](std::size_t i) { return v[i]; });
}

double lp_distance(std::span<const double> x, std::span<const double> y, const LpSpace& space) {
    space.check(x);
    space.check(y);
    return rescaled_norm(x.size(), space.p(), [&](std::size_t i) { return x[i] - y[i]; });
}

double lp_norm_pow(std::span<const double> v, double p) {
    double sum = 0.0;
    for (double c : v) {
        sum += std::pow(std::abs(c), p);
    }
    return sum;
}

bool in_lp_ball(std::span<const double> x, std::span<const double> center, double radius, double p) {
    const double budget = std::pow(radius, p);
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double diff = std::abs(x[i] - center[i]);
        if (diff > radius) {
            return false;
        }
        sum += std::pow(diff, p);
        if (sum > budget) {
            return false;
        }
    }
    return true;
}

double ball_volume_ratio(double alpha, int t) {
    require(alpha >= 0.0, "ball_volume_ratio: alpha must be nonnegative");
    require(t >= 1, "ball_volume_ratio: t must be positive");
    return std::pow(alpha, t);
}

namespace {

void check_pair(std::span<const double> x, std::span<const double> y, const LpSpace& space) {
    space.check(x);
    space.check(y);
}

}  // namespace

double smoothness_residual(std::span<const double> x, std::span<const double> y, const LpSpace& space) {
    check_pair(x, y, space);
    const double p = space.p();
    Vector half_sum(x.size()), half_diff(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        half_sum[i] = (x[i] + y[i]) / 2.0;
        half_diff[i] = (x[i] - y[i]) / 2.0;
    }
    return lp_norm_pow(half_sum, p) + lp_norm_pow(half_diff, p) -
           (lp_norm_pow(x, p) + lp_norm_pow(y, p)) / 2.0;
}

double convexity_residual(std::span<const double> x, std::span<const double> y, const LpSpace& space) {
    check_pair(x, y, space);
    Vector half_sum(x.size()), half_diff(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        half_sum[i] = (x[i] + y[i]) / 2.0;
        half_diff[i] = (x[i] - y[i]) / 2.0;
    }
    const double nx = lp_norm(x, space);
    const double ny = lp_norm(y, space);
    const double ns = lp_norm(half_sum, space);
    const double nd = lp_norm(half_diff, space);
    return (nx * nx + ny * ny) / 2.0 - ns * ns - (space.p() - 1.0) * nd * nd;
}

double sample_generalized_gaussian(double p, Rng& rng) {
    // |u|^p ~ Gamma(1/p, 1) for density proportional to exp(-|u|^p).
    std::gamma_distribution<double> gamma(1.0 / p, 1.0);
    const double magnitude = std::pow(gamma(rng), 1.0 / p);
    return (rng() & 1ULL) ? magnitude : -magnitude;
}

Vector random_lp_direction(const LpSpace& space, Rng& rng) {
    Vector v(space.dim());
    double norm = 0.0;
    while (norm == 0.0) {
        for (auto& c : v) {
            c = sample_generalized_gaussian(space.p(), rng);
        }
        norm = lp_norm(v, space);
    }
    for (auto& c : v) {
        c /= norm;
    }
    return v;
}

Vector sample_uniform_in_ball(std::span<const double> center, double radius, double p, Rng& rng) {
    const LpSpace space(p, center.size());
    Vector z = random_lp_direction(space, rng);
    const double scale = radius * std::pow(uniform01(rng), 1.0 / static_cast<double>(center.size()));
    for (std::size_t i = 0; i < z.size(); ++i) {
        z[i] = center[i] + scale * z[i];
    }
    return z;
}

}  // namespace lplsh
