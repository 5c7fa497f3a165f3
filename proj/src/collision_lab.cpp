#include "lplsh/collision_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

namespace lplsh {

std::pair<Vector, Vector> make_pair_at_distance(const LpSpace& space, double distance, Rng& rng) {
    require(distance >= 0.0, "make_pair_at_distance: distance must be nonnegative");
    Vector x(space.dim());
    for (auto& v : x) v = sample_generalized_gaussian(space.p(), rng);
    if (distance == 0.0) {
        return {x, x};
    }
    const Vector dir = random_lp_direction(space, rng);
    Vector y = x;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += distance * dir[i];
    return {std::move(x), std::move(y)};
}

namespace {

constexpr std::size_t kTrialChunk = 64;

struct TrialOutcome {
    std::uint8_t collided = 0;
    std::uint8_t fell_back = 0;
};

template <typename Trial>
CollisionEstimate run_trials(double distance, std::size_t trials, Trial&& trial) {
    std::vector<TrialOutcome> outcomes(trials);
    parallel_chunks((trials + kTrialChunk - 1) / kTrialChunk, [&](std::size_t c) {
        const std::size_t end = std::min(trials, (c + 1) * kTrialChunk);
        for (std::size_t i = c * kTrialChunk; i < end; ++i) {
            outcomes[i] = trial(i);
        }
    });
    CollisionEstimate est;
    est.distance = distance;
    est.trials = trials;
    std::size_t fallbacks = 0;
    for (const auto& o : outcomes) {
        est.collisions += o.collided;
        fallbacks += o.fell_back;
        if (!o.fell_back) {
            ++est.covered_trials;
            est.covered_collisions += o.collided;
        }
    }
    est.p_hat = static_cast<double>(est.collisions) / static_cast<double>(trials);
    est.ci95 = wilson_interval(est.collisions, trials);
    est.fallback_rate = static_cast<double>(fallbacks) / static_cast<double>(trials);
    return est;
}

}  // namespace

CollisionEstimate estimate_collision(const SchemeParams& scheme, std::size_t d, double distance,
                                     std::size_t trials, std::uint64_t seed) {
    require(trials >= 1000, "estimate_collision: need at least 10^3 trials");
    require(d >= 1, "estimate_collision: d must be positive");
    const LpSpace space(scheme.p, d);
    return run_trials(distance, trials, [&](std::size_t i) {
        Rng rng(derive_seed(seed, i));
        const HashFunction h = sample_hash(scheme, d, rng());
        const auto [x, y] = make_pair_at_distance(space, distance, rng);
        const HashValue hx = eval_hash(h, x);
        const HashValue hy = eval_hash(h, y);
        return TrialOutcome{static_cast<std::uint8_t>(hx == hy),
                            static_cast<std::uint8_t>(hx.is_fallback() || hy.is_fallback())};
    });
}

CollisionEstimate estimate_collision_fixed_projection(const HashFunction& base, std::span<const double> x,
                                                      std::span<const double> y, std::size_t trials,
                                                      std::uint64_t seed) {
    require(trials >= 1000, "estimate_collision_fixed_projection: need at least 10^3 trials");
    const std::vector<double> projection(base.projection().begin(), base.projection().end());
    const double distance = lp_distance(x, y, LpSpace(base.scheme().p, x.size()));
    return run_trials(distance, trials, [&](std::size_t i) {
        const HashFunction h(base.scheme(), base.input_dim(), projection,
                             make_lattices(base.scheme().lattice, derive_seed(seed, i)), base.seed());
        const HashValue hx = eval_hash(h, x);
        const HashValue hy = eval_hash(h, y);
        return TrialOutcome{static_cast<std::uint8_t>(hx == hy),
                            static_cast<std::uint8_t>(hx.is_fallback() || hy.is_fallback())};
    });
}

GeometricEstimate geometric_collision(std::span<const double> x, std::span<const double> y, double w,
                                      const LpSpace& space, std::size_t trials, Rng& rng) {
    require(trials >= 10'000, "geometric_collision: need at least 10^4 samples");
    require(w > 0.0, "geometric_collision: w must be positive");
    space.check(x);
    space.check(y);
    GeometricEstimate est;
    est.samples = trials;
    if (std::equal(x.begin(), x.end(), y.begin())) {
        est.value = est.q = 1.0;
        return est;
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < trials; ++i) {
        const Vector z = sample_uniform_in_ball(x, w, space.p(), rng);
        hits += in_lp_ball(z, y, w, space.p());
    }
    const double n = static_cast<double>(trials);
    est.q = static_cast<double>(hits) / n;
    est.value = est.q / (2.0 - est.q);
    // Delta method: d/dq q/(2-q) = 2/(2-q)^2.
    const double se_q = std::sqrt(std::max(est.q * (1.0 - est.q), 1.0 / n) / n);
    est.std_error = 2.0 / ((2.0 - est.q) * (2.0 - est.q)) * se_q;
    return est;
}

GeometricEstimate geometric_collision_direct(std::span<const double> x, std::span<const double> y, double w,
                                             const LpSpace& space, std::size_t trials, Rng& rng) {
    require(trials >= 10'000, "geometric_collision_direct: need at least 10^4 samples");
    require(w > 0.0, "geometric_collision_direct: w must be positive");
    space.check(x);
    space.check(y);
    const std::size_t t = x.size();
    Vector lo(t), width(t), z(t);
    for (std::size_t i = 0; i < t; ++i) {
        lo[i] = std::min(x[i], y[i]) - w;
        width[i] = std::max(x[i], y[i]) + w - lo[i];
    }
    std::size_t in_union = 0, in_both = 0;
    for (std::size_t s = 0; s < trials; ++s) {
        for (std::size_t i = 0; i < t; ++i) z[i] = lo[i] + width[i] * uniform01(rng);
        const bool in_x = in_lp_ball(z, x, w, space.p());
        const bool in_y = in_lp_ball(z, y, w, space.p());
        in_union += in_x || in_y;
        in_both += in_x && in_y;
    }
    GeometricEstimate est;
    est.samples = trials;
    if (in_union == 0) {
        return est;
    }
    const double u = static_cast<double>(in_union);
    est.value = static_cast<double>(in_both) / u;
    est.std_error = std::sqrt(std::max(est.value * (1.0 - est.value), 1.0 / u) / u);
    return est;
}

double interval_collision_1d(double w, double dist) {
    require(w > 0.0 && dist >= 0.0, "interval_collision_1d: need w > 0 and dist >= 0");
    if (dist >= 2.0 * w) {
        return 0.0;
    }
    return (2.0 * w - dist) / (2.0 * w + dist);
}

double rho_from(double p1, double p2) {
    if (p1 == p2) return 1.0;
    if (p1 >= 1.0) return 0.0;
    if (p2 <= 0.0) return 0.0;
    if (p2 >= 1.0) return std::numeric_limits<double>::infinity();
    if (p1 <= 0.0) return std::numeric_limits<double>::infinity();
    return std::log(1.0 / p1) / std::log(1.0 / p2);
}

RhoReport estimate_rho(const SchemeParams& scheme, std::size_t d, const RhoOptions& options, std::uint64_t seed) {
    require(options.trials >= 1000, "estimate_rho: need at least 10^3 trials");
    RhoReport rep;
    rep.scheme = scheme;
    rep.c = scheme.c;
    rep.p = scheme.p;
    rep.p1 = estimate_collision(scheme, d, 1.0, options.trials, derive_seed(seed, 1));

    std::size_t far_trials = options.trials;
    for (;;) {
        rep.p2 = estimate_collision(scheme, d, scheme.c, far_trials, derive_seed(seed, 2));
        if (rep.p2.collisions >= options.min_far_collisions || far_trials >= options.trial_budget) break;
        far_trials = std::min(options.trial_budget, 2 * far_trials);
    }

    rep.rho_ci = {rho_from(rep.p1.ci95.hi, rep.p2.ci95.lo), rho_from(rep.p1.ci95.lo, rep.p2.ci95.hi)};
    if (rep.p2.collisions == 0) {
        rep.upper_bounded_only = true;
        rep.rho_hat = rep.rho_ci.hi;
    } else {
        rep.rho_hat = rho_from(rep.p1.p_hat, rep.p2.p_hat);
    }
    rep.baseline_inv_c = 1.0 / scheme.c;
    rep.lower_bound_inv_cp = std::pow(scheme.c, -scheme.p);
    rep.bound_shape = std::log(scheme.c) * std::log(scheme.c) / std::pow(scheme.c, scheme.p);

    if (options.geometric_pairs > 0) {
        const LpSpace space(scheme.p, d);
        const LpSpace reduced = scheme.reduced_space();
        double sum = 0.0;
        for (std::size_t i = 0; i < options.geometric_pairs; ++i) {
            Rng rng(derive_seed(derive_seed(seed, 3), i));
            const HashFunction h = sample_hash(scheme, d, rng());
            const auto [x, y] = make_pair_at_distance(space, 1.0, rng);
            sum += geometric_collision(h.project(x), h.project(y), scheme.w, reduced, options.geometric_samples, rng)
                       .value;
        }
        rep.geometric_p1 = sum / static_cast<double>(options.geometric_pairs);
    }
    return rep;
}

std::vector<RhoReport> rho_sweep(const SweepConfig& config) {
    require(!config.c_list.empty(), "rho_sweep: c_list must be nonempty");
    std::vector<RhoReport> out;
    for (std::size_t i = 0; i < config.c_list.size(); ++i) {
        const double c = config.c_list[i];
        require(c > 1.0, "rho_sweep: every c must exceed 1");
        const SchemeParams scheme =
            derive_params(c, config.p, config.profile, config.knobs, config.overrides, config.derive);
        out.push_back(estimate_rho(scheme, config.d, config.rho, derive_seed(config.seed, i)));
    }
    return out;
}

const std::vector<std::string>& rho_csv_columns() {
    static const std::vector<std::string> columns = {
        "c",      "p",     "profile", "w",     "t",      "eps",    "U",     "saturated", "p1_hat", "p1_lo",
        "p1_hi",  "p2_hat", "p2_lo",  "p2_hi", "rho_hat", "inv_c", "inv_cp", "lncsq_over_cp", "fallback_rate"};
    return columns;
}

void write_rho_csv(std::ostream& out, const std::vector<RhoReport>& reports,
                   const std::vector<std::pair<std::string, std::string>>& provenance) {
    out << "# lplsh " << kVersion << '\n';
    for (const auto& [key, value] : provenance) {
        out << "# " << key << '=' << value << '\n';
    }
    const auto& cols = rho_csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) {
        out << (i ? "," : "") << cols[i];
    }
    out << '\n';
    for (const auto& r : reports) {
        const double total = static_cast<double>(r.p1.trials + r.p2.trials);
        const double fallback =
            (r.p1.fallback_rate * static_cast<double>(r.p1.trials) + r.p2.fallback_rate * static_cast<double>(r.p2.trials)) /
            total;
        out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.c, r.p,
                           to_string(r.scheme.profile), r.scheme.w, r.scheme.t, r.scheme.epsilon, r.scheme.lattice.U,
                           r.scheme.lattice.saturated ? 1 : 0, r.p1.p_hat, r.p1.ci95.lo, r.p1.ci95.hi, r.p2.p_hat,
                           r.p2.ci95.lo, r.p2.ci95.hi, r.rho_hat, r.baseline_inv_c, r.lower_bound_inv_cp,
                           r.bound_shape, fallback);
    }
}

}  // namespace lplsh
