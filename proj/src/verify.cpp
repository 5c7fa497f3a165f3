#include "lplsh/verify.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

#include "lplsh/ann_index.hpp"
#include "lplsh/collision_lab.hpp"
#include "lplsh/planted.hpp"

namespace lplsh {

namespace {

// Pinned tolerances.
constexpr double kResidualFloor = -1e-9;
constexpr double kTriangleSlack = 1e-12;
constexpr double kHomogeneityRel = 1e-12;
constexpr double kVolumeRatioTol = 1e-12;
constexpr double kKsLevel = 0.01;
constexpr double kStableVariance = 2.0;
constexpr double kVarianceRelTol = 0.01;
constexpr double kTailFlatness = 0.15;
constexpr double kSigmas = 3.0;
constexpr double kCoverFailure = 0.05;
constexpr double kHighEventCeiling = 0.5;
constexpr double kRecallFloor = 0.9;
constexpr double kQuadratureRelTol = 1e-6;

// Settings of the recall and sensitivity runs: t and u_max keep lattice
// lookups cheap, w = 2.39 puts ln n / ln(1/p2) just under an integer at n = 10^4.
constexpr int kTunedT = 4;
constexpr std::uint64_t kTunedMaxShifts = 100'000;
constexpr double kRecallW = 2.39;
constexpr double kRecallSafety = 3.0;

class Suite {
public:
    explicit Suite(std::string name) : start_(std::chrono::steady_clock::now()) { res_.name = std::move(name); }

    void metric(std::string key, double value) { res_.metrics.emplace_back(std::move(key), value); }
    void check(bool ok, const std::string& what) {
        if (!ok) res_.failures.push_back(what);
    }
    SuiteResult finish() {
        res_.passed = res_.failures.empty();
        res_.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        return std::move(res_);
    }

private:
    SuiteResult res_;
    std::chrono::steady_clock::time_point start_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string key(const char* base, double v) { return fmt::format("{}_{}", base, v); }

double main_epsilon(int t) {
    const double lt = std::log(static_cast<double>(t));
    return std::log(lt) / lt;
}

DeriveOptions derive_options(const VerifyOptions& o) {
    DeriveOptions d;
    d.threshold_samples = o.level == VerifyLevel::full ? kDefaultThresholdSamples : 1'000'000;
    return d;
}

SchemeParams tuned_scheme(double c, double p, std::optional<double> w, const DeriveOptions& derive) {
    Overrides ov;
    ov.t = kTunedT;
    ov.u_max = kTunedMaxShifts;
    ov.w = w;
    return derive_params(c, p, Profile::remark, {}, ov, derive);
}

// Pr[|X| <= m] by Gil-Pelaez inversion of exp(-|xi|^p), Simpson on [0, Xi] where exp(-Xi^p) < 1e-16.
class StableCdfQuadrature {
public:
    explicit StableCdfQuadrature(double p, std::size_t intervals = 8000) : xi_max_(std::pow(37.0, 1.0 / p)) {
        h_ = xi_max_ / static_cast<double>(intervals);
        weights_.resize(intervals + 1);
        for (std::size_t i = 0; i <= intervals; ++i) {
            const double simpson = (i == 0 || i == intervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            const double xi = h_ * static_cast<double>(i);
            weights_[i] = simpson * std::exp(-std::pow(xi, p));
        }
    }

    double abs_cdf(double m) const {
        double acc = weights_[0] * m;  // sin(m xi) / xi -> m at xi = 0
        for (std::size_t i = 1; i < weights_.size(); ++i) {
            const double xi = h_ * static_cast<double>(i);
            acc += weights_[i] * std::sin(m * xi) / xi;
        }
        return 2.0 / std::numbers::pi * acc * h_ / 3.0;
    }

private:
    double xi_max_;
    double h_;
    std::vector<double> weights_;
};

// E[min(|X|, M)^p] = int_0^M p m^(p-1) Pr[|X| > m] dm, with m = M s^2 to smooth the origin.
double truncated_moment_quadrature(double p, double M, std::size_t outer = 400) {
    const StableCdfQuadrature cdf(p);
    const double h = 1.0 / static_cast<double>(outer);
    double acc = 0.0;
    for (std::size_t i = 1; i <= outer; ++i) {
        const double s = h * static_cast<double>(i);
        const double simpson = i == outer ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += simpson * 2.0 * p * std::pow(M, p) * std::pow(s, 2.0 * p - 1.0) * (1.0 - cdf.abs_cdf(M * s * s));
    }
    return acc * h / 3.0;
}

SuiteResult geometry_suite(const VerifyOptions& o) {
    Suite s("geometry");
    const std::size_t pairs = o.level == VerifyLevel::full ? 100'000 : 10'000;
    double min_smooth = std::numeric_limits<double>::infinity();
    double min_convex = min_smooth;
    double worst_triangle = -min_smooth;
    double worst_homogeneity = 0.0;
    std::uint64_t stream = 0;
    for (double p : {1.25, 1.5, 1.75, 2.0}) {
        for (std::size_t d : {2, 10, 100}) {
            const LpSpace space(p, d);
            Rng rng(derive_seed(o.seed, stream++));
            Vector x(d), y(d), tmp(d);
            for (std::size_t i = 0; i < pairs; ++i) {
                for (auto& v : x) v = 2.0 * uniform01(rng) - 1.0;
                for (auto& v : y) v = 2.0 * uniform01(rng) - 1.0;
                if (i % 4 == 3) {
                    // Nearly parallel pairs, where the inequalities are closest to tight.
                    const double alpha = 4.0 * uniform01(rng) - 2.0;
                    for (std::size_t j = 0; j < d; ++j) y[j] = alpha * x[j] + 1e-3 * y[j];
                }
                min_smooth = std::min(min_smooth, smoothness_residual(x, y, space));
                min_convex = std::min(min_convex, convexity_residual(x, y, space));
                if (i % 10 == 0) {
                    for (std::size_t j = 0; j < d; ++j) tmp[j] = x[j] + y[j];
                    worst_triangle =
                        std::max(worst_triangle, lp_norm(tmp, space) - lp_norm(x, space) - lp_norm(y, space));
                    const double alpha = 10.0 * uniform01(rng) - 5.0;
                    for (std::size_t j = 0; j < d; ++j) tmp[j] = alpha * x[j];
                    const double expect = std::abs(alpha) * lp_norm(x, space);
                    worst_homogeneity = std::max(worst_homogeneity, std::abs(lp_norm(tmp, space) - expect) / expect);
                }
            }
        }
    }
    double worst_volume = 0.0;
    for (double alpha : {0.3, 0.5, 1.7, 3.0, 10.0}) {
        for (int t = 1; t <= 64; ++t) {
            worst_volume = std::max(worst_volume,
                                    std::abs(ball_volume_ratio(alpha, t) * ball_volume_ratio(1.0 / alpha, t) - 1.0));
        }
    }
    s.metric("pairs_per_config", static_cast<double>(pairs));
    s.metric("min_smoothness_residual", min_smooth);
    s.metric("min_convexity_residual", min_convex);
    s.metric("max_triangle_excess", worst_triangle);
    s.metric("max_homogeneity_rel_error", worst_homogeneity);
    s.metric("max_volume_ratio_error", worst_volume);
    s.check(min_smooth >= kResidualFloor, fmt::format("smoothness residual {} below {}", min_smooth, kResidualFloor));
    s.check(min_convex >= kResidualFloor, fmt::format("convexity residual {} below {}", min_convex, kResidualFloor));
    s.check(worst_triangle <= kTriangleSlack, fmt::format("triangle inequality violated by {}", worst_triangle));
    s.check(worst_homogeneity <= kHomogeneityRel, fmt::format("homogeneity error {}", worst_homogeneity));
    s.check(worst_volume <= kVolumeRatioTol, fmt::format("volume ratio reciprocity error {}", worst_volume));
    return s.finish();
}

SuiteResult stability_suite(const VerifyOptions& o) {
    Suite s("stability");
    const bool full = o.level == VerifyLevel::full;
    const std::size_t draws = 100'000;
    constexpr std::size_t d = 16;
    std::uint64_t stream = 0;
    for (double p : {1.2, 1.5, 1.8}) {
        const StableParams sp(p);
        const LpSpace space(p, d);
        Rng rx(derive_seed(o.seed, stream++));
        Vector x(d);
        for (auto& v : x) v = 2.0 * uniform01(rx) - 1.0;
        const double norm = lp_norm(x, space);
        Rng ra(derive_seed(o.seed, stream++));
        Rng rb(derive_seed(o.seed, stream++));
        std::vector<double> projected(draws), scaled(draws);
        for (std::size_t i = 0; i < draws; ++i) {
            double acc = 0.0;
            for (double xj : x) acc += sample_stable(sp, ra) * xj;
            projected[i] = acc;
            scaled[i] = norm * sample_stable(sp, rb);
        }
        const KsResult ks = ks_two_sample(projected, scaled);
        s.metric(key("ks_stat_p", p), ks.statistic);
        s.metric(key("ks_pvalue_p", p), ks.p_value);
        s.check(ks.p_value > kKsLevel, fmt::format("p = {}: KS p-value {} <= {}", p, ks.p_value, kKsLevel));
    }

    const std::size_t var_draws = full ? 1'000'000 : 200'000;
    Rng rg(derive_seed(o.seed, stream++));
    const StableParams gauss(2.0);
    double mean = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < var_draws; ++i) {
        const double v = sample_stable(gauss, rg);
        const double delta = v - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (v - mean);
    }
    const double variance = m2 / static_cast<double>(var_draws - 1);
    s.metric("p2_variance", variance);
    s.check(std::abs(variance / kStableVariance - 1.0) <= kVarianceRelTol,
            fmt::format("p = 2 variance {} not within 1% of 2", variance));

    Rng r1(o.seed), r2(o.seed);
    bool same = true;
    for (int i = 0; i < 1000; ++i) same = same && sample_stable(StableParams(1.5), r1) == sample_stable(StableParams(1.5), r2);
    s.check(same, "identical seeds gave different stable streams");

    double prev = 0.0;
    bool monotone = true;
    for (double M : {1.0, 2.0, 4.0, 8.0, 16.0, 32.0}) {
        const double m = truncated_moment(StableParams(1.5), M, 1, full ? 1'000'000 : 100'000, o.seed).value;
        monotone = monotone && m >= prev;
        prev = m;
    }
    s.check(monotone, "truncated_moment not monotone in M at a fixed seed");
    return s.finish();
}

SuiteResult tail_suite(const VerifyOptions& o) {
    Suite s("tail");
    const bool full = o.level == VerifyLevel::full;
    const StableParams sp(1.5);
    const std::size_t n = full ? 10'000'000 : 2'000'000;
    const Interval range = full ? Interval{10.0, 100.0} : Interval{10.0, 50.0};
    const TailFit fit = fit_tail_constant(sp, n, range, o.seed);
    s.metric("samples", static_cast<double>(n));
    s.metric("M_max", range.hi);
    s.metric("a_hat", fit.consts.a_hat);
    s.metric("b_hat", fit.consts.b_hat);
    s.metric("flatness", fit.flatness());
    s.check(fit.status == TailFitStatus::ok, "tail fit status is not ok");
    s.check(fit.flatness() <= kTailFlatness, fmt::format("M^p tail not flat: {} > {}", fit.flatness(), kTailFlatness));
    std::size_t outside = 0;
    for (const auto& pt : fit.points) {
        const TailBounds b = tail_probability_bounds(pt.M, sp, fit.consts);
        const bool ordered = 0.0 <= b.lower && b.lower <= b.upper && b.upper <= 1.0;
        outside += !(ordered && b.lower <= pt.tail_prob && pt.tail_prob <= b.upper);
    }
    s.metric("grid_points_outside_bounds", static_cast<double>(outside));
    s.check(outside == 0, fmt::format("{} grid points outside tail_probability_bounds", outside));

    // Threshold against the characteristic-function quadrature.
    const std::size_t thr_samples = full ? kDefaultThresholdSamples : 1'000'000;
    std::uint64_t stream = 0;
    for (const auto& [p, t] : std::vector<std::pair<double, int>>{{1.5, 64}, {1.2, 16}, {1.8, 256}}) {
        const double eps = main_epsilon(t);
        const Threshold thr = compute_threshold(t, eps, StableParams(p), thr_samples, derive_seed(o.seed, stream++));
        const double oracle = 0.5 * t * truncated_moment_quadrature(p, std::pow(t, eps));
        const double se = 0.5 * t * thr.moment.std_error;
        const double z = (thr.T - oracle) / std::max(se, 1e-300);
        s.metric(fmt::format("T_p{}_t{}", p, t), thr.T);
        s.metric(fmt::format("T_oracle_p{}_t{}", p, t), oracle);
        s.check(std::abs(thr.T - oracle) <= kSigmas * se + kQuadratureRelTol * oracle,
                fmt::format("p = {}, t = {}: T = {} vs quadrature {} ({:.2f} sigma)", p, t, thr.T, oracle, z));
    }
    return s.finish();
}

SuiteResult covering_suite(const VerifyOptions& o) {
    Suite s("covering");
    constexpr std::size_t trials = 10'000;
    const LpSpace plane(1.5, 2);
    const NumShifts ns = compute_num_shifts(2, 1.5, 4.0, kCoverFailure);
    LatticeParams lp;
    lp.w = 1.0;
    lp.delta = 4.0;
    lp.t = 2;
    lp.delta_fail = kCoverFailure;
    lp.U = ns.U;
    lp.saturated = ns.saturated;
    const ShiftedLatticeSet lattices = make_lattices(lp, derive_seed(o.seed, 0));
    Rng rng(derive_seed(o.seed, 1));
    const double uncovered = 1.0 - covering_fraction(lattices, plane, trials, rng);
    const double bound = kCoverFailure + kSigmas * binomial_sigma(kCoverFailure, trials);
    s.metric("U_t2", static_cast<double>(ns.U));
    s.metric("uncovered_t2", uncovered);
    s.check(uncovered <= bound, fmt::format("t = 2 uncovered fraction {} > {}", uncovered, bound));

    LatticeParams single = lp;
    single.t = 1;
    single.U = 1;
    Rng rng1(derive_seed(o.seed, 2));
    const double uncovered1 =
        1.0 - covering_fraction(make_lattices(single, derive_seed(o.seed, 3)), LpSpace(1.5, 1), trials, rng1);
    const double sigma1 = binomial_sigma(0.5, trials);
    s.metric("uncovered_t1_single", uncovered1);
    s.check(std::abs(uncovered1 - 0.5) <= kSigmas * sigma1,
            fmt::format("t = 1 single shift uncovered {} vs exact 0.5", uncovered1));

    double prev = 0.0;
    bool monotone = true;
    for (std::uint64_t u = 1;; u = std::min<std::uint64_t>(2 * u, ns.U)) {
        Rng rp(derive_seed(o.seed, 4));
        const double f = covering_fraction(lattices.prefix(u), plane, 2000, rp);
        monotone = monotone && f >= prev;
        prev = f;
        if (u == ns.U) break;
    }
    s.check(monotone, "covering_fraction decreased along nested prefixes");

    // Translation by one period moves the lattice coordinate by one and keeps u.
    LatticeParams l3 = lp;
    l3.t = 3;
    l3.U = compute_num_shifts(3, 1.5, 4.0, kCoverFailure).U;
    const ShiftedLatticeSet lat3 = make_lattices(l3, derive_seed(o.seed, 5));
    const LpSpace space3(1.5, 3);
    Rng rt(derive_seed(o.seed, 6));
    std::size_t violations = 0;
    Vector x(3);
    for (int i = 0; i < 1000; ++i) {
        for (auto& v : x) v = uniform01(rt) * l3.period();
        const HashValue h = hash_point(x, lat3, space3);
        if (h.is_fallback()) continue;
        for (std::size_t j = 0; j < 3; ++j) {
            Vector moved = x;
            moved[j] += l3.period();
            HashValue expect = h;
            expect.coords[j] += 1;
            violations += !(hash_point(moved, lat3, space3) == expect);
        }
    }
    s.metric("translation_violations", static_cast<double>(violations));
    s.check(violations == 0, fmt::format("{} translation-equivariance violations", violations));
    return s.finish();
}

SuiteResult disjointness_suite(const VerifyOptions& o) {
    Suite s("disjointness");
    constexpr std::size_t points = 10'000;
    std::size_t overlaps = 0, disagreements = 0, covered = 0;
    for (int t = 1; t <= 4; ++t) {
        Rng rng(derive_seed(o.seed, static_cast<std::uint64_t>(t)));
        const std::size_t td = static_cast<std::size_t>(t);
        Vector x(td), center(td);
        std::vector<std::int64_t> base(td), offset(td), found(td);
        for (std::size_t i = 0; i < points; ++i) {
            const double p = std::array{1.2, 1.5, 2.0}[i % 3];
            const LpSpace space(p, td);
            LatticeParams lp;
            lp.w = 0.5 + 1.5 * uniform01(rng);
            lp.t = t;
            lp.U = 1;
            const ShiftedLatticeSet lat = make_lattices(lp, rng());
            const Vector shift = lat.shift(1);
            const double period = lp.period();
            for (auto& v : x) v = 40.0 * uniform01(rng) - 20.0;
            for (std::size_t j = 0; j < td; ++j) base[j] = std::llround((x[j] - shift[j]) / period);

            std::size_t containing = 0;
            std::fill(offset.begin(), offset.end(), -1);
            for (;;) {
                for (std::size_t j = 0; j < td; ++j) {
                    center[j] = shift[j] + period * static_cast<double>(base[j] + offset[j]);
                }
                if (in_lp_ball(x, center, lp.w, p)) {
                    ++containing;
                    for (std::size_t j = 0; j < td; ++j) found[j] = base[j] + offset[j];
                }
                std::size_t j = 0;
                while (j < td && offset[j] == 1) offset[j++] = -1;
                if (j == td) break;
                ++offset[j];
            }
            overlaps += containing > 1;
            covered += containing == 1;
            const auto loc = locate(x, 1, lat, space);
            const bool agree = containing == 0 ? !loc.has_value() : (loc.has_value() && *loc == found);
            disagreements += !agree;
        }
    }
    s.metric("points_per_t", static_cast<double>(points));
    s.metric("covered", static_cast<double>(covered));
    s.metric("overlap_violations", static_cast<double>(overlaps));
    s.metric("locate_disagreements", static_cast<double>(disagreements));
    s.check(overlaps == 0, fmt::format("{} points in more than one ball of a lattice", overlaps));
    s.check(disagreements == 0, fmt::format("{} points where locate differs from brute force", disagreements));
    return s.finish();
}

SuiteResult concentration_suite(const VerifyOptions& o) {
    Suite s("concentration");
    const bool full = o.level == VerifyLevel::full;
    const std::size_t trials = full ? 1000 : 400;
    const StableParams sp(1.5);
    const DeriveOptions derive = derive_options(o);
    const double high_bound = kHighEventCeiling + kSigmas * binomial_sigma(kHighEventCeiling, trials);
    std::vector<double> low_rates;
    for (int t : {16, 64, 256}) {
        const double eps = main_epsilon(t);
        const Threshold thr = compute_threshold(t, eps, sp, derive.threshold_samples, derive.threshold_seed);
        const ConcentrationReport rep =
            validate_concentration(t, eps, sp, thr, trials, derive_seed(o.seed, static_cast<std::uint64_t>(t)));
        s.metric(fmt::format("eps_t{}", t), eps);
        s.metric(fmt::format("T_t{}", t), thr.T);
        s.metric(fmt::format("rate_low_t{}", t), rep.rate_low);
        s.metric(fmt::format("rate_high_t{}", t), rep.rate_high);
        s.check(rep.rate_high <= high_bound,
                fmt::format("t = {}: high-event rate {} > {}", t, rep.rate_high, high_bound));
        low_rates.push_back(rep.rate_low);
    }
    s.check(low_rates[0] >= low_rates[1] && low_rates[1] >= low_rates[2] && low_rates[0] > low_rates[2],
            fmt::format("low-event rate not decreasing in t: {}, {}, {}", low_rates[0], low_rates[1], low_rates[2]));
    return s.finish();
}

SuiteResult collision_suite(const VerifyOptions& o) {
    Suite s("collision_identities");
    const bool full = o.level == VerifyLevel::full;
    std::uint64_t stream = 0;
    for (double p : {1.2, 1.5, 2.0}) {
        Overrides ov;
        ov.t = 3;
        ov.T = 1.0;
        ov.u_max = kTunedMaxShifts;
        const SchemeParams scheme = derive_params(2.0, p, Profile::remark, {}, ov);
        const CollisionEstimate est = estimate_collision(scheme, 16, 0.0, 2000, derive_seed(o.seed, stream++));
        s.metric(key("self_collision_p", p), est.p_hat);
        s.check(est.collisions == est.trials, fmt::format("p = {}: distance-0 collision rate {} != 1", p, est.p_hat));
    }

    const std::size_t samples = full ? 200'000 : 40'000;
    constexpr double w = 1.0;
    const LpSpace line(1.5, 1);
    std::size_t closed_form_misses = 0;
    for (double dist : {0.2, 0.6, 1.0, 1.4, 1.8}) {
        Rng rng(derive_seed(o.seed, stream++));
        const Vector x{0.0}, y{dist};
        const GeometricEstimate g = geometric_collision(x, y, w, line, samples, rng);
        const double exact = interval_collision_1d(w, dist);
        s.metric(key("interval_dist", dist), g.value);
        if (std::abs(g.value - exact) > kSigmas * g.std_error) {
            ++closed_form_misses;
            s.check(false, fmt::format("t = 1, dist {}: {} vs exact {} (se {})", dist, g.value, exact, g.std_error));
        }
    }

    std::size_t disagreements = 0;
    for (int t = 1; t <= 3; ++t) {
        for (double dist : {0.5, 1.0, 1.5}) {
            Rng rng(derive_seed(o.seed, stream++));
            const LpSpace space(1.5, static_cast<std::size_t>(t));
            Vector x(static_cast<std::size_t>(t), 0.0);
            const Vector dir = random_lp_direction(space, rng);
            Vector y(dir.size());
            for (std::size_t i = 0; i < y.size(); ++i) y[i] = dist * dir[i];
            const GeometricEstimate qform = geometric_collision(x, y, w, space, samples, rng);
            const GeometricEstimate direct = geometric_collision_direct(x, y, w, space, 2 * samples, rng);
            const double se = std::hypot(qform.std_error, direct.std_error);
            s.metric(fmt::format("qform_t{}_d{}", t, dist), qform.value);
            s.metric(fmt::format("direct_t{}_d{}", t, dist), direct.value);
            if (std::abs(qform.value - direct.value) > kSigmas * se) {
                ++disagreements;
                s.check(false, fmt::format("t = {}, dist {}: q-form {} vs direct {} (se {})", t, dist, qform.value,
                                           direct.value, se));
            }
        }
    }
    s.metric("closed_form_misses", static_cast<double>(closed_form_misses));
    s.metric("estimator_disagreements", static_cast<double>(disagreements));
    return s.finish();
}

SuiteResult sensitivity_suite(const VerifyOptions& o) {
    Suite s("sensitivity");
    SweepConfig cfg;
    cfg.p = 1.5;
    cfg.c_list = {2.0, 5.0};
    cfg.d = 16;
    cfg.profile = Profile::remark;
    cfg.overrides.t = kTunedT;
    cfg.overrides.u_max = kTunedMaxShifts;
    cfg.derive = derive_options(o);
    cfg.rho.trials = o.level == VerifyLevel::full ? 100'000 : 20'000;
    cfg.seed = o.seed;
    const std::vector<RhoReport> reports = rho_sweep(cfg);
    for (const auto& r : reports) {
        const Interval p1_99 = wilson_interval(r.p1.collisions, r.p1.trials, kZ99);
        const Interval p2_99 = wilson_interval(r.p2.collisions, r.p2.trials, kZ99);
        s.metric(key("p1_c", r.c), r.p1.p_hat);
        s.metric(key("p2_c", r.c), r.p2.p_hat);
        s.metric(key("rho_c", r.c), r.rho_hat);
        s.metric(key("rho_hi_c", r.c), r.rho_ci.hi);
        s.metric(key("inv_c_c", r.c), r.baseline_inv_c);
        s.metric(key("inv_cp_c", r.c), r.lower_bound_inv_cp);
        s.metric(key("lncsq_over_cp_c", r.c), r.bound_shape);
        s.check(p1_99.lo > p2_99.hi,
                fmt::format("c = {}: p1 99% lower {} not above p2 99% upper {}", r.c, p1_99.lo, p2_99.hi));
        s.check(r.rho_ci.hi < 1.0, fmt::format("c = {}: rho 95% upper {} >= 1", r.c, r.rho_ci.hi));
    }
    s.check(reports[1].rho_hat < reports[0].rho_hat,
            fmt::format("rho(c=5) = {} not below rho(c=2) = {}", reports[1].rho_hat, reports[0].rho_hat));
    return s.finish();
}

SuiteResult cross_estimator_suite(const VerifyOptions& o) {
    Suite s("cross_estimator");
    const bool full = o.level == VerifyLevel::full;
    const std::size_t trials = full ? 20'000 : 5'000;
    const std::size_t samples = full ? 100'000 : 20'000;
    constexpr std::size_t d = 16;
    constexpr int configs = 10;
    int misses = 0;
    double worst_z = 0.0;
    for (int i = 0; i < configs; ++i) {
        Rng rng(derive_seed(o.seed, static_cast<std::uint64_t>(i)));
        const double p = 1.2 + 0.8 * uniform01(rng);
        const int t = 2 + i % 3;
        const double w = 1.0 + 2.0 * uniform01(rng);
        Overrides ov;
        ov.t = t;
        ov.w = w;
        ov.epsilon = 0.5;
        ov.T = 1.0;
        ov.u_max = kTunedMaxShifts;
        const SchemeParams scheme = derive_params(2.0, p, Profile::remark, {}, ov);
        const LpSpace space(p, d);
        const LpSpace reduced = scheme.reduced_space();
        const HashFunction h = sample_hash(scheme, d, rng());

        Vector x(d);
        for (auto& v : x) v = sample_generalized_gaussian(p, rng);
        const Vector dir = random_lp_direction(space, rng);
        const double target = (0.2 + 1.4 * uniform01(rng)) * w;
        const double scale = target / lp_norm(h.project(dir), reduced);
        Vector y = x;
        for (std::size_t j = 0; j < d; ++j) y[j] += scale * dir[j];
        const Vector xp = h.project(x), yp = h.project(y);

        const CollisionEstimate pipe = estimate_collision_fixed_projection(h, x, y, trials, rng());
        const GeometricEstimate geo = geometric_collision(xp, yp, w, reduced, samples, rng);
        const double ph = pipe.covered_p_hat();
        const double n = static_cast<double>(std::max<std::size_t>(pipe.covered_trials, 1));
        const double se_pipe = std::sqrt(std::max(ph * (1.0 - ph), 1.0 / n) / n);
        const double se = std::hypot(se_pipe, geo.std_error);
        const double z = std::abs(ph - geo.value) / se;
        worst_z = std::max(worst_z, z);
        s.metric(fmt::format("cfg{}_pipeline", i), ph);
        s.metric(fmt::format("cfg{}_geometric", i), geo.value);
        if (z > kSigmas) {
            ++misses;
            s.check(false, fmt::format("config {} (p {:.3f}, t {}, w {:.3f}, projected dist {:.3f}): pipeline {} vs "
                                       "geometric {} ({:.2f} sigma)",
                                       i, p, t, w, lp_distance(xp, yp, reduced), ph, geo.value, z));
        }
    }
    s.metric("max_abs_z", worst_z);
    s.metric("misses", misses);
    return s.finish();
}

SuiteResult recall_suite(const VerifyOptions& o) {
    Suite s("recall");
    const bool full = o.level == VerifyLevel::full;
    PlantedConfig pc;
    pc.n = full ? 10'000 : 2'000;
    pc.d = full ? 128 : 32;
    pc.p = 1.5;
    pc.r = 1.0;
    pc.c = 2.0;
    pc.planted_count = full ? 100 : 50;
    pc.seed = derive_seed(o.seed, 0);
    const PlantedInstance inst = generate_planted(pc);
    const LpSpace space(pc.p, pc.d);

    const SchemeParams scheme = tuned_scheme(pc.c, pc.p, kRecallW, derive_options(o));
    const std::size_t pilot = full ? 300'000 : 20'000;
    const CollisionEstimate p1 = estimate_collision(scheme, pc.d, 1.0, pilot, derive_seed(o.seed, 1));
    const CollisionEstimate p2 = estimate_collision(scheme, pc.d, scheme.c, pilot, derive_seed(o.seed, 2));
    const AmplificationChoice kl = choose_k_l(pc.n, p1.p_hat, p2.p_hat, kRecallSafety);
    IndexParams ip;
    ip.k = kl.k;
    ip.L = kl.L;
    ip.seed = derive_seed(o.seed, 3);

    const auto t_build = std::chrono::steady_clock::now();
    const LshIndex index = LshIndex::build(inst.data, scheme, ip);
    const double build_seconds = seconds_since(t_build);

    std::unordered_map<std::uint64_t, std::size_t> row_of;
    for (std::size_t i = 0; i < inst.data.size(); ++i) row_of[inst.data.id(i)] = i;

    const auto t_query = std::chrono::steady_clock::now();
    std::vector<QueryResult> results;
    results.reserve(inst.queries.size());
    for (std::size_t j = 0; j < inst.queries.size(); ++j) results.push_back(index.query(inst.queries.row(j)));
    const double query_seconds = seconds_since(t_query);

    std::size_t successes = 0, inexact = 0, ratio_violations = 0, planted_found = 0;
    for (std::size_t j = 0; j < results.size(); ++j) {
        const auto q = inst.queries.row(j);
        const QueryResult& r = results[j];
        successes += r.in_contract;
        if (!r.answer) continue;
        inexact += lp_distance(q, inst.data.row(row_of.at(r.answer->id)), space) != r.answer->distance;
        const Neighbor oracle = linear_scan_nn(inst.data, q, space);
        planted_found += r.answer->id == inst.truth[j].planted_id;
        if (r.in_contract) {
            ratio_violations += r.answer->distance < oracle.distance ||
                                r.answer->distance > pc.c * pc.c * oracle.distance;
        }
    }
    const double queries = static_cast<double>(results.size());
    const double rate = static_cast<double>(successes) / queries;
    const double bound = 1.0 - std::pow(1.0 - std::pow(p1.p_hat, static_cast<double>(ip.k)), static_cast<double>(ip.L));
    const double sigma = std::sqrt(bound * (1.0 - bound) / queries);

    std::uint64_t direct = inst.data.size() * (inst.data.dim() + 1);
    for (const auto& table : index.tables()) {
        direct += 2 * table.buckets().size();
        for (const auto& b : table.buckets()) direct += b.rows.size();
    }
    const std::size_t bytes = serialize_index(index).size();

    s.metric("n", static_cast<double>(pc.n));
    s.metric("d", static_cast<double>(pc.d));
    s.metric("p1_hat", p1.p_hat);
    s.metric("p2_hat", p2.p_hat);
    s.metric("k", static_cast<double>(ip.k));
    s.metric("L", static_cast<double>(ip.L));
    s.metric("weak_p1", kl.weak_p1 ? 1.0 : 0.0);
    s.metric("success_rate", rate);
    s.metric("predicted", bound);
    s.metric("planted_returned", static_cast<double>(planted_found));
    s.metric("fingerprint_collisions", static_cast<double>(index.stats().fingerprint_collisions));
    s.metric("storage_entries", static_cast<double>(index.storage_entries()));
    s.metric("serialized_bytes", static_cast<double>(bytes));
    s.metric("build_seconds", build_seconds);
    s.metric("query_seconds", query_seconds);
    if (full) {
        s.check(rate >= kRecallFloor, fmt::format("success rate {} < {}", rate, kRecallFloor));
    }
    s.check(rate >= bound - kSigmas * sigma,
            fmt::format("success rate {} below predicted {} - 3 sigma ({})", rate, bound, sigma));
    s.check(inexact == 0, fmt::format("{} reported distances differ from exact recomputation", inexact));
    s.check(ratio_violations == 0,
            fmt::format("{} successful answers outside [oracle, c^2 oracle]", ratio_violations));
    s.check(index.storage_entries() == direct, "storage_entries differs from a direct count");
    // 8 bytes per stored scalar is generous; the fixed header is well under a kilobyte.
    s.check(bytes <= 8 * direct + 1024, fmt::format("serialized size {} exceeds O(dn + nL) accounting", bytes));
    return s.finish();
}

SuiteResult determinism_suite(const VerifyOptions& o) {
    Suite s("determinism");
    PlantedConfig pc;
    pc.n = o.level == VerifyLevel::full ? 2'000 : 1'000;
    pc.d = 32;
    pc.planted_count = 100;
    pc.seed = derive_seed(o.seed, 0);
    const PlantedInstance inst = generate_planted(pc);
    const SchemeParams scheme = tuned_scheme(pc.c, pc.p, kRecallW, derive_options(o));
    IndexParams ip;
    ip.k = 3;
    ip.L = 16;
    ip.seed = derive_seed(o.seed, 1);

    const LshIndex first = LshIndex::build(inst.data, scheme, ip);
    const auto bytes_a = serialize_index(first);
    const auto bytes_b = serialize_index(LshIndex::build(inst.data, scheme, ip));
    s.metric("index_bytes", static_cast<double>(bytes_a.size()));
    s.check(bytes_a == bytes_b, "rebuild with the same seed gave different index bytes");

    const auto path = std::filesystem::temp_directory_path() / fmt::format("lplsh-verify-{:016x}.idx", o.seed);
    save_index(first, path.string());
    const LshIndex loaded = load_index(path.string());
    std::filesystem::remove(path);
    std::size_t mismatches = 0;
    for (std::size_t j = 0; j < inst.queries.size(); ++j) {
        mismatches += !(first.query(inst.queries.row(j)) == loaded.query(inst.queries.row(j)));
    }
    s.metric("roundtrip_mismatches", static_cast<double>(mismatches));
    s.check(mismatches == 0, fmt::format("{} of {} queries differ after save/load", mismatches, inst.queries.size()));
    s.check(serialize_index(loaded) == bytes_a, "reserialized index differs from the saved bytes");

    SweepConfig cfg;
    cfg.c_list = {2.0, 3.0};
    cfg.overrides.t = kTunedT;
    cfg.overrides.u_max = kTunedMaxShifts;
    cfg.derive.threshold_samples = 100'000;
    cfg.rho.trials = 2000;
    cfg.seed = derive_seed(o.seed, 2);
    std::ostringstream csv_a, csv_b;
    write_rho_csv(csv_a, rho_sweep(cfg));
    write_rho_csv(csv_b, rho_sweep(cfg));
    s.check(csv_a.str() == csv_b.str(), "rho sweep rerun gave different CSV bytes");
    return s.finish();
}

using SuiteFn = std::function<SuiteResult(const VerifyOptions&)>;

const std::vector<std::pair<std::string, SuiteFn>>& registry() {
    static const std::vector<std::pair<std::string, SuiteFn>> suites = {
        {"geometry", geometry_suite},
        {"stability", stability_suite},
        {"tail", tail_suite},
        {"covering", covering_suite},
        {"disjointness", disjointness_suite},
        {"concentration", concentration_suite},
        {"collision_identities", collision_suite},
        {"sensitivity", sensitivity_suite},
        {"cross_estimator", cross_estimator_suite},
        {"recall", recall_suite},
        {"determinism", determinism_suite},
    };
    return suites;
}

}  // namespace

const char* to_string(VerifyLevel level) { return level == VerifyLevel::full ? "full" : "quick"; }

VerifyLevel verify_level_from_string(const std::string& name) {
    if (name == "quick") return VerifyLevel::quick;
    if (name == "full") return VerifyLevel::full;
    throw ContractError("unknown verify level: " + name + " (expected quick or full)");
}

double SuiteResult::metric(const std::string& name) const {
    for (const auto& [k, v] : metrics) {
        if (k == name) return v;
    }
    throw ContractError("suite " + this->name + " has no metric " + name);
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [name, fn] : registry()) out.push_back(name);
        return out;
    }();
    return names;
}

SuiteResult run_suite(const std::string& name, const VerifyOptions& options) {
    for (const auto& [n, fn] : registry()) {
        if (n == name) return fn(options);
    }
    throw ContractError("unknown suite: " + name);
}

std::vector<SuiteResult> run_verify(const VerifyOptions& options, const std::vector<std::string>& only,
                                    std::ostream* out) {
    for (const auto& name : only) {
        const auto& names = suite_names();
        require(std::find(names.begin(), names.end(), name) != names.end(), "unknown suite: " + name);
    }
    std::vector<SuiteResult> results;
    for (const auto& [name, fn] : registry()) {
        if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
        results.push_back(fn(options));
        if (out) {
            write_suite_result(*out, results.back());
            out->flush();
        }
    }
    return results;
}

void write_suite_result(std::ostream& out, const SuiteResult& r) {
    out << fmt::format("suite={} status={} seconds={:.2f}", r.name, r.passed ? "PASS" : "FAIL", r.seconds);
    for (const auto& [k, v] : r.metrics) out << ' ' << k << '=' << fmt::format("{:.6g}", v);
    out << '\n';
    for (const auto& f : r.failures) out << "  failure: " << f << '\n';
}

}  // namespace lplsh
