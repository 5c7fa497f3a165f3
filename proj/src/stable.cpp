#include "lplsh/stable.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "lplsh/lp_geometry.hpp"

namespace lplsh {

StableParams::StableParams(double p_) : p(p_) {
    require(p_ > 1.0 && p_ <= 2.0, "StableParams: p must lie in (1, 2]");
}

double sample_stable(const StableParams& params, Rng& rng) {
    const double alpha = params.p;
    // Open interval keeps cos(v) > 0.
    const double v = std::numbers::pi * (uniform01_open_low(rng) - 0.5);
    const double w = exponential1(rng);
    const double cos_v = std::cos(v);
    return std::sin(alpha * v) / std::pow(cos_v, 1.0 / alpha) *
           std::pow(std::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
}

MomentEstimate truncated_moment(const StableParams& params, double M, int order,
                                std::size_t n_samples, std::uint64_t seed) {
    require(M >= 1.0, "truncated_moment: M must be >= 1");
    require(order == 1 || order == 2, "truncated_moment: order must be 1 or 2");
    require(n_samples >= 10'000, "truncated_moment: need at least 10^4 samples");

    const double power = order * params.p;
    const std::size_t n_chunks = (n_samples + kMomentChunk - 1) / kMomentChunk;
    std::vector<double> sums(n_chunks), sq_sums(n_chunks);
    parallel_chunks(n_chunks, [&](std::size_t c) {
        Rng rng(derive_seed(seed, c));
        const std::size_t begin = c * kMomentChunk;
        const std::size_t end = std::min(n_samples, begin + kMomentChunk);
        double s = 0.0, s2 = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            const double z = std::min(std::abs(sample_stable(params, rng)), M);
            const double v = std::pow(z, power);
            s += v;
            s2 += v * v;
        }
        sums[c] = s;
        sq_sums[c] = s2;
    });

    double s = 0.0, s2 = 0.0;
    for (std::size_t c = 0; c < n_chunks; ++c) {
        s += sums[c];
        s2 += sq_sums[c];
    }
    const double n = static_cast<double>(n_samples);
    const double mean = s / n;
    const double var = std::max(0.0, (s2 / n - mean * mean) * n / (n - 1.0));
    return {mean, std::sqrt(var / n), n_samples};
}

Threshold compute_threshold(int t, double epsilon, const StableParams& params,
                            std::size_t n_samples, std::uint64_t seed) {
    require(t >= 2, "compute_threshold: t must be >= 2");
    require(epsilon > 0.0 && epsilon < 1.0, "compute_threshold: epsilon must lie in (0, 1)");
    const double M = std::pow(static_cast<double>(t), epsilon);
    Threshold th;
    th.t = t;
    th.epsilon = epsilon;
    th.p = params.p;
    th.sample_count = n_samples;
    th.seed = seed;
    th.moment = truncated_moment(params, M, 1, n_samples, seed);
    th.T = static_cast<double>(t) * th.moment.value / 2.0;
    return th;
}

Threshold ThresholdCache::get_or_compute(int t, double epsilon, const StableParams& params,
                                         std::size_t n_samples, std::uint64_t seed) {
    const Key key{params.p, t, epsilon, n_samples, seed};
    if (auto hit = lookup(key)) {
        Threshold th;
        th.T = *hit;
        th.t = t;
        th.epsilon = epsilon;
        th.p = params.p;
        th.sample_count = n_samples;
        th.seed = seed;
        th.moment.value = 2.0 * *hit / static_cast<double>(t);
        th.moment.n_samples = n_samples;
        return th;
    }
    Threshold th = compute_threshold(t, epsilon, params, n_samples, seed);
    insert(key, th.T);
    return th;
}

std::optional<double> ThresholdCache::lookup(const Key& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second;
}

void ThresholdCache::insert(const Key& key, double T) { entries_[key] = T; }

namespace {
constexpr const char* kCacheHeader = "lplsh-threshold-cache 1";
}

void ThresholdCache::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write threshold cache: " + path);
    }
    out << kCacheHeader << '\n';
    char line[256];
    for (const auto& [key, T] : entries_) {
        const auto& [p, t, eps, n, seed] = key;
        std::snprintf(line, sizeof line, "%a %d %a %zu %" PRIu64 " %a\n", p, t, eps, n, seed, T);
        out << line;
    }
    if (!out) {
        throw IoError("failed writing threshold cache: " + path);
    }
}

ThresholdCache ThresholdCache::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read threshold cache: " + path);
    }
    std::string line;
    if (!std::getline(in, line) || line != kCacheHeader) {
        throw IoError("threshold cache: bad or unsupported header in " + path);
    }
    ThresholdCache cache;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double p = 0, eps = 0, T = 0;
        int t = 0;
        std::size_t n = 0;
        std::uint64_t seed = 0;
        char pbuf[64], ebuf[64], tbuf[64];
        if (std::sscanf(line.c_str(), "%63s %d %63s %zu %" SCNu64 " %63s", pbuf, &t, ebuf, &n, &seed,
                        tbuf) != 6) {
            throw IoError("threshold cache: malformed record: " + line);
        }
        p = std::strtod(pbuf, nullptr);
        eps = std::strtod(ebuf, nullptr);
        T = std::strtod(tbuf, nullptr);
        cache.insert({p, t, eps, n, seed}, T);
    }
    return cache;
}

TailBounds tail_probability_bounds(double M, const StableParams& params, const TailConstants& consts) {
    require(M >= 1.0, "tail_probability_bounds: M must be >= 1");
    const double p = params.p;
    const double lead = consts.a_hat / (p * std::pow(M, p));
    const double sub = consts.b_hat / (2.0 * M * M);
    const double lower = lead - sub;
    const double upper = std::pow(2.0, (p + 1.0) / 2.0) * lead + sub;
    return {std::clamp(lower, 0.0, 1.0), std::clamp(upper, 0.0, 1.0)};
}

double TailFit::flatness() const {
    if (points.empty()) {
        return 0.0;
    }
    double mean = 0.0;
    for (const auto& pt : points) mean += pt.scaled;
    mean /= static_cast<double>(points.size());
    if (mean <= 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    double worst = 0.0;
    for (const auto& pt : points) worst = std::max(worst, std::abs(pt.scaled / mean - 1.0));
    return worst;
}

TailFit fit_tail_constant(const StableParams& params, std::size_t n_samples, Interval fit_range,
                          std::uint64_t seed, std::size_t grid_points) {
    require(fit_range.lo >= 5.0 && fit_range.hi > fit_range.lo,
            "fit_tail_constant: fit range must lie within [5, inf)");
    require(n_samples >= 1'000'000, "fit_tail_constant: need at least 10^6 samples");
    require(grid_points >= 2, "fit_tail_constant: need at least two grid points");

    std::vector<double> grid(grid_points);
    const double log_lo = std::log(fit_range.lo), log_hi = std::log(fit_range.hi);
    for (std::size_t g = 0; g < grid_points; ++g) {
        grid[g] = std::exp(log_lo + (log_hi - log_lo) * static_cast<double>(g) /
                                        static_cast<double>(grid_points - 1));
    }
    grid.front() = fit_range.lo;
    grid.back() = fit_range.hi;

    // exceed[g] counts draws with X > grid[g]; fill by highest crossed grid point.
    const std::size_t n_chunks = (n_samples + kMomentChunk - 1) / kMomentChunk;
    std::vector<std::vector<std::size_t>> chunk_hits(n_chunks, std::vector<std::size_t>(grid_points, 0));
    parallel_chunks(n_chunks, [&](std::size_t c) {
        Rng rng(derive_seed(seed, c));
        const std::size_t begin = c * kMomentChunk;
        const std::size_t end = std::min(n_samples, begin + kMomentChunk);
        auto& hits = chunk_hits[c];
        for (std::size_t i = begin; i < end; ++i) {
            const double x = sample_stable(params, rng);
            if (x <= grid.front()) continue;
            const auto it = std::lower_bound(grid.begin(), grid.end(), x);
            ++hits[static_cast<std::size_t>(it - grid.begin()) - 1];
        }
    });
    std::vector<std::size_t> bucket(grid_points, 0);
    for (const auto& hits : chunk_hits) {
        for (std::size_t g = 0; g < grid_points; ++g) bucket[g] += hits[g];
    }

    TailFit fit;
    fit.n_samples = n_samples;
    fit.consts.fit_range = fit_range;
    const double p = params.p;
    const double n = static_cast<double>(n_samples);
    std::size_t cumulative = 0;
    fit.points.resize(grid_points);
    for (std::size_t g = grid_points; g-- > 0;) {
        cumulative += bucket[g];
        auto& pt = fit.points[g];
        pt.M = grid[g];
        pt.count = cumulative;
        pt.tail_prob = static_cast<double>(cumulative) / n;
        pt.scaled = p * std::pow(pt.M, p) * pt.tail_prob;
    }

    if (fit.points.front().count < kMinTailCount) {
        fit.status = TailFitStatus::degenerate;
        return fit;
    }
    double log_sum = 0.0;
    std::size_t used = 0;
    for (const auto& pt : fit.points) {
        if (pt.count == 0) continue;
        log_sum += std::log(pt.scaled);
        ++used;
    }
    fit.consts.a_hat = std::exp(log_sum / static_cast<double>(used));

    const double upper_factor = std::pow(2.0, (p + 1.0) / 2.0);
    double b = 0.0;
    for (const auto& pt : fit.points) {
        const double lead = fit.consts.a_hat / (p * std::pow(pt.M, p));
        b = std::max(b, 2.0 * pt.M * pt.M * (lead - pt.tail_prob));
        b = std::max(b, 2.0 * pt.M * pt.M * (pt.tail_prob - upper_factor * lead));
        if (pt.count < kMinTailCount) {
            fit.status = TailFitStatus::insufficient_samples;
        }
    }
    fit.consts.b_hat = b;
    return fit;
}

ConcentrationReport validate_concentration(int t, double epsilon, const StableParams& params,
                                           const Threshold& threshold, std::size_t trials,
                                           std::uint64_t seed, std::span<const double> x) {
    require(t >= 1, "validate_concentration: t must be positive");
    require(epsilon > 0.0 && epsilon < 1.0, "validate_concentration: epsilon must lie in (0, 1)");
    require(trials >= 200, "validate_concentration: need at least 200 trials");
    Vector basis;
    if (x.empty()) {
        basis.assign(16, 0.0);
        basis[0] = 1.0;
        x = basis;
    }
    const double x_norm_pow = lp_norm_pow(x, params.p);
    require(x_norm_pow > 0.0, "validate_concentration: x must be nonzero");

    const double high_factor = std::pow(2.0, (4.0 + params.p) / 2.0) / epsilon;
    const double low_cut = threshold.T * x_norm_pow;
    const double high_cut = high_factor * threshold.T * x_norm_pow;

    std::vector<std::uint8_t> low(trials), high(trials);
    constexpr std::size_t kTrialChunk = 64;
    const std::size_t n_chunks = (trials + kTrialChunk - 1) / kTrialChunk;
    parallel_chunks(n_chunks, [&](std::size_t c) {
        const std::size_t end = std::min(trials, (c + 1) * kTrialChunk);
        for (std::size_t trial = c * kTrialChunk; trial < end; ++trial) {
            Rng rng(derive_seed(seed, trial));
            double norm_pow = 0.0;
            for (int row = 0; row < t; ++row) {
                double y = 0.0;
                for (double xj : x) {
                    y += sample_stable(params, rng) * xj;
                }
                norm_pow += std::pow(std::abs(y), params.p);
            }
            low[trial] = norm_pow < low_cut;
            high[trial] = norm_pow > high_cut;
        }
    });

    std::size_t n_low = 0, n_high = 0;
    for (std::size_t i = 0; i < trials; ++i) {
        n_low += low[i];
        n_high += high[i];
    }
    ConcentrationReport rep;
    rep.trials = trials;
    rep.high_factor = high_factor;
    rep.rate_low = static_cast<double>(n_low) / static_cast<double>(trials);
    rep.rate_high = static_cast<double>(n_high) / static_cast<double>(trials);
    rep.ci_low = wilson_interval(n_low, trials);
    rep.ci_high = wilson_interval(n_high, trials);
    return rep;
}

}  // namespace lplsh
