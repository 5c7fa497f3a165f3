#include "lplsh/lsh_scheme.hpp"

#include <cmath>
#include <numbers>

namespace lplsh {

const char* to_string(Profile profile) { return profile == Profile::main ? "main" : "remark"; }

Profile profile_from_string(const std::string& name) {
    if (name == "main" || name == "MAIN") return Profile::main;
    if (name == "remark" || name == "REMARK") return Profile::remark;
    throw ContractError("unknown profile '" + name + "' (expected main or remark)");
}

SchemeParams derive_params(double c, double p, Profile profile, const Knobs& knobs,
                           const Overrides& overrides, const DeriveOptions& options, double r) {
    require(c > 1.0, "derive_params: c must exceed 1");
    require(p > 1.0 && p <= 2.0, "derive_params: p must lie in (1, 2]");
    require(r > 0.0, "derive_params: r must be positive");
    require(knobs.kappa_w > 0.0 && knobs.kappa_t > 0.0 && knobs.kappa_eps > 0.0,
            "derive_params: knobs must be positive");

    SchemeParams s;
    s.c = c;
    s.p = p;
    s.r = r;
    s.knobs = knobs;
    s.requested_profile = profile;
    s.profile = (profile == Profile::main && c < std::numbers::e) ? Profile::remark : profile;
    s.threshold_samples = options.threshold_samples;
    s.threshold_seed = options.threshold_seed;

    auto note = [&](const char* name) { s.overridden.emplace_back(name); };

    if (overrides.w) {
        s.w = *overrides.w;
        note("w");
    } else {
        s.w = s.profile == Profile::main ? knobs.kappa_w * c * std::log(c) : knobs.kappa_w * c;
    }
    require(s.w > 0.0, "derive_params: w must be positive");

    if (overrides.t) {
        s.t = *overrides.t;
        note("t");
    } else {
        const double raw = knobs.kappa_t * std::pow(s.w, p);
        require(raw < 1e6, "derive_params: t is unreasonably large; lower kappa_t or override t");
        s.t = static_cast<int>(std::ceil(raw));
    }
    require(s.t >= 2, "derive_params: t < 2 after derivation (raise kappa_t or override t)");

    const double ln_t = std::log(static_cast<double>(s.t));
    if (overrides.epsilon) {
        s.epsilon = *overrides.epsilon;
        note("epsilon");
    } else {
        s.epsilon = s.profile == Profile::main ? knobs.kappa_eps * std::log(ln_t) / ln_t
                                               : knobs.kappa_eps / ln_t;
    }
    require(s.epsilon > 0.0 && s.epsilon < 1.0,
            "derive_params: epsilon outside (0, 1); adjust kappa_eps or override epsilon");

    if (overrides.delta_fail) {
        s.delta_fail = *overrides.delta_fail;
        note("delta_fail");
    } else {
        s.delta_fail = std::exp(-static_cast<double>(s.t));
    }

    LatticeParams& lat = s.lattice;
    lat.w = s.w;
    lat.t = s.t;
    lat.delta_fail = s.delta_fail;
    if (overrides.delta) {
        lat.delta = *overrides.delta;
        note("delta");
    }
    if (overrides.u_max) {
        lat.u_max = *overrides.u_max;
        note("u_max");
    }
    const NumShifts shifts = compute_num_shifts(s.t, p, lat.delta, s.delta_fail, lat.u_max);
    if (overrides.U) {
        require(*overrides.U <= lat.u_max, "derive_params: U override exceeds u_max");
        lat.U = *overrides.U;
        lat.saturated = shifts.saturated || *overrides.U < shifts.U;
        note("U");
    } else {
        lat.U = shifts.U;
        lat.saturated = shifts.saturated;
    }
    lat.validate();

    if (overrides.T) {
        s.T = *overrides.T;
        note("T");
    } else {
        const StableParams sp(p);
        const Threshold th =
            options.cache ? options.cache->get_or_compute(s.t, s.epsilon, sp, options.threshold_samples,
                                                          options.threshold_seed)
                          : compute_threshold(s.t, s.epsilon, sp, options.threshold_samples,
                                              options.threshold_seed);
        s.T = th.T;
    }
    require(s.T > 0.0, "derive_params: T must be positive");
    return s;
}

Dataset scale_to_unit(const Dataset& points, double r) {
    require(r > 0.0, "scale_to_unit: r must be positive");
    Dataset out = points;
    for (std::size_t i = 0; i < out.size(); ++i) {
        for (auto& v : out.row(i)) v /= r;
    }
    return out;
}

Vector scale_to_unit(std::span<const double> point, double r) {
    require(r > 0.0, "scale_to_unit: r must be positive");
    Vector out(point.begin(), point.end());
    for (auto& v : out) v /= r;
    return out;
}

HashFunction::HashFunction(SchemeParams scheme, std::size_t d, std::vector<double> projection,
                           ShiftedLatticeSet lattices, std::uint64_t seed)
    : scheme_(std::move(scheme)),
      d_(d),
      projection_(std::move(projection)),
      lattices_(std::move(lattices)),
      reduced_(scheme_.reduced_space()),
      seed_(seed) {
    require(d_ >= 1, "HashFunction: d must be positive");
    require(projection_.size() == rows() * d_, "HashFunction: projection has wrong shape");
}

void HashFunction::project_into(std::span<const double> x, std::span<double> out) const {
    if (x.size() != d_) {
        throw ContractError("dimension mismatch: hash function expects " + std::to_string(d_) +
                            ", got " + std::to_string(x.size()));
    }
    const std::size_t t = rows();
    for (std::size_t i = 0; i < t; ++i) {
        const double* row = projection_.data() + i * d_;
        double acc = 0.0;
        for (std::size_t j = 0; j < d_; ++j) {
            acc += row[j] * x[j];
        }
        out[i] = acc;
    }
}

Vector HashFunction::project(std::span<const double> x) const {
    Vector out(rows());
    project_into(x, out);
    return out;
}

HashFunction sample_hash(const SchemeParams& scheme, std::size_t d, std::uint64_t seed) {
    require(d >= 1, "sample_hash: d must be positive");
    const StableParams sp(scheme.p);
    const std::size_t t = static_cast<std::size_t>(scheme.t);
    const double scale = std::pow(scheme.T, -1.0 / scheme.p);
    std::vector<double> projection(t * d);
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(SeedStream::projection)));
    for (auto& a : projection) {
        a = scale * sample_stable(sp, rng);
    }
    auto lattices = make_lattices(scheme.lattice, derive_seed(seed, static_cast<std::uint64_t>(SeedStream::shifts)));
    return HashFunction(scheme, d, std::move(projection), std::move(lattices), seed);
}

LookupResult eval_hash_counted(const HashFunction& h, std::span<const double> x) {
    const Vector projected = h.project(x);
    return hash_point_counted(projected, h.lattices(), h.scheme().reduced_space());
}

HashValue eval_hash(const HashFunction& h, std::span<const double> x) { return eval_hash_counted(h, x).value; }

CostReport evaluation_cost(const SchemeParams& scheme, std::size_t d, std::size_t samples, std::uint64_t seed) {
    require(d >= 1, "evaluation_cost: d must be positive");
    CostReport rep;
    rep.projection_flops = static_cast<std::uint64_t>(scheme.t) * d;
    rep.lattice_probes = scheme.lattice.U;
    if (samples == 0) {
        return rep;
    }
    const LpSpace space = scheme.reduced_space();
    const double period = scheme.lattice.period();
    std::vector<std::uint64_t> probes(samples);
    std::vector<std::uint8_t> fell_back(samples);
    constexpr std::size_t kChunk = 64;
    parallel_chunks((samples + kChunk - 1) / kChunk, [&](std::size_t c) {
        Vector x(static_cast<std::size_t>(scheme.t));
        const std::size_t end = std::min(samples, (c + 1) * kChunk);
        for (std::size_t i = c * kChunk; i < end; ++i) {
            Rng rng(derive_seed(seed, i));
            for (auto& v : x) v = uniform01(rng) * period;
            const auto lattices = make_lattices(scheme.lattice, rng());
            const auto res = hash_point_counted(x, lattices, space);
            probes[i] = res.probes;
            fell_back[i] = res.value.is_fallback();
        }
    });
    double total = 0.0, fallbacks = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        total += static_cast<double>(probes[i]);
        fallbacks += fell_back[i];
    }
    rep.measured_samples = samples;
    rep.measured_mean_probes = total / static_cast<double>(samples);
    rep.measured_fallback_rate = fallbacks / static_cast<double>(samples);
    return rep;
}

}  // namespace lplsh
