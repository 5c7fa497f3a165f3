#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lplsh/ball_lattice.hpp"
#include "lplsh/dataset.hpp"
#include "lplsh/lp_geometry.hpp"
#include "lplsh/stable.hpp"

/**
 * @file lsh_scheme.hpp
 *
 * @brief The ball-lattice hash family for l_p: a p-stable projection to R^t
 * scaled by T^(-1/p), followed by the smallest-u shifted ball lookup.
 *
 * Inputs are expected in unit scale (near radius r = 1); see scale_to_unit.
 */

namespace lplsh {

enum class Profile {
    /// w = k_w c ln c, t = ceil(k_t w^p), eps = k_eps ln ln t / ln t.
    main,
    /// w = k_w c, t = ceil(k_t w^p), eps = k_eps / ln t.
    remark,
};

const char* to_string(Profile profile);
Profile profile_from_string(const std::string& name);

/// Multipliers on the asymptotic parameter choices; all default to 1.
struct Knobs {
    double kappa_w = 1.0;
    double kappa_t = 1.0;
    double kappa_eps = 1.0;
};

/// Individual replacements for derived values. Every set field is recorded in SchemeParams::overridden.
struct Overrides {
    std::optional<double> w;
    std::optional<int> t;
    std::optional<double> epsilon;
    std::optional<double> delta_fail;
    std::optional<std::uint64_t> U;
    std::optional<double> T;
    std::optional<double> delta;
    std::optional<std::uint64_t> u_max;
};

struct DeriveOptions {
    std::size_t threshold_samples = kDefaultThresholdSamples;
    std::uint64_t threshold_seed = 0x7448726573686f6cULL;
    /// Optional memo for T; consulted before running the Monte Carlo.
    ThresholdCache* cache = nullptr;
};

struct SchemeParams {
    double c = 2.0;
    double p = 1.5;
    double r = 1.0;
    double w = 1.0;
    int t = 2;
    double epsilon = 0.5;
    double delta_fail = 0.05;
    double T = 1.0;
    LatticeParams lattice;
    /// Profile asked for and profile actually applied (MAIN falls back to REMARK for c < e).
    Profile requested_profile = Profile::main;
    Profile profile = Profile::main;
    Knobs knobs;
    std::size_t threshold_samples = kDefaultThresholdSamples;
    std::uint64_t threshold_seed = 0;
    std::vector<std::string> overridden;

    StableParams stable() const { return StableParams(p); }
    LpSpace reduced_space() const { return LpSpace(p, static_cast<std::size_t>(t)); }
};

/**
 * Fills every scheme constant from (c, p).
 *
 * The formulas depend only on c and p; r is carried along for the caller's
 * scaling. U comes from compute_num_shifts (possibly saturated) and T from
 * compute_threshold unless overridden.
 */
SchemeParams derive_params(double c, double p, Profile profile, const Knobs& knobs = {},
                           const Overrides& overrides = {}, const DeriveOptions& options = {},
                           double r = 1.0);

/// Divides every coordinate by r so the (r, cr) regime becomes (1, c).
Dataset scale_to_unit(const Dataset& points, double r);
Vector scale_to_unit(std::span<const double> point, double r);

/// A sampled hash function: A' = T^(-1/p) A (t x d, row-major) plus the shifted lattices.
class HashFunction {
public:
    HashFunction(SchemeParams scheme, std::size_t d, std::vector<double> projection,
                 ShiftedLatticeSet lattices, std::uint64_t seed);

    const SchemeParams& scheme() const { return scheme_; }
    std::size_t input_dim() const { return d_; }
    std::size_t rows() const { return static_cast<std::size_t>(scheme_.t); }
    std::span<const double> projection() const { return projection_; }
    const ShiftedLatticeSet& lattices() const { return lattices_; }
    std::uint64_t seed() const { return seed_; }

    /// x' = A' x.
    Vector project(std::span<const double> x) const;
    void project_into(std::span<const double> x, std::span<double> out) const;

private:
    SchemeParams scheme_;
    std::size_t d_;
    std::vector<double> projection_;
    ShiftedLatticeSet lattices_;
    LpSpace reduced_;
    std::uint64_t seed_;
};

/// Sub-seed streams split from a hash function's root seed.
enum class SeedStream : std::uint64_t { projection = 0, shifts = 1 };

HashFunction sample_hash(const SchemeParams& scheme, std::size_t d, std::uint64_t seed);

/// hash_point(A' x, lattices).
HashValue eval_hash(const HashFunction& h, std::span<const double> x);
LookupResult eval_hash_counted(const HashFunction& h, std::span<const double> x);

struct CostReport {
    /// t * d multiply-adds for the dense projection.
    std::uint64_t projection_flops = 0;
    /// Worst case: every lattice examined.
    std::uint64_t lattice_probes = 0;
    double measured_mean_probes = 0.0;
    double measured_fallback_rate = 0.0;
    std::size_t measured_samples = 0;
};

/**
 * Evaluation cost of one hash. When samples > 0 the average probe count is
 * measured on uniform points of the fundamental cube, each against freshly
 * seeded lattices; by translation invariance of the random shifts this has
 * the same law as probing projected data points.
 */
CostReport evaluation_cost(const SchemeParams& scheme, std::size_t d, std::size_t samples = 0,
                           std::uint64_t seed = 0);

}  // namespace lplsh
