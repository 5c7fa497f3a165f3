#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lplsh/common.hpp"
#include "lplsh/lp_geometry.hpp"

/**
 * @file ball_lattice.hpp
 *
 * @brief Shifted lattices of l_p balls of radius w centered at s_u + (delta w) Z^t.
 *
 * Within one lattice the balls are disjoint as long as delta > 2, so a point
 * is covered by lattice u iff it lies in the ball around its coordinatewise
 * nearest lattice point.
 */

namespace lplsh {

inline constexpr std::uint64_t kDefaultMaxShifts = 1'000'000;

struct NumShifts {
    std::uint64_t U = 0;
    /// The covering formula exceeded the cap and U was clamped to it.
    bool saturated = false;
    /// log of the unclamped formula value.
    double log_formula = 0.0;
};

/// ceil(delta^t t^(t/p + 1) ln(delta t / delta_fail)), clamped to u_max.
NumShifts compute_num_shifts(int t, double p, double delta, double delta_fail,
                             std::uint64_t u_max = kDefaultMaxShifts);

struct LatticeParams {
    double w = 1.0;
    double delta = 4.0;
    int t = 1;
    double delta_fail = 0.05;
    std::uint64_t U = 1;
    std::uint64_t u_max = kDefaultMaxShifts;
    bool saturated = false;

    /// Lattice period delta * w.
    double period() const { return delta * w; }
    void validate() const;
};

/// (u, a) with u in [1, U], or the fallback (0, 0) when no lattice covers the point.
struct HashValue {
    std::uint64_t u = 0;
    std::vector<std::int64_t> coords;

    bool is_fallback() const { return u == 0; }
    static HashValue fallback(int t) { return {0, std::vector<std::int64_t>(static_cast<std::size_t>(t), 0)}; }

    friend bool operator==(const HashValue&, const HashValue&) = default;
};

struct LookupResult {
    HashValue value;
    /// Lattices examined, at most U.
    std::uint64_t probes = 0;
};

/**
 * U shifted lattices, all derived from one seed.
 *
 * Shift coordinates are a pure function of (seed, u, i), so they are generated
 * on demand instead of stored: hashing touches only the lattices it probes, and
 * a prefix of the set (same seed, smaller U) has identical shifts.
 */
class ShiftedLatticeSet {
public:
    ShiftedLatticeSet(LatticeParams params, std::uint64_t seed);

    const LatticeParams& params() const { return params_; }
    std::uint64_t seed() const { return seed_; }
    std::uint64_t size() const { return params_.U; }

    /// Shift s_u in [0, delta w]^t for u in [1, U].
    Vector shift(std::uint64_t u) const;
    void shift_into(std::uint64_t u, std::span<double> out) const;

    /// The same lattices truncated to the first u_prefix shifts.
    ShiftedLatticeSet prefix(std::uint64_t u_prefix) const;

    /// Per-shift generator state; coordinate i is shift_coord(shift_state(u), i).
    std::uint64_t shift_state(std::uint64_t u) const {
        return mix64(seed_mix_ ^ mix64(u + 0x632be59bd9b4e019ULL));
    }
    double shift_coord(std::uint64_t state, std::size_t i) const {
        return static_cast<double>(mix64(state + i * 0x9e3779b97f4a7c15ULL) >> 11) * 0x1.0p-53 * params_.period();
    }

private:
    LatticeParams params_;
    std::uint64_t seed_;
    std::uint64_t seed_mix_;
};

/// U i.i.d. uniform shifts; deterministic given seed. U = 0 yields an empty set.
ShiftedLatticeSet make_lattices(const LatticeParams& params, std::uint64_t seed);

/// Rounds (x_i - s_i) / (delta w) half-to-even per coordinate and returns the
/// lattice coordinates iff x lies within w of that lattice point.
std::optional<std::vector<std::int64_t>> locate(std::span<const double> x, std::uint64_t u,
                                                const ShiftedLatticeSet& lattices, const LpSpace& space);

/// Smallest u whose lattice covers x, or the fallback value.
HashValue hash_point(std::span<const double> x, const ShiftedLatticeSet& lattices, const LpSpace& space);

/// hash_point plus the number of lattices probed.
LookupResult hash_point_counted(std::span<const double> x, const ShiftedLatticeSet& lattices,
                                const LpSpace& space);

/// Fraction of uniform points in the fundamental cube [0, delta w]^t that get a non-fallback hash.
/// Membership is measured in the l_p metric of space, whose dimension must be t.
double covering_fraction(const ShiftedLatticeSet& lattices, const LpSpace& space, std::size_t trials,
                         Rng& rng);

}  // namespace lplsh
