#include "lplsh/ball_lattice.hpp"

#include <cmath>
#include <string>

namespace lplsh {

NumShifts compute_num_shifts(int t, double p, double delta, double delta_fail, std::uint64_t u_max) {
    require(t >= 1, "compute_num_shifts: t must be >= 1");
    require(delta_fail > 0.0 && delta_fail < 1.0, "compute_num_shifts: delta_fail must lie in (0, 1)");
    require(delta > 0.0 && p > 0.0, "compute_num_shifts: delta and p must be positive");
    require(u_max >= 1, "compute_num_shifts: u_max must be >= 1");

    const double td = static_cast<double>(t);
    const double log_term = std::log(delta * td / delta_fail);
    NumShifts out;
    out.log_formula = td * std::log(delta) + (td / p + 1.0) * std::log(td) + std::log(log_term);
    if (out.log_formula > std::log(static_cast<double>(u_max))) {
        out.U = u_max;
        out.saturated = true;
        return out;
    }
    const double value = std::pow(delta, td) * std::pow(td, td / p + 1.0) * log_term;
    const double rounded = std::ceil(value);
    if (rounded > static_cast<double>(u_max)) {
        out.U = u_max;
        out.saturated = true;
        return out;
    }
    out.U = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(rounded));
    return out;
}

void LatticeParams::validate() const {
    require(w > 0.0 && std::isfinite(w), "LatticeParams: w must be positive");
    require(delta >= 3.0, "LatticeParams: delta must be >= 3 for in-lattice disjointness");
    require(t >= 1, "LatticeParams: t must be >= 1");
    require(delta_fail > 0.0 && delta_fail < 1.0, "LatticeParams: delta_fail must lie in (0, 1)");
    require(U <= u_max, "LatticeParams: U exceeds u_max");
}

ShiftedLatticeSet::ShiftedLatticeSet(LatticeParams params, std::uint64_t seed)
    : params_(params), seed_(seed), seed_mix_(mix64(seed)) {
    params_.validate();
}

void ShiftedLatticeSet::shift_into(std::uint64_t u, std::span<double> out) const {
    const std::uint64_t state = shift_state(u);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = shift_coord(state, i);
}

Vector ShiftedLatticeSet::shift(std::uint64_t u) const {
    require(u >= 1 && u <= params_.U, "shift: u out of range");
    Vector s(static_cast<std::size_t>(params_.t));
    shift_into(u, s);
    return s;
}

ShiftedLatticeSet ShiftedLatticeSet::prefix(std::uint64_t u_prefix) const {
    require(u_prefix <= params_.U, "prefix: longer than the lattice set");
    LatticeParams p = params_;
    p.U = u_prefix;
    return ShiftedLatticeSet(p, seed_);
}

ShiftedLatticeSet make_lattices(const LatticeParams& params, std::uint64_t seed) {
    return ShiftedLatticeSet(params, seed);
}

namespace {

// Half-to-even relies on the default FE_TONEAREST rounding mode.
inline std::int64_t round_half_even(double v) { return static_cast<std::int64_t>(std::nearbyint(v)); }

// pow dominates the probe loop; the common exponents have cheaper exact-enough forms.
inline double abs_pow(double v, double p) {
    if (p == 2.0) return v * v;
    if (p == 1.5) return v * std::sqrt(v);
    return std::pow(v, p);
}

// Shift coordinates are generated on demand: most probes fail on the first one or two.
bool locate_into(std::span<const double> x, const ShiftedLatticeSet& lattices, std::uint64_t u, double w,
                 double p, double budget, std::span<std::int64_t> coords) {
    const double period = lattices.params().period();
    const std::uint64_t state = lattices.shift_state(u);
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double shift = lattices.shift_coord(state, i);
        const std::int64_t a = round_half_even((x[i] - shift) / period);
        coords[i] = a;
        const double diff = std::abs(x[i] - (shift + period * static_cast<double>(a)));
        if (diff > w) {
            return false;
        }
        sum += abs_pow(diff, p);
        if (sum > budget) {
            return false;
        }
    }
    return true;
}

}  // namespace

std::optional<std::vector<std::int64_t>> locate(std::span<const double> x, std::uint64_t u,
                                                const ShiftedLatticeSet& lattices, const LpSpace& space) {
    const auto& lp = lattices.params();
    require(u >= 1 && u <= lp.U, "locate: u out of range");
    require(space.dim() == static_cast<std::size_t>(lp.t), "locate: space dimension differs from t");
    space.check(x);
    std::vector<std::int64_t> coords(x.size());
    if (!locate_into(x, lattices, u, lp.w, space.p(), abs_pow(lp.w, space.p()), coords)) {
        return std::nullopt;
    }
    return coords;
}

LookupResult hash_point_counted(std::span<const double> x, const ShiftedLatticeSet& lattices,
                                const LpSpace& space) {
    const auto& lp = lattices.params();
    require(space.dim() == static_cast<std::size_t>(lp.t), "hash_point: space dimension differs from t");
    space.check(x);
    std::vector<std::int64_t> coords(x.size());
    const double budget = abs_pow(lp.w, space.p());
    for (std::uint64_t u = 1; u <= lp.U; ++u) {
        if (locate_into(x, lattices, u, lp.w, space.p(), budget, coords)) {
            return {HashValue{u, std::move(coords)}, u};
        }
    }
    return {HashValue::fallback(lp.t), lp.U};
}

HashValue hash_point(std::span<const double> x, const ShiftedLatticeSet& lattices, const LpSpace& space) {
    return hash_point_counted(x, lattices, space).value;
}

double covering_fraction(const ShiftedLatticeSet& lattices, const LpSpace& space, std::size_t trials,
                         Rng& rng) {
    require(trials >= 1000, "covering_fraction: need at least 10^3 trials");
    const auto& lp = lattices.params();
    const double period = lp.period();
    Vector x(static_cast<std::size_t>(lp.t));
    std::size_t covered = 0;
    for (std::size_t i = 0; i < trials; ++i) {
        for (auto& c : x) c = uniform01(rng) * period;
        if (!hash_point(x, lattices, space).is_fallback()) {
            ++covered;
        }
    }
    return static_cast<double>(covered) / static_cast<double>(trials);
}

}  // namespace lplsh
