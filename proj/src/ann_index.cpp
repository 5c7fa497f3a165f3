#include "lplsh/ann_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace lplsh {

void IndexParams::validate() const {
    require(k >= 1, "IndexParams: k must be >= 1");
    require(L >= 1, "IndexParams: L must be >= 1");
    require(!max_candidates || *max_candidates >= 1, "IndexParams: max_candidates must be >= 1");
}

AmplificationChoice choose_k_l(std::size_t n, double p1_hat, double p2_hat, double safety) {
    require(n >= 2, "choose_k_l: n must be >= 2");
    require(p2_hat > 0.0 && p1_hat < 1.0 && p2_hat < p1_hat,
            "choose_k_l: need 0 < p2 < p1 < 1 (sensitivity violated)");
    require(safety > 0.0, "choose_k_l: safety must be positive");
    const double ln_n = std::log(static_cast<double>(n));
    const double ln_inv_p2 = std::log(1.0 / p2_hat);
    AmplificationChoice out;
    out.k = static_cast<std::size_t>(std::max(1.0, std::ceil(ln_n / ln_inv_p2)));
    out.rho_hat = std::log(1.0 / p1_hat) / ln_inv_p2;
    out.L = static_cast<std::size_t>(std::max(1.0, std::ceil(safety * std::pow(static_cast<double>(n), out.rho_hat))));
    out.weak_p1 = 1.0 / p1_hat > std::sqrt(static_cast<double>(n));
    return out;
}

std::uint64_t key_fingerprint(std::span<const std::int64_t> key) {
    std::uint64_t h = mix64(key.size());
    for (std::int64_t v : key) {
        h = mix64(h ^ static_cast<std::uint64_t>(v));
    }
    return h;
}

BucketTable::BucketTable(std::vector<Bucket> buckets) : buckets_(std::move(buckets)) { rebuild_slots(); }

void BucketTable::rebuild_slots() {
    std::size_t capacity = 16;
    while (capacity < 2 * buckets_.size()) capacity <<= 1;
    slots_.assign(capacity, 0);
    const std::size_t mask = capacity - 1;
    for (std::size_t b = 0; b < buckets_.size(); ++b) {
        std::size_t slot = buckets_[b].fingerprint & mask;
        while (slots_[slot] != 0) {
            if (buckets_[slots_[slot] - 1].fingerprint == buckets_[b].fingerprint) {
                throw IoError("bucket table: duplicate fingerprint");
            }
            slot = (slot + 1) & mask;
        }
        slots_[slot] = static_cast<std::uint32_t>(b + 1);
    }
}

std::span<const std::uint32_t> BucketTable::find(std::uint64_t fingerprint) const {
    if (slots_.empty()) {
        return {};
    }
    const std::size_t mask = slots_.size() - 1;
    std::size_t slot = fingerprint & mask;
    while (slots_[slot] != 0) {
        const Bucket& b = buckets_[slots_[slot] - 1];
        if (b.fingerprint == fingerprint) {
            return b.rows;
        }
        slot = (slot + 1) & mask;
    }
    return {};
}

LshIndex::LshIndex(Dataset points, SchemeParams scheme, IndexParams params)
    : points_(std::move(points)), scheme_(std::move(scheme)), params_(params) {}

void LshIndex::sample_hashes() {
    const std::size_t d = std::max<std::size_t>(1, points_.dim());
    hashes_.clear();
    hashes_.reserve(params_.k * params_.L);
    for (std::size_t i = 0; i < params_.k * params_.L; ++i) {
        hashes_.push_back(sample_hash(scheme_, d, derive_seed(params_.seed, i)));
    }
}

std::vector<std::int64_t> LshIndex::composite_key(std::size_t table, std::span<const double> unit_point) const {
    const std::size_t t = static_cast<std::size_t>(scheme_.t);
    std::vector<std::int64_t> key;
    key.reserve(params_.k * (t + 1));
    for (std::size_t j = 0; j < params_.k; ++j) {
        const HashValue hv = eval_hash(hash_function(table, j), unit_point);
        key.push_back(static_cast<std::int64_t>(hv.u));
        key.insert(key.end(), hv.coords.begin(), hv.coords.end());
    }
    return key;
}

LshIndex LshIndex::build(Dataset points, const SchemeParams& scheme, const IndexParams& params) {
    params.validate();
    require(points.size() < std::numeric_limits<std::uint32_t>::max(), "build: too many points");
    {
        std::vector<std::uint64_t> ids = points.ids();
        std::sort(ids.begin(), ids.end());
        require(std::adjacent_find(ids.begin(), ids.end()) == ids.end(), "build: duplicate point ids");
    }
    LshIndex index(std::move(points), scheme, params);
    index.sample_hashes();
    const std::size_t n = index.points_.size();
    index.tables_.resize(params.L);
    if (n == 0) {
        return index;
    }
    const Dataset unit = scale_to_unit(index.points_, scheme.r);
    const std::size_t t = static_cast<std::size_t>(scheme.t);

    std::vector<std::vector<std::int64_t>> keys(n);
    std::vector<std::uint64_t> fingerprints(n);
    constexpr std::size_t kRowChunk = 256;
    const std::size_t n_chunks = (n + kRowChunk - 1) / kRowChunk;
    for (std::size_t l = 0; l < params.L; ++l) {
        parallel_chunks(n_chunks, [&](std::size_t c) {
            const std::size_t end = std::min(n, (c + 1) * kRowChunk);
            for (std::size_t i = c * kRowChunk; i < end; ++i) {
                keys[i] = index.composite_key(l, unit.row(i));
                fingerprints[i] = key_fingerprint(keys[i]);
            }
        });

        // Sequential merge in row order keeps bucket order and row order independent of threading.
        std::vector<BucketTable::Bucket> buckets;
        std::vector<std::size_t> first_row;
        std::unordered_map<std::uint64_t, std::uint32_t> by_fingerprint;
        by_fingerprint.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < params.k; ++j) {
                if (keys[i][j * (t + 1)] == 0) {
                    ++index.stats_.fallback_entries;
                    break;
                }
            }
            auto [it, inserted] = by_fingerprint.try_emplace(fingerprints[i], static_cast<std::uint32_t>(buckets.size()));
            if (inserted) {
                buckets.push_back({fingerprints[i], {}});
                first_row.push_back(i);
            } else if (keys[first_row[it->second]] != keys[i]) {
                ++index.stats_.fingerprint_collisions;
            }
            buckets[it->second].rows.push_back(static_cast<std::uint32_t>(i));
        }
        index.tables_[l] = BucketTable(std::move(buckets));
    }
    return index;
}

LshIndex LshIndex::assemble(Dataset points, SchemeParams scheme, IndexParams params,
                            std::vector<BucketTable> tables, BuildStats stats) {
    params.validate();
    require(tables.size() == params.L, "assemble: table count differs from L");
    LshIndex index(std::move(points), std::move(scheme), params);
    index.sample_hashes();
    index.tables_ = std::move(tables);
    index.stats_ = stats;
    return index;
}

QueryResult LshIndex::query(std::span<const double> q) const {
    QueryResult res;
    if (points_.empty()) {
        return res;
    }
    if (q.size() != points_.dim()) {
        throw ContractError("query: dimension mismatch: index has " + std::to_string(points_.dim()) +
                            ", query has " + std::to_string(q.size()));
    }
    const LpSpace space(scheme_.p, points_.dim());
    const Vector unit_q = scale_to_unit(q, scheme_.r);
    const std::size_t budget = params_.candidate_budget();
    std::vector<std::uint8_t> seen(points_.size(), 0);
    double best_dist = std::numeric_limits<double>::infinity();
    std::uint64_t best_id = 0;
    bool found = false;

    for (std::size_t l = 0; l < params_.L && res.candidates_examined < budget; ++l) {
        const auto rows = tables_[l].find(key_fingerprint(composite_key(l, unit_q)));
        ++res.tables_probed;
        for (std::uint32_t row : rows) {
            if (seen[row]) continue;
            seen[row] = 1;
            ++res.candidates_examined;
            const double dist = lp_distance(points_.row(row), q, space);
            const std::uint64_t id = points_.id(row);
            if (!found || dist < best_dist || (dist == best_dist && id < best_id)) {
                found = true;
                best_dist = dist;
                best_id = id;
            }
            if (res.candidates_examined >= budget) break;
        }
    }
    if (found) {
        res.answer = Neighbor{best_id, best_dist};
        res.in_contract = best_dist <= scheme_.c * scheme_.r;
    }
    return res;
}

std::uint64_t LshIndex::storage_entries() const {
    std::uint64_t total = points_.size() * (points_.dim() + 1);
    for (const auto& table : tables_) {
        total += 2 * table.buckets().size();
        for (const auto& b : table.buckets()) total += b.rows.size();
    }
    return total;
}

Neighbor linear_scan_nn(const Dataset& points, std::span<const double> q, const LpSpace& space) {
    require(!points.empty(), "linear_scan_nn: empty dataset");
    Neighbor best{points.id(0), lp_distance(points.row(0), q, space)};
    for (std::size_t i = 1; i < points.size(); ++i) {
        const double dist = lp_distance(points.row(i), q, space);
        if (dist < best.distance || (dist == best.distance && points.id(i) < best.id)) {
            best = {points.id(i), dist};
        }
    }
    return best;
}

RadiusLadder::RadiusLadder(const Dataset& points, const SchemeParams& scheme, const IndexParams& params,
                           double r_min, double r_max)
    : c_(scheme.c) {
    require(r_min > 0.0 && r_min <= r_max && std::isfinite(r_max), "RadiusLadder: need 0 < r_min <= r_max");
    require(scheme.c > 1.0, "RadiusLadder: c must exceed 1");
    const double span = std::log(r_max / r_min) / std::log(scheme.c);
    const auto top = static_cast<std::size_t>(std::max(0.0, std::ceil(span - 1e-12)));
    for (std::size_t i = 0; i <= top; ++i) {
        SchemeParams rung = scheme;
        rung.r = r_min * std::pow(scheme.c, static_cast<double>(i));
        IndexParams rung_params = params;
        rung_params.seed = derive_seed(params.seed, i);
        radii_.push_back(rung.r);
        indices_.push_back(LshIndex::build(points, rung, rung_params));
    }
}

QueryResult RadiusLadder::query(std::span<const double> q) const {
    QueryResult best;
    std::size_t examined = 0, probed = 0;
    for (std::size_t i = 0; i < indices_.size(); ++i) {
        QueryResult res = indices_[i].query(q);
        examined += res.candidates_examined;
        probed += res.tables_probed;
        if (res.in_contract) {
            res.candidates_examined = examined;
            res.tables_probed = probed;
            res.rung = i;
            res.effective_c = c_ * c_;
            return res;
        }
        if (res.answer && (!best.answer || res.answer->distance < best.answer->distance ||
                           (res.answer->distance == best.answer->distance && res.answer->id < best.answer->id))) {
            best.answer = res.answer;
        }
    }
    best.in_contract = false;
    best.candidates_examined = examined;
    best.tables_probed = probed;
    best.effective_c = c_ * c_;
    return best;
}

QueryResult radius_ladder_query(const Dataset& points, std::span<const double> q, const SchemeParams& scheme,
                                const IndexParams& params, double r_min, double r_max) {
    return RadiusLadder(points, scheme, params, r_min, r_max).query(q);
}

}  // namespace lplsh
