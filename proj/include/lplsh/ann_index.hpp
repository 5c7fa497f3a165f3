#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lplsh/dataset.hpp"
#include "lplsh/lsh_scheme.hpp"

/**
 * @file ann_index.hpp
 *
 * @brief Multi-table LSH index: L tables, each keyed by the concatenation of
 * k independent ball-lattice hashes.
 */

namespace lplsh {

struct IndexParams {
    std::size_t k = 1;
    std::size_t L = 1;
    std::uint64_t seed = 0;
    /// Probe budget in distinct candidates; defaults to 3L.
    std::optional<std::size_t> max_candidates;

    std::size_t candidate_budget() const { return max_candidates.value_or(3 * L); }
    void validate() const;
};

struct AmplificationChoice {
    std::size_t k = 1;
    std::size_t L = 1;
    double rho_hat = 0.0;
    /// 1/p1 exceeds sqrt(n): the near collision rate is too small for sublinear query cost.
    bool weak_p1 = false;
};

/// k = max(1, ceil(ln n / ln(1/p2))), L = ceil(safety * n^rho) with rho = ln(1/p1) / ln(1/p2).
AmplificationChoice choose_k_l(std::size_t n, double p1_hat, double p2_hat, double safety = 1.0);

struct Neighbor {
    std::uint64_t id = 0;
    double distance = 0.0;

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

struct QueryResult {
    std::optional<Neighbor> answer;
    /// The answer lies within c r of the query. False answers are the nearest
    /// candidate seen, surfaced so near misses can be measured.
    bool in_contract = false;
    std::size_t candidates_examined = 0;
    std::size_t tables_probed = 0;
    /// Radius-ladder only: rung that produced the answer and the overall approximation factor.
    std::optional<std::size_t> rung;
    double effective_c = 0.0;

    friend bool operator==(const QueryResult&, const QueryResult&) = default;
};

/// Buckets of one table, keyed by a 64-bit fingerprint of the composite hash key.
class BucketTable {
public:
    struct Bucket {
        std::uint64_t fingerprint = 0;
        std::vector<std::uint32_t> rows;
    };

    BucketTable() = default;
    explicit BucketTable(std::vector<Bucket> buckets);

    /// Rows of the bucket with this fingerprint, or an empty span.
    std::span<const std::uint32_t> find(std::uint64_t fingerprint) const;
    const std::vector<Bucket>& buckets() const { return buckets_; }

private:
    void rebuild_slots();

    std::vector<Bucket> buckets_;
    /// Open addressing, linear probing; slot holds bucket index + 1, 0 = empty.
    std::vector<std::uint32_t> slots_;
};

struct BuildStats {
    /// Distinct full keys that shared a fingerprint; expected 0.
    std::uint64_t fingerprint_collisions = 0;
    std::uint64_t fallback_entries = 0;
};

class LshIndex {
public:
    /// Points are in original units; hashing applies the 1/r scaling internally.
    static LshIndex build(Dataset points, const SchemeParams& scheme, const IndexParams& params);

    QueryResult query(std::span<const double> q) const;

    const SchemeParams& scheme() const { return scheme_; }
    const IndexParams& params() const { return params_; }
    const Dataset& points() const { return points_; }
    const std::vector<BucketTable>& tables() const { return tables_; }
    const BuildStats& stats() const { return stats_; }
    std::size_t dim() const { return points_.dim(); }

    /// Hash function j of table l.
    const HashFunction& hash_function(std::size_t table, std::size_t j) const {
        return hashes_[table * params_.k + j];
    }

    /// Concatenated k hash values of a unit-scaled point for one table.
    std::vector<std::int64_t> composite_key(std::size_t table, std::span<const double> unit_point) const;

    /// Stored scalars: d n coordinates + n ids + per table (one fingerprint and count per bucket + n rows).
    std::uint64_t storage_entries() const;

    /// Rebuilds an index from persisted parts, regenerating hash functions from seeds.
    static LshIndex assemble(Dataset points, SchemeParams scheme, IndexParams params,
                             std::vector<BucketTable> tables, BuildStats stats);

private:
    LshIndex(Dataset points, SchemeParams scheme, IndexParams params);

    void sample_hashes();

    Dataset points_;
    SchemeParams scheme_;
    IndexParams params_;
    std::vector<HashFunction> hashes_;
    std::vector<BucketTable> tables_;
    BuildStats stats_;
};

/// 64-bit fingerprint of a composite key.
std::uint64_t key_fingerprint(std::span<const std::int64_t> key);

/// Exact nearest neighbor by linear scan; ties go to the smallest id.
Neighbor linear_scan_nn(const Dataset& points, std::span<const double> q, const LpSpace& space);

/// Indices at radii r_min c^i for i = 0 .. ceil(log_c(r_max / r_min)).
class RadiusLadder {
public:
    /// The scheme's r is replaced per rung; everything else is shared.
    RadiusLadder(const Dataset& points, const SchemeParams& scheme, const IndexParams& params, double r_min,
                 double r_max);

    /// Answer from the smallest rung that returns an in-contract point; effective_c = c^2.
    QueryResult query(std::span<const double> q) const;

    std::size_t rungs() const { return indices_.size(); }
    double radius(std::size_t rung) const { return radii_[rung]; }
    const LshIndex& index(std::size_t rung) const { return indices_[rung]; }

private:
    double c_;
    std::vector<double> radii_;
    std::vector<LshIndex> indices_;
};

QueryResult radius_ladder_query(const Dataset& points, std::span<const double> q, const SchemeParams& scheme,
                                const IndexParams& params, double r_min, double r_max);

/// Binary index file; see README for the layout. Throws IoError on any integrity failure.
void save_index(const LshIndex& index, const std::string& path);
LshIndex load_index(const std::string& path);

/// The exact bytes save_index writes.
std::vector<unsigned char> serialize_index(const LshIndex& index);
LshIndex deserialize_index(std::span<const unsigned char> bytes);

}  // namespace lplsh
