#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lplsh/common.hpp"

namespace lplsh {

/// Row-major point set with integer ids.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(std::size_t dim) : dim_(dim) {}

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return ids_.size(); }
    bool empty() const { return ids_.empty(); }

    std::span<const double> row(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }
    std::span<double> row(std::size_t i) { return {values_.data() + i * dim_, dim_}; }
    std::uint64_t id(std::size_t i) const { return ids_[i]; }
    const std::vector<std::uint64_t>& ids() const { return ids_; }
    const std::vector<double>& values() const { return values_; }

    /// Appends a point; the first point fixes the dimension of an unsized dataset.
    void add(std::uint64_t id, std::span<const double> point);
    void reserve(std::size_t n) {
        ids_.reserve(n);
        values_.reserve(n * dim_);
    }

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    std::size_t dim_ = 0;
    std::vector<double> values_;
    std::vector<std::uint64_t> ids_;
};

/// fvecs: per record a little-endian int32 dimension followed by that many float32 values.
/// Ids are the record positions.
Dataset read_fvecs(const std::string& path);
void write_fvecs(const Dataset& data, const std::string& path);

/// CSV with a header row. A leading "id" column is optional; without it ids are row positions.
/// An empty file or a header-only file is an empty dataset.
Dataset read_csv(const std::string& path);
/// Writes "id,x0,...,x{d-1}" with shortest round-trip formatting, after one "# " line per comment.
void write_csv(const Dataset& data, const std::string& path, const std::vector<std::string>& comments = {});

/// Dispatches on extension: ".fvecs" or anything else as CSV.
Dataset read_dataset(const std::string& path);
/// Comments are written only for CSV; fvecs has nowhere to put them.
void write_dataset(const Dataset& data, const std::string& path, const std::vector<std::string>& comments = {});

}  // namespace lplsh
