#include "lplsh/dataset.hpp"

#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace lplsh {

void Dataset::add(std::uint64_t id, std::span<const double> point) {
    if (dim_ == 0 && ids_.empty()) {
        dim_ = point.size();
    }
    require(point.size() == dim_, "Dataset::add: dimension mismatch: expected " + std::to_string(dim_) +
                                      ", got " + std::to_string(point.size()));
    require(dim_ > 0, "Dataset::add: points must have positive dimension");
    ids_.push_back(id);
    values_.insert(values_.end(), point.begin(), point.end());
}

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::uint32_t load_le32(const unsigned char* b) {
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void store_le32(std::uint32_t v, char* b) {
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
}

}  // namespace

Dataset read_fvecs(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open fvecs file: " + path);
    }
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Dataset data;
    std::size_t offset = 0;
    std::vector<double> row;
    while (offset < bytes.size()) {
        if (bytes.size() - offset < 4) {
            throw IoError("fvecs: truncated dimension header in " + path);
        }
        const auto dim = static_cast<std::int32_t>(load_le32(&bytes[offset]));
        offset += 4;
        if (dim <= 0) {
            throw IoError("fvecs: nonpositive dimension in " + path);
        }
        if (!data.empty() && static_cast<std::size_t>(dim) != data.dim()) {
            throw IoError("fvecs: inconsistent dimension in " + path);
        }
        const std::size_t payload = static_cast<std::size_t>(dim) * 4;
        if (bytes.size() - offset < payload) {
            throw IoError("fvecs: truncated record in " + path);
        }
        row.resize(static_cast<std::size_t>(dim));
        for (std::size_t j = 0; j < row.size(); ++j) {
            row[j] = std::bit_cast<float>(load_le32(&bytes[offset + 4 * j]));
        }
        offset += payload;
        data.add(data.size(), row);
    }
    return data;
}

void write_fvecs(const Dataset& data, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write fvecs file: " + path);
    }
    char buf[4];
    for (std::size_t i = 0; i < data.size(); ++i) {
        store_le32(static_cast<std::uint32_t>(data.dim()), buf);
        out.write(buf, 4);
        for (double v : data.row(i)) {
            store_le32(std::bit_cast<std::uint32_t>(static_cast<float>(v)), buf);
            out.write(buf, 4);
        }
    }
    if (!out) {
        throw IoError("failed writing fvecs file: " + path);
    }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

double parse_double(const std::string& s, const std::string& path, std::size_t line_no) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end == s.c_str() || *end != '\0') {
        throw IoError(fmt::format("{}:{}: not a number: '{}'", path, line_no, s));
    }
    return v;
}

}  // namespace

Dataset read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open CSV file: " + path);
    }
    std::string line;
    std::size_t line_no = 0;
    // Comment lines (starting with '#') carry provenance and are skipped.
    do {
        if (!std::getline(in, line)) {
            return Dataset();
        }
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
    } while (line.empty() || line[0] == '#');

    const auto header = split_csv(line);
    const bool has_id = !header.empty() && header[0] == "id";
    const std::size_t dim = header.size() - (has_id ? 1 : 0);
    if (dim == 0) {
        // A bare "id" header is how an empty dataset is written.
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty() && line[0] != '#') throw IoError(path + ": CSV header has no coordinate columns");
        }
        return Dataset();
    }
    Dataset data(dim);
    std::vector<double> row(dim);
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto fields = split_csv(line);
        if (fields.size() != header.size()) {
            throw IoError(fmt::format("{}:{}: expected {} fields, got {}", path, line_no, header.size(),
                                      fields.size()));
        }
        std::uint64_t id = data.size();
        if (has_id) {
            char* end = nullptr;
            id = std::strtoull(fields[0].c_str(), &end, 10);
            if (fields[0].empty() || !std::isdigit(static_cast<unsigned char>(fields[0][0])) || *end != '\0') {
                throw IoError(fmt::format("{}:{}: bad id '{}'", path, line_no, fields[0]));
            }
        }
        for (std::size_t j = 0; j < dim; ++j) {
            row[j] = parse_double(fields[j + (has_id ? 1 : 0)], path, line_no);
        }
        data.add(id, row);
    }
    return data;
}

void write_csv(const Dataset& data, const std::string& path, const std::vector<std::string>& comments) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write CSV file: " + path);
    }
    for (const auto& c : comments) out << "# " << c << '\n';
    std::string header = "id";
    for (std::size_t j = 0; j < data.dim(); ++j) {
        header += fmt::format(",x{}", j);
    }
    out << header << '\n';
    fmt::memory_buffer buf;
    for (std::size_t i = 0; i < data.size(); ++i) {
        buf.clear();
        fmt::format_to(std::back_inserter(buf), "{}", data.id(i));
        for (double v : data.row(i)) {
            fmt::format_to(std::back_inserter(buf), ",{}", v);
        }
        buf.push_back('\n');
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    }
    if (!out) {
        throw IoError("failed writing CSV file: " + path);
    }
}

Dataset read_dataset(const std::string& path) {
    return ends_with(path, ".fvecs") ? read_fvecs(path) : read_csv(path);
}

void write_dataset(const Dataset& data, const std::string& path, const std::vector<std::string>& comments) {
    if (ends_with(path, ".fvecs")) {
        write_fvecs(data, path);
    } else {
        write_csv(data, path, comments);
    }
}

}  // namespace lplsh
