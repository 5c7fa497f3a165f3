// Index file layout (all little-endian):
//   "LPLSH" | u16 version
//   scheme:  f64 p c r w eps delta_fail T lattice_delta | i32 t | u64 U u_max | u8 saturated
//            u8 profile requested_profile | f64 kappa_w kappa_t kappa_eps
//            u64 threshold_samples threshold_seed | u32 n_overridden, (u32 len, bytes)*
//   index:   u64 d n k L seed | u8 has_max_candidates | u64 max_candidates
//            u64 fingerprint_collisions fallback_entries
//   points:  n x (u64 id, d x f64)
//   tables:  L x (u64 n_buckets, n_buckets x (u64 fingerprint, u32 count, count x u32 row))
//   u64 CRC-64/XZ of every preceding byte
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <boost/crc.hpp>

#include "lplsh/ann_index.hpp"

namespace lplsh {

namespace {

constexpr char kMagic[5] = {'L', 'P', 'L', 'S', 'H'};
constexpr std::uint16_t kFormatVersion = 1;

using Crc64 = boost::crc_optimal<64, 0x42F0E1EBA9EA3693ULL, 0xFFFFFFFFFFFFFFFFULL, 0xFFFFFFFFFFFFFFFFULL, true, true>;

std::uint64_t crc64(std::span<const unsigned char> bytes) {
    Crc64 crc;
    crc.process_bytes(bytes.data(), bytes.size());
    return crc.checksum();
}

class ByteWriter {
public:
    void u8(std::uint8_t v) { bytes_.push_back(v); }
    void u16(std::uint16_t v) { le(v, 2); }
    void u32(std::uint32_t v) { le(v, 4); }
    void i32(std::int32_t v) { le(static_cast<std::uint32_t>(v), 4); }
    void u64(std::uint64_t v) { le(v, 8); }
    void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }
    void raw(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        bytes_.insert(bytes_.end(), p, p + n);
    }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        raw(s.data(), s.size());
    }
    std::vector<unsigned char>& bytes() { return bytes_; }

private:
    void le(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) bytes_.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
    }
    std::vector<unsigned char> bytes_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const unsigned char> bytes) : bytes_(bytes) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
    std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
    std::int32_t i32() { return static_cast<std::int32_t>(static_cast<std::uint32_t>(le(4))); }
    std::uint64_t u64() { return le(8); }
    double f64() { return std::bit_cast<double>(le(8)); }
    void raw(void* out, std::size_t n) {
        need(n);
        std::memcpy(out, bytes_.data() + pos_, n);
        pos_ += n;
    }
    std::string str() {
        const std::uint32_t n = u32();
        need(n);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    /// Guards count fields against absurd values before allocating.
    std::uint64_t count(std::uint64_t min_bytes_each) {
        const std::uint64_t n = u64();
        if (min_bytes_each > 0 && n > remaining() / min_bytes_each) {
            throw IoError("index file: count field exceeds file size");
        }
        return n;
    }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw IoError("index file: truncated");
    }
    std::uint64_t le(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }
    std::span<const unsigned char> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<unsigned char> serialize_index(const LshIndex& index) {
    ByteWriter w;
    w.raw(kMagic, sizeof kMagic);
    w.u16(kFormatVersion);

    const SchemeParams& s = index.scheme();
    w.f64(s.p);
    w.f64(s.c);
    w.f64(s.r);
    w.f64(s.w);
    w.f64(s.epsilon);
    w.f64(s.delta_fail);
    w.f64(s.T);
    w.f64(s.lattice.delta);
    w.i32(s.t);
    w.u64(s.lattice.U);
    w.u64(s.lattice.u_max);
    w.u8(s.lattice.saturated ? 1 : 0);
    w.u8(static_cast<std::uint8_t>(s.profile));
    w.u8(static_cast<std::uint8_t>(s.requested_profile));
    w.f64(s.knobs.kappa_w);
    w.f64(s.knobs.kappa_t);
    w.f64(s.knobs.kappa_eps);
    w.u64(s.threshold_samples);
    w.u64(s.threshold_seed);
    w.u32(static_cast<std::uint32_t>(s.overridden.size()));
    for (const auto& name : s.overridden) w.str(name);

    const IndexParams& ip = index.params();
    const Dataset& pts = index.points();
    w.u64(pts.dim());
    w.u64(pts.size());
    w.u64(ip.k);
    w.u64(ip.L);
    w.u64(ip.seed);
    w.u8(ip.max_candidates ? 1 : 0);
    w.u64(ip.max_candidates.value_or(0));
    w.u64(index.stats().fingerprint_collisions);
    w.u64(index.stats().fallback_entries);

    for (std::size_t i = 0; i < pts.size(); ++i) {
        w.u64(pts.id(i));
        for (double v : pts.row(i)) w.f64(v);
    }
    for (const auto& table : index.tables()) {
        w.u64(table.buckets().size());
        for (const auto& b : table.buckets()) {
            w.u64(b.fingerprint);
            w.u32(static_cast<std::uint32_t>(b.rows.size()));
            for (std::uint32_t row : b.rows) w.u32(row);
        }
    }
    const std::uint64_t crc = crc64(w.bytes());
    w.u64(crc);
    return std::move(w.bytes());
}

LshIndex deserialize_index(std::span<const unsigned char> bytes) {
    if (bytes.size() < sizeof kMagic + 2 + 8) {
        throw IoError("index file: truncated");
    }
    if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
        throw IoError("index file: bad magic");
    }
    const auto body = bytes.first(bytes.size() - 8);
    ByteReader tail(bytes.last(8));
    if (tail.u64() != crc64(body)) {
        throw IoError("index file: checksum mismatch");
    }

    ByteReader r(body);
    char magic[5];
    r.raw(magic, sizeof magic);
    const std::uint16_t version = r.u16();
    if (version != kFormatVersion) {
        throw IoError("index file: unsupported format version " + std::to_string(version));
    }

    SchemeParams s;
    s.p = r.f64();
    s.c = r.f64();
    s.r = r.f64();
    s.w = r.f64();
    s.epsilon = r.f64();
    s.delta_fail = r.f64();
    s.T = r.f64();
    s.lattice.delta = r.f64();
    s.t = r.i32();
    s.lattice.U = r.u64();
    s.lattice.u_max = r.u64();
    s.lattice.saturated = r.u8() != 0;
    const std::uint8_t profile = r.u8();
    const std::uint8_t requested = r.u8();
    if (profile > 1 || requested > 1) {
        throw IoError("index file: bad profile tag");
    }
    s.profile = static_cast<Profile>(profile);
    s.requested_profile = static_cast<Profile>(requested);
    s.knobs.kappa_w = r.f64();
    s.knobs.kappa_t = r.f64();
    s.knobs.kappa_eps = r.f64();
    s.threshold_samples = r.u64();
    s.threshold_seed = r.u64();
    const std::uint32_t n_over = r.u32();
    for (std::uint32_t i = 0; i < n_over; ++i) s.overridden.push_back(r.str());
    s.lattice.w = s.w;
    s.lattice.t = s.t;
    s.lattice.delta_fail = s.delta_fail;

    IndexParams ip;
    const std::uint64_t d = r.u64();
    const std::uint64_t n = r.u64();
    ip.k = r.u64();
    ip.L = r.u64();
    ip.seed = r.u64();
    const bool has_max = r.u8() != 0;
    const std::uint64_t max_candidates = r.u64();
    if (has_max) ip.max_candidates = max_candidates;
    BuildStats stats;
    stats.fingerprint_collisions = r.u64();
    stats.fallback_entries = r.u64();

    if (n > 0 && (d == 0 || d > r.remaining() / 8 || n > r.remaining() / (8 * (d + 1)))) {
        throw IoError("index file: point block exceeds file size");
    }
    if (ip.L > r.remaining() / 8 || ip.k == 0 || ip.L == 0) {
        throw IoError("index file: bad table count");
    }
    Dataset points(d);
    points.reserve(n);
    Vector row(d);
    for (std::uint64_t i = 0; i < n; ++i) {
        const std::uint64_t id = r.u64();
        for (auto& v : row) v = r.f64();
        points.add(id, row);
    }
    std::vector<BucketTable> tables;
    tables.reserve(ip.L);
    for (std::uint64_t l = 0; l < ip.L; ++l) {
        const std::uint64_t n_buckets = r.count(12);
        std::vector<BucketTable::Bucket> buckets(n_buckets);
        for (auto& b : buckets) {
            b.fingerprint = r.u64();
            const std::uint32_t count = r.u32();
            if (count > r.remaining() / 4) throw IoError("index file: truncated bucket");
            b.rows.resize(count);
            for (auto& row_id : b.rows) {
                row_id = r.u32();
                if (row_id >= n) throw IoError("index file: bucket row out of range");
            }
        }
        tables.emplace_back(std::move(buckets));
    }
    if (r.remaining() != 0) {
        throw IoError("index file: trailing bytes");
    }
    try {
        return LshIndex::assemble(std::move(points), std::move(s), ip, std::move(tables), stats);
    } catch (const ContractError& e) {
        throw IoError(std::string("index file: inconsistent parameters: ") + e.what());
    }
}

void save_index(const LshIndex& index, const std::string& path) {
    const auto bytes = serialize_index(index);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write index file: " + path);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("failed writing index file: " + path);
    }
}

LshIndex load_index(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open index file: " + path);
    }
    const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_index(bytes);
}

}  // namespace lplsh
