#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "lplsh/ann_index.hpp"

using namespace lplsh;

namespace {

using Bytes = std::vector<unsigned char>;

// Bitwise reflected CRC-64 with the ECMA-182 polynomial, init and xorout all ones.
std::uint64_t crc64_reference(const unsigned char* data, std::size_t n) {
    std::uint64_t crc = ~0ULL;
    for (std::size_t i = 0; i < n; ++i) {
        crc ^= data[i];
        for (int b = 0; b < 8; ++b) crc = (crc >> 1) ^ (0xC96C5795D7870F42ULL & (0 - (crc & 1)));
    }
    return ~crc;
}

void reseal(Bytes& bytes) {
    const std::uint64_t crc = crc64_reference(bytes.data(), bytes.size() - 8);
    for (int i = 0; i < 8; ++i) bytes[bytes.size() - 8 + i] = static_cast<unsigned char>(crc >> (8 * i));
}

SchemeParams scheme() {
    Overrides o;
    o.t = 3;
    o.u_max = 5000;
    DeriveOptions d;
    d.threshold_samples = 100'000;
    return derive_params(2.0, 1.5, Profile::remark, {}, o, d);
}

LshIndex make_index(std::size_t n, std::uint64_t seed = 1, std::optional<std::size_t> max_candidates = {}) {
    Rng rng(seed);
    Dataset pts(5);
    Vector x(5);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& v : x) v = 4 * uniform01(rng) - 2;
        pts.add(1000 + 3 * i, x);
    }
    IndexParams ip;
    ip.k = 2;
    ip.L = 4;
    ip.seed = seed;
    ip.max_candidates = max_candidates;
    return LshIndex::build(pts, scheme(), ip);
}

}  // namespace

TEST_CASE("the checksum is CRC-64/XZ") {
    const std::string check = "123456789";
    CHECK(crc64_reference(reinterpret_cast<const unsigned char*>(check.data()), check.size()) ==
          0x995DC9BBDF1939FAULL);
    const Bytes bytes = serialize_index(make_index(20));
    std::uint64_t stored = 0;
    for (int i = 0; i < 8; ++i) stored |= std::uint64_t(bytes[bytes.size() - 8 + i]) << (8 * i);
    CHECK(stored == crc64_reference(bytes.data(), bytes.size() - 8));
}

TEST_CASE("header layout") {
    const Bytes bytes = serialize_index(make_index(10));
    CHECK(std::string(bytes.begin(), bytes.begin() + 5) == "LPLSH");
    CHECK(bytes[5] == 1);
    CHECK(bytes[6] == 0);
}

TEST_CASE("save and load answer queries identically") {
    const auto dir = std::filesystem::temp_directory_path() / "lplsh_test_index_io";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "a.idx").string();
    const LshIndex idx = make_index(400, 2, 7);
    save_index(idx, path);
    const LshIndex back = load_index(path);

    CHECK(back.points() == idx.points());
    CHECK(back.params().k == idx.params().k);
    CHECK(back.params().max_candidates == std::optional<std::size_t>{7});
    CHECK(back.scheme().T == idx.scheme().T);
    CHECK(back.scheme().overridden == idx.scheme().overridden);
    CHECK(back.stats().fallback_entries == idx.stats().fallback_entries);
    CHECK(serialize_index(back) == serialize_index(idx));

    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        Vector q(5);
        for (auto& v : q) v = 4 * uniform01(rng) - 2;
        CHECK(back.query(q) == idx.query(q));
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("empty index round-trips") {
    IndexParams ip;
    ip.L = 2;
    const LshIndex empty = LshIndex::build(Dataset(3), scheme(), ip);
    const LshIndex back = deserialize_index(serialize_index(empty));
    CHECK(back.points().size() == 0);
    CHECK(back.tables().size() == 2);
    CHECK_FALSE(back.query(Vector(3, 0.0)).answer.has_value());
}

TEST_CASE("any flipped byte is rejected") {
    const Bytes good = serialize_index(make_index(50));
    for (std::size_t pos : {std::size_t{0}, std::size_t{5}, std::size_t{40}, good.size() / 2, good.size() - 9,
                            good.size() - 1}) {
        Bytes bad = good;
        bad[pos] ^= 0x10;
        CAPTURE(pos);
        CHECK_THROWS_AS(deserialize_index(bad), IoError);
    }
}

TEST_CASE("truncation, version and structure errors") {
    const Bytes good = serialize_index(make_index(50));
    CHECK_THROWS_AS(deserialize_index(Bytes(good.begin(), good.begin() + 10)), IoError);
    CHECK_THROWS_AS(deserialize_index(Bytes(good.begin(), good.end() - 1)), IoError);
    CHECK_THROWS_AS(deserialize_index(Bytes{}), IoError);

    Bytes version = good;
    version[5] = 2;
    reseal(version);
    CHECK_THROWS_WITH_AS(deserialize_index(version), doctest::Contains("version"), IoError);

    // The profile tag sits right after 8 f64, an i32, two u64 and the saturation byte.
    Bytes profile = good;
    profile[7 + 8 * 8 + 4 + 16 + 1] = 9;
    reseal(profile);
    CHECK_THROWS_WITH_AS(deserialize_index(profile), doctest::Contains("profile"), IoError);

    Bytes trailing(good.begin(), good.end() - 8);
    trailing.push_back(0);
    trailing.resize(trailing.size() + 8);
    reseal(trailing);
    CHECK_THROWS_WITH_AS(deserialize_index(trailing), doctest::Contains("trailing"), IoError);

    CHECK_THROWS_AS(load_index("/nonexistent/dir/x.idx"), IoError);
    CHECK_THROWS_AS(save_index(make_index(5), "/nonexistent/dir/x.idx"), IoError);
}

TEST_CASE("serialized size is linear in d n + n L") {
    const std::size_t n = 300;
    const Bytes bytes = serialize_index(make_index(n));
    const LshIndex idx = make_index(n);
    std::size_t buckets = 0;
    for (const auto& t : idx.tables()) buckets += t.buckets().size();
    // points: n (8 + 5 * 8); tables: 8 per table, 12 per bucket, 4 per row.
    const std::size_t payload = n * (8 + 5 * 8) + 4 * 8 + 12 * buckets + 4 * n * 4;
    CHECK(bytes.size() > payload);
    CHECK(bytes.size() < payload + 512);
}
