#include <doctest.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lplsh/dataset.hpp"

using namespace lplsh;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / "lplsh_test_dataset") {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("Dataset basics") {
    Dataset d;
    CHECK(d.empty());
    d.add(5, std::vector<double>{1, 2, 3});
    CHECK(d.dim() == 3);
    CHECK(d.size() == 1);
    CHECK(d.id(0) == 5);
    CHECK(d.row(0)[2] == 3.0);
    CHECK_THROWS_AS(d.add(6, std::vector<double>{1, 2}), ContractError);
    Dataset z;
    CHECK_THROWS_AS(z.add(0, std::vector<double>{}), ContractError);
}

TEST_CASE("CSV round trip is exact") {
    TempDir tmp;
    Dataset d(3);
    d.add(10, std::vector<double>{0.1, -1e-300, 1.0 / 3.0});
    d.add(3, std::vector<double>{1e300, 2.5, -0.0});
    write_csv(d, tmp.file("a.csv"), {"lplsh test", "seed=1"});
    const std::string text = read_text(tmp.file("a.csv"));
    CHECK(text.rfind("# lplsh test\n# seed=1\nid,x0,x1,x2\n", 0) == 0);
    CHECK(read_csv(tmp.file("a.csv")) == d);
    CHECK(read_dataset(tmp.file("a.csv")) == d);
}

TEST_CASE("CSV without an id column numbers rows") {
    TempDir tmp;
    write_text(tmp.file("b.csv"), "a,b\r\n1,2\r\n\r\n# note\n3,4.5e1\n");
    const Dataset d = read_csv(tmp.file("b.csv"));
    CHECK(d.dim() == 2);
    CHECK(d.size() == 2);
    CHECK(d.ids() == std::vector<std::uint64_t>{0, 1});
    CHECK(d.row(1)[1] == 45.0);
}

TEST_CASE("empty CSV inputs") {
    TempDir tmp;
    write_text(tmp.file("empty.csv"), "");
    CHECK(read_csv(tmp.file("empty.csv")).empty());
    write_text(tmp.file("header.csv"), "id,x0,x1\n");
    const Dataset h = read_csv(tmp.file("header.csv"));
    CHECK(h.empty());
    write_csv(Dataset(), tmp.file("w.csv"));
    CHECK(read_csv(tmp.file("w.csv")).empty());
    write_text(tmp.file("bare.csv"), "id\n7\n");
    CHECK_THROWS_AS(read_csv(tmp.file("bare.csv")), IoError);
}

TEST_CASE("malformed CSV is an I/O error") {
    TempDir tmp;
    write_text(tmp.file("nan.csv"), "id,x0\n0,abc\n");
    CHECK_THROWS_AS(read_csv(tmp.file("nan.csv")), IoError);
    write_text(tmp.file("ragged.csv"), "id,x0,x1\n0,1\n");
    CHECK_THROWS_AS(read_csv(tmp.file("ragged.csv")), IoError);
    write_text(tmp.file("trailing.csv"), "id,x0\n0,1.5x\n");
    CHECK_THROWS_AS(read_csv(tmp.file("trailing.csv")), IoError);
    write_text(tmp.file("id.csv"), "id,x0\n-1,1\n");
    CHECK_THROWS_AS(read_csv(tmp.file("id.csv")), IoError);
    CHECK_THROWS_AS(read_csv(tmp.file("missing.csv")), IoError);
}

TEST_CASE("fvecs round trip and layout") {
    TempDir tmp;
    Dataset d(2);
    d.add(0, std::vector<double>{1.5, -2.25});
    d.add(1, std::vector<double>{0.1, 3});
    write_fvecs(d, tmp.file("a.fvecs"));
    const std::string bytes = read_text(tmp.file("a.fvecs"));
    REQUIRE(bytes.size() == 2 * (4 + 2 * 4));
    std::int32_t dim = 0;
    float first = 0;
    std::memcpy(&dim, bytes.data(), 4);
    std::memcpy(&first, bytes.data() + 4, 4);
    CHECK(dim == 2);
    CHECK(first == 1.5f);

    const Dataset back = read_dataset(tmp.file("a.fvecs"));
    CHECK(back.size() == 2);
    CHECK(back.row(0)[1] == -2.25);
    CHECK(back.row(1)[0] == static_cast<double>(0.1f));
    CHECK(back.ids() == std::vector<std::uint64_t>{0, 1});
}

TEST_CASE("broken fvecs files") {
    TempDir tmp;
    Dataset d(3);
    d.add(0, std::vector<double>{1, 2, 3});
    write_fvecs(d, tmp.file("ok.fvecs"));
    const std::string bytes = read_text(tmp.file("ok.fvecs"));

    write_text(tmp.file("trunc.fvecs"), bytes.substr(0, bytes.size() - 2));
    CHECK_THROWS_AS(read_fvecs(tmp.file("trunc.fvecs")), IoError);
    write_text(tmp.file("header.fvecs"), bytes + bytes.substr(0, 2));
    CHECK_THROWS_AS(read_fvecs(tmp.file("header.fvecs")), IoError);

    std::string neg = bytes;
    const std::int32_t bad = -3;
    std::memcpy(neg.data(), &bad, 4);
    write_text(tmp.file("neg.fvecs"), neg);
    CHECK_THROWS_AS(read_fvecs(tmp.file("neg.fvecs")), IoError);

    Dataset e(2);
    e.add(0, std::vector<double>{1, 2});
    write_fvecs(e, tmp.file("two.fvecs"));
    write_text(tmp.file("mixed.fvecs"), bytes + read_text(tmp.file("two.fvecs")));
    CHECK_THROWS_AS(read_fvecs(tmp.file("mixed.fvecs")), IoError);

    write_text(tmp.file("empty.fvecs"), "");
    CHECK(read_fvecs(tmp.file("empty.fvecs")).empty());
    CHECK_THROWS_AS(read_fvecs(tmp.file("nope.fvecs")), IoError);
}
