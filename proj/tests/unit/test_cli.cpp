#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

using namespace lplsh;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

std::vector<std::string> data_lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#') out.push_back(line);
    return out;
}

bool has_line_starting(const std::string& text, const std::string& prefix) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (line.rfind(prefix, 0) == 0) return true;
    return false;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& f) const { return (path / f).string(); }
};

const std::vector<std::string> kCheapScheme = {"--profile", "remark", "--t", "3", "--u-max", "5000",
                                               "--threshold-samples", "100000"};

std::vector<std::string> cat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

Run gen(const TempDir& dir, const std::string& name, std::size_t n = 300) {
    return run({"gen", "--n", std::to_string(n), "--d", "6", "--planted", "8", "--box", "10", "--seed", "5", "--out",
                dir / name});
}

}  // namespace

TEST_CASE("argument errors") {
    CHECK(run({}).code == 1);
    CHECK(run({"frobnicate"}).code == 1);
    CHECK(run({"--help"}).code == 0);
    CHECK(run({"build", "--help"}).code == 0);
    CHECK(run({"gen", "--out", "x.csv"}).code == 1);
    CHECK(run({"gen", "--seed", "1", "--out", "x.csv", "--n", "ten"}).code == 1);
}

TEST_CASE("gen writes a reproducible planted instance") {
    TempDir dir("lplsh_test_cli_gen");
    const Run a = gen(dir, "a.csv");
    REQUIRE(a.code == 0);
    CHECK(has_line_starting(a.out, "derived.verified_queries=8"));
    CHECK(data_lines(slurp(dir / "a.csv")).size() == 301);
    CHECK(data_lines(slurp(dir / "a.queries.csv")).size() == 9);
    CHECK(data_lines(slurp(dir / "a.truth.csv")).size() == 9);

    const std::string first = slurp(dir / "a.csv"), first_q = slurp(dir / "a.queries.csv");
    REQUIRE(gen(dir, "a.csv").code == 0);
    CHECK(slurp(dir / "a.csv") == first);
    CHECK(slurp(dir / "a.queries.csv") == first_q);

    CHECK(run({"gen", "--n", "1", "--planted", "1", "--seed", "2", "--out", dir / "one.csv"}).code == 0);
    CHECK(data_lines(slurp(dir / "one.csv")).size() == 2);

    CHECK(run({"gen", "--n", "50", "--d", "2", "--c", "50", "--box", "1", "--seed", "3", "--out", dir / "bad.csv"})
              .code == 1);
    CHECK(run({"gen", "--seed", "3", "--out", "/nonexistent/dir/x.csv"}).code == 2);
}

TEST_CASE("build echoes the derived configuration") {
    TempDir dir("lplsh_test_cli_build");
    REQUIRE(gen(dir, "d.csv").code == 0);
    const Run b = run(cat({"build", "--input", dir / "d.csv", "--out", dir / "d.idx", "--seed", "9", "--k", "2",
                           "--L", "3"},
                          kCheapScheme));
    REQUIRE(b.code == 0);
    for (const char* key : {"derived.w=", "derived.t=3", "derived.eps=", "derived.T=", "derived.U=",
                            "derived.saturated=", "derived.overridden=t", "k=2", "L=3"}) {
        CAPTURE(key);
        CHECK(has_line_starting(b.out, key));
    }
    CHECK(fs::exists(dir / "d.idx"));
    CHECK(slurp(dir / "d.idx.cfg") == b.out);

    SUBCASE("auto selection") {
        const Run a = run(cat({"build", "--input", dir / "d.csv", "--out", dir / "auto.idx", "--seed", "9",
                               "--pilot-trials", "5000"},
                              kCheapScheme));
        REQUIRE(a.code == 0);
        CHECK(has_line_starting(a.out, "derived.k="));
        CHECK(has_line_starting(a.out, "derived.L="));
        CHECK(has_line_starting(a.out, "derived.rho_hat="));
        CHECK(has_line_starting(a.out, "derived.weak_p1="));
    }
    SUBCASE("k without L") {
        CHECK(run(cat({"build", "--input", dir / "d.csv", "--out", dir / "x.idx", "--seed", "9", "--k", "2"},
                      kCheapScheme))
                  .code == 1);
    }
    SUBCASE("missing input") {
        CHECK(run(cat({"build", "--input", dir / "none.csv", "--out", dir / "x.idx", "--seed", "9"}, kCheapScheme))
                  .code == 2);
    }
}

TEST_CASE("config files feed options and the command line wins") {
    TempDir dir("lplsh_test_cli_config");
    REQUIRE(gen(dir, "d.csv").code == 0);
    spit(dir / "a.cfg", "# comment\nprofile = remark\nt = 3\nu-max=5000\nthreshold-samples=100000\nk=2\nL=2\n"
                        "derived.w=99\n");
    const std::vector<std::string> base = {"build", "--input", dir / "d.csv", "--out", dir / "d.idx", "--seed", "1",
                                           "--config", dir / "a.cfg"};
    const Run from_file = run(base);
    REQUIRE(from_file.code == 0);
    CHECK(has_line_starting(from_file.out, "derived.t=3"));
    CHECK_FALSE(has_line_starting(from_file.out, "derived.w=99"));

    const Run overridden = run(cat(base, {"--t", "4"}));
    REQUIRE(overridden.code == 0);
    CHECK(has_line_starting(overridden.out, "derived.t=4"));

    // An echoed build config can be replayed as is.
    const Run replay = run({"build", "--config", dir / "d.idx.cfg"});
    REQUIRE(replay.code == 0);
    CHECK(has_line_starting(replay.out, "derived.t=4"));

    spit(dir / "bad.cfg", "t 3\n");
    CHECK(run(cat(base, {"--config", dir / "bad.cfg"})).code == 2);
    CHECK(run(cat(base, {"--config", dir / "missing.cfg"})).code == 2);
}

TEST_CASE("query, bench and error paths") {
    TempDir dir("lplsh_test_cli_query");
    REQUIRE(gen(dir, "d.csv").code == 0);
    REQUIRE(run(cat({"build", "--input", dir / "d.csv", "--out", dir / "d.idx", "--seed", "9", "--k", "1", "--L",
                     "4"},
                    kCheapScheme))
                .code == 0);

    SUBCASE("querying the data returns the points themselves") {
        const Run q = run({"query", "--index", dir / "d.idx", "--queries", dir / "d.csv", "--out", dir / "self.csv"});
        REQUIRE(q.code == 0);
        CHECK(has_line_starting(q.out, "queries=300"));
        CHECK(has_line_starting(q.out, "answered=300"));
        const auto rows = data_lines(slurp(dir / "self.csv"));
        REQUIRE(rows.size() == 301);
        CHECK(rows[0] == "query_id,id,distance,in_contract,candidates_examined");
        for (std::size_t i = 1; i < rows.size(); ++i) {
            std::istringstream f(rows[i]);
            std::string qid, id, dist;
            std::getline(f, qid, ',');
            std::getline(f, id, ',');
            std::getline(f, dist, ',');
            CHECK(qid == id);
            CHECK(std::stod(dist) == 0.0);
        }
    }
    SUBCASE("planted queries with truth") {
        const Run q = run({"query", "--index", dir / "d.idx", "--queries", dir / "d.queries.csv", "--truth",
                           dir / "d.truth.csv", "--out", dir / "r.csv"});
        REQUIRE(q.code == 0);
        CHECK(has_line_starting(q.out, "truth_queries=8"));
        CHECK(has_line_starting(q.out, "success_rate="));
    }
    SUBCASE("empty query file") {
        spit(dir / "empty.csv", "");
        const Run q = run({"query", "--index", dir / "d.idx", "--queries", dir / "empty.csv", "--out", dir / "e.csv"});
        CHECK(q.code == 0);
        CHECK(data_lines(slurp(dir / "e.csv")) ==
              std::vector<std::string>{"query_id,id,distance,in_contract,candidates_examined"});
    }
    SUBCASE("dimension mismatch") {
        spit(dir / "wide.csv", "id,x0,x1\n1,0.5,0.5\n");
        CHECK(run({"query", "--index", dir / "d.idx", "--queries", dir / "wide.csv", "--out", dir / "w.csv"}).code ==
              1);
    }
    SUBCASE("corrupt and missing index") {
        std::string bytes = slurp(dir / "d.idx");
        bytes[bytes.size() / 2] ^= 0x01;
        spit(dir / "bad.idx", bytes);
        CHECK(run({"query", "--index", dir / "bad.idx", "--queries", dir / "d.csv", "--out", dir / "b.csv"}).code ==
              2);
        CHECK(run({"query", "--index", dir / "no.idx", "--queries", dir / "d.csv", "--out", dir / "b.csv"}).code == 2);
        CHECK(run({"query", "--index", dir / "d.idx", "--queries", dir / "no.csv", "--out", dir / "b.csv"}).code == 2);
    }
    SUBCASE("bench") {
        const Run b = run({"bench", "--index", dir / "d.idx", "--queries", dir / "d.queries.csv", "--truth",
                           dir / "d.truth.csv", "--repeats", "2", "--out", dir / "bench.csv"});
        REQUIRE(b.code == 0);
        CHECK(has_line_starting(b.out, "queries=8"));
        CHECK(has_line_starting(b.out, "speedup="));
        CHECK(data_lines(slurp(dir / "bench.csv")).size() == 2);
        CHECK(run({"bench", "--index", dir / "d.idx", "--queries", dir / "d.csv", "--repeats", "0"}).code == 1);
    }
}

TEST_CASE("rho writes one row per c and reruns identically") {
    TempDir dir("lplsh_test_cli_rho");
    const std::vector<std::string> args = cat({"rho", "--c-list", "2,3", "--d", "6", "--trials", "2000", "--seed", "4"},
                                              kCheapScheme);
    const Run a = run(cat(args, {"--out", dir / "a.csv"}));
    REQUIRE(a.code == 0);
    REQUIRE(run(cat(args, {"--out", dir / "b.csv"})).code == 0);
    const std::string text = slurp(dir / "a.csv");
    CHECK(text == slurp(dir / "b.csv"));
    const auto rows = data_lines(text);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] ==
          "c,p,profile,w,t,eps,U,saturated,p1_hat,p1_lo,p1_hi,p2_hat,p2_lo,p2_hi,rho_hat,inv_c,inv_cp,"
          "lncsq_over_cp,fallback_rate");

    const Run to_stdout = run(args);
    REQUIRE(to_stdout.code == 0);
    CHECK(to_stdout.out == text);

    CHECK(run(cat({"rho", "--c-list", "2,x", "--seed", "1"}, kCheapScheme)).code == 1);
    CHECK(run(cat({"rho", "--c-list", "0.5", "--seed", "1"}, kCheapScheme)).code == 1);
}

TEST_CASE("verify") {
    TempDir dir("lplsh_test_cli_verify");
    const Run v = run({"verify", "--suite", "disjointness", "--out", dir / "rep.txt"});
    CHECK(v.code == 0);
    CHECK(has_line_starting(v.out, "suite=disjointness status=PASS"));
    CHECK(has_line_starting(v.out, "verify PASS: 1/1 suites passed"));
    CHECK(has_line_starting(slurp(dir / "rep.txt"), "suite=disjointness status=PASS"));
    CHECK(run({"verify", "--suite", "nonsense"}).code == 1);
    CHECK(run({"verify", "--level", "medium"}).code == 1);
}
