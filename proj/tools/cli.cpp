#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "lplsh/ann_index.hpp"
#include "lplsh/collision_lab.hpp"
#include "lplsh/planted.hpp"
#include "lplsh/verify.hpp"

namespace lplsh {

namespace {

constexpr std::uint64_t kDefaultVerifySeed = 20240601;

/// Ordered key=value pairs: the effective config echoed to stdout and embedded in outputs.
class Record {
public:
    template <typename T>
    void add(const std::string& key, const T& value) {
        entries_.emplace_back(key, fmt::format("{}", value));
    }
    template <typename T>
    void add(const std::string& key, const std::optional<T>& value) {
        if (value) add(key, *value);
    }
    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
    std::vector<std::string> lines() const {
        std::vector<std::string> out;
        for (const auto& [k, v] : entries_) out.push_back(k + "=" + v);
        return out;
    }
    void print(std::ostream& out) const {
        for (const auto& line : lines()) out << line << '\n';
    }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Flat "key = value" lines become "--key value" tokens. Keys under "derived." are
// echoed values computed by the tool, so a saved .cfg can be fed straight back.
std::vector<std::string> config_tokens(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config file: " + path);
    }
    std::vector<std::string> tokens;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw IoError(fmt::format("{}:{}: expected key=value", path, line_no));
        }
        const std::string k = trim(line.substr(0, eq));
        const std::string v = trim(line.substr(eq + 1));
        if (k.empty()) {
            throw IoError(fmt::format("{}:{}: empty key", path, line_no));
        }
        if (k.rfind("derived.", 0) == 0 || k == "version" || k == "command") continue;
        tokens.push_back("--" + k);
        tokens.push_back(v);
    }
    return tokens;
}

// Config values go right after the subcommand name, ahead of the explicit flags;
// with take-last semantics the command line then wins.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::vector<std::string> rest;
    std::vector<std::string> from_file;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw ContractError("--config needs a file argument");
            const auto t = config_tokens(args[++i]);
            from_file.insert(from_file.end(), t.begin(), t.end());
        } else if (args[i].rfind("--config=", 0) == 0) {
            const auto t = config_tokens(args[i].substr(9));
            from_file.insert(from_file.end(), t.begin(), t.end());
        } else {
            rest.push_back(args[i]);
        }
    }
    if (from_file.empty() || rest.empty()) return rest;
    std::vector<std::string> out{rest[0]};
    out.insert(out.end(), from_file.begin(), from_file.end());
    out.insert(out.end(), rest.begin() + 1, rest.end());
    return out;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::logic_error&) {
            throw ContractError("not a number in list: " + item);
        }
    }
    return out;
}

std::string sibling(const std::string& path, const std::string& suffix) {
    const std::filesystem::path p(path);
    return (p.parent_path() / (p.stem().string() + suffix)).string();
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    for (const auto& l : lines) out << l << '\n';
    if (!out) {
        throw IoError("failed writing " + path);
    }
}

/// Comment lines for CSV outputs: tool version, command, then the config.
std::vector<std::string> with_header(const std::string& command, const Record& rec) {
    std::vector<std::string> out{fmt::format("lplsh {} {}", kVersion, command)};
    const auto body = rec.lines();
    out.insert(out.end(), body.begin(), body.end());
    return out;
}

/// The same as a loadable config file.
std::vector<std::string> cfg_lines(const std::string& command, const Record& rec) {
    auto out = with_header(command, rec);
    out[0] = "# " + out[0];
    return out;
}

struct SchemeArgs {
    double p = 1.5;
    double c = 2.0;
    double r = 1.0;
    std::string profile = "main";
    Knobs knobs;
    std::optional<double> w;
    std::optional<int> t;
    std::optional<double> eps;
    std::optional<double> delta_fail;
    std::optional<std::uint64_t> U;
    std::optional<double> T;
    std::optional<double> delta;
    std::optional<std::uint64_t> u_max;
    std::size_t threshold_samples = kDefaultThresholdSamples;

    void attach(CLI::App* app, bool with_c = true, bool with_r = true) {
        app->add_option("--p", p, "l_p exponent in (1, 2]")->capture_default_str();
        if (with_c) app->add_option("--c", c, "approximation factor c > 1")->capture_default_str();
        if (with_r) app->add_option("--r", r, "near radius")->capture_default_str();
        app->add_option("--profile", profile, "main or remark")->capture_default_str();
        app->add_option("--kappa-w", knobs.kappa_w)->capture_default_str();
        app->add_option("--kappa-t", knobs.kappa_t)->capture_default_str();
        app->add_option("--kappa-eps", knobs.kappa_eps)->capture_default_str();
        app->add_option("--w", w, "override the ball radius");
        app->add_option("--t", t, "override the projected dimension");
        app->add_option("--eps", eps, "override epsilon");
        app->add_option("--delta-fail", delta_fail, "override the covering failure probability");
        app->add_option("--U", U, "override the number of shifted lattices");
        app->add_option("--T", T, "override the projection threshold");
        app->add_option("--delta", delta, "override the lattice spacing factor");
        app->add_option("--u-max", u_max, "cap on the number of shifted lattices");
        app->add_option("--threshold-samples", threshold_samples, "Monte Carlo samples for T")
            ->capture_default_str();
    }

    Overrides overrides() const {
        Overrides o;
        o.w = w;
        o.t = t;
        o.epsilon = eps;
        o.delta_fail = delta_fail;
        o.U = U;
        o.T = T;
        o.delta = delta;
        o.u_max = u_max;
        return o;
    }

    void record(Record& rec, bool with_c = true, bool with_r = true) const {
        rec.add("p", p);
        if (with_c) rec.add("c", c);
        if (with_r) rec.add("r", r);
        rec.add("profile", profile);
        rec.add("kappa-w", knobs.kappa_w);
        rec.add("kappa-t", knobs.kappa_t);
        rec.add("kappa-eps", knobs.kappa_eps);
        rec.add("w", w);
        rec.add("t", t);
        rec.add("eps", eps);
        rec.add("delta-fail", delta_fail);
        rec.add("U", U);
        rec.add("T", T);
        rec.add("delta", delta);
        rec.add("u-max", u_max);
        rec.add("threshold-samples", threshold_samples);
    }
};

void record_scheme(Record& rec, const SchemeParams& s) {
    rec.add("derived.profile", to_string(s.profile));
    rec.add("derived.w", s.w);
    rec.add("derived.t", s.t);
    rec.add("derived.eps", s.epsilon);
    rec.add("derived.delta_fail", s.delta_fail);
    rec.add("derived.T", s.T);
    rec.add("derived.U", s.lattice.U);
    rec.add("derived.u_max", s.lattice.u_max);
    rec.add("derived.saturated", s.lattice.saturated ? 1 : 0);
    rec.add("derived.lattice_delta", s.lattice.delta);
    rec.add("derived.threshold_seed", s.threshold_seed);
    std::string over;
    for (const auto& o : s.overridden) over += (over.empty() ? "" : ",") + o;
    rec.add("derived.overridden", over.empty() ? "none" : over);
}

struct GenArgs {
    PlantedConfig cfg;
    std::string out, queries, truth;
};

int cmd_gen(GenArgs& a, std::ostream& out) {
    if (a.queries.empty()) a.queries = sibling(a.out, ".queries.csv");
    if (a.truth.empty()) a.truth = sibling(a.out, ".truth.csv");
    const PlantedInstance inst = generate_planted(a.cfg);

    // Oracle pass: the planted point must be the only point within c r of its query.
    const LpSpace space(a.cfg.p, a.cfg.d);
    const double far = a.cfg.c * a.cfg.r;
    for (std::size_t j = 0; j < inst.queries.size(); ++j) {
        std::size_t within = 0;
        for (std::size_t i = 0; i < inst.data.size(); ++i) {
            within += lp_distance(inst.data.row(i), inst.queries.row(j), space) < far;
        }
        require(within == 1, fmt::format("gen: query {} has {} points within c r", j, within));
    }

    Record rec;
    rec.add("n", a.cfg.n);
    rec.add("d", a.cfg.d);
    rec.add("p", a.cfg.p);
    rec.add("r", a.cfg.r);
    rec.add("c", a.cfg.c);
    rec.add("planted", a.cfg.planted_count);
    rec.add("box", a.cfg.box);
    rec.add("seed", a.cfg.seed);
    rec.add("out", a.out);
    rec.add("queries", a.queries);
    rec.add("truth", a.truth);
    const auto header = with_header("gen", rec);
    write_dataset(inst.data, a.out, header);
    write_dataset(inst.queries, a.queries, header);
    write_truth(inst.truth, a.truth, header);
    if (a.out.ends_with(".fvecs")) write_lines(a.out + ".cfg", cfg_lines("gen", rec));
    for (const auto& l : cfg_lines("gen", rec)) out << l << '\n';
    out << fmt::format("derived.verified_queries={}\n", inst.queries.size());
    return kExitOk;
}

struct BuildArgs {
    SchemeArgs scheme;
    std::string input, out;
    std::optional<std::size_t> k, L;
    std::optional<std::size_t> max_candidates;
    double safety = 1.0;
    std::size_t pilot_trials = 20'000;
    std::size_t cost_samples = 1000;
    std::uint64_t seed = 0;
};

int cmd_build(BuildArgs& a, std::ostream& out) {
    require(a.k.has_value() == a.L.has_value(), "build: give both --k and --L, or neither for auto selection");
    const Dataset data = read_dataset(a.input);
    require(!data.empty(), "build: input dataset is empty");

    const std::string cache_path = a.out + ".tcache";
    ThresholdCache cache = std::filesystem::exists(cache_path) ? ThresholdCache::load(cache_path) : ThresholdCache();
    DeriveOptions opts;
    opts.threshold_samples = a.scheme.threshold_samples;
    opts.cache = &cache;
    const SchemeParams scheme = derive_params(a.scheme.c, a.scheme.p, profile_from_string(a.scheme.profile),
                                              a.scheme.knobs, a.scheme.overrides(), opts, a.scheme.r);

    Record rec;
    rec.add("input", a.input);
    rec.add("out", a.out);
    a.scheme.record(rec);
    rec.add("seed", a.seed);
    rec.add("safety", a.safety);
    rec.add("pilot-trials", a.pilot_trials);
    rec.add("cost-samples", a.cost_samples);
    rec.add("max-candidates", a.max_candidates);
    record_scheme(rec, scheme);

    IndexParams ip;
    ip.seed = derive_seed(a.seed, 3);
    ip.max_candidates = a.max_candidates;
    if (a.k) {
        ip.k = *a.k;
        ip.L = *a.L;
        rec.add("k", ip.k);
        rec.add("L", ip.L);
    } else {
        const CollisionEstimate p1 = estimate_collision(scheme, data.dim(), 1.0, a.pilot_trials, derive_seed(a.seed, 1));
        const CollisionEstimate p2 =
            estimate_collision(scheme, data.dim(), scheme.c, a.pilot_trials, derive_seed(a.seed, 2));
        const AmplificationChoice kl = choose_k_l(data.size(), p1.p_hat, p2.p_hat, a.safety);
        ip.k = kl.k;
        ip.L = kl.L;
        rec.add("derived.p1_hat", p1.p_hat);
        rec.add("derived.p2_hat", p2.p_hat);
        rec.add("derived.rho_hat", kl.rho_hat);
        rec.add("derived.weak_p1", kl.weak_p1 ? 1 : 0);
        rec.add("derived.k", ip.k);
        rec.add("derived.L", ip.L);
    }

    const LshIndex index = LshIndex::build(data, scheme, ip);
    save_index(index, a.out);
    cache.save(cache_path);

    const CostReport cost = evaluation_cost(scheme, data.dim(), a.cost_samples, derive_seed(a.seed, 4));
    const double entries = static_cast<double>(data.size() * ip.L);
    rec.add("derived.n", data.size());
    rec.add("derived.d", data.dim());
    rec.add("derived.index_seed", ip.seed);
    rec.add("derived.cost_projection_flops", cost.projection_flops);
    rec.add("derived.cost_lattice_probes_worst", cost.lattice_probes);
    rec.add("derived.cost_mean_probes", cost.measured_mean_probes);
    rec.add("derived.cost_fallback_rate", cost.measured_fallback_rate);
    rec.add("derived.fallback_rate", static_cast<double>(index.stats().fallback_entries) / entries);
    rec.add("derived.fingerprint_collisions", index.stats().fingerprint_collisions);
    rec.add("derived.storage_entries", index.storage_entries());
    const auto lines = cfg_lines("build", rec);
    write_lines(a.out + ".cfg", lines);
    for (const auto& l : lines) out << l << '\n';
    return kExitOk;
}

std::map<std::uint64_t, std::uint64_t> truth_map(const std::string& path) {
    std::map<std::uint64_t, std::uint64_t> m;
    for (const auto& t : read_truth(path)) m[t.query_id] = t.planted_id;
    return m;
}

void check_query_dim(const Dataset& queries, const LshIndex& index) {
    if (!queries.empty() && queries.dim() != index.dim()) {
        throw ContractError(fmt::format("dimension mismatch: index has d = {}, queries have d = {}", index.dim(),
                                        queries.dim()));
    }
}

struct QueryArgs {
    std::string index, queries, out, truth;
};

int cmd_query(const QueryArgs& a, std::ostream& out) {
    const LshIndex index = load_index(a.index);
    const Dataset queries = read_dataset(a.queries);
    check_query_dim(queries, index);
    const auto truth = a.truth.empty() ? std::map<std::uint64_t, std::uint64_t>() : truth_map(a.truth);

    Record rec;
    rec.add("index", a.index);
    rec.add("queries", a.queries);
    rec.add("truth", a.truth.empty() ? "none" : a.truth);
    rec.add("out", a.out);

    std::ofstream csv(a.out, std::ios::binary | std::ios::trunc);
    if (!csv) {
        throw IoError("cannot write results file: " + a.out);
    }
    for (const auto& l : with_header("query", rec)) csv << "# " << l << '\n';
    csv << "query_id,id,distance,in_contract,candidates_examined\n";
    std::size_t answered = 0, in_contract = 0, truth_hits = 0, truth_success = 0, planted = 0;
    for (std::size_t j = 0; j < queries.size(); ++j) {
        const QueryResult r = index.query(queries.row(j));
        const std::uint64_t qid = queries.id(j);
        if (r.answer) {
            ++answered;
            csv << fmt::format("{},{},{},{},{}\n", qid, r.answer->id, r.answer->distance, r.in_contract ? 1 : 0,
                               r.candidates_examined);
        } else {
            csv << fmt::format("{},,,0,{}\n", qid, r.candidates_examined);
        }
        in_contract += r.in_contract;
        if (const auto it = truth.find(qid); it != truth.end()) {
            ++truth_hits;
            truth_success += r.in_contract;
            planted += r.answer && r.answer->id == it->second;
        }
    }
    if (!csv) {
        throw IoError("failed writing results file: " + a.out);
    }
    out << fmt::format("queries={}\nanswered={}\nin_contract={}\n", queries.size(), answered, in_contract);
    if (!truth.empty()) {
        const double denom = static_cast<double>(std::max<std::size_t>(truth_hits, 1));
        out << fmt::format("truth_queries={}\nsuccess_rate={}\nplanted_returned={}\n", truth_hits,
                           static_cast<double>(truth_success) / denom, static_cast<double>(planted) / denom);
    }
    return kExitOk;
}

struct BenchArgs {
    std::string index, queries, out, truth;
    std::size_t repeats = 1;
};

double percentile(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t i = std::min(v.size() - 1, static_cast<std::size_t>(q * static_cast<double>(v.size())));
    return v[i];
}

int cmd_bench(const BenchArgs& a, std::ostream& out) {
    require(a.repeats >= 1, "bench: repeats must be >= 1");
    const LshIndex index = load_index(a.index);
    const Dataset queries = read_dataset(a.queries);
    check_query_dim(queries, index);
    const auto truth = a.truth.empty() ? std::map<std::uint64_t, std::uint64_t>() : truth_map(a.truth);
    const LpSpace space(index.scheme().p, index.dim());
    using clock = std::chrono::steady_clock;

    std::vector<double> lsh_us, scan_us;
    std::size_t candidates = 0, in_contract = 0, exact = 0, truth_success = 0, truth_hits = 0;
    double ratio_sum = 0.0;
    std::size_t ratio_count = 0;
    for (std::size_t j = 0; j < queries.size(); ++j) {
        const auto q = queries.row(j);
        QueryResult r;
        for (std::size_t rep = 0; rep < a.repeats; ++rep) {
            const auto t0 = clock::now();
            r = index.query(q);
            lsh_us.push_back(std::chrono::duration<double, std::micro>(clock::now() - t0).count());
        }
        const auto t1 = clock::now();
        const Neighbor nn = linear_scan_nn(index.points(), q, space);
        scan_us.push_back(std::chrono::duration<double, std::micro>(clock::now() - t1).count());

        candidates += r.candidates_examined;
        in_contract += r.in_contract;
        if (r.answer) {
            exact += r.answer->id == nn.id;
            if (nn.distance > 0.0) {
                ratio_sum += r.answer->distance / nn.distance;
                ++ratio_count;
            }
        }
        if (const auto it = truth.find(queries.id(j)); it != truth.end()) {
            ++truth_hits;
            truth_success += r.in_contract;
        }
    }
    const double nq = static_cast<double>(std::max<std::size_t>(queries.size(), 1));
    const double mean_lsh = lsh_us.empty() ? 0.0 : std::accumulate(lsh_us.begin(), lsh_us.end(), 0.0) / lsh_us.size();
    const double mean_scan =
        scan_us.empty() ? 0.0 : std::accumulate(scan_us.begin(), scan_us.end(), 0.0) / scan_us.size();

    Record stats;
    stats.add("queries", queries.size());
    stats.add("repeats", a.repeats);
    stats.add("mean_query_us", mean_lsh);
    stats.add("p50_query_us", percentile(lsh_us, 0.5));
    stats.add("p99_query_us", percentile(lsh_us, 0.99));
    stats.add("mean_linear_scan_us", mean_scan);
    stats.add("speedup", mean_lsh > 0.0 ? mean_scan / mean_lsh : 0.0);
    stats.add("mean_candidates", static_cast<double>(candidates) / nq);
    stats.add("in_contract_rate", static_cast<double>(in_contract) / nq);
    stats.add("exact_nn_rate", static_cast<double>(exact) / nq);
    stats.add("mean_distance_ratio", ratio_count ? ratio_sum / static_cast<double>(ratio_count) : 0.0);
    stats.add("truth_success_rate",
              truth_hits ? static_cast<double>(truth_success) / static_cast<double>(truth_hits) : 0.0);

    Record rec;
    rec.add("index", a.index);
    rec.add("queries", a.queries);
    rec.add("truth", a.truth.empty() ? "none" : a.truth);
    rec.add("repeats", a.repeats);
    if (!a.out.empty()) {
        std::ofstream csv(a.out, std::ios::binary | std::ios::trunc);
        if (!csv) {
            throw IoError("cannot write bench file: " + a.out);
        }
        for (const auto& l : with_header("bench", rec)) csv << "# " << l << '\n';
        std::string head, row;
        for (const auto& [k, v] : stats.entries()) {
            head += (head.empty() ? "" : ",") + k;
            row += (row.empty() ? "" : ",") + v;
        }
        csv << head << '\n' << row << '\n';
        if (!csv) {
            throw IoError("failed writing bench file: " + a.out);
        }
    }
    stats.print(out);
    return kExitOk;
}

struct RhoArgs {
    SchemeArgs scheme;
    std::string c_list = "2,5";
    std::size_t d = 16;
    std::size_t trials = 10'000;
    std::size_t geometric_pairs = 0;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_rho(RhoArgs& a, std::ostream& out) {
    SweepConfig cfg;
    cfg.p = a.scheme.p;
    cfg.c_list = parse_list(a.c_list);
    cfg.d = a.d;
    cfg.profile = profile_from_string(a.scheme.profile);
    cfg.knobs = a.scheme.knobs;
    cfg.overrides = a.scheme.overrides();
    cfg.derive.threshold_samples = a.scheme.threshold_samples;
    cfg.rho.trials = a.trials;
    cfg.rho.geometric_pairs = a.geometric_pairs;
    cfg.seed = a.seed;
    const auto reports = rho_sweep(cfg);

    Record rec;
    rec.add("command", "rho");
    a.scheme.record(rec, false, false);
    rec.add("c-list", a.c_list);
    rec.add("d", a.d);
    rec.add("trials", a.trials);
    rec.add("geometric-pairs", a.geometric_pairs);
    rec.add("seed", a.seed);
    if (a.out.empty()) {
        write_rho_csv(out, reports, rec.entries());
        return kExitOk;
    }
    std::ofstream csv(a.out, std::ios::binary | std::ios::trunc);
    if (!csv) {
        throw IoError("cannot write rho file: " + a.out);
    }
    write_rho_csv(csv, reports, rec.entries());
    if (!csv) {
        throw IoError("failed writing rho file: " + a.out);
    }
    for (const auto& r : reports) {
        out << fmt::format("c={} p1={} p2={} rho={} [{}, {}]{}\n", r.c, r.p1.p_hat, r.p2.p_hat, r.rho_hat, r.rho_ci.lo,
                           r.rho_ci.hi, r.upper_bounded_only ? " upper-bound-only" : "");
    }
    return kExitOk;
}

struct VerifyArgs {
    std::string level = "quick";
    std::uint64_t seed = kDefaultVerifySeed;
    std::vector<std::string> suites;
    std::string out;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
    VerifyOptions opts;
    opts.level = verify_level_from_string(a.level);
    opts.seed = a.seed;
    out << fmt::format("# lplsh {} verify\n# level={}\n# seed={}\n", kVersion, a.level, a.seed);
    const auto results = run_verify(opts, a.suites, &out);
    const bool ok = std::all_of(results.begin(), results.end(), [](const SuiteResult& r) { return r.passed; });
    if (!a.out.empty()) {
        std::ofstream rep(a.out, std::ios::binary | std::ios::trunc);
        if (!rep) {
            throw IoError("cannot write verify report: " + a.out);
        }
        rep << fmt::format("# lplsh {} verify\n# level={}\n# seed={}\n", kVersion, a.level, a.seed);
        for (const auto& r : results) write_suite_result(rep, r);
    }
    out << fmt::format("verify {}: {}/{} suites passed\n", ok ? "PASS" : "FAIL",
                       std::count_if(results.begin(), results.end(), [](const SuiteResult& r) { return r.passed; }),
                       results.size());
    return ok ? kExitOk : kExitContract;
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"l_p ball-lattice LSH: datasets, indices, collision statistics and self-checks", "lplsh"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    GenArgs gen;
    auto* g = app.add_subcommand("gen", "generate a planted dataset, its queries and ground truth");
    g->add_option("--n", gen.cfg.n, "number of data points")->capture_default_str();
    g->add_option("--d", gen.cfg.d, "dimension")->capture_default_str();
    g->add_option("--p", gen.cfg.p)->capture_default_str();
    g->add_option("--r", gen.cfg.r, "planted distance")->capture_default_str();
    g->add_option("--c", gen.cfg.c, "background points stay beyond c r of every query")->capture_default_str();
    g->add_option("--planted", gen.cfg.planted_count, "number of queries")->capture_default_str();
    g->add_option("--box", gen.cfg.box, "points are drawn from [-box, box]^d")->capture_default_str();
    g->add_option("--seed", gen.cfg.seed)->required();
    g->add_option("--out", gen.out, "dataset path (.csv or .fvecs)")->required();
    g->add_option("--queries", gen.queries, "query path (default <out>.queries.csv)");
    g->add_option("--truth", gen.truth, "ground truth path (default <out>.truth.csv)");

    BuildArgs build;
    auto* b = app.add_subcommand("build", "derive parameters, build an index and save it");
    b->add_option("--input", build.input, "dataset (.csv or .fvecs)")->required();
    b->add_option("--out", build.out, "index path")->required();
    build.scheme.attach(b);
    b->add_option("--k", build.k, "hashes per table (auto with --L omitted)");
    b->add_option("--L", build.L, "number of tables");
    b->add_option("--safety", build.safety, "L multiplier for auto selection")->capture_default_str();
    b->add_option("--pilot-trials", build.pilot_trials, "collision trials for auto selection")
        ->capture_default_str();
    b->add_option("--max-candidates", build.max_candidates, "distinct candidates per query (default 3L)");
    b->add_option("--cost-samples", build.cost_samples, "points for the measured probe cost")
        ->capture_default_str();
    b->add_option("--seed", build.seed)->required();

    QueryArgs query;
    auto* q = app.add_subcommand("query", "answer queries from a saved index");
    q->add_option("--index", query.index)->required();
    q->add_option("--queries", query.queries)->required();
    q->add_option("--out", query.out, "results CSV")->required();
    q->add_option("--truth", query.truth, "ground truth for the success rate");

    BenchArgs bench;
    auto* be = app.add_subcommand("bench", "time queries against a linear scan");
    be->add_option("--index", bench.index)->required();
    be->add_option("--queries", bench.queries)->required();
    be->add_option("--truth", bench.truth);
    be->add_option("--repeats", bench.repeats)->capture_default_str();
    be->add_option("--out", bench.out, "summary CSV");

    RhoArgs rho;
    auto* r = app.add_subcommand("rho", "estimate p1, p2 and rho over a list of c");
    rho.scheme.attach(r, false, false);
    r->add_option("--c-list", rho.c_list, "comma-separated approximation factors")->capture_default_str();
    r->add_option("--d", rho.d, "ambient dimension of the test pairs")->capture_default_str();
    r->add_option("--trials", rho.trials)->capture_default_str();
    r->add_option("--geometric-pairs", rho.geometric_pairs)->capture_default_str();
    r->add_option("--seed", rho.seed)->required();
    r->add_option("--out", rho.out, "CSV path (stdout when omitted)");

    VerifyArgs verify;
    auto* v = app.add_subcommand("verify", "run the property suites");
    v->add_option("--level", verify.level, "quick or full")->capture_default_str();
    v->add_option("--seed", verify.seed)->capture_default_str();
    v->add_option("--suite", verify.suites, "run only these suites")->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    v->add_option("--out", verify.out, "report path");

    try {
        std::vector<std::string> args = expand_config(raw_args);
        std::reverse(args.begin(), args.end());
        try {
            app.parse(args);
        } catch (const CLI::ParseError& e) {
            const int code = app.exit(e, out, err);
            return code == 0 ? kExitOk : kExitContract;
        }
        if (g->parsed()) return cmd_gen(gen, out);
        if (b->parsed()) return cmd_build(build, out);
        if (q->parsed()) return cmd_query(query, out);
        if (be->parsed()) return cmd_bench(bench, out);
        if (r->parsed()) return cmd_rho(rho, out);
        if (v->parsed()) return cmd_verify(verify, out);
        return kExitContract;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const ContractError& e) {
        err << "error: " << e.what() << '\n';
        return kExitContract;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitContract;
    }
}

}  // namespace lplsh
