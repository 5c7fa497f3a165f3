#include "lplsh/planted.hpp"

#include <fstream>

#include <fmt/format.h>

#include "lplsh/lp_geometry.hpp"

namespace lplsh {

namespace {

void fill_box(Vector& v, double box, Rng& rng) {
    for (auto& x : v) x = box * (2.0 * uniform01(rng) - 1.0);
}

}  // namespace

PlantedInstance generate_planted(const PlantedConfig& cfg) {
    require(cfg.n >= 1 && cfg.d >= 1, "generate_planted: need n >= 1 and d >= 1");
    require(cfg.planted_count <= cfg.n, "generate_planted: planted_count exceeds n");
    require(cfg.r > 0.0 && cfg.c > 1.0 && cfg.box > 0.0, "generate_planted: need r > 0, c > 1, box > 0");
    const LpSpace space(cfg.p, cfg.d);
    const double far = cfg.c * cfg.r;
    Rng rng(cfg.seed);

    PlantedInstance inst;
    inst.data = Dataset(cfg.d);
    inst.queries = Dataset(cfg.d);
    inst.data.reserve(cfg.n);
    std::vector<Vector> planted;
    Vector q(cfg.d);
    for (std::size_t j = 0; j < cfg.planted_count; ++j) {
        bool placed = false;
        for (std::size_t attempt = 0; attempt < cfg.max_attempts && !placed; ++attempt) {
            fill_box(q, cfg.box, rng);
            const Vector dir = random_lp_direction(space, rng);
            Vector x = q;
            for (std::size_t i = 0; i < cfg.d; ++i) x[i] += cfg.r * dir[i];
            placed = true;
            for (std::size_t k = 0; k < j && placed; ++k) {
                placed = lp_distance(x, inst.queries.row(k), space) >= far &&
                         lp_distance(planted[k], q, space) >= far;
            }
            if (placed) {
                inst.queries.add(j, q);
                inst.truth.push_back({j, j, lp_distance(x, q, space)});
                planted.push_back(std::move(x));
            }
        }
        if (!placed) {
            throw ContractError(fmt::format(
                "generate_planted: infeasible geometry: cannot separate {} queries by c*r = {} inside box {}",
                cfg.planted_count, far, cfg.box));
        }
    }
    for (std::size_t j = 0; j < planted.size(); ++j) {
        inst.data.add(j, planted[j]);
    }

    Vector x(cfg.d);
    for (std::size_t id = cfg.planted_count; id < cfg.n; ++id) {
        bool accepted = false;
        for (std::size_t attempt = 0; attempt < cfg.max_attempts && !accepted; ++attempt) {
            fill_box(x, cfg.box, rng);
            accepted = true;
            for (std::size_t k = 0; k < inst.queries.size() && accepted; ++k) {
                accepted = lp_distance(x, inst.queries.row(k), space) >= far;
            }
        }
        if (!accepted) {
            throw ContractError(fmt::format(
                "generate_planted: infeasible geometry: background points keep landing within c*r = {} of a query",
                far));
        }
        inst.data.add(id, x);
    }
    return inst;
}

void write_truth(const std::vector<PlantedTruth>& truth, const std::string& path,
                 const std::vector<std::string>& comments) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write truth file: " + path);
    }
    for (const auto& c : comments) out << "# " << c << '\n';
    out << "query_id,planted_id,distance\n";
    for (const auto& t : truth) {
        out << fmt::format("{},{},{}\n", t.query_id, t.planted_id, t.distance);
    }
    if (!out) {
        throw IoError("failed writing truth file: " + path);
    }
}

std::vector<PlantedTruth> read_truth(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open truth file: " + path);
    }
    std::string line;
    std::vector<PlantedTruth> out;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (header) {
            header = false;
            if (line.rfind("query_id", 0) == 0) continue;
        }
        PlantedTruth t;
        unsigned long long q = 0, pid = 0;
        if (std::sscanf(line.c_str(), "%llu,%llu,%lf", &q, &pid, &t.distance) != 3) {
            throw IoError("truth file: malformed line: " + line);
        }
        t.query_id = q;
        t.planted_id = pid;
        out.push_back(t);
    }
    return out;
}

}  // namespace lplsh
