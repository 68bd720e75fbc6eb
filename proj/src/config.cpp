#include "denjoy/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <random>
#include <sstream>

#include "denjoy/denjoy_builder.hpp"
#include "denjoy/distortion_lab.hpp"
#include "denjoy/dynamics_metrics.hpp"
#include "denjoy/path_engine.hpp"
#include "denjoy/report.hpp"

namespace denjoy {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_real(const std::string& text, int line, const std::string& key) {
    const char* c = text.c_str();
    char* end = nullptr;
    double v = std::strtod(c, &end);
    if (end == c || *end != '\0' || !std::isfinite(v))
        throw ParseError(line, key + ": malformed number '" + text + "'");
    return v;
}

long parse_integer(const std::string& text, int line, const std::string& key) {
    const char* c = text.c_str();
    char* end = nullptr;
    long v = std::strtol(c, &end, 10);
    if (end == c || *end != '\0')
        throw ParseError(line, key + ": malformed integer '" + text + "'");
    return v;
}

std::vector<double> parse_list(const std::string& text, int line, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_real(trim(item), line, key));
    if (out.empty()) throw ParseError(line, key + ": empty list");
    return out;
}

const char* const kCommands[] = {"construct", "verify", "path-search",
                                 "distortion", "rotnum", "report"};

}  // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::map<std::string, int> seen;  // key -> line
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        if (auto hash = s.find('#'); hash != std::string::npos) s.erase(hash);
        s = trim(s);
        if (s.empty()) continue;
        if (s.front() == '[' && s.back() == ']') continue;
        std::size_t eq = s.find('=');
        if (eq == std::string::npos) throw ParseError(line, "expected key = value");
        std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        if (key.empty()) throw ParseError(line, "missing key");
        if (value.empty()) throw ParseError(line, key + ": missing value");
        if (!seen.emplace(key, line).second)
            throw ParseError(line, "duplicate key '" + key + "'");

        if (key == "command") {
            if (std::find(std::begin(kCommands), std::end(kCommands), value) == std::end(kCommands))
                throw ParseError(line, "command: unknown command '" + value + "'");
            cfg.command = value;
        } else if (key == "d") {
            long v = parse_integer(value, line, key);
            if (v < 1 || v > 16) throw ParseError(line, "d: must be between 1 and 16");
            cfg.d = static_cast<int>(v);
        } else if (key == "taus") {
            cfg.taus = parse_list(value, line, key);
        } else if (key == "rhos") {
            cfg.rhos = parse_list(value, line, key);
        } else if (key == "base_point") {
            cfg.base_point = parse_real(value, line, key);
            if (!(cfg.base_point >= 0.0 && cfg.base_point < 1.0))
                throw ParseError(line, "base_point: must lie in [0,1)");
        } else if (key == "window") {
            long v = parse_integer(value, line, key);
            if (v < 1) throw ParseError(line, "window: must be >= 1");
            cfg.window = static_cast<int>(v);
        } else if (key == "M0") {
            long v = parse_integer(value, line, key);
            if (v < 1) throw ParseError(line, "M0: must be >= 1");
            cfg.M0 = static_cast<int>(v);
        } else if (key == "A_base") {
            cfg.A_base = parse_real(value, line, key);
            if (!(cfg.A_base >= 1.0)) throw ParseError(line, "A_base: must be >= 1");
        } else if (key == "growth_base") {
            cfg.growth_base = parse_real(value, line, key);
            if (!(cfg.growth_base > 1.0)) throw ParseError(line, "growth_base: must exceed 1");
        } else if (key == "out") {
            cfg.out_dir = value;
        } else if (key == "seed") {
            cfg.seed = parse_integer(value, line, key);
        } else {
            throw ParseError(line, "unknown key '" + key + "'");
        }
    }

    auto check_list = [&](const char* key, const std::vector<double>& list) {
        if (list.empty()) return;
        int at = seen.at(key);
        if (cfg.d == 0) throw ParseError(at, std::string(key) + ": d must be set first");
        if (static_cast<int>(list.size()) != cfg.d)
            throw ParseError(at, std::string(key) + ": expected " + std::to_string(cfg.d) +
                                     " entries, got " + std::to_string(list.size()));
        for (double v : list)
            if (!(v > 0.0 && v < 1.0))
                throw ParseError(at, std::string(key) + ": entries must lie in (0,1)");
    };
    check_list("taus", cfg.taus);
    check_list("rhos", cfg.rhos);
    return cfg;
}

namespace {

namespace fs = std::filesystem;

struct Row {
    std::string quantity;
    double value = 0.0;
    double error_budget = 0.0;
    bool has_budget = false;
};

std::string rows_to_csv(const std::vector<Row>& rows, bool with_budget) {
    std::ostringstream out;
    out << (with_budget ? "quantity,value,error_budget\n" : "quantity,value\n");
    for (const Row& r : rows) {
        out << r.quantity << "," << fmt_real(r.value);
        if (with_budget) out << "," << fmt_real(r.error_budget);
        out << "\n";
    }
    return out.str();
}

fs::path out_file(const RunConfig& cfg, const char* name) {
    fs::path dir(cfg.out_dir);
    if (!dir.empty()) fs::create_directories(dir);
    return dir / name;
}

HolderParams params_from(const RunConfig& cfg) {
    if (cfg.taus.empty()) throw std::invalid_argument("config: taus is required");
    return HolderParams(cfg.taus);
}

DenjoySystem system_from(const RunConfig& cfg) {
    if (cfg.rhos.empty()) throw std::invalid_argument("config: rhos is required");
    return DenjoySystem(params_from(cfg), cfg.rhos, cfg.base_point, cfg.window);
}

double condition_F_max(const HolderParams& params, int range) {
    double worst = 0.0;
    std::vector<int> c(static_cast<std::size_t>(params.d()), -range);
    for (;;) {
        MultiIndex i{c};
        for (int k = 1; k <= params.d(); ++k)
            worst = std::max(worst, verify_condition_F(params, i, k).F_value);
        std::size_t pos = c.size();
        for (; pos-- > 0;) {
            if (++c[pos] <= range) break;
            c[pos] = -range;
        }
        if (pos == std::size_t(-1)) break;
    }
    return worst;
}

struct CommutationStats {
    long index_mismatches = 0;
    double max_dt = 0.0;
};

CommutationStats commutation_probe(const DenjoySystem& sys, int samples, std::uint64_t seed) {
    CommutationStats stats;
    if (sys.params().d() < 2) return stats;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pick(0.0, sys.circumference());
    for (int n = 0; n < samples; ++n) {
        CirclePoint p = locate(sys, pick(rng));
        CirclePoint a = apply_generator(sys, apply_generator(sys, p, 1, 1), 2, 1);
        CirclePoint b = apply_generator(sys, apply_generator(sys, p, 2, 1), 1, 1);
        if (is_gap(a) != is_gap(b)) {
            ++stats.index_mismatches;
            continue;
        }
        if (is_gap(a)) {
            if (!(as_gap(a).index == as_gap(b).index)) {
                ++stats.index_mismatches;
                continue;
            }
            stats.max_dt = std::max(stats.max_dt, std::abs(as_gap(a).t - as_gap(b).t));
        } else {
            double diff = std::abs(as_cantor(a).base - as_cantor(b).base);
            stats.max_dt = std::max(stats.max_dt, std::min(diff, 1.0 - diff));
        }
    }
    return stats;
}

double equivariance_defect(const DenjoySystem& sys, int samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pick(0.0, sys.circumference());
    double worst = 0.0;
    for (int n = 0; n < samples; ++n) {
        double y = pick(rng);
        for (int k = 1; k <= sys.params().d(); ++k) {
            CircleMap f = generator_map(sys, k);
            double lhs = collapse_to_base(sys, f.map(y));
            double rhs = circle_reduce(collapse_to_base(sys, y) + sys.rho(k), 1.0);
            double diff = std::abs(lhs - rhs);
            worst = std::max(worst, std::min(diff, 1.0 - diff));
        }
    }
    return worst;
}

std::vector<Row> construct_rows(const RunConfig& cfg, const DenjoySystem& sys) {
    GapSum gs = total_gap_sum(sys.params(), cfg.window);
    std::vector<Row> rows;
    rows.push_back({"circumference", sys.circumference(), 0.0, false});
    rows.push_back({"gap_sum_partial", gs.partial, 0.0, false});
    rows.push_back({"gap_sum_tail_bound", gs.tail_bound, 0.0, false});
    rows.push_back({"condition_F_max", condition_F_max(sys.params(), cfg.window), 0.0, false});
    rows.push_back({"condition_F_bound",
                    verify_condition_F(sys.params(), MultiIndex::zero(sys.params().d()), 1).bound,
                    0.0, false});
    rows.push_back({"realized_gaps", static_cast<double>(sys.gaps().size()), 0.0, false});
    return rows;
}

std::vector<Row> verify_rows(const RunConfig& cfg, const DenjoySystem& sys) {
    WanderingReport wr = wandering_check(sys);
    CommutationStats cs = commutation_probe(sys, 1000, static_cast<std::uint64_t>(cfg.seed));
    double eq = equivariance_defect(sys, 1000, static_cast<std::uint64_t>(cfg.seed) + 1);
    if (!wr.symbolic_ok) throw internal_error("verify: duplicate realized gap labels");
    if (wr.numeric_max_overlap > 1e-12) throw internal_error("verify: realized gaps overlap");
    if (cs.index_mismatches > 0) throw internal_error("verify: generators fail to commute");
    std::vector<Row> rows;
    rows.push_back({"wandering_symbolic_ok", 1.0, 0.0, false});
    rows.push_back({"wandering_max_overlap", wr.numeric_max_overlap, 0.0, false});
    rows.push_back({"commutation_index_mismatches", 0.0, 0.0, false});
    rows.push_back({"commutation_max_dt", cs.max_dt, 0.0, false});
    rows.push_back({"equivariance_max_defect", eq, 0.0, false});
    rows.push_back({"condition_F_max", condition_F_max(sys.params(), cfg.window), 0.0, false});
    return rows;
}

std::vector<Row> rotnum_rows(const DenjoySystem& sys, long n) {
    std::vector<Row> rows;
    double allowance = 10.0 * sys.tail_bound();
    for (int k = 1; k <= sys.params().d(); ++k) {
        RotationEstimate est = rotation_number(generator_map(sys, k), n, 0.0, allowance);
        rows.push_back({"rotation_" + std::to_string(k), est.value, est.error_budget, true});
        rows.push_back({"target_rho_" + std::to_string(k), sys.rho(k), 0.0, true});
    }
    Word f1{{Letter{1, 1}}};
    Word f2{{sys.params().d() >= 2 ? Letter{2, 1} : Letter{1, -1}}};
    double defect = homomorphism_defect(sys, {{f1, f2}}, n);
    rows.push_back({"homomorphism_defect", defect, 2.0 / static_cast<double>(n) + allowance, true});
    return rows;
}

int cmd_construct(const RunConfig& cfg) {
    DenjoySystem sys = system_from(cfg);
    atomic_write(out_file(cfg, "report.csv").string(), rows_to_csv(construct_rows(cfg, sys), false));
    atomic_write(out_file(cfg, "plot.svg").string(), svg_system_plot(sys));
    std::ostringstream sysout;
    save_system(sys, sysout);
    atomic_write(out_file(cfg, "system.txt").string(), sysout.str());
    return 0;
}

int cmd_verify(const RunConfig& cfg) {
    DenjoySystem sys = system_from(cfg);
    atomic_write(out_file(cfg, "report.csv").string(), rows_to_csv(verify_rows(cfg, sys), false));
    return 0;
}

int cmd_path_search(const RunConfig& cfg) {
    HolderParams params = params_from(cfg);
    if (params.regime != Regime::Supercritical)
        throw std::domain_error(
            "path-search: exponent sum above 1 required (the engine regime)");
    RectangleSchedule sch = build_schedule(params, cfg.M0, cfg.A_base, cfg.growth_base);
    std::vector<int> dims;
    for (int k = 1; k <= sch.d(); ++k) dims.push_back(static_cast<int>(sch.X(k, cfg.M0)));
    WeightFn raw = [&params](const MultiIndex& i) { return gap_length(params, i); };
    WeightGrid raw_grid = materialize(raw, dims);
    double norm = raw_grid.total() * (1.0 + 1e-12);
    std::vector<double> scaled = raw_grid.values();
    for (double& v : scaled) v /= norm;
    WeightGrid grid(dims, std::move(scaled));

    ChainResult chain = admissible_chain(grid, sch);
    std::vector<Row> rows;
    rows.push_back({"M0", static_cast<double>(cfg.M0), 0.0, false});
    rows.push_back({"A_base", sch.A_base, 0.0, false});
    rows.push_back({"chain_found", chain.found ? 1.0 : 0.0, 0.0, false});
    if (chain.found) {
        LatticePath path = extract_path(chain, sch);
        PathBound bound = theoretical_path_bound(sch);
        rows.push_back({"terminal_run", static_cast<double>(terminal_run(path)), 0.0, false});
        rows.push_back({"path_weight", path_weight(as_weight_fn(grid), path, params), 0.0, false});
        rows.push_back({"stage_sum", bound.stage_sum, 0.0, false});
        rows.push_back({"envelope", bound.envelope, 0.0, false});
    }
    atomic_write(out_file(cfg, "report.csv").string(), rows_to_csv(rows, false));
    atomic_write(out_file(cfg, "schedule.csv").string(), schedule_csv(sch));
    atomic_write(out_file(cfg, "grid.csv").string(), grid_csv(grid));
    return 0;
}

int cmd_distortion(const RunConfig& cfg) {
    DenjoySystem sys = system_from(cfg);
    const HolderParams& params = sys.params();
    DenjoyGenerators gens(sys);

    Word word;
    for (int rep = 0; rep < 2; ++rep)
        for (int k = 1; k <= params.d(); ++k) word.letters.push_back(Letter{k, 1});

    const auto& gap0 = sys.gap(MultiIndex::zero(params.d()));
    ChartInterval interval{gap0.left, gap0.left + gap0.length};

    std::vector<double> C_values;
    for (int k = 1; k <= params.d(); ++k)
        for (int sign : {1, -1})
            C_values.push_back(holder_estimate(sys, k, params.tau(k), 200,
                                               static_cast<std::uint64_t>(cfg.seed) + k, sign));

    DistortionContext ctx = make_distortion_context(gens, params, word, interval, C_values);
    DistortionReport rep = distortion_check(gens, params, ctx);
    auto fp = hyperbolic_fixed_point(gens, ctx);

    std::vector<Row> rows;
    rows.push_back({"word_length", static_cast<double>(word.size()), 0.0, false});
    rows.push_back({"S", ctx.S, 0.0, false});
    rows.push_back({"L", ctx.L, 0.0, false});
    rows.push_back({"bound", rep.bound, 0.0, false});
    rows.push_back({"max_ratio", rep.max_ratio, 0.0, false});
    rows.push_back({"ratio_bound_ok", rep.ratio_bound_ok ? 1.0 : 0.0, 0.0, false});
    rows.push_back({"fixed_point_applicable", fp ? 1.0 : 0.0, 0.0, false});
    if (fp) {
        rows.push_back({"fixed_point_x", fp->x, 0.0, false});
        rows.push_back({"fixed_point_multiplier", fp->multiplier, 0.0, false});
    }
    atomic_write(out_file(cfg, "report.csv").string(), rows_to_csv(rows, false));
    atomic_write(out_file(cfg, "distortion.csv").string(), distortion_csv(rep));
    return 0;
}

int cmd_rotnum(const RunConfig& cfg) {
    DenjoySystem sys = system_from(cfg);
    atomic_write(out_file(cfg, "report.csv").string(), rows_to_csv(rotnum_rows(sys, 10000), true));
    return 0;
}

int cmd_report(const RunConfig& cfg) {
    DenjoySystem sys = system_from(cfg);
    std::vector<Row> rows;
    for (Row r : construct_rows(cfg, sys)) rows.push_back(r);
    for (Row r : verify_rows(cfg, sys)) rows.push_back(r);
    for (Row r : rotnum_rows(sys, 10000)) rows.push_back(r);
    if (sys.params().d() == 2) {
        DriverReport driver = contradiction_driver(sys, 3, cfg.M0);
        rows.push_back({"driver_verdict", driver.verdict == Verdict::NoContradiction   ? 0.0
                                          : driver.verdict == Verdict::Contradiction ? 1.0
                                                                                     : 2.0,
                        0.0, false});
        for (std::size_t i = 0; i < driver.oracle_weights.size(); ++i)
            rows.push_back({"oracle_weight_" + std::to_string(4 << i), driver.oracle_weights[i],
                            0.0, false});
    }
    atomic_write(out_file(cfg, "report.csv").string(), rows_to_csv(rows, true));
    atomic_write(out_file(cfg, "plot.svg").string(), svg_system_plot(sys));
    return 0;
}

}  // namespace

int run_command(const RunConfig& config) {
    const std::string& c = config.command;
    if (c == "construct") return cmd_construct(config);
    if (c == "verify") return cmd_verify(config);
    if (c == "path-search") return cmd_path_search(config);
    if (c == "distortion") return cmd_distortion(config);
    if (c == "rotnum") return cmd_rotnum(config);
    if (c == "report") return cmd_report(config);
    throw std::invalid_argument("unknown command '" + c + "'");
}

}  // namespace denjoy
