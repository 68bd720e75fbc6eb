#include "denjoy/path_engine.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

namespace denjoy {

namespace {

constexpr double kTotalSlack = 1e-12;
constexpr double kMaxOracleCells = 1.0e6;

void require_mass_budget(const WeightGrid& grid, const char* where) {
    if (grid.total() > 1.0 + kTotalSlack)
        throw std::invalid_argument(std::string(where) + ": total weight must not exceed 1");
}

}  // namespace

WeightGrid::WeightGrid(std::vector<int> dims, std::vector<double> values)
    : dims_(std::move(dims)), values_(std::move(values)) {
    if (dims_.empty()) throw std::invalid_argument("WeightGrid: at least one dimension required");
    double cells = 1.0;
    for (int n : dims_) {
        if (n < 1) throw std::invalid_argument("WeightGrid: dimensions must be positive");
        cells *= n;
    }
    if (cells > 2.0e7) throw std::length_error("WeightGrid: too many cells");
    if (values_.size() != static_cast<std::size_t>(cells))
        throw std::invalid_argument("WeightGrid: value count does not match the dimensions");
    for (double v : values_) {
        if (!std::isfinite(v) || v <= 0.0)
            throw std::invalid_argument("WeightGrid: weights must be strictly positive");
        total_ += v;
    }
}

std::size_t WeightGrid::offset(const std::vector<int>& coords) const {
    if (coords.size() != dims_.size())
        throw std::invalid_argument("WeightGrid: coordinate dimension mismatch");
    std::size_t idx = 0;
    for (std::size_t k = 0; k < dims_.size(); ++k) {
        if (coords[k] < 0 || coords[k] >= dims_[k])
            throw std::out_of_range("WeightGrid: coordinate outside the grid");
        idx = idx * static_cast<std::size_t>(dims_[k]) + static_cast<std::size_t>(coords[k]);
    }
    return idx;
}

double WeightGrid::at(const std::vector<int>& coords) const { return values_[offset(coords)]; }
double WeightGrid::at(const MultiIndex& i) const { return at(i.coords); }

void WeightGrid::to_csv(std::ostream& out) const {
    for (int k = 1; k <= d(); ++k) out << "i" << k << ",";
    out << "value\n";
    std::vector<int> c(dims_.size(), 0);
    for (std::size_t row = 0; row < values_.size(); ++row) {
        for (int v : c) out << v << ",";
        out << std::setprecision(17) << values_[row] << "\n";
        for (std::size_t k = c.size(); k-- > 0;) {
            if (++c[k] < dims_[k]) break;
            c[k] = 0;
        }
    }
}

WeightGrid WeightGrid::from_csv(std::istream& in) {
    std::string header;
    if (!std::getline(in, header))
        throw std::invalid_argument("WeightGrid: empty CSV");
    int d = static_cast<int>(std::count(header.begin(), header.end(), ','));
    if (d < 1) throw std::invalid_argument("WeightGrid: malformed CSV header");

    std::vector<std::vector<int>> coords;
    std::vector<double> vals;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string item;
        std::vector<int> c;
        for (int k = 0; k < d; ++k) {
            if (!std::getline(ss, item, ','))
                throw std::invalid_argument("WeightGrid: short CSV row");
            c.push_back(std::stoi(item));
        }
        if (!std::getline(ss, item))
            throw std::invalid_argument("WeightGrid: missing value column");
        coords.push_back(std::move(c));
        vals.push_back(std::strtod(item.c_str(), nullptr));
    }
    std::vector<int> dims(static_cast<std::size_t>(d), 0);
    for (const auto& c : coords)
        for (int k = 0; k < d; ++k) dims[static_cast<std::size_t>(k)] = std::max(dims[static_cast<std::size_t>(k)], c[static_cast<std::size_t>(k)] + 1);
    double cells = 1.0;
    for (int n : dims) cells *= n;
    if (cells != static_cast<double>(coords.size()))
        throw std::invalid_argument("WeightGrid: CSV rows do not fill a full grid");
    std::vector<double> values(coords.size(), -1.0);
    WeightGrid probe(dims, std::vector<double>(coords.size(), 1.0));  // reuse offset logic
    for (std::size_t r = 0; r < coords.size(); ++r)
        values[probe.offset(coords[r])] = vals[r];
    return WeightGrid(std::move(dims), std::move(values));
}

WeightFn as_weight_fn(const WeightGrid& grid) {
    return [&grid](const MultiIndex& i) { return grid.at(i); };
}

WeightGrid materialize(const WeightFn& fn, const std::vector<int>& dims) {
    double cells = 1.0;
    for (int n : dims) cells *= n;
    if (cells > 2.0e7) throw std::length_error("materialize: too many cells");
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(cells));
    std::vector<int> c(dims.size(), 0);
    for (;;) {
        values.push_back(fn(MultiIndex{c}));
        std::size_t k = c.size();
        for (; k-- > 0;) {
            if (++c[k] < dims[k]) break;
            c[k] = 0;
        }
        if (k == std::size_t(-1)) break;
    }
    return WeightGrid(dims, std::move(values));
}

std::pair<int, double> select_best_column(const WeightGrid& grid, double tau) {
    if (grid.d() != 2) throw std::invalid_argument("select_best_column: 2-d grid required");
    if (!(tau > 0.0 && tau < 1.0)) throw std::domain_error("select_best_column: exponent must lie in (0,1)");
    require_mass_budget(grid, "select_best_column");
    const int rows = grid.dims()[0], cols = grid.dims()[1];
    int best = 0;
    double best_sum = 0.0;
    for (int j = 0; j < cols; ++j) {
        double s = 0.0;
        for (int i = 0; i < rows; ++i) s += std::pow(grid.at({i, j}), tau);
        if (j == 0 || s < best_sum) {
            best = j;
            best_sum = s;
        }
    }
    return {best, best_sum};
}

std::vector<int> good_columns(const WeightGrid& grid, double tau, double A) {
    if (grid.d() != 2) throw std::invalid_argument("good_columns: 2-d grid required");
    if (!(tau > 0.0 && tau < 1.0)) throw std::domain_error("good_columns: exponent must lie in (0,1)");
    if (!(A >= 1.0)) throw std::domain_error("good_columns: relaxation factor must be >= 1");
    require_mass_budget(grid, "good_columns");
    const int rows = grid.dims()[0], cols = grid.dims()[1];
    const double threshold =
        A * std::pow(static_cast<double>(rows), 1.0 - tau) / std::pow(static_cast<double>(cols), tau);
    std::vector<int> out;
    for (int j = 0; j < cols; ++j) {
        double s = 0.0;
        for (int i = 0; i < rows; ++i) s += std::pow(grid.at({i, j}), tau);
        if (s <= threshold) out.push_back(j);
    }
    return out;
}

int RectangleSchedule::s(int m) const {
    int dd = d();
    return ((m - 1) % dd + dd) % dd + 1;
}

long RectangleSchedule::X(int k, int m) const {
    if (m < 0 || m > M0 || k < 1 || k > d())
        throw std::domain_error("RectangleSchedule::X: stage or direction out of range");
    return 1 + x[static_cast<std::size_t>(m)][static_cast<std::size_t>(k - 1)];
}

double RectangleSchedule::inv_A_sum() const {
    double s = 0.0;
    for (int m = 1; m <= M0; ++m) s += 1.0 / A[static_cast<std::size_t>(m)];
    return s;
}

RectangleSchedule build_schedule(const HolderParams& params, int M0, double A_base,
                                 double growth_base) {
    if (params.regime != Regime::Supercritical)
        throw std::domain_error("build_schedule: exponent sum above 1 required");
    if (params.d() < 2) throw std::invalid_argument("build_schedule: at least two directions required");
    if (M0 < 1) throw std::invalid_argument("build_schedule: at least one stage required");
    if (!(A_base >= 1.0)) throw std::invalid_argument("build_schedule: A_base must be >= 1");
    if (!(growth_base > 1.0)) throw std::invalid_argument("build_schedule: growth base must exceed 1");

    const int d = params.d();
    RectangleSchedule sch{params, M0, A_base, growth_base, {}, {}};
    sch.x.assign(static_cast<std::size_t>(M0) + 1, std::vector<int>(static_cast<std::size_t>(d), 0));
    for (int m = 1; m <= M0; ++m) {
        sch.x[static_cast<std::size_t>(m)] = sch.x[static_cast<std::size_t>(m - 1)];
        const int k = sch.s(m);
        const int rounds = (m + d - 1) / d;  // how many times direction k has grown
        double target = std::floor(std::pow(growth_base, rounds * params.tau(k)));
        if (target > 1e6) throw std::length_error("build_schedule: stage rectangle too large");
        int& xv = sch.x[static_cast<std::size_t>(m)][static_cast<std::size_t>(k - 1)];
        xv = std::max(xv + 1, static_cast<int>(target));
    }
    double cells = 1.0;
    for (int k = 1; k <= d; ++k) cells *= static_cast<double>(sch.X(k, M0));
    if (cells > 2.0e7) throw std::length_error("build_schedule: final rectangle too large");

    // Double the relaxation base until the stage factors leave room for a
    // full chain.
    for (;;) {
        sch.A.assign(static_cast<std::size_t>(M0) + 1, 0.0);
        for (int m = 1; m <= M0; ++m)
            sch.A[static_cast<std::size_t>(m)] =
                sch.A_base * std::pow(2.0, params.epsilon * m * params.tau(sch.s(m)) / 2.0);
        if (sch.inv_A_sum() < 1.0) break;
        sch.A_base *= 2.0;
        if (sch.A_base > 1e12) throw internal_error("build_schedule: relaxation search diverged");
    }
    return sch;
}

RectangleSchedule make_schedule(HolderParams params, std::vector<std::vector<int>> x,
                                std::vector<double> A, double A_base) {
    const int d = params.d();
    if (d < 2) throw std::invalid_argument("make_schedule: at least two directions required");
    if (x.size() < 2) throw std::invalid_argument("make_schedule: at least one stage required");
    const int M0 = static_cast<int>(x.size()) - 1;
    if (A.size() != x.size()) throw std::invalid_argument("make_schedule: one factor per stage required");
    RectangleSchedule sch{std::move(params), M0, A_base, 0.0, std::move(x), std::move(A)};
    for (const auto& row : sch.x)
        if (static_cast<int>(row.size()) != d)
            throw std::invalid_argument("make_schedule: stage rows must have one entry per direction");
    for (int v : sch.x[0])
        if (v != 0) throw std::invalid_argument("make_schedule: stage zero must be the origin");
    for (int m = 1; m <= M0; ++m) {
        for (int k = 1; k <= d; ++k) {
            int prev = sch.x[static_cast<std::size_t>(m - 1)][static_cast<std::size_t>(k - 1)];
            int cur = sch.x[static_cast<std::size_t>(m)][static_cast<std::size_t>(k - 1)];
            if (k == sch.s(m)) {
                if (cur <= prev)
                    throw std::invalid_argument("make_schedule: stage direction must strictly grow");
            } else if (cur != prev) {
                throw std::invalid_argument("make_schedule: only the stage direction may grow");
            }
        }
        if (!(sch.A[static_cast<std::size_t>(m)] >= 1.0))
            throw std::invalid_argument("make_schedule: relaxation factors must be >= 1");
    }
    if (!(sch.inv_A_sum() < 1.0))
        throw std::invalid_argument("make_schedule: sum of 1/A_m must stay below 1");
    if (sch.A_base <= 0.0) sch.A_base = sch.A[1];
    return sch;
}

std::vector<Line> stage_lines(const RectangleSchedule& sch, int m) {
    if (m < 1 || m > sch.M0) throw std::domain_error("stage_lines: stage out of range");
    const int d = sch.d();
    const int sdir = sch.s(m);
    std::vector<Line> out;
    std::vector<int> c(static_cast<std::size_t>(d), 0);
    for (;;) {
        out.push_back(Line{sdir, MultiIndex{c}});
        std::size_t k = c.size();
        for (; k-- > 0;) {
            if (static_cast<int>(k) == sdir - 1) continue;  // pinned to 0
            if (++c[k] <= sch.x[static_cast<std::size_t>(m)][k]) break;
            c[k] = 0;
        }
        if (k == std::size_t(-1)) break;
    }
    return out;
}

double line_sum(const WeightGrid& grid, const RectangleSchedule& sch, const Line& line, int m) {
    const int sdir = line.direction;
    const double tau = sch.params.tau(sdir);
    std::vector<int> c = line.base.coords;
    double s = 0.0;
    for (int v = 0; v <= sch.x[static_cast<std::size_t>(m)][static_cast<std::size_t>(sdir - 1)]; ++v) {
        c[static_cast<std::size_t>(sdir - 1)] = v;
        s += std::pow(grid.at(c), tau);
    }
    return s;
}

double line_bound(const RectangleSchedule& sch, int m) {
    if (m < 1 || m > sch.M0) throw std::domain_error("line_bound: stage out of range");
    const int sdir = sch.s(m);
    const double tau = sch.params.tau(sdir);
    double bound = sch.A[static_cast<std::size_t>(m)] *
                   std::pow(static_cast<double>(sch.X(sdir, m)), 1.0 - tau);
    for (int j = 1; j <= sch.d(); ++j)
        if (j != sdir) bound /= std::pow(static_cast<double>(sch.X(j, m)), tau);
    return bound;
}

std::vector<Line> good_lines(const WeightGrid& grid, const RectangleSchedule& sch, int m) {
    if (grid.d() != sch.d()) throw std::invalid_argument("good_lines: grid dimension mismatch");
    for (int k = 1; k <= sch.d(); ++k)
        if (grid.dims()[static_cast<std::size_t>(k - 1)] < sch.X(k, m))
            throw std::invalid_argument("good_lines: grid does not cover the stage rectangle");
    require_mass_budget(grid, "good_lines");
    const double bound = line_bound(sch, m);
    std::vector<Line> out;
    for (const Line& line : stage_lines(sch, m))
        if (line_sum(grid, sch, line, m) <= bound) out.push_back(line);
    return out;
}

namespace {

std::vector<int> zero_at(std::vector<int> v, int k) {
    v[static_cast<std::size_t>(k - 1)] = 0;
    return v;
}

}  // namespace

ChainResult admissible_chain(const WeightGrid& grid, const RectangleSchedule& sch) {
    if (!(sch.inv_A_sum() < 1.0))
        throw std::invalid_argument("admissible_chain: sum of 1/A_m must stay below 1");
    const int M0 = sch.M0;
    struct Back {
        std::vector<int> face;
        std::vector<int> prev;
    };
    std::vector<std::map<std::vector<int>, Back>> adm(static_cast<std::size_t>(M0) + 1);
    std::vector<int> origin(static_cast<std::size_t>(sch.d()), 0);
    adm[0].emplace(origin, Back{origin, {}});

    ChainResult result;
    result.admissible_trace.assign(static_cast<std::size_t>(M0) + 1, 0.0);
    result.admissible_trace[0] = 1.0;

    for (int m = 1; m <= M0; ++m) {
        // A line's face point, with the previous stage direction zeroed out,
        // names the corner-face point its chain would have to extend.
        for (const Line& line : good_lines(grid, sch, m)) {
            std::vector<int> prev_key = zero_at(line.base.coords, sch.s(m - 1));
            if (!adm[static_cast<std::size_t>(m - 1)].count(prev_key)) continue;
            std::vector<int> key = zero_at(line.base.coords, sch.s(m + 1));
            adm[static_cast<std::size_t>(m)].emplace(key, Back{line.base.coords, std::move(prev_key)});
        }
        double face_cells = 1.0;
        for (int j = 1; j <= sch.d(); ++j)
            if (j != sch.s(m) && j != sch.s(m + 1)) face_cells *= static_cast<double>(sch.X(j, m));
        result.admissible_trace[static_cast<std::size_t>(m)] =
            static_cast<double>(adm[static_cast<std::size_t>(m)].size()) / face_cells;
        if (adm[static_cast<std::size_t>(m)].empty()) return result;  // found stays false
    }

    result.lines.assign(static_cast<std::size_t>(M0) + 1, Line{});
    std::vector<int> key = adm[static_cast<std::size_t>(M0)].begin()->first;
    for (int m = M0; m >= 1; --m) {
        const Back& back = adm[static_cast<std::size_t>(m)].at(key);
        result.lines[static_cast<std::size_t>(m)] = Line{sch.s(m), MultiIndex{back.face}};
        key = back.prev;
    }
    for (int m = 1; m < M0; ++m)
        if (!line_intersection(result.lines[static_cast<std::size_t>(m)],
                               result.lines[static_cast<std::size_t>(m + 1)], sch, m, m + 1))
            throw internal_error("admissible_chain: consecutive lines fail to intersect");
    result.found = true;
    return result;
}

std::optional<MultiIndex> line_intersection(const Line& a, const Line& b,
                                            const RectangleSchedule& sch, int m_a, int m_b) {
    if (a.direction == b.direction) return std::nullopt;
    const int d = sch.d();
    std::vector<int> z(static_cast<std::size_t>(d), 0);
    for (int j = 1; j <= d; ++j) {
        const std::size_t jj = static_cast<std::size_t>(j - 1);
        if (j == a.direction) {
            z[jj] = b.base.coords[jj];
            if (z[jj] > sch.x[static_cast<std::size_t>(m_a)][jj]) return std::nullopt;
        } else if (j == b.direction) {
            z[jj] = a.base.coords[jj];
            if (z[jj] > sch.x[static_cast<std::size_t>(m_b)][jj]) return std::nullopt;
        } else {
            if (a.base.coords[jj] != b.base.coords[jj]) return std::nullopt;
            z[jj] = a.base.coords[jj];
        }
    }
    return MultiIndex{std::move(z)};
}

LatticePath extract_path(const ChainResult& chain, const RectangleSchedule& sch) {
    if (!chain.found) throw std::invalid_argument("extract_path: chain search failed");
    LatticePath path;
    path.lines = chain.lines;
    std::vector<int> cur(static_cast<std::size_t>(sch.d()), 0);
    path.points.push_back(MultiIndex{cur});
    for (int m = 1; m <= sch.M0; ++m) {
        const Line& line = chain.lines[static_cast<std::size_t>(m)];
        const int sdir = line.direction;
        for (int j = 1; j <= sch.d(); ++j)
            if (j != sdir && cur[static_cast<std::size_t>(j - 1)] != line.base.coords[static_cast<std::size_t>(j - 1)])
                throw internal_error("extract_path: walk left its chain line");
        int target;
        if (m < sch.M0) {
            auto inter = line_intersection(line, chain.lines[static_cast<std::size_t>(m + 1)], sch, m, m + 1);
            if (!inter) throw internal_error("extract_path: consecutive lines fail to intersect");
            target = inter->coords[static_cast<std::size_t>(sdir - 1)];
        } else {
            target = sch.x[static_cast<std::size_t>(sch.M0)][static_cast<std::size_t>(sdir - 1)];
        }
        int& pos = cur[static_cast<std::size_t>(sdir - 1)];
        const int step = target >= pos ? 1 : -1;
        while (pos != target) {
            pos += step;
            path.points.push_back(MultiIndex{cur});
            path.alphas.push_back(sdir);
            path.signs.push_back(step);
        }
    }
    for (const MultiIndex& p : path.points)
        for (int j = 1; j <= sch.d(); ++j) {
            int v = p.coords[static_cast<std::size_t>(j - 1)];
            if (v < 0 || v > sch.x[static_cast<std::size_t>(sch.M0)][static_cast<std::size_t>(j - 1)])
                throw internal_error("extract_path: walk left the final rectangle");
        }
    return path;
}

int terminal_run(const LatticePath& path) {
    if (path.alphas.empty()) return 0;
    int run = 1;
    for (std::size_t n = path.alphas.size() - 1; n-- > 0;) {
        if (path.alphas[n] != path.alphas.back() || path.signs[n] != path.signs.back()) break;
        ++run;
    }
    return run;
}

double path_weight(const WeightFn& weights, const LatticePath& path, const HolderParams& params) {
    if (path.points.size() != path.alphas.size() + 1 || path.signs.size() != path.alphas.size())
        throw std::invalid_argument("path_weight: malformed path");
    double sum = 0.0;
    for (std::size_t n = 0; n < path.alphas.size(); ++n) {
        double w = weights(path.points[n]);
        if (!std::isfinite(w) || w <= 0.0)
            throw std::domain_error("path_weight: weights must be strictly positive");
        sum += std::pow(w, params.tau(path.alphas[n]));
    }
    return sum;
}

PathBound theoretical_path_bound(const RectangleSchedule& sch) {
    PathBound out;
    const double ratio = std::pow(2.0, -sch.params.epsilon * sch.params.tau_min / 2.0);
    double comp = 0.0;
    for (int m = 1; m <= sch.M0; ++m) {
        double term = line_bound(sch, m);
        out.stage_sum += term;
        comp = std::max(comp, term / (sch.A_base * std::pow(ratio, m)));
    }
    out.comparability = comp;
    out.envelope = sch.A_base * comp / (1.0 - ratio);
    return out;
}

OracleResult oracle_min_path(const WeightGrid& grid, const HolderParams& params) {
    if (grid.d() != 2) throw std::invalid_argument("oracle_min_path: 2-d grid required");
    if (params.d() < 2) throw std::invalid_argument("oracle_min_path: two exponents required");
    const int n1 = grid.dims()[0], n2 = grid.dims()[1];
    if (static_cast<double>(n1) * n2 > kMaxOracleCells)
        throw std::length_error("oracle_min_path: grid too large");
    const double t1 = params.tau(1), t2 = params.tau(2);

    std::vector<double> cost(static_cast<std::size_t>(n1) * n2, 0.0);
    std::vector<signed char> from(static_cast<std::size_t>(n1) * n2, 0);
    auto id = [n2](int i, int j) { return static_cast<std::size_t>(i) * n2 + static_cast<std::size_t>(j); };
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
            if (i == 0 && j == 0) continue;
            double best = 0.0;
            signed char dir = 0;
            if (i > 0) {
                best = cost[id(i - 1, j)] + std::pow(grid.at({i - 1, j}), t1);
                dir = 1;
            }
            if (j > 0) {
                double alt = cost[id(i, j - 1)] + std::pow(grid.at({i, j - 1}), t2);
                if (dir == 0 || alt < best) {
                    best = alt;
                    dir = 2;
                }
            }
            cost[id(i, j)] = best;
            from[id(i, j)] = dir;
        }

    OracleResult out;
    out.weight = cost[id(n1 - 1, n2 - 1)];
    int i = n1 - 1, j = n2 - 1;
    std::vector<MultiIndex> rev;
    rev.push_back(MultiIndex{{i, j}});
    while (i != 0 || j != 0) {
        if (from[id(i, j)] == 1)
            --i;
        else
            --j;
        rev.push_back(MultiIndex{{i, j}});
    }
    out.points.assign(rev.rbegin(), rev.rend());
    return out;
}

}  // namespace denjoy
