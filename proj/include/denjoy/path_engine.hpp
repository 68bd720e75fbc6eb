#pragma once

#include "denjoy/circle_core.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

namespace denjoy {

using WeightFn = std::function<double(const MultiIndex&)>;

// Dense d-dimensional array of strictly positive weights over
// [[0, dims_1 - 1]] x ... x [[0, dims_d - 1]], row-major.  The selection
// entry points additionally require total() <= 1; checked there, not here.
class WeightGrid {
public:
    WeightGrid(std::vector<int> dims, std::vector<double> values);

    int d() const { return static_cast<int>(dims_.size()); }
    const std::vector<int>& dims() const { return dims_; }
    double at(const MultiIndex& i) const;
    double at(const std::vector<int>& coords) const;
    double total() const { return total_; }
    const std::vector<double>& values() const { return values_; }

    // CSV with header i1,...,id,value; labels in row-major order.
    void to_csv(std::ostream& out) const;
    static WeightGrid from_csv(std::istream& in);

private:
    std::vector<int> dims_;
    std::vector<double> values_;
    double total_ = 0.0;
    std::size_t offset(const std::vector<int>& coords) const;
};

WeightFn as_weight_fn(const WeightGrid& grid);
WeightGrid materialize(const WeightFn& fn, const std::vector<int>& dims);

// Column with the smallest sum of value^tau over its rows (2-d grids,
// columns indexed by the second coordinate, 0-based; ties pick the smallest
// index).  The minimum is always <= rows^{1-tau} / cols^tau when total <= 1.
std::pair<int, double> select_best_column(const WeightGrid& grid, double tau);

// All columns whose sum stays within factor A of that bound; at least a
// (1 - 1/A) share of the columns qualifies (Chebyshev).
std::vector<int> good_columns(const WeightGrid& grid, double tau, double A);

// An axis-aligned segment of lattice points inside a growth-stage rectangle:
// base has coordinate 0 in the running direction.
struct Line {
    int direction = 1;  // 1-based
    MultiIndex base;
};

// Nested corner rectangles R_m = prod_k [[0, x_{k,m}]], one coordinate
// growing per stage in round-robin order s(m), with relaxation factors A_m
// chosen so that sum 1/A_m < 1.
struct RectangleSchedule {
    HolderParams params;
    int M0 = 0;
    double A_base = 0.0;
    double growth_base = 0.0;
    std::vector<std::vector<int>> x;  // x[m][k-1], m = 0..M0; x[0] = 0
    std::vector<double> A;            // A[m], m = 1..M0; A[0] unused

    int d() const { return params.d(); }
    int s(int m) const;                // growing direction of stage m, 1-based
    long X(int k, int m) const;        // side count 1 + x_{k,m}
    double inv_A_sum() const;
};

// Geometric growth schedule x_{k,m} ~ growth_base^{ceil(m/d) * tau_k}; the
// supplied A_base is doubled until sum 1/A_m < 1.  Supercritical exponent
// sums only: the stage factors grow like 2^{epsilon * m * tau_{s(m)} / 2}.
RectangleSchedule build_schedule(const HolderParams& params, int M0, double A_base = 2.0,
                                 double growth_base = 4.0);

// Hand-assembled schedule (tests, subcritical pipelines); validates shape,
// monotone growth exactly in direction s(m), and sum 1/A_m < 1.
RectangleSchedule make_schedule(HolderParams params, std::vector<std::vector<int>> x,
                                std::vector<double> A, double A_base = 0.0);

// All stage-m lines (direction s(m)) enumerated by their base point in
// lexicographic order.
std::vector<Line> stage_lines(const RectangleSchedule& sch, int m);

// Sum of value^{tau_s} along one stage-m line.
double line_sum(const WeightGrid& grid, const RectangleSchedule& sch, const Line& line, int m);

// Per-line threshold A_m * X_s^{1 - tau_s} / prod_{j != s} X_j^{tau_s}.
double line_bound(const RectangleSchedule& sch, int m);

// Stage-m lines within the threshold; at least a (1 - 1/A_m) share of all
// stage-m lines when the grid total is <= 1.
std::vector<Line> good_lines(const WeightGrid& grid, const RectangleSchedule& sch, int m);

struct ChainResult {
    bool found = false;
    std::vector<Line> lines;               // lines[m] for m = 1..M0; lines[0] unused
    std::vector<double> admissible_trace;  // share of admissible corner points per stage
};

// One good line per stage, consecutive lines intersecting, selected by a
// forward sweep over admissible corner-face points with backtracking.
// found == false cannot happen when sum 1/A_m < 1 and total <= 1; callers
// treat it as an internal error.
ChainResult admissible_chain(const WeightGrid& grid, const RectangleSchedule& sch);

// Lattice point shared by consecutive chain lines, if any.
std::optional<MultiIndex> line_intersection(const Line& a, const Line& b,
                                            const RectangleSchedule& sch, int m_a, int m_b);

struct LatticePath {
    std::vector<MultiIndex> points;  // points[0] is the origin
    std::vector<int> alphas;         // step directions, 1-based
    std::vector<int> signs;          // +1 / -1 per step
    std::vector<Line> lines;         // the chain that produced the walk
};

// Unit-step walk: origin, then along each chain line to its intersection
// with the next, ending at the far boundary of the last line.  The final
// straight run has length >= x_{s,M0} - x_{s,M0-1}.
LatticePath extract_path(const ChainResult& chain, const RectangleSchedule& sch);

int terminal_run(const LatticePath& path);

// sum over steps of weights(point)^{tau_alpha}; weights must stay positive.
double path_weight(const WeightFn& weights, const LatticePath& path, const HolderParams& params);

struct PathBound {
    double stage_sum = 0.0;      // sum over stages of A_m * (per-line threshold)
    double envelope = 0.0;       // geometric closed form dominating stage_sum
    double comparability = 0.0;  // realized constant tying the stages to the geometric decay
};

// Upper bound for the weight of any chain-extracted path, computed from the
// realized schedule; the geometric envelope uses ratio 2^{-epsilon*tau_min/2}.
PathBound theoretical_path_bound(const RectangleSchedule& sch);

struct OracleResult {
    double weight = 0.0;
    std::vector<MultiIndex> points;
};

// Exact minimum of path_weight over monotone lattice paths from the origin
// to the far corner of a 2-d grid (dynamic programming; grids capped at 1e6
// cells).
OracleResult oracle_min_path(const WeightGrid& grid, const HolderParams& params);

}  // namespace denjoy
