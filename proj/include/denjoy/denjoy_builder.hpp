#pragma once

#include "denjoy/circle_core.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

namespace denjoy {

// Length assigned to the gap with label i:  1 / (1 + sum_k |i_k|^{1/tau_k}).
// Even in each coordinate and strictly decreasing in each |i_k|.
double gap_length(const HolderParams& params, const MultiIndex& i);

struct GapSum {
    double partial = 0.0;     // exact sum over the window max_k |i_k| <= W
    double tail_bound = 0.0;  // certified upper bound on everything omitted
};

// Sum of all gap lengths split into an exactly summed window part and a
// certified tail bound, so that partial + tail_bound dominates the full
// series.  Requires a subcritical exponent sum (the series diverges
// otherwise).
GapSum total_gap_sum(const HolderParams& params, int window);

enum class GapSide { Left, Right };

// A circle of circumference Lambda = 1 + (window gap mass) obtained from the
// unit rotation orbit of a marked base point by inserting one interval per
// gap label inside the window.  Labels outside the window keep their length
// for symbolic purposes but occupy no realized room; every realized quantity
// is therefore exact up to tail_bound().
class DenjoySystem {
public:
    DenjoySystem(HolderParams params, std::vector<double> rhos,
                 double base_point = 0.0, int window = 10);

    const HolderParams& params() const { return params_; }
    const std::vector<double>& rhos() const { return rhos_; }
    double rho(int k) const;
    double base_point() const { return base_point_; }
    int window() const { return window_; }
    double circumference() const { return circumference_; }
    double tail_bound() const { return tail_bound_; }

    struct RealizedGap {
        MultiIndex index;
        double delta = 0.0;   // base-circle offset of the orbit point from the marked point
        double left = 0.0;    // realized left endpoint
        double length = 0.0;
    };

    // Table of realized gaps sorted by delta (equivalently by left endpoint).
    const std::vector<RealizedGap>& gaps() const { return table_; }
    bool in_window(const MultiIndex& i) const;
    const RealizedGap& gap(const MultiIndex& i) const;  // throws outside the window

    // Position of the realized gap whose orbit offset matches delta up to the
    // snap tolerance, or -1.  Exposed for the coordinate maps below.
    std::ptrdiff_t find_orbit(double delta) const;

private:
    HolderParams params_;
    std::vector<double> rhos_;
    double base_point_;
    int window_;
    double circumference_ = 0.0;
    double tail_bound_ = 0.0;
    std::vector<RealizedGap> table_;
    std::vector<std::int32_t> position_;  // dense window-label lookup into table_
    std::size_t linear_index(const MultiIndex& i) const;
};

// Base-circle coordinate of the rotation-orbit point carrying gap i.
double base_orbit_point(const DenjoySystem& sys, const MultiIndex& i);

// Realized coordinate of base-circle point x.  When x is an orbit point of a
// realized gap the side picks the left or right endpoint of that gap; the
// realized circle has coordinate 0 at the left endpoint of the gap at the
// marked point.
double blowup_coordinate(const DenjoySystem& sys, double x, GapSide side);

// Inverse of the realization: classify a realized coordinate y in
// [0, circumference) as a gap point (left endpoints map to t = 0) or a
// minimal-set point.
CirclePoint locate(const DenjoySystem& sys, double y);

// Realized coordinate of a symbolic point.  Gap labels outside the window
// collapse to their orbit position (error at most tail_bound()).
double realize_point(const DenjoySystem& sys, const CirclePoint& p);

struct LocalGapImage {
    double t_out = 0.0;  // image local parameter in [0,1]
    double dt = 0.0;     // d t_out / d t; the circle derivative is (len_dst/len_src) * dt
};

// Transition map between two gaps written in local [0,1] parameters.  Both
// gaps use the chart  y = -cot(pi t)/len,  so the map fixes y; this is what
// makes the generators commute exactly.  Endpoints are pinned to the limit
// values rather than evaluated at the poles.
LocalGapImage local_gap_map(double t, double len_src, double len_dst);

// One generator step.  Minimal-set points rotate by rho_k; gap points move to
// the neighbouring label with the local transition above.  Purely symbolic:
// works for any label, inside the window or not.
CirclePoint apply_generator(const DenjoySystem& sys, const CirclePoint& p, int k, int sign);

// Derivative of that step with respect to realized length: exactly 1 on the
// minimal set, (len_dst/len_src) * dt inside gaps.
double generator_derivative(const DenjoySystem& sys, const CirclePoint& p, int k, int sign);

struct ConditionFReport {
    MultiIndex index;
    int k = 1;
    double F_value = 0.0;  // |len ratio - 1| / len^{tau_k} at the label
    double bound = 0.0;    // 2^{1/tau_min} / tau_min
    double B = 0.0;        // 1 + sum_{j != k} |i_j|^{1/tau_j}
    long a = 0;            // |i_k| after reflecting to the negative side
};

// Regularity margin of the gap-length family in direction k, measured
// against len^{tau_k}.  The bound is a strict invariant: exceeding it is a
// construction bug, reported as internal_error.
ConditionFReport verify_condition_F(const HolderParams& params, const MultiIndex& i, int k);

// Empirical Holder constant of log of the generator derivative on the
// realized circle: stratified sampled sup of |log f'(x) - log f'(y)| over
// dist(x,y)^tau.  Deterministic for a fixed seed; a prefix property makes the
// estimate monotone in n_samples.
double holder_estimate(const DenjoySystem& sys, int k, double tau, int n_samples,
                       std::uint64_t seed = 0, int sign = 1);

// Same estimator for an arbitrary log-derivative profile on a circle chart.
double holder_estimate(const std::function<double(double)>& log_derivative,
                       double circumference, double tau, int n_samples,
                       std::uint64_t seed = 0);

// Flat key = value serialization: d, taus, rhos, base_point, window.
// Derived quantities are recomputed on load, never trusted from the file.
void save_system(const DenjoySystem& sys, std::ostream& out);
DenjoySystem load_system(std::istream& in);

}  // namespace denjoy
