#include "denjoy/dynamics_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace denjoy {

namespace {

double arc_from(double a, double b, double circumference) {
    // length of the forward arc a -> b
    double d = b - a;
    if (d < 0.0) d += circumference;
    return d;
}

void spot_check_monotone(const CircleMap& f) {
    // Cyclic order must be preserved on sampled triples.  Low-discrepancy
    // anchors keep the check deterministic.
    const double lambda = f.circumference;
    for (int s = 0; s < 64; ++s) {
        double a = circle_reduce((0.6180339887498949 * s + 0.05) * lambda, lambda);
        double da = (0.05 + 0.9 * std::fmod(0.7548776662466927 * s + 0.31, 1.0)) * lambda / 3.0;
        double b = circle_reduce(a + da, lambda);
        double c = circle_reduce(b + da, lambda);
        double fa = f.map(a), fb = f.map(b), fc = f.map(c);
        if (arc_from(fa, fb, lambda) > arc_from(fa, fc, lambda) + 1e-9 * lambda)
            throw std::runtime_error("rotation_number: sampled map is not monotone");
    }
}

}  // namespace

RotationEstimate rotation_number(const CircleMap& f, long n, double x0,
                                 double truncation_allowance) {
    if (n < 1) throw std::invalid_argument("rotation_number: need at least one iterate");
    if (!(f.circumference > 0.0) || !f.map)
        throw std::invalid_argument("rotation_number: map with positive circumference required");
    if (truncation_allowance < 0.0)
        throw std::invalid_argument("rotation_number: allowance must be non-negative");
    spot_check_monotone(f);

    const double lambda = f.circumference;
    double y = circle_reduce(x0, lambda);
    const double y0 = y;
    long wraps = 0;
    for (long s = 0; s < n; ++s) {
        double next = circle_reduce(f.map(y), lambda);
        if (next < y) ++wraps;  // forward displacement stays below one turn
        y = next;
    }
    RotationEstimate est;
    est.iterations = n;
    est.value = circle_reduce((static_cast<double>(wraps) * lambda + y - y0) /
                                  (static_cast<double>(n) * lambda),
                              1.0);
    est.error_budget = 1.0 / static_cast<double>(n) + truncation_allowance;
    return est;
}

CircleMap generator_map(const DenjoySystem& sys, int k, int sign) {
    if (k < 1 || k > sys.params().d())
        throw std::domain_error("generator_map: generator index out of range");
    if (sign != 1 && sign != -1)
        throw std::domain_error("generator_map: sign must be +1 or -1");
    return {[&sys, k, sign](double y) {
                return realize_point(sys, apply_generator(sys, locate(sys, y), k, sign));
            },
            sys.circumference()};
}

CircleMap word_map(const DenjoySystem& sys, const Word& w) {
    for (const Letter& l : w.letters) {
        if (l.k < 1 || l.k > sys.params().d())
            throw std::domain_error("word_map: letter index out of range");
        if (l.sign != 1 && l.sign != -1)
            throw std::domain_error("word_map: letter sign must be +1 or -1");
    }
    return {[&sys, w](double y) {
                CirclePoint p = locate(sys, y);
                for (const Letter& l : w.letters) p = apply_generator(sys, p, l.k, l.sign);
                return realize_point(sys, p);
            },
            sys.circumference()};
}

double homomorphism_defect(const DenjoySystem& sys,
                           const std::vector<std::pair<Word, Word>>& pairs, long n) {
    double worst = 0.0;
    const double x0 = 0.1234567890123 * sys.circumference();
    for (const auto& [u, v] : pairs) {
        Word uv;
        uv.letters = u.letters;
        uv.letters.insert(uv.letters.end(), v.letters.begin(), v.letters.end());
        double ru = rotation_number(word_map(sys, u), n, x0).value;
        double rv = rotation_number(word_map(sys, v), n, x0).value;
        double ruv = rotation_number(word_map(sys, uv), n, x0).value;
        double gap = std::fabs(circle_reduce(ruv - ru - rv, 1.0));
        worst = std::max(worst, std::min(gap, 1.0 - gap));
    }
    return worst;
}

double collapse_to_base(const DenjoySystem& sys, double y) {
    CirclePoint p = locate(sys, y);
    if (is_gap(p)) return base_orbit_point(sys, std::get<GapPoint>(p).index);
    return std::get<CantorPoint>(p).base;
}

WanderingReport wandering_check(const DenjoySystem& sys, int window) {
    if (window < 0) window = sys.window();
    if (window > sys.window())
        throw std::invalid_argument("wandering_check: window exceeds the realized window");
    WanderingReport rep;
    std::vector<const DenjoySystem::RealizedGap*> rows;
    for (const auto& g : sys.gaps()) {
        bool inside = std::all_of(g.index.coords.begin(), g.index.coords.end(),
                                  [window](int c) { return std::abs(c) <= window; });
        if (inside) rows.push_back(&g);
    }
    std::set<std::vector<int>> labels;
    for (const auto* g : rows) labels.insert(g->index.coords);
    rep.symbolic_ok = labels.size() == rows.size();

    // Rows inherit the left-endpoint order from the system table.
    double worst = 0.0;
    for (std::size_t r = 0; r + 1 < rows.size(); ++r)
        worst = std::max(worst, rows[r]->left + rows[r]->length - rows[r + 1]->left);
    if (rows.size() > 1) {
        const auto* last = rows.back();
        worst = std::max(worst, last->left + last->length -
                                    (rows.front()->left + sys.circumference()));
    }
    rep.numeric_max_overlap = std::max(worst, 0.0);
    return rep;
}

bool rationally_independent(const std::vector<double>& rhos, int max_coefficient,
                            long max_denominator) {
    if (rhos.empty()) return false;
    for (double r : rhos)
        if (!std::isfinite(r)) return false;

    // Per-entry continued fraction: a convergent p/q with q * |q r - p| tiny
    // means the entry is (numerically) rational with a small denominator.
    for (double r : rhos) {
        double x = r;
        long p0 = 0, q0 = 1, p1 = 1, q1 = 0;  // seeds two and one step behind
        for (int step = 0; step < 64; ++step) {
            double a = std::floor(x);
            long ai = static_cast<long>(a);
            long p2 = ai * p1 + p0, q2 = ai * q1 + q0;
            if (q2 > max_denominator || q2 < 0) break;
            p0 = p1;
            q0 = q1;
            p1 = p2;
            q1 = q2;
            if (q1 > 0) {
                double err = std::fabs(static_cast<double>(q1) * r - static_cast<double>(p1));
                if (static_cast<double>(q1) * err < 1e-6) return false;
            }
            double frac = x - a;
            if (frac < 1e-15) break;
            x = 1.0 / frac;
        }
    }

    // Small integer combinations near an integer.  The search range shrinks
    // with the dimension to keep the enumeration bounded.
    int d = static_cast<int>(rhos.size());
    int range = max_coefficient;
    while (range > 1 && std::pow(2.0 * range + 1.0, d) > 2.5e6) range /= 2;
    std::vector<int> q(rhos.size(), -range);
    while (true) {
        bool nonzero = std::any_of(q.begin(), q.end(), [](int v) { return v != 0; });
        if (nonzero) {
            double dot = 0.0;
            for (std::size_t j = 0; j < rhos.size(); ++j) dot += q[j] * rhos[j];
            if (std::fabs(dot - std::round(dot)) < 1e-9) return false;
        }
        std::size_t k = q.size();
        while (k-- > 0) {
            if (q[k] < range) {
                ++q[k];
                std::fill(q.begin() + static_cast<std::ptrdiff_t>(k) + 1, q.end(), -range);
                break;
            }
            if (k == 0) return true;
        }
    }
}

}  // namespace denjoy
