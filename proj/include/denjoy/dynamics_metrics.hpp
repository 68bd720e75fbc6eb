#pragma once

#include "denjoy/circle_core.hpp"
#include "denjoy/denjoy_builder.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace denjoy {

struct RotationEstimate {
    double value = 0.0;         // in [0,1)
    long iterations = 0;
    double error_budget = 0.0;  // 1/n plus any caller-supplied truncation allowance
};

// A circle map given by its action on [0, circumference).
struct CircleMap {
    std::function<double(double)> map;
    double circumference = 1.0;
};

// Birkhoff estimate of the rotation number from n iterates starting at x0.
// The map is spot-checked for monotonicity (cyclic order on sampled triples);
// a violation raises std::runtime_error.
RotationEstimate rotation_number(const CircleMap& f, long n, double x0,
                                 double truncation_allowance = 0.0);

// Realized action of one generator / of a whole word on the blown-up circle.
CircleMap generator_map(const DenjoySystem& sys, int k, int sign = 1);
CircleMap word_map(const DenjoySystem& sys, const Word& w);

// Largest defect |rot(uv) - rot(u) - rot(v)| (circle distance) over the
// supplied word pairs, each rotation number estimated with n iterates.
double homomorphism_defect(const DenjoySystem& sys,
                           const std::vector<std::pair<Word, Word>>& pairs, long n);

// Collapse of the realized circle back onto the base rotation: gap points map
// to their orbit point, minimal-set points keep their base coordinate.
double collapse_to_base(const DenjoySystem& sys, double y);

struct WanderingReport {
    bool symbolic_ok = false;        // all realized labels distinct
    double numeric_max_overlap = 0;  // worst pairwise overlap of realized gaps
};

// Checks that the realized gaps are pairwise disjoint, symbolically and as
// intervals.  window = -1 means the full system window.
WanderingReport wandering_check(const DenjoySystem& sys, int window = -1);

// Screen against rational dependence of the rotation vector: small integer
// combinations near an integer (|q_k| <= max_coefficient) and per-entry
// continued-fraction convergents with denominator <= max_denominator.
// Returns false when a relation is detected.
bool rationally_independent(const std::vector<double>& rhos, int max_coefficient = 50,
                            long max_denominator = 1000000);

}  // namespace denjoy
