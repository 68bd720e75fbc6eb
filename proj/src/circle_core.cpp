#include "denjoy/circle_core.hpp"

#include <algorithm>
#include <cmath>

namespace denjoy {

HolderParams::HolderParams(std::vector<double> exponents) : taus(std::move(exponents)) {
    if (taus.empty())
        throw std::invalid_argument("HolderParams: at least one exponent required");
    double sum = 0.0;
    for (double t : taus) {
        if (!std::isfinite(t) || t <= 0.0 || t >= 1.0)
            throw std::invalid_argument("HolderParams: every exponent must lie in (0,1)");
        sum += t;
    }
    if (sum == 1.0)
        throw std::invalid_argument("HolderParams: exponent sum is exactly critical");
    tau_max = *std::max_element(taus.begin(), taus.end());
    tau_min = *std::min_element(taus.begin(), taus.end());
    epsilon = std::fabs(sum - 1.0);
    regime = sum > 1.0 ? Regime::Supercritical : Regime::Subcritical;
}

double HolderParams::tau(int k) const {
    if (k < 1 || k > d())
        throw std::domain_error("HolderParams::tau: generator index out of range");
    return taus[static_cast<std::size_t>(k - 1)];
}

int MultiIndex::at(int k) const {
    if (k < 1 || k > dim())
        throw std::domain_error("MultiIndex::at: coordinate out of range");
    return coords[static_cast<std::size_t>(k - 1)];
}

bool MultiIndex::is_zero() const {
    return std::all_of(coords.begin(), coords.end(), [](int c) { return c == 0; });
}

bool operator<(const MultiIndex& a, const MultiIndex& b) {
    return std::lexicographical_compare(a.coords.begin(), a.coords.end(),
                                        b.coords.begin(), b.coords.end());
}

MultiIndex Word::displacement(int d) const {
    MultiIndex out = MultiIndex::zero(d);
    for (const Letter& l : letters) {
        if (l.k < 1 || l.k > d)
            throw std::domain_error("Word::displacement: letter index out of range");
        if (l.sign != 1 && l.sign != -1)
            throw std::domain_error("Word::displacement: letter sign must be +1 or -1");
        out.coords[static_cast<std::size_t>(l.k - 1)] += l.sign;
    }
    return out;
}

bool is_gap(const CirclePoint& p) { return std::holds_alternative<GapPoint>(p); }

const GapPoint& as_gap(const CirclePoint& p) {
    if (!is_gap(p)) throw std::domain_error("as_gap: point is not inside a gap");
    return std::get<GapPoint>(p);
}

const CantorPoint& as_cantor(const CirclePoint& p) {
    if (is_gap(p)) throw std::domain_error("as_cantor: point lies inside a gap");
    return std::get<CantorPoint>(p);
}

double circle_reduce(double x, double circumference) {
    if (!std::isfinite(x) || !std::isfinite(circumference) || circumference <= 0.0)
        throw std::domain_error("circle_reduce: input must be finite with positive circumference");
    if (x >= 0.0 && x < circumference) return x;
    double r = std::fmod(x, circumference);
    if (r < 0.0) r += circumference;
    if (r >= circumference) r = 0.0;  // rounding right at the seam
    return r;
}

MultiIndex index_offset(const MultiIndex& i, int k, int sign) {
    if (k < 1 || k > i.dim())
        throw std::domain_error("index_offset: generator index out of range");
    if (sign != 1 && sign != -1)
        throw std::domain_error("index_offset: sign must be +1 or -1");
    MultiIndex out = i;
    out.coords[static_cast<std::size_t>(k - 1)] += sign;
    return out;
}

}  // namespace denjoy
