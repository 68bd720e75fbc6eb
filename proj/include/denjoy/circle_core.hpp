#pragma once

#include <stdexcept>
#include <variant>
#include <vector>

namespace denjoy {

// Raised when the library detects a violation of one of its own guarantees,
// as opposed to bad input.  The CLI maps it to a distinct exit code.
struct internal_error : std::logic_error {
    using std::logic_error::logic_error;
};

enum class Regime { Supercritical, Subcritical };

// Holder exponent vector (tau_1,...,tau_d) together with the derived
// constants used everywhere else.  Every exponent must lie strictly inside
// (0,1); an exponent sum exactly equal to 1 is rejected because none of the
// downstream bounds is defined there.
struct HolderParams {
    explicit HolderParams(std::vector<double> exponents);

    int d() const { return static_cast<int>(taus.size()); }
    double tau(int k) const;  // generator index, 1-based

    std::vector<double> taus;
    double tau_max = 0.0;
    double tau_min = 0.0;
    double epsilon = 0.0;  // |tau_1 + ... + tau_d - 1|
    Regime regime = Regime::Subcritical;
};

// Integer label of a gap: one coordinate per generator, possibly negative.
struct MultiIndex {
    std::vector<int> coords;

    static MultiIndex zero(int d) { return MultiIndex{std::vector<int>(static_cast<std::size_t>(d), 0)}; }
    int dim() const { return static_cast<int>(coords.size()); }
    int at(int k) const;  // 1-based
    bool is_zero() const;
    bool operator==(const MultiIndex&) const = default;
};

bool operator<(const MultiIndex& a, const MultiIndex& b);  // lexicographic

struct Letter {
    int k = 1;     // generator index, 1-based
    int sign = 1;  // +1 for the generator, -1 for its inverse
};

// Finite composition word; letters[0] acts first.
struct Word {
    std::vector<Letter> letters;

    int size() const { return static_cast<int>(letters.size()); }
    MultiIndex displacement(int d) const;
};

struct CantorPoint {
    double base = 0.0;  // base-circle coordinate in [0,1)
};

struct GapPoint {
    MultiIndex index;
    double t = 0.0;  // affine local parameter in [0,1]
};

// Symbolic coordinate on the blown-up circle: either a surviving minimal-set
// point (tracked by its base-circle coordinate) or a point inside an
// inserted gap.  Gap endpoints t = 0 and t = 1 are legal values; only
// locate() converts between them and the adjacent minimal-set points.
using CirclePoint = std::variant<CantorPoint, GapPoint>;

bool is_gap(const CirclePoint&);
const GapPoint& as_gap(const CirclePoint&);
const CantorPoint& as_cantor(const CirclePoint&);

// Reduce x modulo the circumference into [0, circumference).  Exact (no
// rounding) whenever x is already in range.
double circle_reduce(double x, double circumference);

// The gap label reached from i by one application of generator k (sign +1)
// or its inverse (sign -1).
MultiIndex index_offset(const MultiIndex& i, int k, int sign);

}  // namespace denjoy
