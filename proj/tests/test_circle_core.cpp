#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "denjoy/circle_core.hpp"

using namespace denjoy;

TEST_CASE("HolderParams classifies regimes and derives constants") {
    HolderParams sub({0.4, 0.35});
    CHECK(sub.regime == Regime::Subcritical);
    CHECK(sub.d() == 2);
    CHECK(sub.tau(1) == 0.4);
    CHECK(sub.tau(2) == 0.35);
    CHECK(sub.tau_max == 0.4);
    CHECK(sub.tau_min == 0.35);
    CHECK(sub.epsilon == doctest::Approx(0.25).epsilon(1e-15));

    HolderParams super({0.6, 0.55});
    CHECK(super.regime == Regime::Supercritical);
    CHECK(super.epsilon == doctest::Approx(0.15).epsilon(1e-12));
}

TEST_CASE("HolderParams rejects bad exponent vectors") {
    CHECK_THROWS_AS(HolderParams({}), std::invalid_argument);
    CHECK_THROWS_AS(HolderParams({0.0, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(HolderParams({1.0}), std::invalid_argument);
    CHECK_THROWS_AS(HolderParams({0.5, -0.2}), std::invalid_argument);
    CHECK_THROWS_AS(HolderParams({0.5, 0.5}), std::invalid_argument);  // exactly critical
    HolderParams one({0.7});
    CHECK(one.regime == Regime::Subcritical);
    CHECK_THROWS_AS(HolderParams({0.3}).tau(2), std::domain_error);
}

TEST_CASE("MultiIndex ordering and basics") {
    MultiIndex z = MultiIndex::zero(3);
    CHECK(z.is_zero());
    CHECK(z.dim() == 3);
    MultiIndex a{{1, -2, 0}};
    CHECK_FALSE(a.is_zero());
    CHECK(a.at(2) == -2);
    CHECK(MultiIndex{{0, 1}} < MultiIndex{{1, -5}});
    CHECK(MultiIndex{{1, -5}} < MultiIndex{{1, 0}});
    CHECK_FALSE(MultiIndex{{1, 0}} < MultiIndex{{1, 0}});
    CHECK(index_offset(a, 1, 1) == MultiIndex{{2, -2, 0}});
    CHECK(index_offset(a, 3, -1) == MultiIndex{{1, -2, -1}});
    CHECK_THROWS_AS(index_offset(a, 4, 1), std::domain_error);
    CHECK_THROWS_AS(index_offset(a, 1, 0), std::domain_error);
}

TEST_CASE("Word displacement counts letters with sign, first letter acting first") {
    Word w{{Letter{1, 1}, Letter{2, 1}, Letter{1, -1}, Letter{1, 1}, Letter{2, -1}}};
    CHECK(w.size() == 5);
    CHECK(w.displacement(2) == MultiIndex{{1, 0}});
    CHECK(Word{}.displacement(3) == MultiIndex::zero(3));
}

TEST_CASE("circle_reduce is exact in range and wraps correctly") {
    CHECK(circle_reduce(0.3, 1.0) == 0.3);
    CHECK(circle_reduce(0.0, 2.5) == 0.0);
    CHECK(circle_reduce(1.3, 1.0) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(circle_reduce(-0.25, 1.0) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(circle_reduce(2.5, 2.5) == 0.0);   // seam maps to zero
    CHECK(circle_reduce(-3.0, 1.5) == 0.0);
    double eps = 1e-18;
    CHECK(circle_reduce(1.0 - eps, 1.0) < 1.0);  // never returns the circumference
    CHECK_THROWS_AS(circle_reduce(std::numeric_limits<double>::quiet_NaN(), 1.0),
                    std::domain_error);
    CHECK_THROWS_AS(circle_reduce(0.1, 0.0), std::domain_error);
}

TEST_CASE("CirclePoint variant helpers") {
    CirclePoint c = CantorPoint{0.25};
    CirclePoint g = GapPoint{MultiIndex{{1, 0}}, 0.5};
    CHECK_FALSE(is_gap(c));
    CHECK(is_gap(g));
    CHECK(as_cantor(c).base == 0.25);
    CHECK(as_gap(g).t == 0.5);
    CHECK(as_gap(g).index == MultiIndex{{1, 0}});
    CHECK_THROWS_AS(as_gap(c), std::domain_error);
    CHECK_THROWS_AS(as_cantor(g), std::domain_error);
}
