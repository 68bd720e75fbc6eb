#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "denjoy/denjoy_builder.hpp"
#include "denjoy/path_engine.hpp"

using namespace denjoy;

namespace {

WeightGrid random_grid(std::mt19937_64& rng, std::vector<int> dims, double total_mass) {
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    double cells = 1.0;
    for (int n : dims) cells *= n;
    std::vector<double> values(static_cast<std::size_t>(cells));
    double sum = 0.0;
    for (double& v : values) {
        v = unit(rng);
        sum += v;
    }
    for (double& v : values) v *= total_mass / sum;
    return WeightGrid(std::move(dims), std::move(values));
}

// Reachability over good-line tuples, written independently of the engine's
// corner-face bookkeeping: a chain exists iff some good line of the last
// stage is reachable through pairwise-intersecting predecessors.
bool brute_force_chain_exists(const WeightGrid& grid, const RectangleSchedule& sch) {
    std::vector<Line> prev = good_lines(grid, sch, 1);
    std::vector<char> alive(prev.size(), 1);
    for (int m = 2; m <= sch.M0; ++m) {
        std::vector<Line> cur = good_lines(grid, sch, m);
        std::vector<char> next_alive(cur.size(), 0);
        for (std::size_t b = 0; b < cur.size(); ++b)
            for (std::size_t a = 0; a < prev.size(); ++a)
                if (alive[a] && line_intersection(prev[a], cur[b], sch, m - 1, m)) {
                    next_alive[b] = 1;
                    break;
                }
        prev = std::move(cur);
        alive = std::move(next_alive);
    }
    for (char f : alive)
        if (f) return true;
    return prev.empty() ? false : false;
}

double exhaustive_min_path(const WeightGrid& grid, const HolderParams& params) {
    const int n1 = grid.dims()[0], n2 = grid.dims()[1];
    std::map<std::pair<int, int>, double> best{{{0, 0}, 0.0}};
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
            double here = best.at({i, j});
            if (i + 1 < n1) {
                double via = here + std::pow(grid.at({i, j}), params.tau(1));
                auto [it, fresh] = best.emplace(std::pair{i + 1, j}, via);
                if (!fresh && via < it->second) it->second = via;
            }
            if (j + 1 < n2) {
                double via = here + std::pow(grid.at({i, j}), params.tau(2));
                auto [it, fresh] = best.emplace(std::pair{i, j + 1}, via);
                if (!fresh && via < it->second) it->second = via;
            }
        }
    return best.at({n1 - 1, n2 - 1});
}

}  // namespace

TEST_CASE("WeightGrid validates and indexes row-major") {
    WeightGrid g({2, 3}, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
    CHECK(g.d() == 2);
    CHECK(g.at({0, 0}) == 0.1);
    CHECK(g.at({0, 2}) == 0.3);
    CHECK(g.at({1, 0}) == 0.4);
    CHECK(g.at(MultiIndex{{1, 2}}) == 0.6);
    CHECK(g.total() == doctest::Approx(2.1).epsilon(1e-15));
    CHECK_THROWS_AS(g.at({2, 0}), std::out_of_range);
    CHECK_THROWS_AS(g.at({0}), std::invalid_argument);
    CHECK_THROWS_AS(WeightGrid({2, 2}, {0.1, 0.2, 0.3}), std::invalid_argument);
    CHECK_THROWS_AS(WeightGrid({2}, {0.1, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(WeightGrid({2}, {0.1, -0.3}), std::invalid_argument);
    CHECK_THROWS_AS(WeightGrid({0}, {}), std::invalid_argument);
}

TEST_CASE("WeightGrid CSV round-trips exactly") {
    WeightGrid g({2, 2}, {0.4, 0.1, 0.2, 0.05});
    std::ostringstream out;
    g.to_csv(out);
    std::istringstream in(out.str());
    WeightGrid back = WeightGrid::from_csv(in);
    CHECK(back.dims() == g.dims());
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(back.at({i, j}) == g.at({i, j}));

    std::istringstream bad("i1,i2,value\n0,0,0.5\n1,1,0.25\n");
    CHECK_THROWS_AS(WeightGrid::from_csv(bad), std::invalid_argument);  // grid not filled
}

TEST_CASE("select_best_column finds the hand-checked minimum") {
    // columns: 0.4^t+0.2^t vs 0.1^t+0.05^t with t = 0.5
    WeightGrid g({2, 2}, {0.4, 0.1, 0.2, 0.05});
    auto [col, sum] = select_best_column(g, 0.5);
    CHECK(col == 1);
    CHECK(sum == doctest::Approx(std::sqrt(0.1) + std::sqrt(0.05)).epsilon(1e-15));
}

TEST_CASE("minimum column sum obeys the pigeonhole bound on random grids") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 100; ++trial) {
        int m = 1 + static_cast<int>(rng() % 8), n = 1 + static_cast<int>(rng() % 8);
        double tau = (trial % 2) ? 0.5 : 0.7;
        WeightGrid g = random_grid(rng, {m, n}, 0.995);
        auto [col, sum] = select_best_column(g, tau);
        CHECK(sum <= std::pow(m, 1.0 - tau) / std::pow(n, tau) + 1e-12);
        CHECK(col >= 0);
        CHECK(col < n);
    }
}

TEST_CASE("good_columns returns at least the guaranteed proportion") {
    std::mt19937_64 rng(202);
    for (int trial = 0; trial < 100; ++trial) {
        int m = 1 + static_cast<int>(rng() % 8), n = 1 + static_cast<int>(rng() % 8);
        WeightGrid g = random_grid(rng, {m, n}, 0.99);
        for (double A : {1.5, 2.0, 4.0}) {
            auto good = good_columns(g, 0.5, A);
            CHECK(static_cast<double>(good.size()) >= (1.0 - 1.0 / A) * n);
            for (std::size_t q = 1; q < good.size(); ++q) CHECK(good[q - 1] < good[q]);
        }
    }
    CHECK_THROWS_AS(good_columns(random_grid(rng, {2, 2}, 1.5), 0.5, 2.0), std::invalid_argument);
}

TEST_CASE("build_schedule reproduces the frozen growth numbers") {
    HolderParams params({0.6, 0.55});
    RectangleSchedule sch = build_schedule(params, 8, 2.0, 4.0);
    CHECK(sch.d() == 2);
    CHECK(sch.M0 == 8);
    CHECK(sch.A_base == 8.0);  // doubled from 2 until the factors leave room

    // direction alternates 1,2,1,2,...
    for (int m = 1; m <= 8; ++m) CHECK(sch.s(m) == (m % 2 == 1 ? 1 : 2));
    CHECK(sch.s(0) == 2);

    std::vector<int> x1, x2;
    for (int m = 1; m <= 8; ++m) {
        x1.push_back(sch.x[static_cast<std::size_t>(m)][0]);
        x2.push_back(sch.x[static_cast<std::size_t>(m)][1]);
    }
    CHECK(x1 == std::vector<int>{2, 2, 5, 5, 12, 12, 27, 27});
    CHECK(x2 == std::vector<int>{0, 2, 2, 4, 4, 9, 9, 21});
    CHECK(sch.inv_A_sum() < 1.0);
    CHECK(sch.X(1, 8) == 28);
    CHECK(sch.X(2, 8) == 22);

    CHECK_THROWS_AS(build_schedule(HolderParams({0.4, 0.35}), 4), std::domain_error);
    CHECK_THROWS_AS(build_schedule(HolderParams({0.6}), 4), std::domain_error);
    CHECK_THROWS_AS(build_schedule(params, 0), std::invalid_argument);
}

TEST_CASE("make_schedule validates manual stage data") {
    HolderParams params({0.6, 0.55});
    std::vector<std::vector<int>> x{{0, 0}, {2, 0}, {2, 3}};
    std::vector<double> A{0.0, 4.0, 4.0};
    RectangleSchedule sch = make_schedule(params, x, A);
    CHECK(sch.M0 == 2);
    CHECK(sch.A_base == 4.0);

    CHECK_THROWS_AS(make_schedule(params, {{0, 0}, {0, 0}}, {0.0, 4.0}), std::invalid_argument);
    CHECK_THROWS_AS(make_schedule(params, {{0, 0}, {2, 1}}, {0.0, 4.0}), std::invalid_argument);
    CHECK_THROWS_AS(make_schedule(params, {{0, 0}, {2, 0}}, {0.0, 0.9}), std::invalid_argument);
    CHECK_THROWS_AS(make_schedule(params, {{0, 0}, {2, 0}, {2, 3}}, {0.0, 2.0, 2.0}),
                    std::invalid_argument);  // 1/2 + 1/2 leaves no room
}

TEST_CASE("stage_lines span the rectangle face in lexicographic order") {
    HolderParams params({0.5, 0.3, 0.35});
    RectangleSchedule sch =
        make_schedule(params, {{0, 0, 0}, {2, 0, 0}, {2, 3, 0}, {2, 3, 2}}, {0.0, 9.0, 9.0, 9.0});
    auto lines1 = stage_lines(sch, 1);
    CHECK(lines1.size() == 1);  // other coordinates are still zero at stage 1
    CHECK(lines1[0].direction == 1);
    CHECK(lines1[0].base == MultiIndex{{0, 0, 0}});

    auto lines3 = stage_lines(sch, 3);
    CHECK(lines3.size() == 12);  // (x1+1) * (x2+1) = 3 * 4
    CHECK(lines3.front().base == MultiIndex{{0, 0, 0}});
    CHECK(lines3.back().base == MultiIndex{{2, 3, 0}});
    for (std::size_t q = 1; q < lines3.size(); ++q) CHECK(lines3[q - 1].base < lines3[q].base);
    CHECK_THROWS_AS(stage_lines(sch, 4), std::domain_error);
}

TEST_CASE("line_sum and line_bound agree with direct computation") {
    HolderParams params({0.6, 0.55});
    RectangleSchedule sch = make_schedule(params, {{0, 0}, {2, 0}, {2, 3}}, {0.0, 4.0, 4.0});
    WeightGrid g({3, 4}, std::vector<double>(12, 1.0 / 16.0));

    Line row{2, MultiIndex{{1, 0}}};
    double expect = 4.0 * std::pow(1.0 / 16.0, 0.55);
    CHECK(line_sum(g, sch, row, 2) == doctest::Approx(expect).epsilon(1e-15));

    double bound = line_bound(sch, 2);
    CHECK(bound == doctest::Approx(4.0 * std::pow(4.0, 0.45) / std::pow(3.0, 0.55)).epsilon(1e-15));
}

TEST_CASE("uniform mass makes every line good") {
    HolderParams params({0.6, 0.55});
    RectangleSchedule sch = build_schedule(params, 6);
    std::vector<int> dims{static_cast<int>(sch.X(1, 6)), static_cast<int>(sch.X(2, 6))};
    double cells = dims[0] * dims[1];
    WeightGrid g(dims, std::vector<double>(static_cast<std::size_t>(cells), 1.0 / (cells * (1 + 1e-9))));
    for (int m = 1; m <= 6; ++m)
        CHECK(good_lines(g, sch, m).size() == stage_lines(sch, m).size());
}

TEST_CASE("admissible_chain matches brute-force reachability on random d=3 instances") {
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> afac(3.4, 8.0);
    int found_count = 0;
    for (int trial = 0; trial < 30; ++trial) {
        HolderParams params({0.5, 0.4, 0.45});
        int M0 = 3 + static_cast<int>(rng() % 3);
        std::vector<std::vector<int>> x(static_cast<std::size_t>(M0) + 1, {0, 0, 0});
        for (int m = 1; m <= M0; ++m) {
            x[static_cast<std::size_t>(m)] = x[static_cast<std::size_t>(m - 1)];
            int k = ((m - 1) % 3 + 3) % 3;
            x[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)] +=
                1 + static_cast<int>(rng() % 2);
        }
        std::vector<double> A(static_cast<std::size_t>(M0) + 1, 0.0);
        for (int m = 1; m <= M0; ++m) A[static_cast<std::size_t>(m)] = M0 * afac(rng) / 3.0;
        RectangleSchedule sch = make_schedule(params, x, A);

        std::vector<int> dims;
        for (int k = 1; k <= 3; ++k) dims.push_back(static_cast<int>(sch.X(k, M0)));
        // mix benign and adversarial masses to exercise both outcomes
        WeightGrid g = random_grid(rng, dims, trial % 3 == 2 ? 1.0 : 0.6);

        ChainResult chain = admissible_chain(g, sch);
        CHECK(chain.found == brute_force_chain_exists(g, sch));
        if (chain.found) {
            ++found_count;
            for (int m = 1; m <= M0; ++m) {
                const Line& line = chain.lines[static_cast<std::size_t>(m)];
                CHECK(line.direction == sch.s(m));
                CHECK(line_sum(g, sch, line, m) <= line_bound(sch, m) * (1 + 1e-12));
                if (m > 1)
                    CHECK(line_intersection(chain.lines[static_cast<std::size_t>(m - 1)], line, sch,
                                            m - 1, m));
            }
        }
    }
    CHECK(found_count > 0);
}

TEST_CASE("admissible proportion never drops below the stage guarantee") {
    std::mt19937_64 rng(404);
    for (int trial = 0; trial < 20; ++trial) {
        HolderParams params({0.5, 0.4, 0.45});
        RectangleSchedule sch = make_schedule(
            params, {{0, 0, 0}, {2, 0, 0}, {2, 2, 0}, {2, 2, 2}, {4, 2, 2}},
            {0.0, 6.0, 6.0, 6.0, 6.0});
        std::vector<int> dims{static_cast<int>(sch.X(1, 4)), static_cast<int>(sch.X(2, 4)),
                              static_cast<int>(sch.X(3, 4))};
        WeightGrid g = random_grid(rng, dims, 0.98);
        ChainResult chain = admissible_chain(g, sch);
        REQUIRE(chain.admissible_trace.size() == 5);
        double floor_bound = 1.0;
        for (int m = 1; m <= 4; ++m) {
            floor_bound -= 1.0 / sch.A[static_cast<std::size_t>(m)];
            CHECK(chain.admissible_trace[static_cast<std::size_t>(m)] >= floor_bound - 1e-12);
        }
        CHECK(chain.found);
    }
}

TEST_CASE("line_intersection computes the meeting point or rejects") {
    HolderParams params({0.6, 0.55});
    RectangleSchedule sch = make_schedule(params, {{0, 0}, {3, 0}, {3, 4}}, {0.0, 4.0, 4.0});
    Line h{1, MultiIndex{{0, 0}}};
    Line v{2, MultiIndex{{2, 0}}};
    auto z = line_intersection(h, v, sch, 1, 2);
    REQUIRE(z);
    CHECK(*z == MultiIndex{{2, 0}});
    CHECK_FALSE(line_intersection(h, h, sch, 1, 1));
    Line far{2, MultiIndex{{9, 0}}};
    CHECK_FALSE(line_intersection(h, far, sch, 1, 2));  // meeting point outside stage 1
}

TEST_CASE("extract_path walks the chain with unit steps and a long final run") {
    HolderParams params({0.6, 0.55});
    RectangleSchedule sch = build_schedule(params, 8);
    std::vector<int> dims{static_cast<int>(sch.X(1, 8)), static_cast<int>(sch.X(2, 8))};
    double cells = dims[0] * dims[1];
    WeightGrid g(dims, std::vector<double>(static_cast<std::size_t>(cells), 1.0 / (cells * (1 + 1e-9))));

    ChainResult chain = admissible_chain(g, sch);
    REQUIRE(chain.found);
    LatticePath path = extract_path(chain, sch);
    REQUIRE(path.points.size() == path.alphas.size() + 1);
    REQUIRE(path.signs.size() == path.alphas.size());
    CHECK(path.points.front() == MultiIndex::zero(2));

    for (std::size_t n = 0; n + 1 < path.points.size(); ++n) {
        int moved = 0;
        for (int k = 1; k <= 2; ++k) {
            int diff = path.points[n + 1].at(k) - path.points[n].at(k);
            if (diff != 0) {
                ++moved;
                CHECK(std::abs(diff) == 1);
                CHECK(path.alphas[n] == k);
                CHECK(path.signs[n] == diff);
            }
        }
        CHECK(moved == 1);
        for (int k = 1; k <= 2; ++k) {
            CHECK(path.points[n].at(k) >= 0);
            CHECK(path.points[n].at(k) <= sch.x[8][static_cast<std::size_t>(k - 1)]);
        }
    }
    // final point reaches the far side of the last stage line
    CHECK(path.points.back().at(sch.s(8)) == sch.x[8][static_cast<std::size_t>(sch.s(8) - 1)]);
    CHECK(terminal_run(path) >= sch.x[8][1] - sch.x[6][1]);  // 21 - 9
}

TEST_CASE("path_weight stays under the stage-sum bound on random summable fields") {
    HolderParams params({0.6, 0.55});
    RectangleSchedule sch = build_schedule(params, 8);
    std::vector<int> dims{static_cast<int>(sch.X(1, 8)), static_cast<int>(sch.X(2, 8))};
    std::mt19937_64 rng(505);
    for (int trial = 0; trial < 20; ++trial) {
        WeightGrid g = random_grid(rng, dims, 0.999);
        ChainResult chain = admissible_chain(g, sch);
        REQUIRE(chain.found);
        LatticePath path = extract_path(chain, sch);
        PathBound bound = theoretical_path_bound(sch);
        double w = path_weight(as_weight_fn(g), path, params);
        CHECK(w <= bound.stage_sum * (1 + 1e-12));
        CHECK(bound.stage_sum <= bound.envelope * (1 + 1e-12));
    }
}

TEST_CASE("oracle_min_path matches hand and exhaustive results") {
    HolderParams half({0.5, 0.45});
    WeightGrid tiny({2, 2}, {0.4, 0.2, 0.1, 0.05});
    OracleResult o = oracle_min_path(tiny, HolderParams({0.5, 0.499999}));
    // cheapest: down (0.4^0.5) then right (0.1^t2), vs right-down
    CHECK(o.points.front() == MultiIndex{{0, 0}});
    CHECK(o.points.back() == MultiIndex{{1, 1}});
    REQUIRE(o.points.size() == 3);

    std::mt19937_64 rng(606);
    for (int trial = 0; trial < 40; ++trial) {
        int n1 = 2 + static_cast<int>(rng() % 4), n2 = 2 + static_cast<int>(rng() % 4);
        WeightGrid g = random_grid(rng, {n1, n2}, 0.9);
        OracleResult got = oracle_min_path(g, half);
        CHECK(got.weight == doctest::Approx(exhaustive_min_path(g, half)).epsilon(1e-13));
        // returned path must reproduce its own weight
        double acc = 0.0;
        for (std::size_t q = 0; q + 1 < got.points.size(); ++q) {
            int k = got.points[q + 1].at(1) != got.points[q].at(1) ? 1 : 2;
            acc += std::pow(g.at(got.points[q]), half.tau(k));
        }
        CHECK(acc == doctest::Approx(got.weight).epsilon(1e-13));
    }
}

TEST_CASE("materialize and as_weight_fn agree with the source") {
    HolderParams params({0.4, 0.35});
    WeightFn fn = [&params](const MultiIndex& i) { return gap_length(params, i); };
    WeightGrid g = materialize(fn, {3, 3});
    CHECK(g.at({0, 0}) == 1.0);
    CHECK(g.at({1, 0}) == 0.5);
    CHECK(g.at({2, 2}) == gap_length(params, MultiIndex{{2, 2}}));
    WeightFn back = as_weight_fn(g);
    CHECK(back(MultiIndex{{2, 1}}) == g.at({2, 1}));
}
