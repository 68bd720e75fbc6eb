#include "denjoy/denjoy_builder.hpp"

#include "denjoy/dynamics_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

namespace denjoy {

namespace {

// Realized coordinates within 1e-12 of an orbit point are treated as that
// orbit point, so chart-level round trips stay exact; the constructor
// refuses windows whose orbit points come closer than 1e-8.
constexpr double kOrbitSnapTol = 1e-12;
constexpr double kOrbitSeparationMin = 1e-8;
constexpr double kMaxWindowCells = 4.0e6;

double window_cells(int d, int window) {
    double cells = 1.0;
    for (int k = 0; k < d; ++k) cells *= 2.0 * window + 1.0;
    return cells;
}

// Odometer over [-W, W]^d in lexicographic order.
bool next_label(std::vector<int>& c, int window) {
    for (std::size_t k = c.size(); k-- > 0;) {
        if (c[k] < window) {
            ++c[k];
            std::fill(c.begin() + static_cast<std::ptrdiff_t>(k) + 1, c.end(), -window);
            return true;
        }
    }
    return false;
}

}  // namespace

double gap_length(const HolderParams& params, const MultiIndex& i) {
    if (i.dim() != params.d())
        throw std::invalid_argument("gap_length: label dimension does not match exponents");
    double denom = 1.0;
    for (int k = 1; k <= params.d(); ++k) {
        double a = std::abs(static_cast<double>(i.at(k)));
        if (a != 0.0) denom += std::pow(a, 1.0 / params.tau(k));
    }
    return 1.0 / denom;
}

GapSum total_gap_sum(const HolderParams& params, int window) {
    if (params.regime != Regime::Subcritical)
        throw std::domain_error("total_gap_sum: gap series requires exponent sum below 1");
    if (window < 0)
        throw std::invalid_argument("total_gap_sum: window must be non-negative");
    const int d = params.d();
    if (window_cells(d, window) > kMaxWindowCells)
        throw std::length_error("total_gap_sum: window too large");

    GapSum out;
    std::vector<int> c(static_cast<std::size_t>(d), -window);
    MultiIndex idx;
    do {
        idx.coords = c;
        out.partial += gap_length(params, idx);
    } while (next_label(c, window));

    // Tail over {max_k |i_k| > W}.  Each omitted label has a dominating
    // coordinate k (largest |i_j|^{1/tau_j}) with n = |i_k| >= ceil((W+1)^{tau_k/tau_max})
    // and |i_j| <= n^{tau_j/tau_k} for the others.  Therefore
    //   tail <= sum_k sum_{n >= M_k} 2 * prod_{j != k} (2 n^{tau_j/tau_k} + 1) / (1 + n^{1/tau_k}).
    // Terms up to a cutoff are summed directly; past it the product is
    // expanded over subsets and each power sum is closed with the integral
    // comparison  sum_{n > N} n^{-b} <= N^{1-b}/(b - 1)  (valid for b > 1,
    // guaranteed here because the exponent sum is subcritical).
    const long kExactCutoff = 4096;
    for (int k = 1; k <= d; ++k) {
        const double tau_k = params.tau(k);
        double start = std::pow(static_cast<double>(window) + 1.0, tau_k / params.tau_max);
        long m_k = static_cast<long>(std::ceil(start * (1.0 - 1e-12)));  // biased low: over-covers
        if (m_k < 1) m_k = 1;

        std::vector<double> exp_other;  // tau_j / tau_k for j != k
        for (int j = 1; j <= d; ++j)
            if (j != k) exp_other.push_back(params.tau(j) / tau_k);

        const long n_cut = std::max(m_k - 1, kExactCutoff);
        double exact = 0.0;
        for (long n = m_k; n <= n_cut; ++n) {
            double nn = static_cast<double>(n);
            double card = 2.0;
            for (double a : exp_other) card *= 2.0 * std::pow(nn, a) + 1.0;
            exact += card / (1.0 + std::pow(nn, 1.0 / tau_k));
        }

        // Subset expansion of 2 * prod (2 n^a + 1) * n^{-1/tau_k} beyond n_cut.
        double rest = 0.0;
        const std::size_t subsets = std::size_t{1} << exp_other.size();
        for (std::size_t mask = 0; mask < subsets; ++mask) {
            double coeff = 2.0;
            double a_sum = 0.0;
            for (std::size_t j = 0; j < exp_other.size(); ++j) {
                if (mask & (std::size_t{1} << j)) {
                    coeff *= 2.0;
                    a_sum += exp_other[j];
                }
            }
            double beta = 1.0 / tau_k - a_sum;
            if (beta <= 1.0)
                throw internal_error("total_gap_sum: tail exponent not summable");
            rest += coeff * std::pow(static_cast<double>(n_cut), 1.0 - beta) / (beta - 1.0);
        }
        out.tail_bound += exact + rest;
    }
    return out;
}

DenjoySystem::DenjoySystem(HolderParams params, std::vector<double> rhos,
                           double base_point, int window)
    : params_(std::move(params)), rhos_(std::move(rhos)), base_point_(base_point), window_(window) {
    const int d = params_.d();
    if (static_cast<int>(rhos_.size()) != d)
        throw std::invalid_argument("DenjoySystem: one rotation number per generator required");
    for (double r : rhos_)
        if (!std::isfinite(r) || r <= 0.0 || r >= 1.0)
            throw std::invalid_argument("DenjoySystem: rotation numbers must lie in (0,1)");
    if (!std::isfinite(base_point_) || base_point_ < 0.0 || base_point_ >= 1.0)
        throw std::invalid_argument("DenjoySystem: base point must lie in [0,1)");
    if (window_ < 0)
        throw std::invalid_argument("DenjoySystem: window must be non-negative");
    if (params_.regime != Regime::Subcritical)
        throw std::domain_error("DenjoySystem: construction requires exponent sum below 1");
    if (!rationally_independent(rhos_))
        throw std::domain_error("DenjoySystem: rotation numbers fail the rational-independence screen");
    if (window_cells(d, window_) > kMaxWindowCells)
        throw std::length_error("DenjoySystem: window too large");

    GapSum sum = total_gap_sum(params_, window_);
    circumference_ = 1.0 + sum.partial;
    tail_bound_ = sum.tail_bound;

    const std::size_t cells = static_cast<std::size_t>(window_cells(d, window_));
    table_.reserve(cells);
    std::vector<int> c(static_cast<std::size_t>(d), -window_);
    do {
        RealizedGap g;
        g.index.coords = c;
        double shift = 0.0;
        for (int k = 1; k <= d; ++k)
            shift += static_cast<double>(g.index.at(k)) * rhos_[static_cast<std::size_t>(k - 1)];
        g.delta = circle_reduce(shift, 1.0);
        g.length = gap_length(params_, g.index);
        table_.push_back(std::move(g));
    } while (next_label(c, window_));

    std::sort(table_.begin(), table_.end(),
              [](const RealizedGap& a, const RealizedGap& b) { return a.delta < b.delta; });

    for (std::size_t r = 0; r + 1 < table_.size(); ++r)
        if (table_[r + 1].delta - table_[r].delta < kOrbitSeparationMin)
            throw std::domain_error("DenjoySystem: orbit points collide numerically; shrink the window");
    if (table_.size() > 1 && 1.0 - table_.back().delta + table_.front().delta < kOrbitSeparationMin)
        throw std::domain_error("DenjoySystem: orbit points collide numerically; shrink the window");

    double mass = 0.0;
    for (RealizedGap& g : table_) {
        g.left = g.delta + mass;
        mass += g.length;
    }

    position_.assign(cells, -1);
    for (std::size_t r = 0; r < table_.size(); ++r)
        position_[linear_index(table_[r].index)] = static_cast<std::int32_t>(r);
}

double DenjoySystem::rho(int k) const {
    if (k < 1 || k > params_.d())
        throw std::domain_error("DenjoySystem::rho: generator index out of range");
    return rhos_[static_cast<std::size_t>(k - 1)];
}

std::size_t DenjoySystem::linear_index(const MultiIndex& i) const {
    std::size_t out = 0;
    const std::size_t base = 2 * static_cast<std::size_t>(window_) + 1;
    for (int c : i.coords) out = out * base + static_cast<std::size_t>(c + window_);
    return out;
}

bool DenjoySystem::in_window(const MultiIndex& i) const {
    if (i.dim() != params_.d()) return false;
    return std::all_of(i.coords.begin(), i.coords.end(),
                       [this](int c) { return std::abs(c) <= window_; });
}

const DenjoySystem::RealizedGap& DenjoySystem::gap(const MultiIndex& i) const {
    if (!in_window(i))
        throw std::invalid_argument("DenjoySystem::gap: label outside the window");
    return table_[static_cast<std::size_t>(position_[linear_index(i)])];
}

std::ptrdiff_t DenjoySystem::find_orbit(double delta) const {
    auto it = std::lower_bound(table_.begin(), table_.end(), delta - kOrbitSnapTol,
                               [](const RealizedGap& g, double v) { return g.delta < v; });
    if (it != table_.end() && std::fabs(it->delta - delta) <= kOrbitSnapTol)
        return it - table_.begin();
    if (delta >= 1.0 - kOrbitSnapTol && !table_.empty() && table_.front().delta == 0.0)
        return 0;  // wrapped around the seam onto the marked point
    return -1;
}

double base_orbit_point(const DenjoySystem& sys, const MultiIndex& i) {
    if (i.dim() != sys.params().d())
        throw std::invalid_argument("base_orbit_point: label dimension mismatch");
    double shift = 0.0;
    for (int k = 1; k <= sys.params().d(); ++k)
        shift += static_cast<double>(i.at(k)) * sys.rho(k);
    return circle_reduce(sys.base_point() + shift, 1.0);
}

double blowup_coordinate(const DenjoySystem& sys, double x, GapSide side) {
    const double delta = circle_reduce(x - sys.base_point(), 1.0);
    const auto& table = sys.gaps();
    std::ptrdiff_t hit = sys.find_orbit(delta);
    if (hit >= 0) {
        const auto& g = table[static_cast<std::size_t>(hit)];
        return side == GapSide::Left ? g.left : g.left + g.length;
    }
    auto it = std::lower_bound(table.begin(), table.end(), delta,
                               [](const DenjoySystem::RealizedGap& g, double v) { return g.delta < v; });
    double mass = 0.0;  // gap mass inserted strictly before delta
    if (it != table.begin()) {
        const auto& prev = *(it - 1);
        mass = prev.left - prev.delta + prev.length;
    }
    return delta + mass;
}

CirclePoint locate(const DenjoySystem& sys, double y) {
    if (!std::isfinite(y) || y < 0.0 || y >= sys.circumference())
        throw std::domain_error("locate: coordinate outside [0, circumference)");
    const auto& table = sys.gaps();
    auto it = std::upper_bound(table.begin(), table.end(), y,
                               [](double v, const DenjoySystem::RealizedGap& g) { return v < g.left; });
    // First table entry sits at left = 0, so it != begin() always.
    const auto& g = *(it - 1);
    if (y < g.left + g.length)
        return GapPoint{g.index, (y - g.left) / g.length};
    double inserted = g.left - g.delta + g.length;  // total gap mass up to y
    return CantorPoint{circle_reduce(sys.base_point() + (y - inserted), 1.0)};
}

double realize_point(const DenjoySystem& sys, const CirclePoint& p) {
    if (is_gap(p)) {
        const GapPoint& g = std::get<GapPoint>(p);
        if (g.t < 0.0 || g.t > 1.0)
            throw std::domain_error("realize_point: local parameter outside [0,1]");
        if (sys.in_window(g.index)) {
            const auto& row = sys.gap(g.index);
            return row.left + g.t * row.length;
        }
        // Unrealized gap: collapsed onto its orbit position.
        return blowup_coordinate(sys, base_orbit_point(sys, g.index), GapSide::Right);
    }
    return blowup_coordinate(sys, std::get<CantorPoint>(p).base, GapSide::Right);
}

LocalGapImage local_gap_map(double t, double len_src, double len_dst) {
    if (!(t >= 0.0 && t <= 1.0))
        throw std::domain_error("local_gap_map: parameter outside [0,1]");
    if (!std::isfinite(len_src) || !std::isfinite(len_dst) || len_src <= 0.0 || len_dst <= 0.0)
        throw std::domain_error("local_gap_map: lengths must be positive");
    const double ratio = len_dst / len_src;
    if (ratio == 1.0) return {t, 1.0};
    if (t == 0.0 || t == 1.0) return {t, 1.0 / ratio};
    if (t == 0.5) return {0.5, ratio};
    // cot(pi t_out) = ratio * cot(pi t); written through atan2 so the poles
    // never get evaluated and t_out stays inside (0,1).
    const double s = std::sin(M_PI * t);
    const double c = std::cos(M_PI * t);
    double t_out = std::atan2(s, ratio * c) / M_PI;
    double dt = ratio / (s * s + ratio * ratio * c * c);
    return {t_out, dt};
}

CirclePoint apply_generator(const DenjoySystem& sys, const CirclePoint& p, int k, int sign) {
    if (k < 1 || k > sys.params().d())
        throw std::domain_error("apply_generator: generator index out of range");
    if (sign != 1 && sign != -1)
        throw std::domain_error("apply_generator: sign must be +1 or -1");
    if (!is_gap(p)) {
        double x = std::get<CantorPoint>(p).base;
        return CantorPoint{circle_reduce(x + sign * sys.rho(k), 1.0)};
    }
    const GapPoint& g = std::get<GapPoint>(p);
    MultiIndex to = index_offset(g.index, k, sign);
    double len_src = gap_length(sys.params(), g.index);
    double len_dst = gap_length(sys.params(), to);
    return GapPoint{std::move(to), local_gap_map(g.t, len_src, len_dst).t_out};
}

double generator_derivative(const DenjoySystem& sys, const CirclePoint& p, int k, int sign) {
    if (k < 1 || k > sys.params().d())
        throw std::domain_error("generator_derivative: generator index out of range");
    if (sign != 1 && sign != -1)
        throw std::domain_error("generator_derivative: sign must be +1 or -1");
    if (!is_gap(p)) return 1.0;
    const GapPoint& g = std::get<GapPoint>(p);
    double len_src = gap_length(sys.params(), g.index);
    double len_dst = gap_length(sys.params(), index_offset(g.index, k, sign));
    return (len_dst / len_src) * local_gap_map(g.t, len_src, len_dst).dt;
}

ConditionFReport verify_condition_F(const HolderParams& params, const MultiIndex& i, int k) {
    if (params.regime != Regime::Subcritical)
        throw std::domain_error("verify_condition_F: defined for exponent sums below 1");
    if (i.dim() != params.d())
        throw std::invalid_argument("verify_condition_F: label dimension mismatch");
    if (k < 1 || k > params.d())
        throw std::domain_error("verify_condition_F: generator index out of range");

    const double tau_k = params.tau(k);
    const double ik = static_cast<double>(i.at(k));
    double others = 0.0;  // sum over j != k of |i_j|^{1/tau_j}
    for (int j = 1; j <= params.d(); ++j) {
        if (j == k) continue;
        double a = std::abs(static_cast<double>(i.at(j)));
        if (a != 0.0) others += std::pow(a, 1.0 / params.tau(j));
    }
    auto pw = [&](double v) { return v == 0.0 ? 0.0 : std::pow(std::fabs(v), 1.0 / tau_k); };
    const double d_here = 1.0 + others + pw(ik);
    const double d_next = 1.0 + others + pw(ik + 1.0);
    ConditionFReport rep;
    rep.index = i;
    rep.k = k;
    rep.B = 1.0 + others;
    rep.a = i.at(k) < 0 ? -static_cast<long>(i.at(k)) : static_cast<long>(i.at(k)) + 1;
    rep.F_value = std::fabs(pw(ik + 1.0) - pw(ik)) / d_next * std::pow(d_here, tau_k);
    rep.bound = std::pow(2.0, 1.0 / params.tau_min) / params.tau_min;
    if (!(rep.F_value <= rep.bound))
        throw internal_error("verify_condition_F: regularity margin exceeded");
    return rep;
}

namespace {

double circle_distance(double a, double b, double circumference) {
    double arc = std::fabs(a - b);
    return std::min(arc, circumference - arc);
}

}  // namespace

double holder_estimate(const DenjoySystem& sys, int k, double tau, int n_samples,
                       std::uint64_t seed, int sign) {
    if (n_samples < 1)
        throw std::invalid_argument("holder_estimate: need at least one sample");
    if (!(tau > 0.0 && tau <= 1.0))
        throw std::domain_error("holder_estimate: exponent must lie in (0,1]");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const auto& table = sys.gaps();
    const std::size_t n_gaps = table.size();
    const double lambda = sys.circumference();

    auto log_deriv_at = [&](double y) {
        return std::log(generator_derivative(sys, locate(sys, y), k, sign));
    };
    auto gap_point = [&](std::size_t g, double t) { return table[g].left + t * table[g].length; };

    double best = 0.0;
    for (int s = 0; s < n_samples; ++s) {
        // Fixed four draws per sample keeps prefixes nested across sample counts.
        double u1 = uni(rng), u2 = uni(rng), u3 = uni(rng), u4 = uni(rng);
        double y1, y2;
        switch (s % 3) {
            case 0: {  // both points inside one gap
                if (n_gaps == 0) continue;
                std::size_t g = std::min(n_gaps - 1, static_cast<std::size_t>(u1 * n_gaps));
                y1 = gap_point(g, 0.02 + 0.96 * u2);
                y2 = gap_point(g, 0.02 + 0.96 * u3);
                break;
            }
            case 1: {  // points in two different gaps
                if (n_gaps < 2) continue;
                std::size_t g1 = std::min(n_gaps - 1, static_cast<std::size_t>(u1 * n_gaps));
                std::size_t g2 = std::min(n_gaps - 1, static_cast<std::size_t>(u2 * n_gaps));
                if (g1 == g2) continue;
                y1 = gap_point(g1, 0.02 + 0.96 * u3);
                y2 = gap_point(g2, 0.02 + 0.96 * u4);
                break;
            }
            default: {  // pair at a dyadic distance
                int j = 4 + static_cast<int>(u2 * 36.0);
                y1 = circle_reduce(u1 * lambda, lambda);
                y2 = circle_reduce(y1 + lambda * std::ldexp(1.0, -j), lambda);
                break;
            }
        }
        double dist = circle_distance(y1, y2, lambda);
        if (dist <= 0.0) continue;
        double q = std::fabs(log_deriv_at(y1) - log_deriv_at(y2)) / std::pow(dist, tau);
        best = std::max(best, q);
    }
    return best;
}

double holder_estimate(const std::function<double(double)>& log_derivative,
                       double circumference, double tau, int n_samples, std::uint64_t seed) {
    if (n_samples < 1)
        throw std::invalid_argument("holder_estimate: need at least one sample");
    if (!(tau > 0.0 && tau <= 1.0))
        throw std::domain_error("holder_estimate: exponent must lie in (0,1]");
    if (!(circumference > 0.0))
        throw std::domain_error("holder_estimate: circumference must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double best = 0.0;
    for (int s = 0; s < n_samples; ++s) {
        double u1 = uni(rng), u2 = uni(rng);
        double y1 = u1 * circumference;
        double y2;
        if (s % 2 == 0) {
            y2 = u2 * circumference;
        } else {
            int j = 4 + static_cast<int>(u2 * 36.0);
            y2 = circle_reduce(y1 + circumference * std::ldexp(1.0, -j), circumference);
        }
        double dist = circle_distance(y1, y2, circumference);
        if (dist <= 0.0) continue;
        double q = std::fabs(log_derivative(y1) - log_derivative(y2)) / std::pow(dist, tau);
        best = std::max(best, q);
    }
    return best;
}

void save_system(const DenjoySystem& sys, std::ostream& out) {
    out << "d = " << sys.params().d() << "\n";
    out << "taus =";
    for (std::size_t j = 0; j < sys.params().taus.size(); ++j)
        out << (j ? "," : "") << " " << std::hexfloat << sys.params().taus[j] << std::defaultfloat;
    out << "\n";
    out << "rhos =";
    for (std::size_t j = 0; j < sys.rhos().size(); ++j)
        out << (j ? "," : "") << " " << std::hexfloat << sys.rhos()[j] << std::defaultfloat;
    out << "\n";
    out << "base_point = " << std::hexfloat << sys.base_point() << std::defaultfloat << "\n";
    out << "window = " << sys.window() << "\n";
}

DenjoySystem load_system(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto strip = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        line = strip(line);
        if (line.empty() || line.front() == '[') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("load_system: line " + std::to_string(line_no) + ": expected key = value");
        std::string key = strip(line.substr(0, eq));
        std::string value = strip(line.substr(eq + 1));
        if (!kv.emplace(key, value).second)
            throw std::invalid_argument("load_system: line " + std::to_string(line_no) + ": duplicate key " + key);
    }
    auto need = [&](const std::string& key) {
        auto it = kv.find(key);
        if (it == kv.end()) throw std::invalid_argument("load_system: missing key " + key);
        return it->second;
    };
    auto parse_list = [](const std::string& s) {
        std::vector<double> out;
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(std::strtod(item.c_str(), nullptr));
        return out;
    };
    int d = std::stoi(need("d"));
    std::vector<double> taus = parse_list(need("taus"));
    std::vector<double> rhos = parse_list(need("rhos"));
    if (static_cast<int>(taus.size()) != d || static_cast<int>(rhos.size()) != d)
        throw std::invalid_argument("load_system: list lengths disagree with d");
    double base_point = std::strtod(need("base_point").c_str(), nullptr);
    int window = std::stoi(need("window"));
    return DenjoySystem(HolderParams(std::move(taus)), std::move(rhos), base_point, window);
}

}  // namespace denjoy
