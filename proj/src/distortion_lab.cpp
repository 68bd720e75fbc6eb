#include "denjoy/distortion_lab.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace denjoy {

namespace {

constexpr int kBaseSamples = 64;
constexpr int kRefinedSamples = 256;
constexpr double kLengthSlack = 1e-12;
constexpr double kRatioTol = 1e-6;
constexpr double kNearThresholdFactor = 0.99;

void require_letter(const GeneratorSet& gens, const Letter& letter) {
    if (letter.k < 1 || letter.k > gens.count())
        throw std::invalid_argument("GeneratorSet: letter index out of range");
    if (letter.sign != 1 && letter.sign != -1)
        throw std::invalid_argument("GeneratorSet: letter sign must be +1 or -1");
}

double reduce_into_chart(double y, double circumference) {
    return circumference > 0.0 ? circle_reduce(y, circumference) : y;
}

void require_proper(const ChartInterval& interval, double circumference, const char* where) {
    if (!(interval.length() > 0.0))
        throw std::domain_error(std::string(where) + ": interval must have positive length");
    if (circumference > 0.0 && !(interval.length() < circumference))
        throw std::domain_error(std::string(where) + ": interval must be shorter than the circle");
}

ChartInterval apply_letter_to_interval(const GeneratorSet& gens, const Letter& letter,
                                       const ChartInterval& interval) {
    const double c = gens.circumference();
    if (c > 0.0) {
        double lo = gens.apply(letter, circle_reduce(interval.lo, c));
        double raw_hi = gens.apply(letter, circle_reduce(interval.hi, c));
        double len = circle_reduce(raw_hi - lo, c);
        if (!(len > 0.0))
            throw std::domain_error("word_images: image degenerated (left the realized window)");
        return {lo, lo + len};
    }
    double lo = gens.apply(letter, interval.lo);
    double hi = gens.apply(letter, interval.hi);
    if (!(hi > lo))
        throw std::domain_error("word_images: image degenerated (left the realized window)");
    return {lo, hi};
}

// Flank intervals may collapse below floating resolution when the threshold L
// underflows; propagate them tolerantly instead of rejecting.
ChartInterval advance_flank(const GeneratorSet& gens, const Letter& letter,
                            const ChartInterval& interval) {
    const double c = gens.circumference();
    if (c > 0.0) {
        double lo = gens.apply(letter, circle_reduce(interval.lo, c));
        if (!(interval.length() > 0.0)) return {lo, lo};
        double raw_hi = gens.apply(letter, circle_reduce(interval.hi, c));
        double len = circle_reduce(raw_hi - lo, c);
        if (len > c / 2.0) len = 0.0;  // wrap artifact of a collapsed pair
        return {lo, lo + len};
    }
    double lo = gens.apply(letter, interval.lo);
    double hi = gens.apply(letter, interval.hi);
    return {lo, std::max(lo, hi)};
}

// True when arc b lies inside arc a (closed, chart-relative), with slack.
bool contains_interval(const ChartInterval& a, const ChartInterval& b, double circumference,
                       double slack) {
    if (circumference > 0.0) {
        double rel = circle_reduce(b.lo - a.lo, circumference);
        return rel + b.length() <= a.length() + slack;
    }
    return b.lo >= a.lo - slack && b.hi <= a.hi + slack;
}

bool intervals_disjoint(const ChartInterval& a, const ChartInterval& b, double circumference) {
    if (circumference > 0.0) {
        double ab = circle_reduce(b.lo - a.lo, circumference);
        double ba = circle_reduce(a.lo - b.lo, circumference);
        return ab > a.length() && ba > b.length();
    }
    return b.lo > a.hi || a.lo > b.hi;
}

}  // namespace

double GeneratorSet::apply_word(const Word& word, double y) const {
    for (const Letter& letter : word.letters) y = apply(letter, y);
    return y;
}

double GeneratorSet::word_derivative(const Word& word, double y) const {
    double der = 1.0;
    for (const Letter& letter : word.letters) {
        der *= derivative(letter, y);
        y = apply(letter, y);
    }
    return der;
}

int DenjoyGenerators::count() const { return system_->params().d(); }
double DenjoyGenerators::circumference() const { return system_->circumference(); }

double DenjoyGenerators::apply(const Letter& letter, double y) const {
    require_letter(*this, letter);
    CirclePoint p = locate(*system_, circle_reduce(y, system_->circumference()));
    return realize_point(*system_, apply_generator(*system_, p, letter.k, letter.sign));
}

double DenjoyGenerators::derivative(const Letter& letter, double y) const {
    require_letter(*this, letter);
    CirclePoint p = locate(*system_, circle_reduce(y, system_->circumference()));
    return generator_derivative(*system_, p, letter.k, letter.sign);
}

RotationGenerators::RotationGenerators(std::vector<double> rhos) : rhos_(std::move(rhos)) {
    if (rhos_.empty()) throw std::invalid_argument("RotationGenerators: at least one angle required");
    for (double r : rhos_)
        if (!std::isfinite(r)) throw std::invalid_argument("RotationGenerators: angles must be finite");
}

int RotationGenerators::count() const { return static_cast<int>(rhos_.size()); }

double RotationGenerators::apply(const Letter& letter, double y) const {
    require_letter(*this, letter);
    return circle_reduce(circle_reduce(y, 1.0) + letter.sign * rhos_[static_cast<std::size_t>(letter.k - 1)], 1.0);
}

MapGenerators::MapGenerators(std::vector<Generator> generators, double circumference)
    : generators_(std::move(generators)), circumference_(circumference) {
    if (generators_.empty())
        throw std::invalid_argument("MapGenerators: at least one generator required");
    if (!(circumference_ >= 0.0))
        throw std::invalid_argument("MapGenerators: circumference must be 0 (line) or positive");
}

int MapGenerators::count() const { return static_cast<int>(generators_.size()); }

double MapGenerators::apply(const Letter& letter, double y) const {
    require_letter(*this, letter);
    const Generator& g = generators_[static_cast<std::size_t>(letter.k - 1)];
    return letter.sign > 0 ? g.forward(y) : g.inverse(y);
}

double MapGenerators::derivative(const Letter& letter, double y) const {
    require_letter(*this, letter);
    const Generator& g = generators_[static_cast<std::size_t>(letter.k - 1)];
    return letter.sign > 0 ? g.forward_derivative(y) : g.inverse_derivative(y);
}

std::vector<ChartInterval> word_images(const GeneratorSet& gens, const Word& word,
                                       const ChartInterval& interval) {
    const double c = gens.circumference();
    require_proper(interval, c, "word_images");
    ChartInterval cur = interval;
    if (c > 0.0) {
        double lo = circle_reduce(interval.lo, c);
        cur = {lo, lo + interval.length()};
    }
    std::vector<ChartInterval> images{cur};
    for (const Letter& letter : word.letters) {
        cur = apply_letter_to_interval(gens, letter, cur);
        images.push_back(cur);
    }
    return images;
}

double word_sum(const std::vector<ChartInterval>& images, const Word& word,
                const HolderParams& params) {
    if (images.size() != word.letters.size() + 1)
        throw std::invalid_argument("word_sum: one image per word prefix required");
    double s = 0.0;
    for (std::size_t n = 0; n < word.letters.size(); ++n)
        s += std::pow(images[n].length(), params.tau(word.letters[n].k));
    return s;
}

DistortionContext make_distortion_context(const GeneratorSet& gens, const HolderParams& params,
                                          const Word& word, const ChartInterval& interval,
                                          std::vector<double> C_values) {
    if (static_cast<int>(C_values.size()) != 2 * gens.count())
        throw std::invalid_argument(
            "make_distortion_context: one constant per generator and inverse required");
    for (double v : C_values)
        if (!std::isfinite(v) || v < 0.0)
            throw std::invalid_argument("make_distortion_context: constants must be >= 0");
    for (const Letter& letter : word.letters) require_letter(gens, letter);

    DistortionContext ctx;
    ctx.word = word;
    const double c = gens.circumference();
    std::vector<ChartInterval> images = word_images(gens, word, interval);
    ctx.interval = images[0];
    ctx.C_values = std::move(C_values);
    ctx.C = *std::max_element(ctx.C_values.begin(), ctx.C_values.end());
    ctx.tau_max = params.tau_max;
    ctx.S = word_sum(images, word, params);
    ctx.L = ctx.interval.length() / (2.0 * std::exp(std::pow(2.0, ctx.tau_max) * ctx.C * ctx.S));
    ctx.J = {ctx.interval.lo - 2.0 * ctx.L, ctx.interval.hi + 2.0 * ctx.L};
    if (c > 0.0 && !(ctx.J.length() < c))
        throw std::domain_error("make_distortion_context: enlarged interval wraps the circle");
    ctx.I_left = {ctx.J.lo, ctx.interval.lo};
    ctx.I_right = {ctx.interval.hi, ctx.J.hi};
    return ctx;
}

namespace {

struct SampleTrack {
    std::vector<double> pos;  // current images of the sample points
    std::vector<double> der;  // accumulated derivatives along the prefixes
};

SampleTrack seed_track(const ChartInterval& interval, double circumference, int n) {
    SampleTrack track;
    track.pos.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double y = interval.lo + interval.length() * i / (n - 1);
        track.pos.push_back(reduce_into_chart(y, circumference));
    }
    track.der.assign(static_cast<std::size_t>(n), 1.0);
    return track;
}

void advance_track(const GeneratorSet& gens, const Letter& letter, SampleTrack& track) {
    for (std::size_t i = 0; i < track.pos.size(); ++i) {
        track.der[i] *= gens.derivative(letter, track.pos[i]);
        track.pos[i] = gens.apply(letter, track.pos[i]);
    }
}

DistortionReport run_distortion_check(const GeneratorSet& gens, const DistortionContext& ctx,
                                      int samples) {
    const double c = gens.circumference();
    const double bound = std::exp(std::pow(2.0, ctx.tau_max) * ctx.C * ctx.S);
    DistortionReport report;
    report.bound = bound;

    ChartInterval img = ctx.interval, left = ctx.I_left, right = ctx.I_right;
    SampleTrack t_img = seed_track(img, c, samples);
    SampleTrack t_left = seed_track(left, c, samples);
    SampleTrack t_right = seed_track(right, c, samples);

    const int n0 = ctx.word.size();
    for (int j = 0; j <= n0; ++j) {
        if (j > 0) {
            const Letter& letter = ctx.word.letters[static_cast<std::size_t>(j - 1)];
            img = apply_letter_to_interval(gens, letter, img);
            left = advance_flank(gens, letter, left);
            right = advance_flank(gens, letter, right);
            advance_track(gens, letter, t_img);
            advance_track(gens, letter, t_left);
            advance_track(gens, letter, t_right);
        }
        DistortionStage stage;
        stage.stage = j;
        stage.image_length = img.length();
        stage.flank_length = std::max(left.length(), right.length());
        stage.length_ok = stage.flank_length <= stage.image_length * (1.0 + kLengthSlack);

        auto minmax_img = std::minmax_element(t_img.der.begin(), t_img.der.end());
        double ratio = 1.0;
        for (const SampleTrack* flank : {&t_left, &t_right}) {
            auto minmax_fl = std::minmax_element(flank->der.begin(), flank->der.end());
            double hi = std::max(*minmax_img.second, *minmax_fl.second);
            double lo = std::min(*minmax_img.first, *minmax_fl.first);
            ratio = std::max(ratio, hi / lo);
        }
        stage.ratio = ratio;
        stage.ratio_ok = ratio <= bound * (1.0 + kRatioTol);
        stage.near_threshold = ratio >= bound * kNearThresholdFactor;
        report.max_ratio = std::max(report.max_ratio, ratio);
        if (!stage.ratio_ok || !stage.length_ok) report.ratio_bound_ok = false;
        report.per_stage.push_back(stage);
    }
    return report;
}

}  // namespace

DistortionReport distortion_check(const GeneratorSet& gens, const HolderParams&,
                                  const DistortionContext& context) {
    DistortionReport report = run_distortion_check(gens, context, kBaseSamples);
    bool refine = false;
    for (const DistortionStage& stage : report.per_stage)
        if (stage.near_threshold) refine = true;
    if (refine) report = run_distortion_check(gens, context, kRefinedSamples);
    return report;
}

namespace {

struct Displacement {
    const GeneratorSet* gens;
    const Word* word;
    double anchor;
    double circumference;

    // Signed displacement of the word map in the chart anchored at `anchor`.
    double operator()(double x) const {
        double y = gens->apply_word(*word, reduce_into_chart(x, circumference));
        if (circumference > 0.0)
            return anchor + circle_reduce(y - anchor, circumference) - x;
        return y - x;
    }
};

FixedPointSearch bisect_displacement(const GeneratorSet& gens, const Word& word,
                                     const ChartInterval& window, double target) {
    Displacement disp{&gens, &word, window.lo, gens.circumference()};
    FixedPointSearch out;
    double lo = window.lo, hi = window.hi;
    double d_lo = disp(lo), d_hi = disp(hi);
    auto finish = [&](double x, double d) {
        out.x = reduce_into_chart(x, gens.circumference());
        out.displacement = std::abs(d);
        out.multiplier = gens.word_derivative(word, reduce_into_chart(x, gens.circumference()));
        out.found = out.displacement <= target;
        return out;
    };
    if (d_lo == 0.0) return finish(lo, d_lo);
    if (d_hi == 0.0) return finish(hi, d_hi);
    if ((d_lo > 0.0) == (d_hi > 0.0)) return out;  // no bracketed root
    for (int iter = 0; iter < 200; ++iter) {
        double mid = 0.5 * (lo + hi);
        double d_mid = disp(mid);
        if (std::abs(d_mid) <= target || hi - lo <= 1e-15 * window.length())
            return finish(mid, d_mid);
        if ((d_mid > 0.0) == (d_lo > 0.0)) {
            lo = mid;
            d_lo = d_mid;
        } else {
            hi = mid;
        }
    }
    double mid = 0.5 * (lo + hi);
    return finish(mid, disp(mid));
}

}  // namespace

FixedPointSearch find_fixed_point(const GeneratorSet& gens, const Word& word,
                                  const ChartInterval& window) {
    require_proper(window, gens.circumference(), "find_fixed_point");
    return bisect_displacement(gens, word, window, 1e-12 * window.length());
}

std::optional<FixedPointResult> hyperbolic_fixed_point(const GeneratorSet& gens,
                                                       const DistortionContext& context) {
    const double c = gens.circumference();
    const double slack = 1e-12 * context.J.length();

    std::vector<ChartInterval> images = word_images(gens, context.word, context.interval);
    const ChartInterval& final_image = images.back();
    if (!intervals_disjoint(context.interval, final_image, c)) return std::nullopt;
    ChartInterval l_nbhd{context.interval.lo - context.L, context.interval.hi + context.L};
    if (!contains_interval(l_nbhd, final_image, c, slack)) return std::nullopt;

    ChartInterval j_image = word_images(gens, context.word, context.J).back();
    if (!contains_interval(context.J, j_image, c, slack)) return std::nullopt;

    FixedPointSearch search =
        bisect_displacement(gens, context.word, context.J, 1e-12 * context.J.length());
    if (!search.found) return std::nullopt;
    return FixedPointResult{search.x, search.multiplier, search.displacement};
}

Word path_word(const LatticePath& path) {
    Word word;
    word.letters.reserve(path.alphas.size());
    for (std::size_t n = 0; n < path.alphas.size(); ++n)
        word.letters.push_back(Letter{path.alphas[n], path.signs[n]});
    return word;
}

DriverReport contradiction_driver(const WeightFn& weights, const HolderParams& params, int N,
                                  int M0_max) {
    if (N < 0) throw std::invalid_argument("contradiction_driver: covering constant must be >= 0");
    if (M0_max < 1) throw std::invalid_argument("contradiction_driver: at least one stage required");
    DriverReport report;

    if (params.regime == Regime::Supercritical) {
        for (int M0 = 1; M0 <= M0_max; ++M0) {
            RectangleSchedule sch = build_schedule(params, M0);
            std::vector<int> dims;
            for (int k = 1; k <= sch.d(); ++k) dims.push_back(static_cast<int>(sch.X(k, M0)));
            WeightGrid grid = materialize(weights, dims);
            ChainResult chain = admissible_chain(grid, sch);
            DriverProbe probe;
            probe.M0 = M0;
            probe.chain_found = chain.found;
            if (chain.found) {
                LatticePath path = extract_path(chain, sch);
                probe.terminal_run = terminal_run(path);
                probe.path_weight = path_weight(weights, path, params);
                report.trace.push_back(probe);
                if (probe.terminal_run > N) {
                    report.verdict = Verdict::Contradiction;
                    report.word = path_word(path);
                    report.word_weight = probe.path_weight;
                    report.stage_bound = theoretical_path_bound(sch).stage_sum;
                    return report;
                }
            } else {
                report.trace.push_back(probe);
            }
        }
        report.verdict = Verdict::Inconclusive;
        return report;
    }

    if (params.d() != 2)
        throw std::invalid_argument("contradiction_driver: two directions required below criticality");
    bool increasing = true;
    double prev = 0.0;
    for (int n : {4, 8, 16, 32, 64}) {
        WeightGrid grid = materialize(weights, {n + 1, n + 1});
        OracleResult oracle = oracle_min_path(grid, params);
        if (!report.oracle_weights.empty() && oracle.weight <= prev) increasing = false;
        prev = oracle.weight;
        report.oracle_weights.push_back(oracle.weight);
    }
    report.verdict = increasing ? Verdict::NoContradiction : Verdict::Inconclusive;
    return report;
}

DriverReport contradiction_driver(const DenjoySystem& system, int N, int M0_max) {
    const HolderParams& params = system.params();
    WeightFn weights = [&params](const MultiIndex& i) { return gap_length(params, i); };
    return contradiction_driver(weights, params, N, M0_max);
}

}  // namespace denjoy
