#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "denjoy/circle_core.hpp"
#include "denjoy/denjoy_builder.hpp"
#include "denjoy/path_engine.hpp"

namespace denjoy {

// Closed interval [lo, hi] in a chart. On a circle of circumference c the
// endpoints live in the universal cover; hi may exceed c to straddle the seam.
struct ChartInterval {
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi - lo; }
};

// A finite family of circle (or line) homeomorphisms indexed by Letter.
// circumference() == 0 means the maps act on the real line.
class GeneratorSet {
public:
    virtual ~GeneratorSet() = default;
    virtual int count() const = 0;
    virtual double circumference() const = 0;
    virtual double apply(const Letter& letter, double y) const = 0;
    virtual double derivative(const Letter& letter, double y) const = 0;

    double apply_word(const Word& word, double y) const;
    double word_derivative(const Word& word, double y) const;
};

class DenjoyGenerators final : public GeneratorSet {
public:
    explicit DenjoyGenerators(const DenjoySystem& system) : system_(&system) {}
    int count() const override;
    double circumference() const override;
    double apply(const Letter& letter, double y) const override;
    double derivative(const Letter& letter, double y) const override;

private:
    const DenjoySystem* system_;
};

class RotationGenerators final : public GeneratorSet {
public:
    explicit RotationGenerators(std::vector<double> rhos);
    int count() const override;
    double circumference() const override { return 1.0; }
    double apply(const Letter& letter, double y) const override;
    double derivative(const Letter&, double) const override { return 1.0; }

private:
    std::vector<double> rhos_;
};

// Generators given directly as callables, for synthetic test scenarios.
class MapGenerators final : public GeneratorSet {
public:
    struct Generator {
        std::function<double(double)> forward;
        std::function<double(double)> inverse;
        std::function<double(double)> forward_derivative;
        std::function<double(double)> inverse_derivative;
    };
    MapGenerators(std::vector<Generator> generators, double circumference);
    int count() const override;
    double circumference() const override { return circumference_; }
    double apply(const Letter& letter, double y) const override;
    double derivative(const Letter& letter, double y) const override;

private:
    std::vector<Generator> generators_;
    double circumference_ = 0.0;
};

// Images [I, h_1(I), ..., h_n(I)] of an interval under the word prefixes.
std::vector<ChartInterval> word_images(const GeneratorSet& gens, const Word& word,
                                       const ChartInterval& interval);

// Distortion sum: the length of the j-th image raised to the exponent of the
// letter applied next, summed over all prefixes.
double word_sum(const std::vector<ChartInterval>& images, const Word& word,
                const HolderParams& params);

struct DistortionContext {
    Word word;
    ChartInterval interval;        // I
    std::vector<double> C_values;  // per generator: forward constant, then inverse
    double C = 0.0;
    double tau_max = 0.0;
    double S = 0.0;
    double L = 0.0;                // |I| / (2 exp(2^tau_max * C * S))
    ChartInterval J;               // I enlarged by 2L on both sides
    ChartInterval I_left;
    ChartInterval I_right;
};

DistortionContext make_distortion_context(const GeneratorSet& gens, const HolderParams& params,
                                          const Word& word, const ChartInterval& interval,
                                          std::vector<double> C_values);

struct DistortionStage {
    int stage = 0;
    double image_length = 0.0;  // |h_j(I)|
    double flank_length = 0.0;  // larger of |h_j(I_left)|, |h_j(I_right)|
    double ratio = 0.0;         // worst sampled derivative ratio over I with a flank
    bool length_ok = false;
    bool ratio_ok = false;
    bool near_threshold = false;
};

struct DistortionReport {
    bool ratio_bound_ok = true;
    double max_ratio = 1.0;
    double bound = 1.0;  // exp(2^tau_max * C * S)
    std::vector<DistortionStage> per_stage;
};

DistortionReport distortion_check(const GeneratorSet& gens, const HolderParams& params,
                                  const DistortionContext& context);

struct FixedPointResult {
    double x = 0.0;
    double multiplier = 0.0;
    double displacement = 0.0;
};

// Locates the attracting fixed point of the full word map inside context.J
// when the word returns I, disjointly, into the L-neighborhood of itself.
// Hypothesis failures yield nullopt rather than an error.
std::optional<FixedPointResult> hyperbolic_fixed_point(const GeneratorSet& gens,
                                                       const DistortionContext& context);

struct FixedPointSearch {
    bool found = false;
    double x = 0.0;
    double multiplier = 0.0;
    double displacement = 0.0;
};

// Bisection on the displacement of the word map over an explicit interval,
// with no distortion hypotheses attached.
FixedPointSearch find_fixed_point(const GeneratorSet& gens, const Word& word,
                                  const ChartInterval& window);

enum class Verdict { Contradiction, NoContradiction, Inconclusive };

struct DriverProbe {
    int M0 = 0;
    bool chain_found = false;
    int terminal_run = 0;
    double path_weight = 0.0;
};

struct DriverReport {
    Verdict verdict = Verdict::Inconclusive;
    std::vector<DriverProbe> trace;
    Word word;                          // supercritical witness
    double word_weight = 0.0;           // its distortion sum
    double stage_bound = 0.0;           // stage-wise bound dominating the sum
    std::vector<double> oracle_weights; // subcritical evidence over growing grids
};

// Word from a lattice path: one letter per unit step, in walk order.
Word path_word(const LatticePath& path);

// Supercritical weights: grows the schedule until the terminal straight run
// exceeds the covering constant, then reports the witness word and its bound.
// Subcritical weights: reports the diverging minimum-path weights instead.
DriverReport contradiction_driver(const WeightFn& weights, const HolderParams& params, int N,
                                  int M0_max);
DriverReport contradiction_driver(const DenjoySystem& system, int N, int M0_max);

}  // namespace denjoy
