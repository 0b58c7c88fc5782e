#include "runsx/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "runsx/errors.hpp"
#include "runsx/rng.hpp"
#include "runsx/runs_test.hpp"

namespace runsx {

namespace {

struct Labeled {
    double value;
    std::uint8_t label;  // 0 = first sample, 1 = second
};

}  // namespace

TwoSampleResult two_sample_runs_test(std::span<const double> sample_a,
                                     std::span<const double> sample_b, std::uint64_t seed) {
    if (sample_a.empty() || sample_b.empty()) {
        throw std::invalid_argument("two-sample runs test: both samples must be non-empty");
    }
    std::vector<Labeled> merged;
    merged.reserve(sample_a.size() + sample_b.size());
    for (double v : sample_a) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("two-sample runs test: non-finite value in sample A");
        }
        merged.push_back({v, 0});
    }
    for (double v : sample_b) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("two-sample runs test: non-finite value in sample B");
        }
        merged.push_back({v, 1});
    }
    std::stable_sort(merged.begin(), merged.end(),
                     [](const Labeled& x, const Labeled& y) { return x.value < y.value; });

    // Equal values carry no order information; their labels are shuffled
    // uniformly, block by block, from one dedicated stream.
    rng::Xoshiro256 shuffler(rng::substream(seed, rng::kStreamTieBreak, 0, 0));
    std::size_t block = 0;
    while (block < merged.size()) {
        std::size_t end = block + 1;
        while (end < merged.size() && merged[end].value == merged[block].value) ++end;
        for (std::size_t i = end - block; i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(shuffler.below(i));
            std::swap(merged[block + i - 1].label, merged[block + j].label);
        }
        block = end;
    }

    int runs = 1;
    for (std::size_t i = 1; i < merged.size(); ++i) {
        if (merged[i].label != merged[i - 1].label) ++runs;
    }

    const RunsMoments moments = runs_moments(sample_a.size(), sample_b.size());
    if (!(moments.variance > 0.0)) {
        throw degenerate_data_error("two-sample runs test: run-count variance is zero at sizes " +
                                    std::to_string(sample_a.size()) + " and " +
                                    std::to_string(sample_b.size()));
    }
    TwoSampleResult result;
    result.n_a = sample_a.size();
    result.n_b = sample_b.size();
    result.runs = runs;
    result.z = (static_cast<double>(runs) - moments.mean) / std::sqrt(moments.variance);
    result.p = rng::normal_cdf(result.z);
    result.seed = seed;
    return result;
}

SidakThreshold sidak_threshold(double alpha, int comparisons) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("sidak_threshold: alpha must lie in (0, 1)");
    }
    if (comparisons < 1) {
        throw std::invalid_argument("sidak_threshold: at least one comparison required");
    }
    SidakThreshold out;
    out.alpha = alpha;
    out.comparisons = comparisons;
    out.threshold = -std::expm1(std::log1p(-alpha) / comparisons);
    return out;
}

std::vector<double> histogram_sample(const RunsHistogram& histogram) {
    std::vector<double> sample;
    sample.reserve(histogram.trials);
    for (std::size_t r = 0; r < histogram.counts.size(); ++r) {
        sample.insert(sample.end(), histogram.counts[r], static_cast<double>(r));
    }
    return sample;
}

namespace {

bool same_bounds(const ModeCenteredCI& a, const ModeCenteredCI& b) {
    if (a.defined != b.defined) return false;
    return !a.defined || (a.lower == b.lower && a.upper == b.upper);
}

}  // namespace

CaseComparison compare_case(const SimulationCase& simulation_case, unsigned threads) {
    simulation_case.validate(true);
    const RunsHistogram repeated = run_case(simulation_case, threads);
    const Layout evenly = evenly_spaced_layout(simulation_case);
    const std::uint64_t evenly_seed =
        rng::substream(simulation_case.seed, rng::kStreamEvenSide, 0, 0);
    const RunsHistogram spread = run_layout(evenly, simulation_case.gen, simulation_case.trials,
                                            evenly_seed, threads);

    CaseComparison out;
    out.id = simulation_case.id;
    out.n_points = simulation_case.total_points();
    out.trials = simulation_case.trials;
    out.ci95 = mode_centered_ci(repeated, 0.95);
    out.ci99 = mode_centered_ci(repeated, 0.99);
    out.zero_residual_reruns = repeated.zero_residual_reruns + spread.zero_residual_reruns;
    out.two_sample = two_sample_runs_test(histogram_sample(repeated), histogram_sample(spread),
                                          simulation_case.seed);
    return out;
}

bool needs_escalation(double p, double threshold, double band) {
    return p < band * threshold;
}

CaseComparison escalate(const SimulationCase& simulation_case, CaseComparison base,
                        unsigned threads) {
    SimulationCase bigger = simulation_case;
    bigger.trials = simulation_case.trials * 10;
    bigger.seed = rng::substream(simulation_case.seed, rng::kStreamEscalate, 0, 0);
    const CaseComparison rerun = compare_case(bigger, threads);
    base.escalated = true;
    base.escalated_trials = bigger.trials;
    base.escalated_p = rerun.two_sample.p;
    base.escalation_ci_unchanged =
        same_bounds(base.ci95, rerun.ci95) && same_bounds(base.ci99, rerun.ci99);
    return base;
}

}  // namespace runsx
