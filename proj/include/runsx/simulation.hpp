#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "runsx/dataset.hpp"

// Monte Carlo calibration of the permuted runs test: generate noisy
// linear data with repeated measurements, fit a straight line per trial,
// permute each timepoint's residuals, count runs, and summarize the run
// distribution with mode-centered coverage intervals.

namespace runsx {

struct GenParams {
    double noise_sd = 0.34;
    double slope = 2.0;
    double intercept = 1.0;
};

/// Layout plus generation parameters for one simulated scenario.
/// counts_per_timepoint[j] observations are placed at t = j + 1.
struct SimulationCase {
    std::string id;
    std::vector<int> counts_per_timepoint;
    GenParams gen;
    std::uint64_t trials = 100000;
    std::uint64_t seed = 0;

    int total_points() const;
    int timepoint_count() const { return static_cast<int>(counts_per_timepoint.size()); }

    /// Structural checks; Monte Carlo entry points additionally require
    /// at least 9 points and positive noise.
    void validate(bool for_monte_carlo) const;
};

/// Flattened abscissas, ascending, one per observation.
struct Layout {
    std::vector<double> abscissas;
};

Layout layout_of(const SimulationCase& simulation_case);

/// Same total number of points at unique abscissas evenly spaced between
/// 1 and the case's maximum timepoint.
Layout evenly_spaced_layout(const SimulationCase& simulation_case);

/// Distribution of run counts over the trials of one case.
struct RunsHistogram {
    std::vector<std::uint64_t> counts;  // indexed by run count
    std::uint64_t trials = 0;
    std::uint64_t zero_residual_reruns = 0;

    int min_observed() const;
    int max_observed() const;
    int mode() const;  // smallest run count attaining the maximal frequency
};

/// Narrowest window [mode - w, mode + w] whose empirical coverage
/// strictly exceeds the level. The window must be a proper subrange of
/// the observed run counts: if it would extend past the observed
/// support, or cover the entire multi-valued support, before reaching
/// the level, no interval is defined.
struct ModeCenteredCI {
    double level = 0.0;
    int mode = 0;
    int lower = -1;
    int upper = -1;
    bool defined = false;
};

ModeCenteredCI mode_centered_ci(const RunsHistogram& histogram, double level);

/// One synthetic dataset: y = slope * t + intercept + noise, noise drawn
/// i.i.d. normal on the substream hashed from (seed, trial).
std::vector<Observation> generate_trial(const Layout& layout, const GenParams& gen,
                                        std::uint64_t seed, std::uint64_t trial);
std::vector<Observation> generate_trial(const SimulationCase& simulation_case,
                                        std::uint64_t trial);

/// Run all trials of a layout: generate, fit a straight line, permute
/// tied groups, count runs. Trials own disjoint substreams, so the
/// histogram is identical under any thread count (0 = hardware).
/// The zero-residual policy is Error; such trials (never seen with
/// continuous noise) are redrawn from a reserved substream and counted.
RunsHistogram run_layout(const Layout& layout, const GenParams& gen, std::uint64_t trials,
                         std::uint64_t seed, unsigned threads = 0);

RunsHistogram run_case(const SimulationCase& simulation_case, unsigned threads = 0);

}  // namespace runsx
