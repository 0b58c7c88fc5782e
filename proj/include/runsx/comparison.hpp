#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "runsx/simulation.hpp"

// Two-sample runs test between run-count distributions (a repeated-
// measurement layout against its evenly spaced equivalent) with
// randomized tie-breaking, and the Sidak familywise threshold.

namespace runsx {

struct TwoSampleResult {
    std::size_t n_a = 0;
    std::size_t n_b = 0;
    int runs = 0;   // runs of the origin label after merge and tie shuffle
    double z = 0.0;
    double p = 0.0;  // lower tail: too few runs signal different populations
    std::uint64_t seed = 0;
};

/// Merge both samples, sort ascending, shuffle the origin labels
/// uniformly within each block of equal values, and count label runs.
/// p is P(R <= runs) under the normal approximation, without continuity
/// correction; at the sample sizes used here the correction is
/// immaterial.
TwoSampleResult two_sample_runs_test(std::span<const double> sample_a,
                                     std::span<const double> sample_b, std::uint64_t seed);

struct SidakThreshold {
    double alpha = 0.0;
    int comparisons = 0;
    double threshold = 0.0;  // 1 - (1 - alpha)^(1/comparisons)
};

/// Per-comparison critical p holding the familywise level at alpha over
/// `comparisons` independent comparisons.
SidakThreshold sidak_threshold(double alpha, int comparisons);

/// The histogram flattened into one value per trial, ascending.
std::vector<double> histogram_sample(const RunsHistogram& histogram);

struct CaseComparison {
    std::string id;
    int n_points = 0;
    std::uint64_t trials = 0;
    ModeCenteredCI ci95;
    ModeCenteredCI ci99;
    std::uint64_t zero_residual_reruns = 0;  // summed over both layouts
    TwoSampleResult two_sample;

    bool escalated = false;
    std::uint64_t escalated_trials = 0;
    double escalated_p = 0.0;
    bool escalation_ci_unchanged = false;
};

/// Simulate the repeated layout and its evenly spaced equivalent at the
/// same trial count (the evenly spaced side runs on a seed derived from
/// the case seed), compare the two run-count samples, and attach the
/// repeated side's mode-centered confidence intervals.
CaseComparison compare_case(const SimulationCase& simulation_case, unsigned threads = 0);

/// True when p falls below `band` times the per-comparison threshold,
/// close enough to warrant a higher-precision rerun.
bool needs_escalation(double p, double threshold, double band = 10.0);

/// Rerun the comparison at tenfold trials on a derived seed; record the
/// new p and whether the confidence bounds moved.
CaseComparison escalate(const SimulationCase& simulation_case, CaseComparison base,
                        unsigned threads = 0);

}  // namespace runsx
