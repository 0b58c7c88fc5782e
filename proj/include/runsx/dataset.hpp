#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "runsx/runs_test.hpp"

// Grouping of observations that share an abscissa, uniform random
// permutation of each group's internal order, and the runs test run on
// the resulting residual-sign sequence. Repeated measurements carry no
// inherent order, so each group's order is treated as a uniformly random
// permutation; groups that lie entirely on one side of the fit leave the
// run count unchanged under every permutation.

namespace runsx {

struct Observation {
    double t = 0.0;
    double y = 0.0;
};

/// One abscissa value and the input indices measured there.
struct Group {
    double key = 0.0;
    std::vector<std::uint32_t> members;  // indices into the input span, input order
};

/// Groups sorted by ascending key; every input index appears in exactly
/// one group.
struct GroupedDataset {
    std::vector<Group> groups;
    std::size_t total_count = 0;

    std::size_t max_group_size() const;
    bool has_ties() const { return max_group_size() > 1; }
};

/// Group observations whose t values agree within `tolerance` (default:
/// exact equality). Keys are the first value seen in the ascending sweep.
/// Non-finite coordinates are rejected with the offending index.
GroupedDataset group_by_time(std::span<const Observation> data, double tolerance = 0.0);

/// A chosen ordering for every group. Size-one groups always carry the
/// identity.
struct PermutationPlan {
    std::vector<std::vector<std::uint32_t>> group_order;
    std::uint64_t seed = 0;
    std::uint64_t replicate = 0;
};

/// Draw a plan whose per-group orderings are uniform over all k!
/// possibilities, via Fisher-Yates on a substream hashed from
/// (seed, replicate, group index). Deterministic in its inputs.
PermutationPlan draw_permutation(const GroupedDataset& grouped, std::uint64_t seed,
                                 std::uint64_t replicate);

enum class ZeroPolicy { Error, Drop };

/// Concatenate the groups in ascending-key order, each group's residuals
/// ordered by the plan, and map signs. Residuals within `zero_tolerance`
/// of zero follow the policy: Error names the observation, Drop skips it.
SignSequence residual_sign_sequence(const GroupedDataset& grouped, const PermutationPlan& plan,
                                    std::span<const double> residuals, ZeroPolicy policy,
                                    double zero_tolerance = 0.0);

struct ExtendedTestOptions {
    std::uint64_t seed = 0;
    std::uint64_t replicates = 1;
    double grouping_tolerance = 0.0;
    ZeroPolicy zero_policy = ZeroPolicy::Error;
    double zero_tolerance = 0.0;
    bool continuity_correction = true;  // used only past the exact limit
};

/// Runs test on permuted residual signs, one result per replicate;
/// replicate 0 is the headline result. Uses the exact distribution up to
/// kExactRunsLimit and the normal approximation past it. Datasets without
/// repeated abscissas give the classical test, identically for every
/// replicate.
std::vector<RunsTestResult> extended_runs_test(const GroupedDataset& grouped,
                                               std::span<const double> residuals,
                                               const ExtendedTestOptions& options);

std::vector<RunsTestResult> extended_runs_test(std::span<const Observation> data,
                                               std::span<const double> residuals,
                                               const ExtendedTestOptions& options);

}  // namespace runsx
