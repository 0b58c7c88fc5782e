#include "runsx/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "runsx/errors.hpp"
#include "runsx/rng.hpp"

namespace runsx {

std::size_t GroupedDataset::max_group_size() const {
    std::size_t m = 0;
    for (const auto& g : groups) m = std::max(m, g.members.size());
    return m;
}

GroupedDataset group_by_time(std::span<const Observation> data, double tolerance) {
    if (data.empty()) throw std::invalid_argument("group_by_time: no observations");
    if (!(tolerance >= 0.0)) throw std::invalid_argument("group_by_time: negative tolerance");
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!std::isfinite(data[i].t) || !std::isfinite(data[i].y)) {
            throw std::invalid_argument("group_by_time: non-finite observation at index " +
                                        std::to_string(i));
        }
    }

    std::vector<std::uint32_t> order(data.size());
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return data[a].t < data[b].t; });

    GroupedDataset grouped;
    grouped.total_count = data.size();
    for (std::uint32_t idx : order) {
        if (grouped.groups.empty() || data[idx].t - grouped.groups.back().key > tolerance) {
            grouped.groups.push_back(Group{data[idx].t, {}});
        }
        grouped.groups.back().members.push_back(idx);
    }
    return grouped;
}

PermutationPlan draw_permutation(const GroupedDataset& grouped, std::uint64_t seed,
                                 std::uint64_t replicate) {
    PermutationPlan plan;
    plan.seed = seed;
    plan.replicate = replicate;
    plan.group_order.resize(grouped.groups.size());
    for (std::size_t gi = 0; gi < grouped.groups.size(); ++gi) {
        auto& order = plan.group_order[gi];
        order.resize(grouped.groups[gi].members.size());
        std::iota(order.begin(), order.end(), 0u);
        if (order.size() > 1) {
            rng::Xoshiro256 stream(rng::substream(seed, rng::kStreamPermute, replicate, gi));
            stream.shuffle(std::span<std::uint32_t>(order));
        }
    }
    return plan;
}

SignSequence residual_sign_sequence(const GroupedDataset& grouped, const PermutationPlan& plan,
                                    std::span<const double> residuals, ZeroPolicy policy,
                                    double zero_tolerance) {
    if (plan.group_order.size() != grouped.groups.size()) {
        throw std::invalid_argument("residual_sign_sequence: plan does not match grouping");
    }
    if (residuals.size() < grouped.total_count) {
        throw std::invalid_argument("residual_sign_sequence: residual vector too short");
    }
    SignSequence signs;
    signs.reserve(grouped.total_count);
    for (std::size_t gi = 0; gi < grouped.groups.size(); ++gi) {
        const auto& group = grouped.groups[gi];
        const auto& order = plan.group_order[gi];
        if (order.size() != group.members.size()) {
            throw std::invalid_argument("residual_sign_sequence: plan does not match grouping");
        }
        for (std::uint32_t slot : order) {
            const std::uint32_t idx = group.members[slot];
            const double e = residuals[idx];
            if (!std::isfinite(e)) {
                throw std::invalid_argument("residual_sign_sequence: non-finite residual at index " +
                                            std::to_string(idx));
            }
            if (std::abs(e) <= zero_tolerance) {
                if (policy == ZeroPolicy::Error) {
                    throw degenerate_data_error("zero residual at observation index " +
                                                std::to_string(idx) +
                                                "; no sign can be assigned");
                }
                continue;  // Drop
            }
            signs.push_back(e > 0.0 ? Sign::Positive : Sign::Negative);
        }
    }
    if (signs.empty()) {
        throw degenerate_data_error("all residuals were dropped as zero; nothing to test");
    }
    return signs;
}

std::vector<RunsTestResult> extended_runs_test(const GroupedDataset& grouped,
                                               std::span<const double> residuals,
                                               const ExtendedTestOptions& options) {
    if (options.replicates < 1) {
        throw std::invalid_argument("extended_runs_test: replicates must be at least 1");
    }
    std::vector<RunsTestResult> results;
    results.reserve(options.replicates);
    for (std::uint64_t rep = 0; rep < options.replicates; ++rep) {
        const PermutationPlan plan = draw_permutation(grouped, options.seed, rep);
        const SignSequence signs = residual_sign_sequence(grouped, plan, residuals,
                                                          options.zero_policy,
                                                          options.zero_tolerance);
        const RunsStatistic stat = count_runs(signs);
        if (stat.n_positive == 0 || stat.n_negative == 0) {
            throw degenerate_data_error(
                "runs test: all residuals share one sign; randomness is untestable");
        }
        if (stat.total() <= kExactRunsLimit) {
            results.push_back(runs_test_exact(stat));
        } else {
            results.push_back(runs_test_normal(stat, options.continuity_correction));
        }
    }
    return results;
}

std::vector<RunsTestResult> extended_runs_test(std::span<const Observation> data,
                                               std::span<const double> residuals,
                                               const ExtendedTestOptions& options) {
    if (residuals.size() != data.size()) {
        throw std::invalid_argument("extended_runs_test: one residual per observation required");
    }
    const GroupedDataset grouped = group_by_time(data, options.grouping_tolerance);
    return extended_runs_test(grouped, residuals, options);
}

}  // namespace runsx
