#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "runsx/polyfit.hpp"
#include "runsx/rng.hpp"
#include "runsx/simulation.hpp"

using runsx::GenParams;
using runsx::generate_trial;
using runsx::Layout;
using runsx::layout_of;
using runsx::mode_centered_ci;
using runsx::ModeCenteredCI;
using runsx::Observation;
using runsx::run_case;
using runsx::run_layout;
using runsx::RunsHistogram;
using runsx::SimulationCase;

namespace {

SimulationCase make_case(std::vector<int> counts, std::uint64_t trials, std::uint64_t seed) {
    SimulationCase simulation_case;
    simulation_case.id = "test";
    simulation_case.counts_per_timepoint = std::move(counts);
    simulation_case.trials = trials;
    simulation_case.seed = seed;
    return simulation_case;
}

// Reference distribution measured once for four observations at each of
// four timepoints (100000 trials); the interval bounds below follow
// from it by direct accumulation around the mode.
RunsHistogram reference_histogram() {
    RunsHistogram histogram;
    histogram.counts.assign(17, 0);
    histogram.counts[3] = 78;
    histogram.counts[4] = 338;
    histogram.counts[5] = 1894;
    histogram.counts[6] = 4955;
    histogram.counts[7] = 11818;
    histogram.counts[8] = 17094;
    histogram.counts[9] = 21683;
    histogram.counts[10] = 18426;
    histogram.counts[11] = 13527;
    histogram.counts[12] = 6642;
    histogram.counts[13] = 2776;
    histogram.counts[14] = 643;
    histogram.counts[15] = 117;
    histogram.counts[16] = 9;
    histogram.trials = 100000;
    return histogram;
}

}  // namespace

TEST_CASE("layouts place counts at consecutive integer timepoints") {
    const Layout layout = layout_of(make_case({2, 1, 3}, 10, 1));
    CHECK(layout.abscissas == std::vector<double>{1, 1, 2, 3, 3, 3});
}

TEST_CASE("evenly spaced layouts span the same range with unique points") {
    const Layout even = runsx::evenly_spaced_layout(make_case({4, 4, 4, 4}, 10, 1));
    REQUIRE(even.abscissas.size() == 16);
    CHECK(even.abscissas.front() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(even.abscissas.back() == doctest::Approx(4.0).epsilon(1e-15));
    for (std::size_t i = 0; i < even.abscissas.size(); ++i) {
        CHECK(even.abscissas[i] == doctest::Approx(1.0 + i * 3.0 / 15.0).epsilon(1e-12));
    }
    const Layout ten = runsx::evenly_spaced_layout(make_case({2, 2, 2, 2, 2}, 10, 1));
    REQUIRE(ten.abscissas.size() == 10);
    CHECK(ten.abscissas[1] == doctest::Approx(1.0 + 4.0 / 9.0).epsilon(1e-12));
    // A layout with no repeats maps to itself (same count, same span).
    const Layout single = runsx::evenly_spaced_layout(make_case({1, 1, 1}, 10, 1));
    CHECK(single.abscissas == std::vector<double>{1, 2, 3});
}

TEST_CASE("generated trials follow the line exactly when noise is removed") {
    SimulationCase simulation_case = make_case({1, 1, 1, 1}, 10, 42);
    const Layout layout = layout_of(simulation_case);
    GenParams gen;  // slope 2, intercept 1
    gen.noise_sd = 0.0;
    const auto data = generate_trial(layout, gen, 42, 0);
    REQUIRE(data.size() == 4);
    for (std::size_t i = 0; i < data.size(); ++i) {
        CHECK(data[i].t == layout.abscissas[i]);
        CHECK(data[i].y == doctest::Approx(2.0 * data[i].t + 1.0).epsilon(1e-15));
    }
}

TEST_CASE("trial noise has the requested moments") {
    const Layout layout{std::vector<double>(100, 1.0)};
    GenParams gen;
    double sum = 0.0;
    double sum_sq = 0.0;
    std::size_t n = 0;
    for (std::uint64_t trial = 0; trial < 10000; ++trial) {
        const auto data = generate_trial(layout, gen, 777, trial);
        for (const auto& point : data) {
            const double noise = point.y - (gen.slope * point.t + gen.intercept);
            sum += noise;
            sum_sq += noise * noise;
            ++n;
        }
    }
    const double mean = sum / static_cast<double>(n);
    const double sd = std::sqrt(sum_sq / static_cast<double>(n) - mean * mean);
    CHECK(std::abs(mean) < 0.002);
    CHECK(std::abs(sd - 0.34) < 0.002);
}

TEST_CASE("trials are deterministic and distinct across indices") {
    const Layout layout = layout_of(make_case({3, 3, 3}, 10, 0));
    GenParams gen;
    const auto a = generate_trial(layout, gen, 5, 17);
    const auto b = generate_trial(layout, gen, 5, 17);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].t == b[i].t);
        CHECK(a[i].y == b[i].y);
    }
    const auto c = generate_trial(layout, gen, 5, 18);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].y != c[i].y) differs = true;
    }
    CHECK(differs);
}

TEST_CASE("histogram summaries report support and smallest mode") {
    const RunsHistogram histogram = reference_histogram();
    CHECK(histogram.min_observed() == 3);
    CHECK(histogram.max_observed() == 16);
    CHECK(histogram.mode() == 9);
    const std::uint64_t total =
        std::accumulate(histogram.counts.begin(), histogram.counts.end(), std::uint64_t{0});
    CHECK(total == histogram.trials);

    RunsHistogram tie;
    tie.counts = {0, 0, 5, 9, 9, 2};
    tie.trials = 25;
    CHECK(tie.mode() == 3);  // ties broken toward the smaller run count
}

TEST_CASE("mode-centered intervals reproduce the reference case") {
    const RunsHistogram histogram = reference_histogram();
    const ModeCenteredCI ci95 = mode_centered_ci(histogram, 0.95);
    CHECK(ci95.defined);
    CHECK(ci95.mode == 9);
    CHECK(ci95.lower == 5);
    CHECK(ci95.upper == 13);
    const ModeCenteredCI ci99 = mode_centered_ci(histogram, 0.99);
    CHECK(ci99.defined);
    CHECK(ci99.lower == 4);
    CHECK(ci99.upper == 14);
}

TEST_CASE("interval coverage is strict and minimal") {
    const RunsHistogram histogram = reference_histogram();
    const ModeCenteredCI ci = mode_centered_ci(histogram, 0.95);
    const auto coverage = [&](int lo, int hi) {
        std::uint64_t covered = 0;
        for (int r = lo; r <= hi; ++r) {
            if (r >= 0 && r < static_cast<int>(histogram.counts.size())) {
                covered += histogram.counts[static_cast<std::size_t>(r)];
            }
        }
        return static_cast<double>(covered);
    };
    const double needed = 0.95 * static_cast<double>(histogram.trials);
    CHECK(coverage(ci.lower, ci.upper) > needed);
    CHECK(coverage(ci.lower + 1, ci.upper - 1) <= needed);
}

TEST_CASE("a point-mass histogram yields a zero-width interval") {
    RunsHistogram histogram;
    histogram.counts = {0, 0, 0, 0, 100};
    histogram.trials = 100;
    const ModeCenteredCI ci = mode_centered_ci(histogram, 0.95);
    CHECK(ci.defined);
    CHECK(ci.lower == 4);
    CHECK(ci.upper == 4);
}

TEST_CASE("an interval spanning the whole observed range is undefined") {
    // Coverage is only reached by the full support, which localizes
    // nothing; a laxer level met by a proper subrange still works.
    RunsHistogram histogram;
    histogram.counts = {0, 0, 0, 5, 12, 28, 29, 19, 6, 1};
    histogram.trials = 100;
    CHECK(histogram.mode() == 6);
    CHECK_FALSE(mode_centered_ci(histogram, 0.95).defined);
    CHECK_FALSE(mode_centered_ci(histogram, 0.99).defined);
    const ModeCenteredCI ci50 = mode_centered_ci(histogram, 0.50);
    CHECK(ci50.defined);
    CHECK(ci50.lower == 5);
    CHECK(ci50.upper == 7);
}

TEST_CASE("intervals needing mass beyond the support are undefined") {
    // Mode one step from the support edge: the window hits the boundary
    // before its coverage clears the stricter level.
    RunsHistogram histogram;
    histogram.counts = {0, 0, 10, 40, 20, 15, 10, 5};
    histogram.trials = 100;
    const ModeCenteredCI ci95 = mode_centered_ci(histogram, 0.95);
    CHECK_FALSE(ci95.defined);
    CHECK(ci95.mode == 3);
    const ModeCenteredCI ci50 = mode_centered_ci(histogram, 0.50);
    CHECK(ci50.defined);  // a laxer level is reached before the boundary
    CHECK(ci50.lower == 2);
    CHECK(ci50.upper == 4);
}

TEST_CASE("interval arguments are validated") {
    RunsHistogram histogram;
    CHECK_THROWS_AS(mode_centered_ci(histogram, 0.95), std::invalid_argument);
    histogram.counts = {0, 10};
    histogram.trials = 10;
    CHECK_THROWS_AS(mode_centered_ci(histogram, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(mode_centered_ci(histogram, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(mode_centered_ci(histogram, -0.5), std::invalid_argument);
}

TEST_CASE("case simulation conserves trials and is deterministic") {
    const SimulationCase simulation_case = make_case({4, 4, 4, 4}, 20000, 91625);
    const RunsHistogram first = run_case(simulation_case, 1);
    const std::uint64_t total =
        std::accumulate(first.counts.begin(), first.counts.end(), std::uint64_t{0});
    CHECK(total == simulation_case.trials);
    CHECK(first.trials == simulation_case.trials);
    CHECK(first.zero_residual_reruns == 0);
    CHECK(first.min_observed() >= 2);
    CHECK(first.max_observed() <= 16);

    const RunsHistogram second = run_case(simulation_case, 1);
    CHECK(first.counts == second.counts);
}

TEST_CASE("histograms do not depend on the thread count") {
    const SimulationCase simulation_case = make_case({3, 3, 3, 3}, 8192, 5150);
    const RunsHistogram serial = run_case(simulation_case, 1);
    const RunsHistogram threaded = run_case(simulation_case, 4);
    CHECK(serial.counts == threaded.counts);
    CHECK(serial.zero_residual_reruns == threaded.zero_residual_reruns);
}

TEST_CASE("the trial loop matches the compositional pipeline") {
    using runsx::rng::kStreamTrial;
    using runsx::rng::substream;

    const SimulationCase simulation_case = make_case({2, 4, 3, 2}, 64, 31337);
    const Layout layout = layout_of(simulation_case);
    const RunsHistogram histogram =
        run_layout(layout, simulation_case.gen, simulation_case.trials, simulation_case.seed, 1);

    std::vector<Observation> protos;
    for (double t : layout.abscissas) protos.push_back({t, 0.0});
    const runsx::GroupedDataset grouped = runsx::group_by_time(protos, 0.0);
    const runsx::PolynomialDesign design(layout.abscissas, runsx::ModelSpec{{0, 1}});

    std::map<std::uint64_t, std::uint64_t> expected;
    for (std::uint64_t trial = 0; trial < simulation_case.trials; ++trial) {
        const auto data = generate_trial(layout, simulation_case.gen, simulation_case.seed, trial);
        std::vector<double> y(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) y[i] = data[i].y;
        std::vector<double> residuals(y.size());
        design.residuals_into(y, residuals);
        const std::uint64_t trial_seed = substream(simulation_case.seed, kStreamTrial, trial, 0);
        const auto plan = runsx::draw_permutation(grouped, trial_seed, 0);
        const auto signs =
            runsx::residual_sign_sequence(grouped, plan, residuals, runsx::ZeroPolicy::Error);
        ++expected[runsx::count_runs(signs).runs];
    }

    std::uint64_t checked = 0;
    for (std::size_t r = 0; r < histogram.counts.size(); ++r) {
        if (histogram.counts[r] == 0) continue;
        CHECK(histogram.counts[r] == expected[r]);
        ++checked;
    }
    CHECK(checked == expected.size());
}

TEST_CASE("simulation inputs are validated") {
    CHECK_THROWS_AS(run_case(make_case({2, 2, 2}, 100, 1), 1), std::invalid_argument);  // 6 < 9
    CHECK_THROWS_AS(run_case(make_case({3, 3, 3}, 0, 1), 1), std::invalid_argument);
    SimulationCase no_noise = make_case({3, 3, 3}, 100, 1);
    no_noise.gen.noise_sd = 0.0;
    CHECK_THROWS_AS(run_case(no_noise, 1), std::invalid_argument);
    SimulationCase bad_counts = make_case({3, 0, 3, 3}, 100, 1);
    CHECK_THROWS_AS(run_case(bad_counts, 1), std::invalid_argument);
    CHECK_THROWS_AS(run_case(make_case({}, 100, 1), 1), std::invalid_argument);

    Layout unsorted;
    unsorted.abscissas = {3, 1, 2, 2, 1, 3, 1, 2, 3};
    GenParams gen;
    CHECK_THROWS_AS(run_layout(unsorted, gen, 10, 1, 1), std::invalid_argument);
}
