#include "runsx/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "runsx/polyfit.hpp"
#include "runsx/rng.hpp"

namespace runsx {

int SimulationCase::total_points() const {
    int total = 0;
    for (int c : counts_per_timepoint) total += c;
    return total;
}

void SimulationCase::validate(bool for_monte_carlo) const {
    if (counts_per_timepoint.empty()) {
        throw std::invalid_argument("case: no timepoints");
    }
    for (int c : counts_per_timepoint) {
        if (c < 1) throw std::invalid_argument("case: every timepoint needs at least one point");
    }
    if (!(std::isfinite(gen.noise_sd) && gen.noise_sd >= 0.0)) {
        throw std::invalid_argument("case: noise standard deviation must be nonnegative");
    }
    if (!std::isfinite(gen.slope) || !std::isfinite(gen.intercept)) {
        throw std::invalid_argument("case: non-finite generator parameters");
    }
    if (for_monte_carlo) {
        if (total_points() < 9) {
            throw std::invalid_argument(
                "case: at least 9 points required for a meaningful runs test");
        }
        if (gen.noise_sd <= 0.0) {
            throw std::invalid_argument("case: Monte Carlo runs require positive noise");
        }
        if (trials < 1) throw std::invalid_argument("case: at least one trial required");
    }
}

Layout layout_of(const SimulationCase& simulation_case) {
    simulation_case.validate(false);
    Layout layout;
    layout.abscissas.reserve(static_cast<std::size_t>(simulation_case.total_points()));
    for (std::size_t j = 0; j < simulation_case.counts_per_timepoint.size(); ++j) {
        const double t = static_cast<double>(j + 1);
        for (int c = 0; c < simulation_case.counts_per_timepoint[j]; ++c) {
            layout.abscissas.push_back(t);
        }
    }
    return layout;
}

Layout evenly_spaced_layout(const SimulationCase& simulation_case) {
    simulation_case.validate(false);
    const int n = simulation_case.total_points();
    if (n < 2) throw std::invalid_argument("evenly spaced layout needs at least 2 points");
    const double t_max = static_cast<double>(simulation_case.timepoint_count());
    Layout layout;
    layout.abscissas.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        layout.abscissas[static_cast<std::size_t>(k)] =
            1.0 + static_cast<double>(k) * (t_max - 1.0) / static_cast<double>(n - 1);
    }
    return layout;
}

int RunsHistogram::min_observed() const {
    for (std::size_t r = 0; r < counts.size(); ++r) {
        if (counts[r] > 0) return static_cast<int>(r);
    }
    return -1;
}

int RunsHistogram::max_observed() const {
    for (std::size_t r = counts.size(); r-- > 0;) {
        if (counts[r] > 0) return static_cast<int>(r);
    }
    return -1;
}

int RunsHistogram::mode() const {
    std::uint64_t best = 0;
    int mode = -1;
    for (std::size_t r = 0; r < counts.size(); ++r) {
        if (counts[r] > best) {
            best = counts[r];
            mode = static_cast<int>(r);
        }
    }
    return mode;
}

ModeCenteredCI mode_centered_ci(const RunsHistogram& histogram, double level) {
    if (histogram.trials == 0) throw std::invalid_argument("mode_centered_ci: empty histogram");
    if (!(level > 0.0 && level < 1.0)) {
        throw std::invalid_argument("mode_centered_ci: level must lie in (0, 1)");
    }
    ModeCenteredCI ci;
    ci.level = level;
    ci.mode = histogram.mode();
    const int lo_support = histogram.min_observed();
    const int hi_support = histogram.max_observed();
    const double needed = level * static_cast<double>(histogram.trials);
    double covered = 0.0;
    int lo = ci.mode;
    int hi = ci.mode;
    for (int w = 0;; ++w) {
        lo = ci.mode - w;
        hi = ci.mode + w;
        if (lo < lo_support || hi > hi_support) break;  // window left the observed support
        if (w == 0) {
            covered = static_cast<double>(histogram.counts[static_cast<std::size_t>(ci.mode)]);
        } else {
            covered += static_cast<double>(histogram.counts[static_cast<std::size_t>(lo)]) +
                       static_cast<double>(histogram.counts[static_cast<std::size_t>(hi)]);
        }
        if (covered > needed) {
            // A window spanning every observed run count is the range
            // itself, not a subrange; it localizes nothing, so no
            // interval is reported. A single-valued histogram still
            // yields its zero-width interval.
            if (lo <= lo_support && hi >= hi_support && lo_support < hi_support) break;
            ci.lower = lo;
            ci.upper = hi;
            ci.defined = true;
            return ci;
        }
    }
    return ci;  // undefined
}

std::vector<Observation> generate_trial(const Layout& layout, const GenParams& gen,
                                        std::uint64_t seed, std::uint64_t trial) {
    rng::Xoshiro256 noise(rng::substream(seed, rng::kStreamNoise, trial, 0));
    std::vector<Observation> data(layout.abscissas.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double t = layout.abscissas[i];
        data[i].t = t;
        data[i].y = gen.slope * t + gen.intercept + gen.noise_sd * noise.normal();
    }
    return data;
}

std::vector<Observation> generate_trial(const SimulationCase& simulation_case,
                                        std::uint64_t trial) {
    return generate_trial(layout_of(simulation_case), simulation_case.gen, simulation_case.seed,
                          trial);
}

namespace {

// Per-thread trial runner over a fixed layout; buffers are reused.
class TrialRunner {
public:
    TrialRunner(const Layout& layout, const GroupedDataset& grouped,
                const PolynomialDesign& design, const GenParams& gen, std::uint64_t seed)
        : layout_(layout),
          grouped_(grouped),
          design_(design),
          gen_(gen),
          seed_(seed),
          y_(layout.abscissas.size()),
          residuals_(layout.abscissas.size()),
          order_(grouped.max_group_size()) {}

    // Returns the run count of one trial; counts redraws caused by an
    // exactly-zero residual.
    int run_trial(std::uint64_t trial, std::uint64_t& reruns) {
        std::uint64_t attempt = 0;
        for (;;) {
            rng::Xoshiro256 noise(rng::substream(seed_, rng::kStreamNoise, trial, attempt));
            for (std::size_t i = 0; i < y_.size(); ++i) {
                y_[i] = gen_.slope * layout_.abscissas[i] + gen_.intercept +
                        gen_.noise_sd * noise.normal();
            }
            design_.residuals_into(y_, residuals_);
            if (std::none_of(residuals_.begin(), residuals_.end(),
                             [](double e) { return e == 0.0; })) {
                break;
            }
            ++reruns;
            ++attempt;
        }

        const std::uint64_t trial_seed = rng::substream(seed_, rng::kStreamTrial, trial, attempt);
        int runs = 0;
        int prev = 0;  // 0 = none, +1, -1
        for (std::size_t gi = 0; gi < grouped_.groups.size(); ++gi) {
            const auto& members = grouped_.groups[gi].members;
            const std::size_t size = members.size();
            if (size == 1) {
                prev = step(residuals_[members[0]], prev, runs);
                continue;
            }
            std::iota(order_.begin(), order_.begin() + static_cast<std::ptrdiff_t>(size), 0u);
            rng::Xoshiro256 shuffler(rng::substream(trial_seed, rng::kStreamPermute, 0, gi));
            shuffler.shuffle(std::span<std::uint32_t>(order_.data(), size));
            for (std::size_t s = 0; s < size; ++s) {
                prev = step(residuals_[members[order_[s]]], prev, runs);
            }
        }
        return runs;
    }

private:
    static int step(double residual, int prev, int& runs) {
        const int sign = residual > 0.0 ? 1 : -1;
        if (sign != prev) ++runs;
        return sign;
    }

    const Layout& layout_;
    const GroupedDataset& grouped_;
    const PolynomialDesign& design_;
    const GenParams& gen_;
    std::uint64_t seed_;
    std::vector<double> y_;
    std::vector<double> residuals_;
    std::vector<std::uint32_t> order_;
};

}  // namespace

RunsHistogram run_layout(const Layout& layout, const GenParams& gen, std::uint64_t trials,
                         std::uint64_t seed, unsigned threads) {
    const std::size_t n = layout.abscissas.size();
    if (n < 9) throw std::invalid_argument("run_layout: at least 9 points required");
    if (!(gen.noise_sd > 0.0)) throw std::invalid_argument("run_layout: positive noise required");
    if (trials < 1) throw std::invalid_argument("run_layout: at least one trial required");
    if (!std::is_sorted(layout.abscissas.begin(), layout.abscissas.end())) {
        throw std::invalid_argument("run_layout: abscissas must be ascending");
    }

    std::vector<Observation> protos(n);
    for (std::size_t i = 0; i < n; ++i) protos[i].t = layout.abscissas[i];
    const GroupedDataset grouped = group_by_time(protos, 0.0);
    const PolynomialDesign design(layout.abscissas, ModelSpec{{0, 1}});

    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(
        std::min<std::uint64_t>(threads, std::max<std::uint64_t>(1, trials / 1024)));

    RunsHistogram total;
    total.counts.assign(n + 1, 0);
    total.trials = trials;

    auto run_range = [&](std::uint64_t first, std::uint64_t last, RunsHistogram& hist) {
        TrialRunner runner(layout, grouped, design, gen, seed);
        std::uint64_t reruns = 0;
        for (std::uint64_t trial = first; trial < last; ++trial) {
            const int r = runner.run_trial(trial, reruns);
            ++hist.counts[static_cast<std::size_t>(r)];
        }
        hist.zero_residual_reruns = reruns;
    };

    if (threads <= 1) {
        run_range(0, trials, total);
        return total;
    }

    std::vector<RunsHistogram> partial(threads);
    std::vector<std::thread> workers;
    workers.reserve(threads);
    const std::uint64_t chunk = (trials + threads - 1) / threads;
    for (unsigned w = 0; w < threads; ++w) {
        const std::uint64_t first = std::min<std::uint64_t>(w * chunk, trials);
        const std::uint64_t last = std::min<std::uint64_t>(first + chunk, trials);
        partial[w].counts.assign(n + 1, 0);
        workers.emplace_back(run_range, first, last, std::ref(partial[w]));
    }
    for (auto& worker : workers) worker.join();
    for (const auto& hist : partial) {
        for (std::size_t r = 0; r < total.counts.size(); ++r) total.counts[r] += hist.counts[r];
        total.zero_residual_reruns += hist.zero_residual_reruns;
    }
    return total;
}

RunsHistogram run_case(const SimulationCase& simulation_case, unsigned threads) {
    simulation_case.validate(true);
    return run_layout(layout_of(simulation_case), simulation_case.gen, simulation_case.trials,
                      simulation_case.seed, threads);
}

}  // namespace runsx
