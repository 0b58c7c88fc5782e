#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "runsx/comparison.hpp"
#include "runsx/dataset.hpp"
#include "runsx/errors.hpp"
#include "runsx/polyfit.hpp"
#include "runsx/registry.hpp"
#include "runsx/rng.hpp"
#include "runsx/runs_test.hpp"
#include "runsx/simulation.hpp"

namespace {

using nlohmann::json;

constexpr const char* kSeedEnvVar = "RUNSX_SEED";

std::string timestamp_utc() {
    const std::time_t now =
        std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buffer[32];
    std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buffer;
}

// Common flags shared by every subcommand.
struct CommonCli {
    std::uint64_t seed = 0;
    CLI::Option* seed_option = nullptr;
    std::string format = "human";
    unsigned threads = 0;

    bool seed_generated = false;

    bool json_output() const { return format == "json"; }
};

void add_common_flags(CLI::App* cmd, CommonCli& common) {
    common.seed_option = cmd->add_option(
        "--seed", common.seed,
        "64-bit seed. Falls back to the RUNSX_SEED environment variable; "
        "when neither is set a seed is generated and reported");
    cmd->add_option("--format", common.format, "Output format")
        ->check(CLI::IsMember({"human", "json"}))
        ->capture_default_str();
    cmd->add_option("--threads", common.threads, "Worker threads (0 = hardware)")
        ->capture_default_str();
}

std::uint64_t parse_u64(std::string_view text, const std::string& what) {
    std::uint64_t value = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size()) {
        throw std::invalid_argument(what + " must be an unsigned 64-bit integer, got '" +
                                    std::string(text) + "'");
    }
    return value;
}

void resolve_seed(CommonCli& common) {
    if (common.seed_option != nullptr && common.seed_option->count() > 0) return;
    if (const char* env = std::getenv(kSeedEnvVar)) {
        common.seed = parse_u64(env, std::string(kSeedEnvVar));
        return;
    }
    std::random_device device;
    common.seed = (static_cast<std::uint64_t>(device()) << 32) ^ device();
    common.seed_generated = true;
}

// ---------------------------------------------------------------------------
// CSV input

struct InputData {
    std::vector<runsx::Observation> observations;
    std::vector<double> residuals;  // filled when precomputed
    bool precomputed = false;
};

std::string trim(std::string_view text) {
    const auto first = text.find_first_not_of(" \t");
    if (first == std::string_view::npos) return {};
    const auto last = text.find_last_not_of(" \t");
    return std::string(text.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (pos <= line.size()) {
        std::size_t comma = line.find(',', pos);
        if (comma == std::string::npos) comma = line.size();
        fields.push_back(trim(std::string_view(line).substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return fields;
}

double parse_double_field(const std::string& field, const std::string& where) {
    double value = 0.0;
    const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || end != field.data() + field.size()) {
        throw std::invalid_argument(where + ": bad number '" + field + "'");
    }
    if (!std::isfinite(value)) {
        throw std::invalid_argument(where + ": non-finite value '" + field + "'");
    }
    return value;
}

InputData read_input_csv(const std::string& path, bool expect_residuals) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open input: " + path);

    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw std::invalid_argument(path + ": empty file");
    ++line_no;
    if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<std::string> header = split_fields(line);
    for (auto& field : header) {
        std::transform(field.begin(), field.end(), field.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    }
    InputData input;
    if (header == std::vector<std::string>{"t", "y"}) {
        input.precomputed = false;
    } else if (header == std::vector<std::string>{"t", "residual"}) {
        input.precomputed = true;
    } else {
        throw std::invalid_argument(path + ":1: expected header `t,y` or `t,residual`, got '" +
                                    line + "'");
    }
    if (expect_residuals && !input.precomputed) {
        throw std::invalid_argument(path + ": --model none needs precomputed residuals "
                                           "(header `t,residual`)");
    }
    if (!expect_residuals && input.precomputed) {
        throw std::invalid_argument(path + ": header `t,residual` carries precomputed "
                                           "residuals; pass --model none");
    }

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const std::string where = path + ":" + std::to_string(line_no);
        const std::vector<std::string> fields = split_fields(line);
        if (fields.size() != 2) {
            throw std::invalid_argument(where + ": expected 2 fields, got " +
                                        std::to_string(fields.size()));
        }
        runsx::Observation obs;
        obs.t = parse_double_field(fields[0], where);
        const double value = parse_double_field(fields[1], where);
        if (input.precomputed) {
            input.residuals.push_back(value);
        } else {
            obs.y = value;
        }
        input.observations.push_back(obs);
    }
    if (input.observations.empty()) throw std::invalid_argument(path + ": no data rows");
    return input;
}

// ---------------------------------------------------------------------------
// Case selection shared by simulate / compare

struct SelectionCli {
    std::string case_text;
    std::string registry;
    std::string case_file;
};

void add_selection_flags(CLI::App* cmd, SelectionCli& selection) {
    auto* case_option =
        cmd->add_option("--case", selection.case_text,
                        "Case id (e.g. m4-t4) or inline comma-separated counts (e.g. 4,4,4,4)");
    auto* registry_option =
        cmd->add_option("--registry", selection.registry,
                        "Built-in registry: grid, unequal, stability, example, or catalog");
    auto* file_option = cmd->add_option("--case-file", selection.case_file,
                                        "Case file, one `counts trials seed` line per case");
    case_option->excludes(registry_option)->excludes(file_option);
    registry_option->excludes(file_option);
}

std::vector<runsx::SimulationCase> select_cases(const SelectionCli& selection,
                                                std::uint64_t master_seed,
                                                std::uint64_t trials_override) {
    const int given = static_cast<int>(!selection.case_text.empty()) +
                      static_cast<int>(!selection.registry.empty()) +
                      static_cast<int>(!selection.case_file.empty());
    if (given != 1) {
        throw std::invalid_argument("give exactly one of --case, --registry, --case-file");
    }
    std::vector<runsx::SimulationCase> cases;
    if (!selection.case_text.empty()) {
        if (selection.case_text.find_first_not_of("0123456789,") == std::string::npos) {
            runsx::SimulationCase inline_case;
            inline_case.id = "custom";
            inline_case.counts_per_timepoint = runsx::parse_counts(selection.case_text);
            inline_case.seed = master_seed;
            cases.push_back(std::move(inline_case));
        } else {
            cases.push_back(runsx::find_case(selection.case_text, master_seed));
        }
    } else if (!selection.registry.empty()) {
        cases = runsx::registry_cases(selection.registry, master_seed);
    } else {
        cases = runsx::load_case_file(selection.case_file);
    }
    if (trials_override > 0) {
        for (auto& simulation_case : cases) simulation_case.trials = trials_override;
    }
    for (const auto& simulation_case : cases) simulation_case.validate(true);
    return cases;
}

// ---------------------------------------------------------------------------
// Shared emit helpers

std::string ci_text(const runsx::ModeCenteredCI& ci) {
    if (!ci.defined) return "undef";
    return std::to_string(ci.lower) + "-" + std::to_string(ci.upper);
}

json ci_to_json(const runsx::ModeCenteredCI& ci) {
    return json{{"level", ci.level},
                {"defined", ci.defined},
                {"mode", ci.mode},
                {"lower", ci.lower},
                {"upper", ci.upper}};
}

json comparison_to_json(const runsx::CaseComparison& row) {
    json entry{{"id", row.id},
               {"n_points", row.n_points},
               {"trials", row.trials},
               {"ci95", ci_to_json(row.ci95)},
               {"ci99", ci_to_json(row.ci99)},
               {"runs", row.two_sample.runs},
               {"z", row.two_sample.z},
               {"p", row.two_sample.p},
               {"tie_break_seed", row.two_sample.seed},
               {"zero_residual_reruns", row.zero_residual_reruns},
               {"escalated", row.escalated}};
    if (row.escalated) {
        entry["escalated_trials"] = row.escalated_trials;
        entry["escalated_p"] = row.escalated_p;
        entry["escalation_ci_unchanged"] = row.escalation_ci_unchanged;
    }
    return entry;
}

json sidak_to_json(const runsx::SidakThreshold& threshold) {
    return json{{"alpha", threshold.alpha},
                {"comparisons", threshold.comparisons},
                {"threshold", threshold.threshold}};
}

void print_comparison_table(std::ostream& out, const std::vector<runsx::CaseComparison>& rows) {
    out << "  case       points   trials  ci95     ci99     runs      p  escalation\n";
    char line[256];
    for (const auto& row : rows) {
        std::snprintf(line, sizeof line, "  %-10s %6d %8llu  %-7s  %-7s  %4d  %.6f  ",
                      row.id.c_str(), row.n_points,
                      static_cast<unsigned long long>(row.trials), ci_text(row.ci95).c_str(),
                      ci_text(row.ci99).c_str(), row.two_sample.runs, row.two_sample.p);
        out << line;
        if (row.escalated) {
            std::snprintf(line, sizeof line, "p=%.6f at %llu trials, ci %s", row.escalated_p,
                          static_cast<unsigned long long>(row.escalated_trials),
                          row.escalation_ci_unchanged ? "unchanged" : "moved");
            out << line;
        } else {
            out << "none";
        }
        out << "\n";
    }
}

void print_seed_line(std::ostream& out, const CommonCli& common) {
    out << "seed: " << common.seed << (common.seed_generated ? " (generated)" : "") << "\n";
}

// ---------------------------------------------------------------------------
// test subcommand

struct TestCli {
    CommonCli common;
    std::string input;
    std::string model = "poly:0,1";
    std::uint64_t replicates = 1;
    double tolerance = 0.0;
    std::string zero_policy = "error";
};

const char* method_name(runsx::Method method) {
    return method == runsx::Method::Exact ? "exact" : "normal";
}

int cmd_test(const TestCli& cli) {
    const bool precomputed = cli.model == "none";
    InputData input = read_input_csv(cli.input, precomputed);
    const runsx::GroupedDataset grouped =
        runsx::group_by_time(input.observations, cli.tolerance);

    std::vector<double> residuals;
    std::vector<double> coefficients;
    double sse = 0.0;
    double zero_tolerance = 0.0;
    if (precomputed) {
        residuals = std::move(input.residuals);
    } else {
        const runsx::ModelSpec model = runsx::ModelSpec::parse(cli.model);
        runsx::FitResult fit = runsx::least_squares_fit(input.observations, model);
        residuals = std::move(fit.residuals);
        coefficients = std::move(fit.coefficients);
        sse = fit.sse;
        // Fitted residuals carry rounding noise, so "zero" means "zero at
        // machine precision relative to the data scale".
        double max_abs_y = 0.0;
        for (const auto& obs : input.observations) {
            max_abs_y = std::max(max_abs_y, std::fabs(obs.y));
        }
        zero_tolerance = 64.0 * std::numeric_limits<double>::epsilon() * max_abs_y;
    }

    if (std::all_of(residuals.begin(), residuals.end(),
                    [&](double e) { return std::fabs(e) <= zero_tolerance; })) {
        throw runsx::degenerate_data_error(
            "all residuals are zero: the model passes through every point, so "
            "randomness is untestable");
    }

    runsx::ExtendedTestOptions options;
    options.seed = cli.common.seed;
    options.replicates = cli.replicates;
    options.grouping_tolerance = cli.tolerance;
    options.zero_policy =
        cli.zero_policy == "drop" ? runsx::ZeroPolicy::Drop : runsx::ZeroPolicy::Error;
    options.zero_tolerance = zero_tolerance;
    const std::vector<runsx::RunsTestResult> results =
        runsx::extended_runs_test(grouped, residuals, options);

    std::vector<double> p_values;
    p_values.reserve(results.size());
    for (const auto& result : results) p_values.push_back(result.p_two_sided);
    std::vector<double> sorted_p = p_values;
    std::sort(sorted_p.begin(), sorted_p.end());
    const std::size_t n = sorted_p.size();
    const double p_median =
        n % 2 == 1 ? sorted_p[n / 2] : 0.5 * (sorted_p[n / 2 - 1] + sorted_p[n / 2]);

    if (cli.common.json_output()) {
        json report{{"command", "test"},
                    {"seed", cli.common.seed},
                    {"input", cli.input},
                    {"model", cli.model},
                    {"zero_policy", cli.zero_policy},
                    {"grouping_tolerance", cli.tolerance},
                    {"zero_tolerance", zero_tolerance},
                    {"observations", input.observations.size()},
                    {"groups", grouped.groups.size()},
                    {"max_group_size", grouped.max_group_size()},
                    {"replicates", cli.replicates}};
        if (!precomputed) {
            report["coefficients"] = coefficients;
            report["sse"] = sse;
        }
        report["results"] = json::array();
        for (std::size_t i = 0; i < results.size(); ++i) {
            const auto& result = results[i];
            report["results"].push_back(json{{"replicate", i},
                                             {"runs", result.statistic.runs},
                                             {"n_positive", result.statistic.n_positive},
                                             {"n_negative", result.statistic.n_negative},
                                             {"method", method_name(result.method)},
                                             {"p_too_few", result.p_too_few},
                                             {"p_too_many", result.p_too_many},
                                             {"p_two_sided", result.p_two_sided}});
        }
        report["p_two_sided"] = json{{"headline", p_values.front()},
                                     {"min", sorted_p.front()},
                                     {"median", p_median},
                                     {"max", sorted_p.back()}};
        std::cout << report.dump(2) << "\n";
        return 0;
    }

    std::ostream& out = std::cout;
    out << "# runsx test (generated " << timestamp_utc() << ")\n";
    print_seed_line(out, cli.common);
    out << "input: " << cli.input << "\n";
    out << "model: " << cli.model << "\n";
    out << "observations: " << input.observations.size() << " in " << grouped.groups.size()
        << " groups (largest " << grouped.max_group_size() << ")\n";
    if (!precomputed) {
        out << "coefficients:";
        for (double c : coefficients) out << " " << c;
        out << "\nsse: " << sse << "\n";
    }
    out << "zero policy: " << cli.zero_policy << " (tolerance " << zero_tolerance << ")\n";
    char line[256];
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& result = results[i];
        std::snprintf(line, sizeof line,
                      "replicate %zu: runs=%llu n+=%llu n-=%llu method=%s p_too_few=%.6g "
                      "p_too_many=%.6g p_two_sided=%.6g\n",
                      i, static_cast<unsigned long long>(result.statistic.runs),
                      static_cast<unsigned long long>(result.statistic.n_positive),
                      static_cast<unsigned long long>(result.statistic.n_negative),
                      method_name(result.method), result.p_too_few, result.p_too_many,
                      result.p_two_sided);
        out << line;
    }
    if (results.size() > 1) {
        std::snprintf(line, sizeof line,
                      "p_two_sided over %zu replicates: headline=%.6g min=%.6g median=%.6g "
                      "max=%.6g\n",
                      results.size(), p_values.front(), sorted_p.front(), p_median,
                      sorted_p.back());
        out << line;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// simulate subcommand

struct SimulateCli {
    CommonCli common;
    SelectionCli selection;
    std::uint64_t trials_override = 0;
    std::string histogram_out;
};

void write_histogram_lines(std::ostream& out, const runsx::RunsHistogram& histogram,
                           const char* indent) {
    for (std::size_t r = 0; r < histogram.counts.size(); ++r) {
        if (histogram.counts[r] == 0) continue;
        out << indent << r << " " << histogram.counts[r] << "\n";
    }
}

json histogram_to_json(const runsx::RunsHistogram& histogram) {
    json rows = json::array();
    for (std::size_t r = 0; r < histogram.counts.size(); ++r) {
        if (histogram.counts[r] == 0) continue;
        rows.push_back(json::array({r, histogram.counts[r]}));
    }
    return rows;
}

int cmd_simulate(const SimulateCli& cli) {
    const std::vector<runsx::SimulationCase> cases =
        select_cases(cli.selection, cli.common.seed, cli.trials_override);
    if (!cli.histogram_out.empty() && cases.size() != 1) {
        throw std::invalid_argument("--histogram-out needs exactly one selected case");
    }

    struct Row {
        const runsx::SimulationCase* simulation_case;
        runsx::RunsHistogram histogram;
        runsx::ModeCenteredCI ci95;
        runsx::ModeCenteredCI ci99;
    };
    std::vector<Row> rows;
    rows.reserve(cases.size());
    for (const auto& simulation_case : cases) {
        Row row;
        row.simulation_case = &simulation_case;
        row.histogram = runsx::run_case(simulation_case, cli.common.threads);
        row.ci95 = runsx::mode_centered_ci(row.histogram, 0.95);
        row.ci99 = runsx::mode_centered_ci(row.histogram, 0.99);
        rows.push_back(std::move(row));
    }

    if (!cli.histogram_out.empty()) {
        std::ofstream hist_out(cli.histogram_out);
        if (!hist_out) {
            throw std::invalid_argument("cannot write histogram file: " + cli.histogram_out);
        }
        write_histogram_lines(hist_out, rows.front().histogram, "");
    }

    if (cli.common.json_output()) {
        json report{{"command", "simulate"}, {"master_seed", cli.common.seed}};
        report["cases"] = json::array();
        for (const auto& row : rows) {
            const auto& simulation_case = *row.simulation_case;
            report["cases"].push_back(
                json{{"id", simulation_case.id},
                     {"counts_per_timepoint", simulation_case.counts_per_timepoint},
                     {"n_points", simulation_case.total_points()},
                     {"trials", simulation_case.trials},
                     {"seed", simulation_case.seed},
                     {"histogram", histogram_to_json(row.histogram)},
                     {"mode", row.histogram.mode()},
                     {"ci95", ci_to_json(row.ci95)},
                     {"ci99", ci_to_json(row.ci99)},
                     {"zero_residual_reruns", row.histogram.zero_residual_reruns}});
        }
        std::cout << report.dump(2) << "\n";
        return 0;
    }

    std::ostream& out = std::cout;
    out << "# runsx simulate (generated " << timestamp_utc() << ")\n";
    print_seed_line(out, cli.common);
    for (const auto& row : rows) {
        const auto& simulation_case = *row.simulation_case;
        out << "case " << simulation_case.id << ": counts";
        for (std::size_t j = 0; j < simulation_case.counts_per_timepoint.size(); ++j) {
            out << (j == 0 ? " " : ",") << simulation_case.counts_per_timepoint[j];
        }
        out << " (" << simulation_case.total_points() << " points), trials "
            << simulation_case.trials << ", seed " << simulation_case.seed << "\n";
        out << "  mode " << row.histogram.mode() << ", ci95 " << ci_text(row.ci95) << ", ci99 "
            << ci_text(row.ci99);
        if (row.histogram.zero_residual_reruns > 0) {
            out << ", zero-residual reruns " << row.histogram.zero_residual_reruns;
        }
        out << "\n  runs histogram:\n";
        write_histogram_lines(out, row.histogram, "    ");
    }
    return 0;
}

// ---------------------------------------------------------------------------
// compare subcommand

struct CompareCli {
    CommonCli common;
    SelectionCli selection;
    std::uint64_t trials_override = 0;
    double escalation_band = 10.0;
};

struct ComparisonRun {
    std::vector<runsx::CaseComparison> rows;
    runsx::SidakThreshold sidak05;
    runsx::SidakThreshold sidak01;
};

ComparisonRun run_comparisons(const std::vector<runsx::SimulationCase>& cases, unsigned threads,
                              double escalation_band) {
    ComparisonRun run;
    run.rows.reserve(cases.size());
    for (const auto& simulation_case : cases) {
        run.rows.push_back(runsx::compare_case(simulation_case, threads));
    }
    const int comparisons = static_cast<int>(cases.size());
    run.sidak05 = runsx::sidak_threshold(0.05, comparisons);
    run.sidak01 = runsx::sidak_threshold(0.01, comparisons);
    if (escalation_band > 0.0) {
        for (std::size_t i = 0; i < run.rows.size(); ++i) {
            if (runsx::needs_escalation(run.rows[i].two_sample.p, run.sidak05.threshold,
                                        escalation_band)) {
                run.rows[i] = runsx::escalate(cases[i], std::move(run.rows[i]), threads);
            }
        }
    }
    return run;
}

json comparison_run_to_json(const ComparisonRun& run) {
    json section{{"comparisons", run.rows.size()},
                 {"sidak", json::array({sidak_to_json(run.sidak05), sidak_to_json(run.sidak01)})}};
    section["cases"] = json::array();
    for (const auto& row : run.rows) section["cases"].push_back(comparison_to_json(row));
    return section;
}

void print_comparison_run(std::ostream& out, const ComparisonRun& run) {
    char line[160];
    std::snprintf(line, sizeof line,
                  "sidak thresholds over %d comparisons: alpha 0.05 -> %.6f, alpha 0.01 -> "
                  "%.6f\n",
                  run.sidak05.comparisons, run.sidak05.threshold, run.sidak01.threshold);
    out << line;
    print_comparison_table(out, run.rows);
}

int cmd_compare(const CompareCli& cli) {
    const std::vector<runsx::SimulationCase> cases =
        select_cases(cli.selection, cli.common.seed, cli.trials_override);
    const ComparisonRun run =
        run_comparisons(cases, cli.common.threads, cli.escalation_band);

    if (cli.common.json_output()) {
        json report{{"command", "compare"},
                    {"master_seed", cli.common.seed},
                    {"escalation_band", cli.escalation_band}};
        report.update(comparison_run_to_json(run));
        std::cout << report.dump(2) << "\n";
        return 0;
    }

    std::ostream& out = std::cout;
    out << "# runsx compare (generated " << timestamp_utc() << ")\n";
    print_seed_line(out, cli.common);
    print_comparison_run(out, run);
    return 0;
}

// ---------------------------------------------------------------------------
// reproduce subcommand

struct ReproduceCli {
    CommonCli common;
    std::uint64_t base_trials = 100000;
    double escalation_band = 10.0;
};

struct StabilityRow {
    std::string id;
    int n_points = 0;
    std::uint64_t trials = 0;
    runsx::ModeCenteredCI ci95;
    runsx::ModeCenteredCI ci99;
    std::uint64_t tenfold_trials = 0;
    runsx::ModeCenteredCI tenfold_ci95;
    runsx::ModeCenteredCI tenfold_ci99;
    bool unchanged = false;
};

bool same_ci(const runsx::ModeCenteredCI& a, const runsx::ModeCenteredCI& b) {
    if (a.defined != b.defined) return false;
    return !a.defined || (a.lower == b.lower && a.upper == b.upper);
}

std::vector<StabilityRow> run_stability(std::uint64_t master_seed, std::uint64_t base_trials,
                                        unsigned threads) {
    std::vector<StabilityRow> rows;
    for (runsx::SimulationCase simulation_case : runsx::stability_cases(master_seed)) {
        StabilityRow row;
        row.id = simulation_case.id;
        row.n_points = simulation_case.total_points();

        simulation_case.trials = base_trials;
        const runsx::RunsHistogram base = runsx::run_case(simulation_case, threads);
        row.trials = base_trials;
        row.ci95 = runsx::mode_centered_ci(base, 0.95);
        row.ci99 = runsx::mode_centered_ci(base, 0.99);

        simulation_case.trials = base_trials * 10;
        const runsx::RunsHistogram tenfold = runsx::run_case(simulation_case, threads);
        row.tenfold_trials = simulation_case.trials;
        row.tenfold_ci95 = runsx::mode_centered_ci(tenfold, 0.95);
        row.tenfold_ci99 = runsx::mode_centered_ci(tenfold, 0.99);

        row.unchanged =
            same_ci(row.ci95, row.tenfold_ci95) && same_ci(row.ci99, row.tenfold_ci99);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<runsx::SimulationCase> with_trials(std::vector<runsx::SimulationCase> cases,
                                               std::uint64_t trials) {
    for (auto& simulation_case : cases) simulation_case.trials = trials;
    return cases;
}

int cmd_reproduce(const ReproduceCli& cli) {
    const ComparisonRun grid =
        run_comparisons(with_trials(runsx::grid_cases(cli.common.seed), cli.base_trials),
                        cli.common.threads, cli.escalation_band);
    const ComparisonRun unequal =
        run_comparisons(with_trials(runsx::unequal_cases(cli.common.seed), cli.base_trials),
                        cli.common.threads, cli.escalation_band);
    const std::vector<StabilityRow> stability =
        run_stability(cli.common.seed, cli.base_trials, cli.common.threads);

    if (cli.common.json_output()) {
        json report{{"command", "reproduce"},
                    {"master_seed", cli.common.seed},
                    {"base_trials", cli.base_trials},
                    {"escalation_band", cli.escalation_band},
                    {"grid", comparison_run_to_json(grid)},
                    {"unequal", comparison_run_to_json(unequal)}};
        json stability_section;
        stability_section["cases"] = json::array();
        for (const auto& row : stability) {
            stability_section["cases"].push_back(
                json{{"id", row.id},
                     {"n_points", row.n_points},
                     {"trials", row.trials},
                     {"ci95", ci_to_json(row.ci95)},
                     {"ci99", ci_to_json(row.ci99)},
                     {"tenfold_trials", row.tenfold_trials},
                     {"tenfold_ci95", ci_to_json(row.tenfold_ci95)},
                     {"tenfold_ci99", ci_to_json(row.tenfold_ci99)},
                     {"unchanged", row.unchanged}});
        }
        report["stability"] = std::move(stability_section);
        std::cout << report.dump(2) << "\n";
        return 0;
    }

    std::ostream& out = std::cout;
    out << "# runsx reproduce (generated " << timestamp_utc() << ")\n";
    print_seed_line(out, cli.common);
    out << "base trials: " << cli.base_trials << "\n";
    out << "\nconstant-repeat grid\n";
    print_comparison_run(out, grid);
    out << "\nunequal-count cases\n";
    print_comparison_run(out, unequal);
    out << "\ntrial-count stability (base vs tenfold)\n";
    out << "  case       points   trials  ci95     ci99      trials10  ci95     ci99     "
           "unchanged\n";
    char line[200];
    for (const auto& row : stability) {
        std::snprintf(line, sizeof line, "  %-10s %6d %8llu  %-7s  %-7s  %9llu  %-7s  %-7s  %s\n",
                      row.id.c_str(), row.n_points, static_cast<unsigned long long>(row.trials),
                      ci_text(row.ci95).c_str(), ci_text(row.ci99).c_str(),
                      static_cast<unsigned long long>(row.tenfold_trials),
                      ci_text(row.tenfold_ci95).c_str(), ci_text(row.tenfold_ci99).c_str(),
                      row.unchanged ? "yes" : "NO");
        out << line;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Runs-test regression diagnostics with repeated-measurement support"};
    app.require_subcommand(1);

    TestCli test_cli;
    CLI::App* test_cmd =
        app.add_subcommand("test", "Runs test on the residuals of a fitted dataset");
    test_cmd->add_option("--input", test_cli.input,
                         "CSV with header `t,y`, or `t,residual` with --model none")
        ->required();
    test_cmd->add_option("--model", test_cli.model,
                         "Basis exponents `poly:0,1`, or `none` for precomputed residuals")
        ->capture_default_str();
    test_cmd->add_option("--replicates", test_cli.replicates,
                         "Permutation replicates; replicate 0 is the headline result")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    test_cmd->add_option("--tolerance", test_cli.tolerance, "Abscissa grouping tolerance")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    test_cmd->add_option("--zero-policy", test_cli.zero_policy, "Zero-residual policy")
        ->check(CLI::IsMember({"error", "drop"}))
        ->capture_default_str();
    add_common_flags(test_cmd, test_cli.common);

    SimulateCli simulate_cli;
    CLI::App* simulate_cmd = app.add_subcommand(
        "simulate", "Simulate the run-count distribution of a measurement layout");
    add_selection_flags(simulate_cmd, simulate_cli.selection);
    simulate_cmd->add_option("--trials", simulate_cli.trials_override,
                             "Override the trial count (0 = keep case values)");
    simulate_cmd->add_option("--histogram-out", simulate_cli.histogram_out,
                             "Write the histogram as `runs count` lines (single case only)");
    add_common_flags(simulate_cmd, simulate_cli.common);

    CompareCli compare_cli;
    CLI::App* compare_cmd = app.add_subcommand(
        "compare", "Compare repeated layouts against their evenly spaced equivalents");
    add_selection_flags(compare_cmd, compare_cli.selection);
    compare_cmd->add_option("--trials", compare_cli.trials_override,
                            "Override the trial count (0 = keep case values)");
    compare_cmd
        ->add_option("--escalation-band", compare_cli.escalation_band,
                     "Rerun at tenfold trials when p < band * threshold (0 disables)")
        ->capture_default_str();
    add_common_flags(compare_cmd, compare_cli.common);

    ReproduceCli reproduce_cli;
    CLI::App* reproduce_cmd = app.add_subcommand(
        "reproduce", "Run the full calibration suite: grid, unequal counts, stability");
    reproduce_cmd->add_option("--trials", reproduce_cli.base_trials, "Base trial count")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    reproduce_cmd
        ->add_option("--escalation-band", reproduce_cli.escalation_band,
                     "Rerun at tenfold trials when p < band * threshold (0 disables)")
        ->capture_default_str();
    add_common_flags(reproduce_cmd, reproduce_cli.common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& error) {
        const int code = app.exit(error);
        return code == 0 ? 0 : 1;
    }

    try {
        if (test_cmd->parsed()) {
            resolve_seed(test_cli.common);
            return cmd_test(test_cli);
        }
        if (simulate_cmd->parsed()) {
            resolve_seed(simulate_cli.common);
            return cmd_simulate(simulate_cli);
        }
        if (compare_cmd->parsed()) {
            resolve_seed(compare_cli.common);
            return cmd_compare(compare_cli);
        }
        if (reproduce_cmd->parsed()) {
            resolve_seed(reproduce_cli.common);
            return cmd_reproduce(reproduce_cli);
        }
    } catch (const runsx::degenerate_data_error& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 2;
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    }
    return 1;
}
