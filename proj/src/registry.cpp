#include "runsx/registry.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "runsx/rng.hpp"

namespace runsx {

namespace {

SimulationCase make_case(std::string id, std::vector<int> counts, std::uint64_t master_seed,
                         std::uint64_t ordinal) {
    SimulationCase simulation_case;
    simulation_case.id = std::move(id);
    simulation_case.counts_per_timepoint = std::move(counts);
    simulation_case.seed = rng::substream(master_seed, rng::kStreamCase, ordinal, 0);
    return simulation_case;
}

constexpr std::uint64_t kGridSize = 46;

}  // namespace

std::vector<SimulationCase> grid_cases(std::uint64_t master_seed) {
    std::vector<SimulationCase> cases;
    cases.reserve(kGridSize);
    std::uint64_t ordinal = 0;
    for (int m = 2; m <= 5; ++m) {
        const int first_timepoints = m == 2 ? 5 : 3;
        for (int timepoints = first_timepoints; timepoints <= 14; ++timepoints) {
            std::string id = "m" + std::to_string(m) + "-t" + std::to_string(timepoints);
            cases.push_back(make_case(std::move(id),
                                      std::vector<int>(static_cast<std::size_t>(timepoints), m),
                                      master_seed, ordinal));
            ++ordinal;
        }
    }
    return cases;
}

std::vector<SimulationCase> unequal_cases(std::uint64_t master_seed) {
    static const std::vector<std::vector<int>> kLayouts = {
        {2, 3, 3, 3, 3, 3, 3, 3},
        {2, 4, 5, 3, 5, 3, 4, 5, 5, 5, 5, 4, 5, 3},
        {5, 5, 5, 4, 5, 4, 5, 4, 5, 3, 5, 4, 5, 3},
        {4, 5, 5, 5, 4, 5, 4, 5, 5, 5, 5, 5, 5, 5},
    };
    std::vector<SimulationCase> cases;
    cases.reserve(kLayouts.size());
    std::uint64_t ordinal = kGridSize;
    for (const auto& layout : kLayouts) {
        int total = 0;
        for (int c : layout) total += c;
        cases.push_back(make_case("uneq-n" + std::to_string(total), layout, master_seed, ordinal));
        ++ordinal;
    }
    return cases;
}

std::vector<SimulationCase> catalog_cases(std::uint64_t master_seed) {
    std::vector<SimulationCase> cases = grid_cases(master_seed);
    std::vector<SimulationCase> unequal = unequal_cases(master_seed);
    cases.insert(cases.end(), std::make_move_iterator(unequal.begin()),
                 std::make_move_iterator(unequal.end()));
    return cases;
}

SimulationCase find_case(std::string_view id, std::uint64_t master_seed) {
    for (auto& simulation_case : catalog_cases(master_seed)) {
        if (simulation_case.id == id) return std::move(simulation_case);
    }
    throw std::invalid_argument("unknown case id: " + std::string(id));
}

std::vector<SimulationCase> stability_cases(std::uint64_t master_seed) {
    static constexpr std::string_view kIds[] = {"m2-t11", "uneq-n23", "m5-t9", "m4-t12",
                                                "m5-t10"};
    std::vector<SimulationCase> cases;
    cases.reserve(std::size(kIds));
    for (std::string_view id : kIds) cases.push_back(find_case(id, master_seed));
    return cases;
}

SimulationCase example_case(std::uint64_t master_seed) {
    return find_case("m4-t4", master_seed);
}

std::vector<SimulationCase> registry_cases(std::string_view registry,
                                           std::uint64_t master_seed) {
    if (registry == "grid") return grid_cases(master_seed);
    if (registry == "unequal") return unequal_cases(master_seed);
    if (registry == "stability") return stability_cases(master_seed);
    if (registry == "catalog") return catalog_cases(master_seed);
    if (registry == "example") return {example_case(master_seed)};
    throw std::invalid_argument("unknown registry: " + std::string(registry) +
                                " (expected grid, unequal, stability, example, or catalog)");
}

std::vector<int> parse_counts(std::string_view text) {
    std::vector<int> counts;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string_view::npos) comma = text.size();
        const std::string_view field = text.substr(pos, comma - pos);
        int value = 0;
        const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
        if (ec != std::errc() || end != field.data() + field.size() || value < 1) {
            throw std::invalid_argument("bad count '" + std::string(field) +
                                        "' in counts list '" + std::string(text) + "'");
        }
        counts.push_back(value);
        pos = comma + 1;
    }
    return counts;
}

namespace {

std::uint64_t parse_u64_field(std::string_view field, const std::string& where,
                              const char* what) {
    std::uint64_t value = 0;
    const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || end != field.data() + field.size()) {
        throw std::invalid_argument(where + ": bad " + what + " '" + std::string(field) + "'");
    }
    return value;
}

}  // namespace

std::vector<SimulationCase> load_case_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open case file: " + path);
    std::vector<SimulationCase> cases;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        std::string counts_text;
        std::string trials_text;
        std::string seed_text;
        if (!(fields >> counts_text)) continue;
        const std::string where = path + ":" + std::to_string(line_no);
        if (!(fields >> trials_text >> seed_text)) {
            throw std::invalid_argument(where + ": expected `counts trials seed`");
        }
        if (std::string extra; fields >> extra) {
            throw std::invalid_argument(where + ": unexpected trailing field '" + extra + "'");
        }
        SimulationCase simulation_case;
        simulation_case.id = "case" + std::to_string(cases.size() + 1);
        try {
            simulation_case.counts_per_timepoint = parse_counts(counts_text);
        } catch (const std::invalid_argument& error) {
            throw std::invalid_argument(where + ": " + error.what());
        }
        simulation_case.trials = parse_u64_field(trials_text, where, "trial count");
        simulation_case.seed = parse_u64_field(seed_text, where, "seed");
        try {
            simulation_case.validate(true);
        } catch (const std::invalid_argument& error) {
            throw std::invalid_argument(where + ": " + error.what());
        }
        cases.push_back(std::move(simulation_case));
    }
    if (cases.empty()) throw std::invalid_argument(path + ": no cases found");
    return cases;
}

}  // namespace runsx
