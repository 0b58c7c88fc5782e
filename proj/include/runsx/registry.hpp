#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "runsx/simulation.hpp"

// Built-in catalog of simulation cases: the constant-repeat grid
// (m = 2..5 measurements per timepoint over 3..14 timepoints, 5..14 when
// m = 2, so every case has at least 9 points), four unequal-count
// layouts, and the five layouts rerun at a tenfold trial count for the
// stability check. Case files add user-defined layouts.

namespace runsx {

/// Every built-in case in catalog order: the 46 grid cases, then the 4
/// unequal-count cases. A case's seed is hashed from `master_seed` and
/// its catalog position, so one number reproduces the whole catalog.
std::vector<SimulationCase> catalog_cases(std::uint64_t master_seed);

/// The 46 constant-repeat cases, ids "m2-t5" through "m5-t14".
std::vector<SimulationCase> grid_cases(std::uint64_t master_seed);

/// The four unequal-count cases, ids "uneq-n23" through "uneq-n67".
std::vector<SimulationCase> unequal_cases(std::uint64_t master_seed);

/// The five layouts used for the trial-count stability check. Seeds and
/// ids match their catalog entries.
std::vector<SimulationCase> stability_cases(std::uint64_t master_seed);

/// The demonstration case, 4 measurements at each of 4 timepoints;
/// identical to grid case "m4-t4".
SimulationCase example_case(std::uint64_t master_seed);

/// Cases of a named registry: "grid", "unequal", "stability", "example",
/// or "catalog". Throws on an unknown name.
std::vector<SimulationCase> registry_cases(std::string_view registry, std::uint64_t master_seed);

/// Catalog lookup by case id, e.g. "m4-t4" or "uneq-n23". Throws if the
/// id is unknown.
SimulationCase find_case(std::string_view id, std::uint64_t master_seed);

/// Parse comma-separated per-timepoint counts, e.g. "4,4,4,4".
std::vector<int> parse_counts(std::string_view text);

/// Load cases from a plain-text file: one case per line as
/// `counts trials seed` with comma-separated counts, e.g.
/// `4,4,4,4 100000 42`. Blank lines and '#' comments are ignored. Ids
/// are "case1", "case2", ... in file order.
std::vector<SimulationCase> load_case_file(const std::string& path);

}  // namespace runsx
