#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "runsx/registry.hpp"

using runsx::catalog_cases;
using runsx::example_case;
using runsx::find_case;
using runsx::grid_cases;
using runsx::load_case_file;
using runsx::parse_counts;
using runsx::registry_cases;
using runsx::SimulationCase;
using runsx::stability_cases;
using runsx::unequal_cases;

namespace {

constexpr std::uint64_t kSeed = 20260819;

}  // namespace

TEST_CASE("the constant-repeat grid has 46 cases in row-major order") {
    const auto grid = grid_cases(kSeed);
    REQUIRE(grid.size() == 46);
    CHECK(grid.front().id == "m2-t5");
    CHECK(grid.back().id == "m5-t14");

    int m2 = 0;
    for (const auto& simulation_case : grid) {
        const auto& counts = simulation_case.counts_per_timepoint;
        REQUIRE_FALSE(counts.empty());
        const int m = counts.front();
        CHECK(std::all_of(counts.begin(), counts.end(), [&](int c) { return c == m; }));
        CHECK(m >= 2);
        CHECK(m <= 5);
        CHECK(simulation_case.total_points() >= 9);
        CHECK(simulation_case.trials == 100000);
        if (m == 2) ++m2;
        const std::string expected_id =
            "m" + std::to_string(m) + "-t" + std::to_string(counts.size());
        CHECK(simulation_case.id == expected_id);
    }
    CHECK(m2 == 10);  // pairs need five timepoints before nine points exist
}

TEST_CASE("catalog seeds are distinct and reproducible") {
    const auto all = catalog_cases(kSeed);
    REQUIRE(all.size() == 50);
    std::set<std::uint64_t> seeds;
    for (const auto& simulation_case : all) seeds.insert(simulation_case.seed);
    CHECK(seeds.size() == all.size());
    const auto again = catalog_cases(kSeed);
    for (std::size_t i = 0; i < all.size(); ++i) {
        CHECK(all[i].seed == again[i].seed);
        CHECK(all[i].id == again[i].id);
    }
    const auto other = catalog_cases(kSeed + 1);
    CHECK(other[0].seed != all[0].seed);
}

TEST_CASE("unequal-count layouts match their advertised totals") {
    const auto unequal = unequal_cases(kSeed);
    REQUIRE(unequal.size() == 4);
    CHECK(unequal[0].id == "uneq-n23");
    CHECK(unequal[0].counts_per_timepoint == std::vector<int>{2, 3, 3, 3, 3, 3, 3, 3});
    CHECK(unequal[0].total_points() == 23);
    CHECK(unequal[1].id == "uneq-n58");
    CHECK(unequal[1].counts_per_timepoint ==
          std::vector<int>{2, 4, 5, 3, 5, 3, 4, 5, 5, 5, 5, 4, 5, 3});
    CHECK(unequal[1].total_points() == 58);
    CHECK(unequal[2].id == "uneq-n62");
    CHECK(unequal[2].counts_per_timepoint ==
          std::vector<int>{5, 5, 5, 4, 5, 4, 5, 4, 5, 3, 5, 4, 5, 3});
    CHECK(unequal[2].total_points() == 62);
    CHECK(unequal[3].id == "uneq-n67");
    CHECK(unequal[3].counts_per_timepoint ==
          std::vector<int>{4, 5, 5, 5, 4, 5, 4, 5, 5, 5, 5, 5, 5, 5});
    CHECK(unequal[3].total_points() == 67);
}

TEST_CASE("stability cases reuse their catalog entries") {
    const auto stability = stability_cases(kSeed);
    REQUIRE(stability.size() == 5);
    const std::vector<std::string> expected = {"m2-t11", "uneq-n23", "m5-t9", "m4-t12", "m5-t10"};
    for (std::size_t i = 0; i < stability.size(); ++i) {
        CHECK(stability[i].id == expected[i]);
        const SimulationCase catalog_entry = find_case(expected[i], kSeed);
        CHECK(stability[i].seed == catalog_entry.seed);
        CHECK(stability[i].counts_per_timepoint == catalog_entry.counts_per_timepoint);
    }
}

TEST_CASE("the demonstration case is four measurements at four timepoints") {
    const SimulationCase demo = example_case(kSeed);
    CHECK(demo.counts_per_timepoint == std::vector<int>{4, 4, 4, 4});
    CHECK(demo.id == "m4-t4");
    CHECK(demo.seed == find_case("m4-t4", kSeed).seed);
}

TEST_CASE("registries are addressable by name") {
    CHECK(registry_cases("grid", kSeed).size() == 46);
    CHECK(registry_cases("unequal", kSeed).size() == 4);
    CHECK(registry_cases("stability", kSeed).size() == 5);
    CHECK(registry_cases("catalog", kSeed).size() == 50);
    CHECK(registry_cases("example", kSeed).size() == 1);
    CHECK_THROWS_AS(registry_cases("nope", kSeed), std::invalid_argument);
    CHECK_THROWS_AS(find_case("m9-t9", kSeed), std::invalid_argument);
    CHECK_THROWS_AS(find_case("", kSeed), std::invalid_argument);
}

TEST_CASE("count lists parse strictly") {
    CHECK(parse_counts("4,4,4,4") == std::vector<int>{4, 4, 4, 4});
    CHECK(parse_counts("2,3,3") == std::vector<int>{2, 3, 3});
    CHECK(parse_counts("12") == std::vector<int>{12});
    CHECK_THROWS_AS(parse_counts(""), std::invalid_argument);
    CHECK_THROWS_AS(parse_counts("0"), std::invalid_argument);
    CHECK_THROWS_AS(parse_counts("4,,4"), std::invalid_argument);
    CHECK_THROWS_AS(parse_counts("4,"), std::invalid_argument);
    CHECK_THROWS_AS(parse_counts(",4"), std::invalid_argument);
    CHECK_THROWS_AS(parse_counts("4,-1"), std::invalid_argument);
    CHECK_THROWS_AS(parse_counts("4,x"), std::invalid_argument);
}

TEST_CASE("case files load layouts with comments and blank lines") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "runsx_registry_test_cases.txt";
    {
        std::ofstream out(path);
        out << "# demonstration layouts\n";
        out << "\n";
        out << "4,4,4,4 100000 42\n";
        out << "2,3,3,3 5000 7   # trailing comment\n";
    }
    const auto cases = load_case_file(path.string());
    fs::remove(path);
    REQUIRE(cases.size() == 2);
    CHECK(cases[0].id == "case1");
    CHECK(cases[0].counts_per_timepoint == std::vector<int>{4, 4, 4, 4});
    CHECK(cases[0].trials == 100000);
    CHECK(cases[0].seed == 42);
    CHECK(cases[1].id == "case2");
    CHECK(cases[1].counts_per_timepoint == std::vector<int>{2, 3, 3, 3});
    CHECK(cases[1].trials == 5000);
    CHECK(cases[1].seed == 7);
}

TEST_CASE("case file errors carry the path and line number") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "runsx_registry_bad_cases.txt";

    const auto expect_error = [&](const std::string& line, const std::string& needle) {
        {
            std::ofstream out(path);
            out << "# header comment\n" << line << "\n";
        }
        try {
            load_case_file(path.string());
            FAIL(("expected an exception for line: " + line));
        } catch (const std::exception& error) {
            const std::string what = error.what();
            CHECK(what.find(path.string()) != std::string::npos);
            CHECK(what.find(":2") != std::string::npos);
            if (!needle.empty()) CHECK(what.find(needle) != std::string::npos);
        }
    };

    expect_error("4,4,4,4 100000", "");      // missing seed
    expect_error("4,4,4,4", "");             // missing trials and seed
    expect_error("4,x,4 10 1", "");          // malformed counts
    expect_error("4,4,4,4 10 1 extra", "");  // trailing token
    expect_error("2,2 10 1", "");            // too few points for a simulation

    {
        std::ofstream out(path);
        out << "# only comments\n\n";
    }
    CHECK_THROWS_AS(load_case_file(path.string()), std::invalid_argument);
    fs::remove(path);
    CHECK_THROWS_AS(load_case_file((fs::temp_directory_path() / "runsx_missing.txt").string()),
                    std::invalid_argument);
}
