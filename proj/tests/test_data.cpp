#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mstlogit/data.hpp"
#include "mstlogit/errors.hpp"
#include "support.hpp"

using namespace mstlogit;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("mstlogit_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

ModelConfig paper_config() {
    ModelConfig cfg;  // defaults: 5 diseases, full roster, 5 cohorts
    return cfg;
}

const char* kThreeRows =
    "id,location,cohort,y_1,y_2,y_3,y_4,y_5,sex,edu,eco,smoke,age\n"
    "a,0,0,1,0,0,0,0,1,0,0,0,51\n"
    "b,1,2,0,0,1,0,1,0,1,0,1,56.5\n"
    "c,0,4,0,0,0,0,0,1,1,1,1,62\n";

}  // namespace

TEST_CASE("standardize_age") {
    CHECK(standardize_age(51, 51, 11) == doctest::Approx(0.0));
    CHECK(standardize_age(62, 51, 11) == doctest::Approx(1.0));
    CHECK(standardize_age(56.5, 51, 11) == doctest::Approx(0.5));
    CHECK_THROWS_AS(standardize_age(50, 51, 0.0), NonpositiveSpan);
    CHECK_THROWS_AS(standardize_age(50, 51, -1.0), NonpositiveSpan);
}

TEST_CASE("build_design covers the covariate roster") {
    const ModelConfig cfg = paper_config();
    SUBCASE("reference level: female, low edu/eco, non-smoker, age 51") {
        RawFields raw;
        raw.age = 51;
        const Vec x = build_design(raw, cfg);
        REQUIRE(x.size() == 7);
        CHECK(x[0] == 1.0);
        for (int h = 1; h < 7; ++h) CHECK(x[h] == 0.0);
    }
    SUBCASE("male aged 62 activates the interaction") {
        RawFields raw;
        raw.sex = 1;
        raw.age = 62;
        const Vec x = build_design(raw, cfg);
        CHECK(x[0] == 1.0);
        CHECK(x[1] == 1.0);
        CHECK(x[5] == doctest::Approx(1.0));
        CHECK(x[6] == doctest::Approx(1.0));
    }
    SUBCASE("female aged 62 keeps the interaction at zero") {
        RawFields raw;
        raw.age = 62;
        const Vec x = build_design(raw, cfg);
        CHECK(x[5] == doctest::Approx(1.0));
        CHECK(x[6] == 0.0);
    }
    SUBCASE("age outside the configured range") {
        RawFields raw;
        raw.age = 70;
        CHECK_THROWS_AS(build_design(raw, cfg), AgeOutOfRange);
    }
}

TEST_CASE("build_design is deterministic") {
    const ModelConfig cfg = paper_config();
    RawFields raw;
    raw.sex = 1;
    raw.edu = 1;
    raw.age = 57.25;
    const Vec a = build_design(raw, cfg);
    const Vec b = build_design(raw, cfg);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("load_dataset happy path preserves rows") {
    TempDir dir;
    const std::string path = dir.file("respondents.csv");
    write_text(path, kThreeRows);
    const auto records = load_dataset(path, paper_config());
    REQUIRE(records.size() == 3);
    CHECK(records[0].id == "a");
    CHECK(records[1].id == "b");
    CHECK(records[2].id == "c");
    CHECK(records[1].location == 1);
    CHECK(records[1].cohort == 2);
    CHECK(records[1].responses[2] == 1);
    CHECK(records[1].covariates[0] == 1.0);
    CHECK(records[1].covariates[5] == doctest::Approx(0.5));
}

TEST_CASE("load_dataset rejects bad rows") {
    TempDir dir;
    const ModelConfig cfg = paper_config();
    SUBCASE("non-binary response") {
        const std::string path = dir.file("r.csv");
        write_text(path,
                   "id,location,cohort,y_1,y_2,y_3,y_4,y_5,sex,edu,eco,smoke,age\n"
                   "a,0,0,1,2,0,0,0,1,0,0,0,51\n");
        CHECK_THROWS_AS(load_dataset(path, cfg), MalformedRow);
    }
    SUBCASE("cohort out of range") {
        const std::string path = dir.file("r.csv");
        write_text(path,
                   "id,location,cohort,y_1,y_2,y_3,y_4,y_5,sex,edu,eco,smoke,age\n"
                   "a,0,5,1,0,0,0,0,1,0,0,0,51\n");
        CHECK_THROWS_AS(load_dataset(path, cfg), IndexOutOfRange);
    }
    SUBCASE("missing value is rejected, never imputed") {
        const std::string path = dir.file("r.csv");
        write_text(path,
                   "id,location,cohort,y_1,y_2,y_3,y_4,y_5,sex,edu,eco,smoke,age\n"
                   "a,0,0,1,,0,0,0,1,0,0,0,51\n");
        CHECK_THROWS_AS(load_dataset(path, cfg), MissingValue);
    }
    SUBCASE("age beyond the range") {
        const std::string path = dir.file("r.csv");
        write_text(path,
                   "id,location,cohort,y_1,y_2,y_3,y_4,y_5,sex,edu,eco,smoke,age\n"
                   "a,0,0,1,0,0,0,0,1,0,0,0,73\n");
        CHECK_THROWS_AS(load_dataset(path, cfg), IndexOutOfRange);
    }
}

TEST_CASE("location index bound is checked against the table") {
    TempDir dir;
    const std::string path = dir.file("r.csv");
    write_text(path, kThreeRows);
    const auto records = load_dataset(path, paper_config());
    const LocationTable table = testsupport::tiny_table(2);
    CHECK_NOTHROW(validate_against_table(records, table, paper_config()));
    const LocationTable small = testsupport::tiny_table(1);
    CHECK_THROWS_AS(validate_against_table(records, small, paper_config()),
                    IndexOutOfRange);
}

TEST_CASE("write then load round-trips byte-identically") {
    TempDir dir;
    const ModelConfig cfg = paper_config();
    const std::string first = dir.file("a.csv");
    write_text(first, kThreeRows);
    const auto records = load_dataset(first, cfg);
    const std::string canonical = dir.file("b.csv");
    write_dataset(canonical, records, cfg);
    const auto again = load_dataset(canonical, cfg);
    const std::string rewritten = dir.file("c.csv");
    write_dataset(rewritten, again, cfg);
    CHECK(read_text(canonical) == read_text(rewritten));
}

TEST_CASE("load_locations validates structure") {
    TempDir dir;
    ModelConfig cfg = testsupport::toy_config();
    const std::string loc = dir.file("locations.csv");
    const std::string adj = dir.file("adjacency.csv");
    const std::string dist = dir.file("distance_0.csv");
    write_text(loc, "location,region\n0,0\n1,0\n");
    write_text(adj, "location_a,location_b\n0,1\n");
    write_text(dist, "location,0,1\n0,0,1\n1,1,0\n");

    SUBCASE("minimal valid table") {
        const auto table = load_locations(loc, adj, {dist}, cfg);
        CHECK(table.num_locations == 2);
        CHECK(table.degree[0] == 1);
        CHECK(table.degree[1] == 1);
        CHECK(table.distance_matrices[0](0, 1) == 1.0);
    }
    SUBCASE("asymmetric distance matrix") {
        write_text(dist, "location,0,1\n0,0,1\n1,2,0\n");
        CHECK_THROWS_AS(load_locations(loc, adj, {dist}, cfg), AsymmetricMatrix);
    }
    SUBCASE("nonzero diagonal") {
        write_text(dist, "location,0,1\n0,0.5,1\n1,1,0\n");
        CHECK_THROWS_AS(load_locations(loc, adj, {dist}, cfg), NonzeroDiagonal);
    }
    SUBCASE("missing region row") {
        write_text(loc, "location,region\n0,0\n");
        CHECK_THROWS_AS(load_locations(loc, adj, {dist}, cfg), IndexOutOfRange);
    }
    SUBCASE("kernel roster needs enough distance matrices") {
        CHECK_THROWS_AS(load_locations(loc, adj, {}, cfg), Error);
    }
}

TEST_CASE("table invariants catch dangling adjacency") {
    LocationTable t = testsupport::tiny_table(3);
    t.adjacency[0].push_back(2);  // 0 -> 2 without the reverse
    t.degree[0] = static_cast<int>(t.adjacency[0].size());
    CHECK_THROWS_AS(t.validate(), DanglingAdjacency);
}

TEST_CASE("table invariants catch incomplete partitions") {
    LocationTable t = testsupport::tiny_table(3);
    t.region_of[1] = 7;  // no such region
    CHECK_THROWS_AS(t.validate(), IncompletePartition);
}
