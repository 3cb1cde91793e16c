#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "scs/csv.hpp"
#include "scs/split.hpp"
#include "test_util.hpp"

using namespace scs;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

}  // namespace

TEST_CASE("load_csv maps declared columns onto records") {
    const std::string path = temp_path("scs_basic.csv");
    write_file(path, "t,e,a,x1\n1.0,1,0,0.5\n2.0,0,1,-0.3\n3.0,1,1,0.1\n");
    CsvSchema schema;
    schema.time = "t";
    schema.event = "e";
    schema.treatment = "a";
    Dataset ds = load_csv(path, schema);
    REQUIRE(ds.n() == 3);
    REQUIRE(ds.dim() == 1);
    CHECK(ds.feature_names()[0] == "x1");
    CHECK(ds.record(0).time == 1.0);
    CHECK(ds.record(1).treatment == 1);
    CHECK(ds.record(1).event == 0);
    CHECK(ds.record(2).covariates[0] == 0.1);
    std::remove(path.c_str());
}

TEST_CASE("load_csv rejects malformed input with located errors") {
    const std::string path = temp_path("scs_bad.csv");
    CsvSchema schema;
    schema.time = "t";
    schema.event = "e";
    schema.treatment = "a";

    SUBCASE("event outside {0,1}") {
        write_file(path, "t,e,a,x1\n1.0,1,0,0.5\n2.0,2,1,0.1\n");
        CHECK_THROWS_AS(load_csv(path, schema), ValidationError);
        CHECK_THROWS_WITH_AS(load_csv(path, schema),
                             doctest::Contains("row 2"), ValidationError);
    }
    SUBCASE("missing column named in the error") {
        write_file(path, "t,e,x1\n1.0,1,0.5\n");
        CHECK_THROWS_WITH_AS(load_csv(path, schema), doctest::Contains("'a'"), SchemaError);
    }
    SUBCASE("non-numeric cell carries the row index") {
        write_file(path, "t,e,a,x1\n1.0,1,0,0.5\n2.0,0,1,oops\n");
        CHECK_THROWS_WITH_AS(load_csv(path, schema), doctest::Contains("row 2"), ParseError);
    }
    SUBCASE("non-positive time") {
        write_file(path, "t,e,a,x1\n0.0,1,0,0.5\n");
        CHECK_THROWS_AS(load_csv(path, schema), ValidationError);
    }
    SUBCASE("missing value rejected") {
        write_file(path, "t,e,a,x1\n1.0,1,0,\n");
        CHECK_THROWS_AS(load_csv(path, schema), ParseError);
    }
    std::remove(path.c_str());
}

TEST_CASE("csv round-trip reproduces the dataset exactly") {
    Rng rng(99);
    const std::string path = temp_path("scs_roundtrip.csv");
    for (int trial = 0; trial < 20; ++trial) {
        Dataset ds = testutil::random_dataset(rng, 1 + rng.uniform_int(40),
                                              1 + rng.uniform_int(5));
        write_csv(path, ds);
        Dataset back = load_csv(path);
        REQUIRE(back.n() == ds.n());
        REQUIRE(back.dim() == ds.dim());
        for (std::size_t i = 0; i < ds.n(); ++i) {
            CHECK(back.record(i).time == ds.record(i).time);
            CHECK(back.record(i).event == ds.record(i).event);
            CHECK(back.record(i).treatment == ds.record(i).treatment);
            CHECK(back.record(i).covariates == ds.record(i).covariates);
        }
    }
    std::remove(path.c_str());
}

namespace {

Dataset balanced_dataset() {
    // 100 records: 50 treated / 50 control, 40 events evenly spread.
    std::vector<double> times;
    std::vector<int> events, treatments;
    for (int i = 0; i < 100; ++i) {
        times.push_back(1.0 + 0.01 * i);
        treatments.push_back(i % 2);
        events.push_back(i < 40 ? 1 : 0);
    }
    return testutil::make_dataset(times, events, treatments);
}

}  // namespace

TEST_CASE("stratified_split balances strata") {
    Dataset ds = balanced_dataset();
    auto [train, test] = stratified_split(ds, 0.5, 7);
    CHECK(train.n() == 50);
    CHECK(test.n() == 50);
    CHECK(train.n_treated() == 25);
    CHECK(test.n_treated() == 25);
    CHECK(train.n_events() == 20);
    CHECK(test.n_events() == 20);
}

TEST_CASE("stratified_split partitions without loss") {
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        Dataset ds = testutil::random_dataset(rng, 30 + rng.uniform_int(50), 2);
        const double fraction = 0.2 + 0.6 * rng.uniform01();
        auto [a, b] = stratified_split(ds, fraction, 1000 + trial);
        REQUIRE(a.n() + b.n() == ds.n());
        std::multiset<double> seen, expected;
        for (const auto& r : ds.records()) expected.insert(r.time);
        for (const auto& r : a.records()) seen.insert(r.time);
        for (const auto& r : b.records()) seen.insert(r.time);
        CHECK(seen == expected);
        // per-stratum counts differ by at most one record
        for (int ev = 0; ev <= 1; ++ev) {
            for (int tr = 0; tr <= 1; ++tr) {
                auto count = [&](const Dataset& d) {
                    std::size_t c = 0;
                    for (const auto& r : d.records()) {
                        if (r.event == ev && r.treatment == tr) ++c;
                    }
                    return static_cast<double>(c);
                };
                const double total = count(a) + count(b);
                if (total == 0) continue;
                CHECK(std::abs(count(a) - std::round(fraction * total)) <= 1.0);
            }
        }
    }
}

TEST_CASE("stratified_split forced singletons land one per side") {
    Dataset ds = testutil::make_dataset({1.0, 2.0}, {1, 0}, {1, 0});
    auto [a, b] = stratified_split(ds, 0.5, 1);
    CHECK(a.n() == 1);
    CHECK(b.n() == 1);
}

TEST_CASE("stratified_split is deterministic and validates the fraction") {
    Rng rng(17);
    Dataset ds = testutil::random_dataset(rng, 60, 2);
    auto [a1, b1] = stratified_split(ds, 0.3, 42);
    auto [a2, b2] = stratified_split(ds, 0.3, 42);
    REQUIRE(a1.n() == a2.n());
    for (std::size_t i = 0; i < a1.n(); ++i) {
        CHECK(a1.record(i).time == a2.record(i).time);
    }
    CHECK_THROWS_AS(stratified_split(ds, 0.0, 1), ArgumentError);
    CHECK_THROWS_AS(stratified_split(ds, 1.0, 1), ArgumentError);
}

TEST_CASE("standardizer centers and scales with train statistics") {
    Rng rng(5);
    Dataset train = testutil::random_dataset(rng, 200, 3);
    Standardizer st = Standardizer::fit(train);
    Dataset scaled = st.apply(train);
    const Eigen::VectorXd mean = scaled.covariates().colwise().mean();
    for (Eigen::Index j = 0; j < mean.size(); ++j) {
        CHECK(std::abs(mean[j]) < 1e-12);
        const double sd = std::sqrt(
            (scaled.covariates().col(j).array() - mean[j]).square().sum() /
            (static_cast<double>(scaled.n()) - 1.0));
        CHECK(sd == doctest::Approx(1.0).epsilon(1e-10));
    }

    // constant features stay put instead of dividing by zero
    Dataset flat = testutil::make_dataset({1.0, 2.0, 3.0}, {1, 0, 1}, {0, 1, 0},
                                          Eigen::MatrixXd::Ones(3, 1));
    Standardizer st2 = Standardizer::fit(flat);
    Dataset out = st2.apply(flat);
    for (const auto& r : out.records()) {
        CHECK(r.covariates[0] == 0.0);
    }

    // dimension mismatch is a configuration error
    CHECK_THROWS_AS(st.apply(flat), ConfigError);
}
