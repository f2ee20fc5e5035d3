#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pme/harness.hpp"

using pme::ExperimentConfig;
using pme::load_link;
using pme::run_concentration;
using pme::run_mc_experiment;
using pme::run_verify;

namespace {

std::string csv_of(const pme::MomentTable& table) {
    std::ostringstream out;
    table.write_csv(out);
    return out.str();
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace

TEST_CASE("link descriptors resolve") {
    CHECK(load_link("builtin:block:3").k() == 3);
    CHECK(load_link("builtin:f2") == pme::LinkFunction::example_f2());
    CHECK(load_link("builtin:f3") == pme::LinkFunction::example_f3());
    CHECK_THROWS_AS(load_link("builtin:block:0"), std::invalid_argument);
    CHECK_THROWS_AS(load_link("builtin:nope"), std::invalid_argument);
    CHECK_THROWS_AS(load_link("/no/such/file.json"), std::invalid_argument);

    const auto dir = std::filesystem::temp_directory_path() / "pme_link_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "link.json");
        out << R"({"k":2,"table":[[0,0],[1,1]]})";
    }
    const auto f = load_link((dir / "link.json").string());
    CHECK(f == pme::LinkFunction::block_circulant(2));
    CHECK(f.descriptor() == (dir / "link.json").string());
}

TEST_CASE("config JSON round trip") {
    ExperimentConfig cfg;
    cfg.link = "builtin:f2";
    cfg.sizes = {16, 32};
    cfg.samples = 7;
    cfg.orders = {0, 2, 4};
    cfg.dist = pme::EntryDistribution::Rademacher;
    cfg.seed = 123;
    cfg.bins = 48;
    cfg.range_lo = -2.5;
    cfg.range_hi = 2.5;
    cfg.emit_spectra = true;
    cfg.threads = 2;
    const auto parsed = ExperimentConfig::from_json(cfg.to_json());
    CHECK(parsed.link == cfg.link);
    CHECK(parsed.sizes == cfg.sizes);
    CHECK(parsed.samples == cfg.samples);
    CHECK(parsed.orders == cfg.orders);
    CHECK(parsed.dist == cfg.dist);
    CHECK(parsed.seed == cfg.seed);
    CHECK(parsed.bins == cfg.bins);
    CHECK(parsed.range_lo == cfg.range_lo);
    CHECK(parsed.range_hi == cfg.range_hi);
    CHECK(parsed.emit_spectra == cfg.emit_spectra);
    CHECK(parsed.threads == cfg.threads);
    CHECK_THROWS_AS(ExperimentConfig::from_json("{"), std::invalid_argument);
    CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"dist":"cauchy"})"), std::invalid_argument);
}

TEST_CASE("merging a config document only touches present fields") {
    ExperimentConfig cfg;
    cfg.link = "builtin:f3";
    cfg.samples = 77;
    cfg.seed = 9;
    cfg.dist = pme::EntryDistribution::UniformScaled;
    cfg.merge_json(R"({"seed": 4, "orders": [6]})");
    CHECK(cfg.link == "builtin:f3");
    CHECK(cfg.samples == 77);
    CHECK(cfg.seed == 4);
    CHECK(cfg.orders == std::vector<unsigned>{6});
    CHECK(cfg.dist == pme::EntryDistribution::UniformScaled);
}

TEST_CASE("mc experiments validate their configuration") {
    ExperimentConfig cfg;
    cfg.link = "builtin:block:2";
    cfg.sizes = {15};  // not a multiple of 2
    cfg.samples = 3;
    cfg.orders = {2};
    CHECK_THROWS_AS(run_mc_experiment(cfg), std::invalid_argument);
    cfg.sizes = {};
    CHECK_THROWS_AS(run_mc_experiment(cfg), std::invalid_argument);
    cfg.sizes = {16};
    cfg.orders = {};
    CHECK_THROWS_AS(run_mc_experiment(cfg), std::invalid_argument);
}

TEST_CASE("mc tables: order zero is exact and exact columns attach") {
    ExperimentConfig cfg;
    cfg.link = "builtin:block:2";
    cfg.sizes = {16};
    cfg.samples = 8;
    cfg.orders = {0, 2, 4};
    const auto table = run_mc_experiment(cfg);
    REQUIRE(table.rows.size() == 3);
    CHECK(table.rows[0].estimate == 1.0);
    CHECK(table.rows[0].std_error == 0.0);
    REQUIRE(table.rows[0].exact.has_value());
    CHECK(table.rows[0].exact->to_double() == 1.0);
    REQUIRE(table.rows[2].exact.has_value());
    CHECK(table.rows[2].exact->numerator() == 9);
    CHECK(table.rows[2].exact->denominator() == 4);
    CHECK(table.rows[2].abs_err ==
          doctest::Approx(std::abs(table.rows[2].estimate - 2.25)));
}

TEST_CASE("mc runs are deterministic and worker-count independent") {
    ExperimentConfig cfg;
    cfg.link = "builtin:f3";
    cfg.sizes = {16, 32};
    cfg.samples = 12;
    cfg.orders = {2, 4};
    cfg.seed = 5;
    const auto first = csv_of(run_mc_experiment(cfg));
    const auto second = csv_of(run_mc_experiment(cfg));
    CHECK(first == second);
    cfg.threads = 3;
    const auto threaded = csv_of(run_mc_experiment(cfg));
    CHECK(first == threaded);
}

TEST_CASE("mc runs write the documented files") {
    const auto dir = std::filesystem::temp_directory_path() / "pme_run_test";
    std::filesystem::remove_all(dir);
    ExperimentConfig cfg;
    cfg.link = "builtin:block:2";
    cfg.sizes = {16};
    cfg.samples = 4;
    cfg.orders = {2};
    cfg.emit_spectra = true;
    cfg.out = dir.string();
    run_mc_experiment(cfg);
    CHECK(std::filesystem::exists(dir / "config.json"));
    CHECK(std::filesystem::exists(dir / "moments.csv"));
    CHECK(std::filesystem::exists(dir / "histogram.csv"));
    CHECK(std::filesystem::exists(dir / "report.json"));
    CHECK(std::filesystem::exists(dir / "spectra.csv"));

    const auto moments = slurp(dir / "moments.csv");
    CHECK(moments.rfind("N,m,estimate,std_error,exact_num,exact_den,abs_err\n", 0) == 0);
    const auto spectra = slurp(dir / "spectra.csv");
    CHECK(spectra.rfind("sample_index,eig_index,value\n", 0) == 0);
    // 4 samples x 16 eigenvalues + header
    CHECK(std::count(spectra.begin(), spectra.end(), '\n') == 65);
    const auto echoed = ExperimentConfig::from_json(slurp(dir / "config.json"));
    CHECK(echoed.link == cfg.link);
    CHECK(echoed.samples == cfg.samples);

    // identical reruns produce bit-identical files
    const auto first = slurp(dir / "moments.csv");
    run_mc_experiment(cfg);
    CHECK(slurp(dir / "moments.csv") == first);
}

TEST_CASE("universality: rademacher tracks the Gaussian estimate") {
    ExperimentConfig cfg;
    cfg.link = "builtin:block:2";
    cfg.sizes = {64};
    cfg.samples = 200;
    cfg.orders = {4};
    cfg.seed = 0;
    cfg.threads = 2;
    const auto normal = run_mc_experiment(cfg);
    cfg.dist = pme::EntryDistribution::Rademacher;
    const auto rademacher = run_mc_experiment(cfg);
    const double diff = std::abs(normal.rows[0].estimate - rademacher.rows[0].estimate);
    const double combined = std::hypot(normal.rows[0].std_error, rademacher.rows[0].std_error);
    CHECK(diff <= 3.0 * combined);
}

TEST_CASE("verify suite passes for the builtin links") {
    const auto report = run_verify(pme::default_verify_links(), 3, 6);
    CHECK(report.all_pass());
    CHECK(report.checks.size() > 50);
    const auto json = report.to_json();
    CHECK(json.find("\"checks\"") != std::string::npos);
    CHECK(json.find("\"versions\"") != std::string::npos);
    CHECK(json.find("oracle_equivalence") != std::string::npos);
    CHECK(json.find("size_stability") != std::string::npos);
    CHECK(json.find("pair_compatibility_finite_n") != std::string::npos);
}

TEST_CASE("concentration validation and zero order") {
    ExperimentConfig cfg;
    cfg.link = "builtin:block:2";
    cfg.sizes = {16, 32};
    cfg.samples = 16;
    cfg.orders = {4};
    CHECK_THROWS_AS(run_concentration(cfg), std::invalid_argument);  // <3 sizes
    cfg.sizes = {16, 32, 64};
    cfg.samples = 1;
    CHECK_THROWS_AS(run_concentration(cfg), std::invalid_argument);  // one sample
    cfg.samples = 16;
    cfg.orders = {0};
    const auto report = run_concentration(cfg);
    for (const auto& row : report.rows) CHECK(row.fourth_central == 0.0);
}

TEST_CASE("concentration decays along a doubling ladder") {
    ExperimentConfig cfg;
    cfg.link = "builtin:block:2";
    cfg.sizes = {16, 32, 64};
    cfg.samples = 150;
    cfg.orders = {4};
    cfg.seed = 0;
    cfg.threads = 2;
    const auto report = run_concentration(cfg);
    REQUIRE(report.rows.size() == 3);
    CHECK(report.rows[0].fourth_central > report.rows[1].fourth_central);
    CHECK(report.rows[1].fourth_central > report.rows[2].fourth_central);
    CHECK(report.strictly_decreasing);
}
