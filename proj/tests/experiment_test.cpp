#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cardbound/experiment.hpp"
#include "test_support.hpp"

namespace cardbound {
namespace {

namespace fs = std::filesystem;

const fs::path kData = CARDBOUND_DATA_DIR;

ExperimentRow row(std::string shape, std::optional<long> truth, std::optional<double> dex, std::optional<double> ambi) {
    ExperimentRow r;
    r.dataset = "d";
    r.shape = std::move(shape);
    if (truth) r.true_count = BigInt(*truth);
    r.dex = dex;
    r.ambi = ambi;
    fill_relative_errors(r);
    return r;
}

TEST(RunExperiment, SmallDatasets) {
    ExperimentConfig config;
    config.datasets = {kData / "z.txt", kData / "triangle.txt"};
    config.queries = {"path3", "K3", "cycle4"};
    const ExperimentReport report = run_experiment(config);
    ASSERT_TRUE(report.ok());
    ASSERT_EQ(report.rows.size(), 6u);
    EXPECT_EQ(report.skipped_counts, 0u);

    EXPECT_EQ(report.rows[0].dataset, "z");
    EXPECT_EQ(report.rows[0].shape, "path3");
    EXPECT_EQ(*report.rows[0].true_count, 10);
    EXPECT_EQ(*report.rows[1].true_count, 0);  // Z is bipartite
    EXPECT_FALSE(report.rows[1].defined());
    EXPECT_FALSE(report.rows[1].dex_rel.has_value());

    const ExperimentRow& k3 = report.rows[4];
    EXPECT_EQ(k3.dataset, "triangle");
    EXPECT_EQ(*k3.true_count, 6);
    EXPECT_NEAR(*k3.ambi_rel, std::log10(*k3.ambi / 6.0), 1e-12);
    for (const auto& r : report.rows) {
        EXPECT_LE(*r.ambi, *r.dex * (1 + 1e-9));
        EXPECT_GE(*r.ambi * (1 + 1e-9), r.true_count->convert_to<double>());
    }
}

TEST(RunExperiment, EmptyDatasetList) {
    const ExperimentReport report = run_experiment({});
    EXPECT_TRUE(report.ok());
    EXPECT_TRUE(report.rows.empty());
    EXPECT_TRUE(aggregate_geomean(report.rows).empty());
}

TEST(RunExperiment, FailingDatasetIsIsolated) {
    const fs::path dir = fs::temp_directory_path() / "cardbound_experiment_test";
    fs::create_directories(dir);
    {
        std::ofstream(dir / "broken.txt") << "1 2\nnot an edge\n";
    }
    ExperimentConfig config;
    config.datasets = {dir / "broken.txt", kData / "z.txt", dir / "missing.txt"};
    config.queries = {"K3"};
    config.dexterous = false;
    const ExperimentReport report = run_experiment(config);
    EXPECT_FALSE(report.ok());
    ASSERT_EQ(report.failures.size(), 2u);
    EXPECT_EQ(report.failures[0].dataset, "broken");
    EXPECT_EQ(report.failures[1].dataset, "missing");
    ASSERT_EQ(report.rows.size(), 1u);
    EXPECT_FALSE(report.rows[0].dex.has_value());
    fs::remove_all(dir);
}

TEST(RunExperiment, BudgetSkipsCounts) {
    ExperimentConfig config;
    config.datasets = {kData / "z.txt"};
    config.queries = {"K5"};
    config.count_budget = 1;
    const ExperimentReport report = run_experiment(config);
    ASSERT_EQ(report.rows.size(), 1u);
    EXPECT_FALSE(report.rows[0].true_count.has_value());
    EXPECT_EQ(report.skipped_counts, 1u);
    EXPECT_TRUE(report.rows[0].dex.has_value());
}

TEST(RunExperiment, ThreadsAndCacheGiveSameRows) {
    const fs::path cache = fs::temp_directory_path() / "cardbound_cache_test";
    fs::remove_all(cache);
    fs::create_directories(cache);
    ExperimentConfig config;
    config.datasets = {kData / "z.txt", kData / "triangle.txt"};
    config.queries = {"K3", "house", "K14"};
    std::ostringstream a, b, c;
    write_csv(a, run_experiment(config).rows);
    config.threads = 3;
    config.cache_dir = cache;
    write_csv(b, run_experiment(config).rows);
    write_csv(c, run_experiment(config).rows);  // served from the cache
    EXPECT_EQ(a.str(), b.str());
    EXPECT_EQ(a.str(), c.str());
    EXPECT_FALSE(fs::is_empty(cache));
    fs::remove_all(cache);
}

TEST(Aggregate, GeometricMeans) {
    const std::vector<ExperimentRow> rows = {row("K3", 10, 100, 20), row("K3", 1000, 1000, 1000)};
    const auto agg = aggregate_geomean(rows);
    ASSERT_EQ(agg.size(), 1u);
    EXPECT_NEAR(agg[0].true_geomean, 100.0, 1e-9);
    EXPECT_NEAR(*agg[0].dex_geomean, std::sqrt(100.0 * 1000.0), 1e-9);
    EXPECT_NEAR(*agg[0].ambi_geomean, std::sqrt(20.0 * 1000.0), 1e-9);
    EXPECT_NEAR(*agg[0].dex_rel_mean, 0.5, 1e-12);
    EXPECT_NEAR(*agg[0].ambi_rel_mean, 0.5 * std::log10(2.0), 1e-12);
    EXPECT_EQ(agg[0].defined, 2u);
}

TEST(Aggregate, UndefinedRowsAndOmittedShapes) {
    const std::vector<ExperimentRow> rows = {row("K3", 0, 5, 4), row("K3", 100, 1000, 100), row("K4", 0, 7, 7),
                                             row("K4", std::nullopt, 9, 9)};
    std::vector<std::string> omitted;
    const auto agg = aggregate_geomean(rows, &omitted);
    ASSERT_EQ(agg.size(), 1u);
    EXPECT_EQ(agg[0].shape, "K3");
    EXPECT_EQ(agg[0].datasets, 2u);
    EXPECT_EQ(agg[0].defined, 1u);
    EXPECT_NEAR(agg[0].true_geomean, 100.0, 1e-9);
    EXPECT_NEAR(*agg[0].dex_rel_mean, 1.0, 1e-12);
    EXPECT_NEAR(*agg[0].ambi_rel_mean, 0.0, 1e-12);
    EXPECT_EQ(omitted, std::vector<std::string>{"K4"});
}

TEST(Fit, Examples) {
    const FitResult line = fit_origin_slope({{1, 0.5}, {2, 1.0}, {4, 2.0}});
    EXPECT_NEAR(line.slope, 0.5, 1e-12);
    EXPECT_NEAR(line.r_squared, 1.0, 1e-12);
    EXPECT_EQ(line.n_points, 3u);

    const FitResult flat = fit_origin_slope({{1, 1}, {1, -1}});
    EXPECT_NEAR(flat.slope, 0.0, 1e-12);
    EXPECT_NEAR(flat.r_squared, 0.0, 1e-12);

    EXPECT_THROW(fit_origin_slope({}), DomainError);
    EXPECT_THROW(fit_origin_slope({{0, 1}}), DomainError);
}

TEST(Fit, ScaleEquivariance) {
    std::mt19937_64 rng(43);
    std::normal_distribution<double> noise(0.0, 0.1);
    std::uniform_real_distribution<double> x(0.1, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::pair<double, double>> pts, scaled;
        for (int i = 0; i < 10; ++i) {
            const double xi = x(rng);
            pts.emplace_back(xi, 0.7 * xi + noise(rng));
        }
        const double a = 2.5, b = -0.3;
        for (const auto& [px, py] : pts) scaled.emplace_back(a * px, b * py);
        const FitResult f = fit_origin_slope(pts), g = fit_origin_slope(scaled);
        EXPECT_NEAR(g.slope, f.slope * b / a, 1e-12);
        EXPECT_NEAR(g.r_squared, f.r_squared, 1e-12);
        // Direct residual check.
        double sse = 0, syy = 0;
        for (const auto& [px, py] : pts) {
            sse += (py - f.slope * px) * (py - f.slope * px);
            syy += py * py;
        }
        EXPECT_NEAR(f.r_squared, 1 - sse / syy, 1e-12);
    }
}

TEST(Fit, RelativeErrorsFromAggregates) {
    std::vector<AggregateRow> rows(3);
    for (int i = 0; i < 3; ++i) {
        rows[i].dex_rel_mean = i + 1.0;
        rows[i].ambi_rel_mean = 0.5 * (i + 1.0);
    }
    rows.push_back({});  // no relative errors: ignored
    const FitResult f = fit_relative_errors(rows);
    EXPECT_EQ(f.n_points, 3u);
    EXPECT_NEAR(f.slope, 0.5, 1e-12);
}

TEST(Csv, HeaderOnlyAndRoundTrip) {
    std::ostringstream empty;
    write_csv(empty, {});
    EXPECT_EQ(empty.str(), std::string(kExperimentHeader) + "\n");
    std::istringstream back(empty.str());
    EXPECT_TRUE(read_csv(back).empty());

    std::vector<ExperimentRow> rows = {row("K3", 6, 6.000000000001, 6), row("K3", 0, 2.5, 2), row("path3", std::nullopt, 1e300, 0.1)};
    rows[0].dataset = "odd,\"name\"";
    BigInt huge = 1;
    for (int i = 0; i < 40; ++i) huge *= 1000;
    rows[1].true_count = huge;
    std::ostringstream out;
    write_csv(out, rows);
    std::istringstream in(out.str());
    const auto parsed = read_csv(in);
    ASSERT_EQ(parsed.size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(parsed[i].dataset, rows[i].dataset);
        EXPECT_EQ(parsed[i].shape, rows[i].shape);
        EXPECT_EQ(parsed[i].true_count, rows[i].true_count);
        EXPECT_EQ(parsed[i].dex, rows[i].dex);
        EXPECT_EQ(parsed[i].ambi, rows[i].ambi);
        EXPECT_EQ(parsed[i].dex_rel, rows[i].dex_rel);
        EXPECT_EQ(parsed[i].ambi_rel, rows[i].ambi_rel);
    }
    EXPECT_NE(out.str().find("path3,,1.0000000000000001e+300"), std::string::npos);
}

TEST(Csv, MalformedInput) {
    std::istringstream bad_header("a,b\n");
    EXPECT_THROW(read_csv(bad_header), ParseError);
    std::istringstream short_row(std::string(kExperimentHeader) + "\nd,K3,1\n");
    EXPECT_THROW(read_csv(short_row), ParseError);
    std::istringstream bad_number(std::string(kExperimentHeader) + "\nd,K3,1,x,,,\n");
    EXPECT_THROW(read_csv(bad_number), ParseError);
}

}  // namespace
}  // namespace cardbound
