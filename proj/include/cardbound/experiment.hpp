#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cardbound/entropic_lp.hpp"
#include "cardbound/error.hpp"
#include "cardbound/homcount.hpp"
#include "cardbound/moments.hpp"
#include "cardbound/query_catalog.hpp"
#include "cardbound/relation.hpp"

namespace cardbound {

// One (dataset, query) outcome. Bounds are plain counts; relative errors are
// log10(bound / true) and only present when the true count is known and positive.
struct ExperimentRow {
    std::string dataset;
    std::string shape;
    std::optional<BigInt> true_count;  // empty when skipped by budget
    std::optional<double> dex;
    std::optional<double> ambi;
    std::optional<double> dex_rel;
    std::optional<double> ambi_rel;

    bool defined() const { return true_count && *true_count > 0; }
};

inline double ln_big(const BigInt& v) {
    // Exact below 2^53; beyond that the relative error of the double conversion is ~1e-16.
    return std::log(v.convert_to<double>());
}

// Fills dex_rel / ambi_rel from the bounds and true count.
inline void fill_relative_errors(ExperimentRow& row) {
    row.dex_rel.reset();
    row.ambi_rel.reset();
    if (!row.defined()) return;
    const double ln_true = ln_big(*row.true_count);
    if (row.dex) row.dex_rel = (std::log(*row.dex) - ln_true) / std::log(10.0);
    if (row.ambi) row.ambi_rel = (std::log(*row.ambi) - ln_true) / std::log(10.0);
}

struct ExperimentConfig {
    std::vector<std::filesystem::path> datasets;
    std::vector<std::string> queries;  // empty: all 29 catalog queries
    bool dexterous = true;
    bool ambidextrous = true;
    GridSpec grid = GridSpec::coarse();
    std::uint64_t count_budget = 1'000'000'000;
    ParseOptions parse{.symmetrize = true, .drop_self_loops = false};
    std::filesystem::path cache_dir;  // empty disables the moment cache
    unsigned threads = 1;
};

struct DatasetFailure {
    std::string dataset;
    std::string message;
};

struct ExperimentReport {
    std::vector<ExperimentRow> rows;
    std::vector<DatasetFailure> failures;
    std::size_t skipped_counts = 0;

    bool ok() const { return failures.empty(); }
};

inline std::string dataset_name(const std::filesystem::path& p) { return p.stem().string(); }

// Rows for one already-loaded relation.
inline std::vector<ExperimentRow> run_dataset(const std::string& name, const Relation& rel,
                                              const std::vector<QueryGraph>& queries, const ExperimentConfig& config) {
    const MomentGrid grid = load_or_build_moment_grid(rel, config.grid, config.cache_dir);
    const DataGraph data = DataGraph::from_relation(rel);

    auto one = [&](const QueryGraph& q) {
        ExperimentRow row;
        row.dataset = name;
        row.shape = q.name;
        auto bound = [&](BoundMode mode) -> std::optional<double> {
            const BoundResult r = compute_bound(q, rel, grid, mode);
            if (r.status == BoundStatus::unbounded)
                throw ConfigError("LP unbounded for " + q.name + ": statistics constraints missing");
            if (r.status != BoundStatus::optimal)
                throw Error("LP numeric failure for " + q.name + " (" + to_string(mode) + ")");
            return r.bound;
        };
        if (config.dexterous) row.dex = bound(BoundMode::dexterous);
        if (config.ambidextrous) row.ambi = bound(BoundMode::ambidextrous);
        CountOptions opts;
        opts.budget = config.count_budget;
        row.true_count = try_count_homomorphisms(q, data, opts);
        fill_relative_errors(row);
        return row;
    };

    std::vector<ExperimentRow> rows(queries.size());
    if (config.threads <= 1) {
        for (std::size_t i = 0; i < queries.size(); ++i) rows[i] = one(queries[i]);
    } else {
        std::vector<std::future<ExperimentRow>> futures;
        for (const auto& q : queries) futures.push_back(std::async(std::launch::async, one, std::cref(q)));
        for (std::size_t i = 0; i < futures.size(); ++i) rows[i] = futures[i].get();
    }
    return rows;
}

// Datasets x queries x modes. A failing dataset is reported and skipped; rows
// come out ordered by dataset then query, in input order.
inline ExperimentReport run_experiment(const ExperimentConfig& config) {
    std::vector<QueryGraph> queries;
    if (config.queries.empty()) {
        queries = experiment_queries();
    } else {
        for (const auto& name : config.queries) queries.push_back(lookup_named_query(name));
    }

    ExperimentReport report;
    std::vector<std::vector<ExperimentRow>> per_dataset(config.datasets.size());
    std::vector<std::optional<std::string>> errors(config.datasets.size());
    auto process = [&](std::size_t i) {
        const auto& path = config.datasets[i];
        try {
            std::ifstream in(path);
            if (!in) throw IoError("cannot open dataset " + path.string());
            const Relation rel = parse_edge_list(in, config.parse);
            if (!rel.symmetric()) throw DomainError("dataset is not symmetric; enable symmetrization");
            per_dataset[i] = run_dataset(dataset_name(path), rel, queries, config);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    };
    if (config.threads <= 1) {
        for (std::size_t i = 0; i < config.datasets.size(); ++i) process(i);
    } else {
        std::vector<std::future<void>> futures;
        for (std::size_t i = 0; i < config.datasets.size(); ++i) futures.push_back(std::async(std::launch::async, process, i));
        for (auto& f : futures) f.get();
    }
    for (std::size_t i = 0; i < config.datasets.size(); ++i) {
        if (errors[i]) report.failures.push_back({dataset_name(config.datasets[i]), *errors[i]});
        for (auto& row : per_dataset[i]) {
            if (!row.true_count) ++report.skipped_counts;
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

// Per-shape aggregate over datasets.
struct AggregateRow {
    std::string shape;
    std::size_t datasets = 0;  // rows contributing to the bound means
    std::size_t defined = 0;   // rows contributing to the true-count and relative-error means
    double true_geomean = 0.0;
    std::optional<double> dex_geomean;
    std::optional<double> ambi_geomean;
    std::optional<double> dex_rel_mean;
    std::optional<double> ambi_rel_mean;
};

// Geometric means of counts and bounds plus arithmetic means of log10 relative
// errors, grouped by shape in first-seen order. Shapes without a defined row are
// dropped and named in `omitted`.
inline std::vector<AggregateRow> aggregate_geomean(const std::vector<ExperimentRow>& rows,
                                                   std::vector<std::string>* omitted = nullptr) {
    std::vector<std::string> order;
    std::map<std::string, std::vector<const ExperimentRow*>> groups;
    for (const auto& r : rows) {
        auto [it, inserted] = groups.try_emplace(r.shape);
        if (inserted) order.push_back(r.shape);
        it->second.push_back(&r);
    }
    std::vector<AggregateRow> out;
    for (const auto& shape : order) {
        const auto& group = groups[shape];
        AggregateRow agg;
        agg.shape = shape;
        double ln_true = 0, ln_dex = 0, ln_ambi = 0, dex_rel = 0, ambi_rel = 0;
        std::size_t n_dex = 0, n_ambi = 0, n_dex_rel = 0, n_ambi_rel = 0;
        for (const auto* r : group) {
            ++agg.datasets;
            if (r->dex) {
                ln_dex += std::log(*r->dex);
                ++n_dex;
            }
            if (r->ambi) {
                ln_ambi += std::log(*r->ambi);
                ++n_ambi;
            }
            if (!r->defined()) continue;
            ++agg.defined;
            ln_true += ln_big(*r->true_count);
            if (r->dex_rel) {
                dex_rel += *r->dex_rel;
                ++n_dex_rel;
            }
            if (r->ambi_rel) {
                ambi_rel += *r->ambi_rel;
                ++n_ambi_rel;
            }
        }
        if (agg.defined == 0) {
            if (omitted) omitted->push_back(shape);
            continue;
        }
        agg.true_geomean = std::exp(ln_true / agg.defined);
        if (n_dex) agg.dex_geomean = std::exp(ln_dex / n_dex);
        if (n_ambi) agg.ambi_geomean = std::exp(ln_ambi / n_ambi);
        if (n_dex_rel) agg.dex_rel_mean = dex_rel / n_dex_rel;
        if (n_ambi_rel) agg.ambi_rel_mean = ambi_rel / n_ambi_rel;
        out.push_back(std::move(agg));
    }
    return out;
}

struct FitResult {
    double slope = 0.0;
    double r_squared = 0.0;
    std::size_t n_points = 0;
};

// Least squares y = slope * x through the origin; R^2 uses the uncentred
// total sum of squares.
inline FitResult fit_origin_slope(const std::vector<std::pair<double, double>>& points) {
    double sxx = 0, sxy = 0, syy = 0;
    for (const auto& [x, y] : points) {
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    if (points.empty() || sxx == 0.0) throw DomainError("origin fit needs a point with x != 0");
    FitResult fit;
    fit.n_points = points.size();
    fit.slope = sxy / sxx;
    double sse = 0;
    for (const auto& [x, y] : points) {
        const double e = y - fit.slope * x;
        sse += e * e;
    }
    fit.r_squared = syy == 0.0 ? 1.0 : 1.0 - sse / syy;
    return fit;
}

namespace csv {

inline std::string real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

inline std::string optional_real(const std::optional<double>& v) { return v ? real(*v) : std::string(); }

}  // namespace csv

inline constexpr const char* kExperimentHeader = "dataset,shape,true,dex,ambi,dex_rel,ambi_rel";

inline void write_csv(std::ostream& out, const std::vector<ExperimentRow>& rows) {
    out << kExperimentHeader << '\n';
    for (const auto& r : rows) {
        out << csv::field(r.dataset) << ',' << csv::field(r.shape) << ','
            << (r.true_count ? r.true_count->str() : std::string()) << ',' << csv::optional_real(r.dex) << ','
            << csv::optional_real(r.ambi) << ',' << csv::optional_real(r.dex_rel) << ','
            << csv::optional_real(r.ambi_rel) << '\n';
    }
}

inline void write_csv(const std::filesystem::path& path, const std::vector<ExperimentRow>& rows) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    write_csv(out, rows);
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

inline std::vector<ExperimentRow> read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError(1, "missing CSV header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kExperimentHeader) throw ParseError(1, "unexpected CSV header '" + line + "'");
    std::vector<ExperimentRow> rows;
    std::size_t line_no = 1;
    auto opt = [&](const std::string& s) -> std::optional<double> {
        if (s.empty()) return std::nullopt;
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::logic_error&) {
            throw ParseError(line_no, "not a number: '" + s + "'");
        }
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto f = csv::split(line);
        if (f.size() != 7) throw ParseError(line_no, "expected 7 fields, got " + std::to_string(f.size()));
        ExperimentRow r;
        r.dataset = f[0];
        r.shape = f[1];
        if (!f[2].empty()) {
            try {
                r.true_count = BigInt(f[2]);
            } catch (const std::exception&) {
                throw ParseError(line_no, "not an integer: '" + f[2] + "'");
            }
        }
        r.dex = opt(f[3]);
        r.ambi = opt(f[4]);
        r.dex_rel = opt(f[5]);
        r.ambi_rel = opt(f[6]);
        rows.push_back(std::move(r));
    }
    return rows;
}

inline void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
    out << "shape,datasets,defined,true,dex,ambi,dex_rel,ambi_rel\n";
    for (const auto& r : rows) {
        out << csv::field(r.shape) << ',' << r.datasets << ',' << r.defined << ',' << csv::real(r.true_geomean) << ','
            << csv::optional_real(r.dex_geomean) << ',' << csv::optional_real(r.ambi_geomean) << ','
            << csv::optional_real(r.dex_rel_mean) << ',' << csv::optional_real(r.ambi_rel_mean) << '\n';
    }
}

// Origin fit of mean ambidextrous against mean dexterous log relative error.
inline FitResult fit_relative_errors(const std::vector<AggregateRow>& rows) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : rows)
        if (r.dex_rel_mean && r.ambi_rel_mean) pts.emplace_back(*r.dex_rel_mean, *r.ambi_rel_mean);
    return fit_origin_slope(pts);
}

}  // namespace cardbound
