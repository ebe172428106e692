// Command-line front end: ingest, moments, bound, count, cover-check, refine,
// experiment, report.

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "cardbound/cardbound.hpp"

namespace {

using namespace cardbound;

struct Globals {
    bool paper_grid = false;
    double grid_step = 0.0;
    std::string mode = "both";
    std::uint64_t budget = 1'000'000'000;
    std::string out;
    std::string cache_dir;
};

std::string real(double v) { return csv::real(v); }

GridSpec grid_from(const Globals& g) {
    if (g.paper_grid && g.grid_step > 0) throw ConfigError("--paper-grid and --grid-step are mutually exclusive");
    if (g.paper_grid) return GridSpec::paper();
    if (g.grid_step > 0) return GridSpec::with_step(g.grid_step);
    return GridSpec::coarse();
}

std::vector<BoundMode> modes_from(const Globals& g) {
    if (g.mode == "dex") return {BoundMode::dexterous};
    if (g.mode == "ambi") return {BoundMode::ambidextrous};
    return {BoundMode::dexterous, BoundMode::ambidextrous};
}

Relation load(const std::string& path, ParseOptions opts) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return parse_edge_list(in, opts);
}

// stdout unless --out names a file.
class Output {
public:
    explicit Output(const std::string& path) {
        if (path.empty()) return;
        file_ = std::make_unique<std::ofstream>(path);
        if (!*file_) throw IoError("cannot open " + path + " for writing");
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }
    void close(const std::string& path) {
        if (!file_) return;
        file_->flush();
        if (!*file_) throw IoError("write failed for " + path);
    }

private:
    std::unique_ptr<std::ofstream> file_;
};

int run_ingest(const Globals& g, const std::string& path, ParseOptions opts) {
    const Relation rel = load(path, opts);
    std::printf("pairs %zu\n", rel.size());
    std::printf("left_nodes %zu\nright_nodes %zu\n", rel.support_size(Side::left), rel.support_size(Side::right));
    std::printf("max_left_degree %" PRIu64 "\nmax_right_degree %" PRIu64 "\n", rel.max_degree(Side::left),
                rel.max_degree(Side::right));
    std::printf("symmetric %s\n", rel.symmetric() ? "yes" : "no");
    std::printf("digest %016" PRIx64 "\n", rel.digest());
    if (!g.out.empty()) {
        Output out(g.out);
        for (const auto& [a, b] : rel.pairs()) out.stream() << a << ' ' << b << '\n';
        out.close(g.out);
    }
    return 0;
}

int run_moments(const Globals& g, const std::string& path, ParseOptions opts, double p, double q) {
    const Relation rel = load(path, opts);
    if (p >= 0 || q >= 0) {
        if (p < 0 || q < 0) throw ConfigError("--p and --q must be given together");
        const double ln = ln_bivariate_moment(rel, p, q);
        std::printf("ln_moment %s\nmoment %s\n", real(ln).c_str(), real(std::exp(ln)).c_str());
        return 0;
    }
    const GridSpec spec = grid_from(g);
    const MomentGrid grid = load_or_build_moment_grid(rel, spec, g.cache_dir);
    Output out(g.out);
    moment_cache::write(out.stream(), grid, spec.key());
    out.close(g.out);
    return 0;
}

int run_bound(const Globals& g, const std::string& path, ParseOptions opts, const std::string& query,
              const std::string& lp_dump) {
    const QueryGraph q = lookup_named_query(query);
    const Relation rel = load(path, opts);
    const MomentGrid grid = load_or_build_moment_grid(rel, grid_from(g), g.cache_dir);
    if (!rel.symmetric()) throw DomainError("undirected query needs a symmetric relation");
    int status = 0;
    Output out(g.out);
    for (BoundMode mode : modes_from(g)) {
        std::vector<const MomentGrid*> grids(q.edges.size(), &grid);
        const EntropicProgram program = build_program(q, grids, mode);
        if (!lp_dump.empty()) {
            const std::string file = lp_dump + "." + to_string(mode) + ".lp";
            std::ofstream dump(file);
            if (!dump) throw IoError("cannot open " + file + " for writing");
            write_lp_format(dump, program);
        }
        const BoundResult r = solve_lp(program);
        out.stream() << q.name << ' ' << to_string(mode) << ' ' << to_string(r.status);
        if (r.status == BoundStatus::optimal)
            out.stream() << " ln_bound=" << real(r.ln_bound) << " bound=" << real(r.bound) << " tight_rows=" << r.tight_rows.size();
        else
            status = 2;
        out.stream() << '\n';
    }
    out.close(g.out);
    return status;
}

int run_count(const Globals& g, const std::string& path, ParseOptions opts, const std::string& query, unsigned threads) {
    const QueryGraph q = lookup_named_query(query);
    const Relation rel = load(path, opts);
    const auto count = try_count_homomorphisms(q, DataGraph::from_relation(rel),
                                               {.budget = g.budget, .threads = threads});
    if (!count) {
        std::fprintf(stderr, "error: work budget of %" PRIu64 " exhausted; raise --budget\n", g.budget);
        return 2;
    }
    std::printf("%s\n", count->str().c_str());
    return 0;
}

int run_cover_check(const std::string& text) {
    const VennVerdict v = check_cover(parse_cover(text));
    for (std::size_t i = 0; i < v.basis.size(); ++i)
        std::printf("%s %s\n", std::string(kVennCellNames[i]).c_str(), real(v.basis[i]).c_str());
    if (!v.applicable)
        std::printf("verdict inapplicable (an I coefficient exceeds an H coefficient on its line)\n");
    else if (v.covering)
        std::printf("verdict covering\n");
    else
        std::printf("verdict not-covering witness=%s\n", v.witness.c_str());
    return 0;
}

int run_refine(const std::string& path, ParseOptions opts, double p, double q, double tol) {
    const Relation rel = load(path, opts);
    const RefinedTerm r = refine_single_term(rel, p, q, tol);
    std::printf("w_star %s\nln_bound %s\nbound %s\n", real(r.w_star).c_str(), real(r.ln_bound).c_str(),
                real(std::exp(r.ln_bound)).c_str());
    std::printf("ln_bound_w1 %s\n", real(single_term_value(rel, p, q, 1.0)).c_str());
    return 0;
}

int run_experiment_cmd(const Globals& g, const std::vector<std::string>& datasets, ParseOptions opts,
                       const std::vector<std::string>& queries, unsigned threads) {
    ExperimentConfig config;
    for (const auto& d : datasets) config.datasets.emplace_back(d);
    config.queries = queries;
    const auto modes = modes_from(g);
    config.dexterous = std::find(modes.begin(), modes.end(), BoundMode::dexterous) != modes.end();
    config.ambidextrous = std::find(modes.begin(), modes.end(), BoundMode::ambidextrous) != modes.end();
    config.grid = grid_from(g);
    config.count_budget = g.budget;
    config.parse = opts;
    config.cache_dir = g.cache_dir;
    config.threads = threads;
    const ExperimentReport report = run_experiment(config);
    Output out(g.out);
    write_csv(out.stream(), report.rows);
    out.stream().flush();
    out.close(g.out);
    for (const auto& f : report.failures) std::fprintf(stderr, "error: dataset %s: %s\n", f.dataset.c_str(), f.message.c_str());
    if (report.skipped_counts)
        std::fprintf(stderr, "note: %zu true counts skipped by the work budget\n", report.skipped_counts);
    return report.ok() ? 0 : 1;
}

int run_report(const Globals& g, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::string> omitted;
    const auto agg = aggregate_geomean(read_csv(in), &omitted);
    for (const auto& s : omitted) std::fprintf(stderr, "warning: shape %s has no defined rows; omitted\n", s.c_str());
    Output out(g.out);
    write_aggregate_csv(out.stream(), agg);
    out.stream().flush();
    out.close(g.out);
    try {
        const FitResult fit = fit_relative_errors(agg);
        std::fprintf(stderr, "fit slope=%s r_squared=%s n_points=%zu\n", real(fit.slope).c_str(),
                     real(fit.r_squared).c_str(), fit.n_points);
    } catch (const DomainError& e) {
        std::fprintf(stderr, "fit unavailable: %s\n", e.what());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cardinality bounds for graph pattern queries from degree-sequence moments"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_flag("--paper-grid", g.paper_grid, "Use 0.1 grid steps instead of 0.5");
    app.add_option("--grid-step", g.grid_step, "Grid step; 1/step must be an integer")->check(CLI::PositiveNumber);
    app.add_option("--mode", g.mode, "Bound family")->check(CLI::IsMember({"dex", "ambi", "both"}));
    app.add_option("--budget", g.budget, "Work budget for exact counts");
    app.add_option("--out", g.out, "Output file (default stdout)");
    app.add_option("--cache-dir", g.cache_dir, "Moment grid cache directory");

    std::string input, query, lp_dump, cover;
    std::vector<std::string> datasets, queries;
    double p = -1, q = -1, tol = 1e-6;
    unsigned threads = 1;
    bool no_symmetrize = false, symmetrize_input = false, drop_self_loops = false;

    auto* ingest = app.add_subcommand("ingest", "Parse an edge list and print its statistics");
    ingest->add_option("file", input, "Edge list")->required();
    ingest->add_flag("--symmetrize", symmetrize_input, "Add reversed pairs");
    ingest->add_flag("--drop-self-loops", drop_self_loops, "Discard (a, a) pairs");

    auto* moments = app.add_subcommand("moments", "Bivariate moments, or the full moment grid as CSV");
    moments->add_option("file", input, "Edge list")->required();
    moments->add_option("--p", p, "Left exponent (with --q: print one moment)");
    moments->add_option("--q", q, "Right exponent");
    moments->add_flag("--symmetrize", symmetrize_input, "Add reversed pairs");
    moments->add_flag("--drop-self-loops", drop_self_loops, "Discard (a, a) pairs");

    auto* bound = app.add_subcommand("bound", "Entropic upper bound for one query");
    bound->add_option("file", input, "Edge list")->required();
    bound->add_option("--query", query, "Query name")->required();
    bound->add_option("--lp-dump", lp_dump, "Write the LP in CPLEX format to <prefix>.<mode>.lp");
    bound->add_flag("--no-symmetrize", no_symmetrize, "Require the input to be symmetric already");
    bound->add_flag("--drop-self-loops", drop_self_loops, "Discard (a, a) pairs");

    auto* count = app.add_subcommand("count", "Exact homomorphism count");
    count->add_option("file", input, "Edge list")->required();
    count->add_option("--query", query, "Query name")->required();
    count->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    count->add_flag("--no-symmetrize", no_symmetrize, "Require the input to be symmetric already");
    count->add_flag("--drop-self-loops", drop_self_loops, "Discard (a, a) pairs");

    auto* cover_check = app.add_subcommand("cover-check", "Venn covering test for a three-variable bound");
    cover_check->add_option("cover", cover, "Nine comma-separated rationals, lines XY, YZ, ZX")->required();

    auto* refine = app.add_subcommand("refine", "Single-term refinement over the I coefficient");
    refine->add_option("file", input, "Edge list")->required();
    refine->add_option("--p", p, "H(Y|X) coefficient")->required();
    refine->add_option("--q", q, "H(X|Y) coefficient")->required();
    refine->add_option("--tol", tol, "Bracket width at which the search stops");

    auto* experiment = app.add_subcommand("experiment", "Bounds and true counts over datasets x queries, as CSV");
    experiment->add_option("datasets", datasets, "Edge lists")->required();
    experiment->add_option("--query", queries, "Query names (default: all 29)");
    experiment->add_option("--threads", threads, "Datasets and queries processed concurrently")->check(CLI::PositiveNumber);
    experiment->add_flag("--no-symmetrize", no_symmetrize, "Require symmetric inputs");
    experiment->add_flag("--drop-self-loops", drop_self_loops, "Discard (a, a) pairs");

    auto* report = app.add_subcommand("report", "Per-shape geometric means and the relative-error fit");
    report->add_option("csv", input, "Experiment CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        const ParseOptions raw{.symmetrize = symmetrize_input, .drop_self_loops = drop_self_loops};
        const ParseOptions graph{.symmetrize = !no_symmetrize, .drop_self_loops = drop_self_loops};
        if (*ingest) return run_ingest(g, input, raw);
        if (*moments) return run_moments(g, input, raw, p, q);
        if (*bound) return run_bound(g, input, graph, query, lp_dump);
        if (*count) return run_count(g, input, graph, query, threads);
        if (*cover_check) return run_cover_check(cover);
        if (*refine) return run_refine(input, raw, p, q, tol);
        if (*experiment) return run_experiment_cmd(g, datasets, graph, queries, threads);
        if (*report) return run_report(g, input);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
