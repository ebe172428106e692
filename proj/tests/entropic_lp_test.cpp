#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "cardbound/entropic_lp.hpp"
#include "cardbound/homcount.hpp"
#include "test_support.hpp"

namespace cardbound {
namespace {

double row_value(const EntropyRow& r, const std::vector<double>& h) {
    double s = 0.0;
    for (const auto& [slot, c] : r.coeffs) s += c * h[slot];
    return s;
}

// Entropy vector (by slot) of a random joint distribution on n variables,
// realized as the uniform distribution over the rows of a random table.
std::vector<double> random_entropy_vector(std::mt19937_64& rng, int n) {
    std::uniform_int_distribution<int> rows_dist(1, 12), value(0, 2);
    std::vector<std::vector<int>> table(static_cast<std::size_t>(rows_dist(rng)), std::vector<int>(n));
    for (auto& row : table)
        for (auto& v : row) v = value(rng);
    std::vector<double> h(full_set(n), 0.0);
    for (VertexSet s = 1; s <= full_set(n); ++s) {
        std::vector<std::vector<int>> keys;
        for (const auto& row : table) {
            std::vector<int> key;
            for (int i = 0; i < n; ++i)
                if (s & (1u << i)) key.push_back(row[i]);
            keys.push_back(std::move(key));
        }
        h[slot_of(s)] = testing::empirical_entropy(keys);
    }
    return h;
}

TEST(Elemental, CountsMatchFormulaAndEnumeration) {
    for (int n = 1; n <= 6; ++n) {
        // Explicit enumeration of (i < j, S subset of the rest), independent of the generator.
        std::size_t enumerated = static_cast<std::size_t>(n);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                for (VertexSet s = 0; s <= full_set(n); ++s)
                    if (!(s & (1u << i)) && !(s & (1u << j))) ++enumerated;
        const std::size_t formula = n + (n * (n - 1) / 2) * (n >= 2 ? (std::size_t{1} << (n - 2)) : 0);
        EXPECT_EQ(enumerated, formula);
        EXPECT_EQ(elemental_inequalities(n).size(), formula) << "n=" << n;
    }
    EXPECT_EQ(elemental_inequalities(3).size(), 9u);
    EXPECT_EQ(elemental_inequalities(4).size(), 28u);
    EXPECT_EQ(elemental_inequalities(5).size(), 85u);
    EXPECT_THROW(elemental_inequalities(0), DomainError);
    EXPECT_THROW(elemental_inequalities(9), DomainError);
}

TEST(Elemental, TwoVariablePolymatroid) {
    const auto rows = elemental_inequalities(2);
    ASSERT_EQ(rows.size(), 3u);
    // Slots: h_1 -> 0, h_2 -> 1, h_12 -> 2.
    EXPECT_EQ(rows[0].coeffs, (std::map<int, double>{{1, 1.0}, {2, -1.0}}));  // h_2 <= h_12
    EXPECT_EQ(rows[1].coeffs, (std::map<int, double>{{0, 1.0}, {2, -1.0}}));  // h_1 <= h_12
    EXPECT_EQ(rows[2].coeffs, (std::map<int, double>{{0, -1.0}, {1, -1.0}, {2, 1.0}}));  // h_12 <= h_1 + h_2
    for (const auto& r : rows) EXPECT_EQ(r.rhs, 0.0);
}

TEST(Elemental, SatisfiedByRealEntropyVectors) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + trial % 4;
        const auto h = random_entropy_vector(rng, n);
        for (const auto& r : elemental_inequalities(n)) EXPECT_LE(row_value(r, h), 1e-12) << r.label;
    }
}

TEST(Statistics, AmbidextrousRowExpansion) {
    GridSpec spec;
    spec.dex_ps = {0, 1};
    spec.ambi_pqs = {{2, 2}};
    const MomentGrid g = build_moment_grid(testing::z_relation(), spec);
    const auto rows = statistics_constraints({0, 1}, g, BoundMode::ambidextrous);
    const auto ambi = std::find_if(rows.begin(), rows.end(), [](const EntropyRow& r) { return r.label.rfind("ambi", 0) == 0; });
    ASSERT_NE(ambi, rows.end());
    // 3 h_XY - h_X - h_Y <= ln 8
    EXPECT_EQ(ambi->coeffs, (std::map<int, double>{{0, -1.0}, {1, -1.0}, {2, 3.0}}));
    EXPECT_NEAR(ambi->rhs, std::log(8.0), 1e-12);
}

TEST(Statistics, DexterousEndpoints) {
    GridSpec spec;
    spec.dex_ps = {0, 1};
    const MomentGrid g = build_moment_grid(testing::z_relation(), spec);
    const auto rows = statistics_constraints({0, 1}, g, BoundMode::dexterous);
    // Left orientation, p = 0: h_X <= ln |A| = ln 2.
    EXPECT_EQ(rows[0].coeffs, (std::map<int, double>{{0, 1.0}}));
    EXPECT_NEAR(rows[0].rhs, std::log(2.0), 1e-12);
    // p = 1: the h_X terms cancel, h_XY <= ln 3.
    EXPECT_EQ(rows[1].coeffs, (std::map<int, double>{{2, 1.0}}));
    EXPECT_NEAR(rows[1].rhs, std::log(3.0), 1e-12);
    // Two orientations x two points, plus two max-degree rows.
    EXPECT_EQ(rows.size(), 6u);
    EXPECT_NEAR(rows[4].rhs, std::log(2.0), 1e-12);
}

TEST(Statistics, MissingGridKindsAreConfigErrors) {
    GridSpec dex_only;
    dex_only.dex_ps = {1};
    const MomentGrid g = build_moment_grid(testing::z_relation(), dex_only);
    EXPECT_THROW(statistics_constraints({0, 1}, g, BoundMode::ambidextrous), ConfigError);
    GridSpec ambi_only;
    ambi_only.ambi_pqs = {{1, 1}};
    EXPECT_THROW(statistics_constraints({0, 1}, build_moment_grid(testing::z_relation(), ambi_only), BoundMode::dexterous),
                 ConfigError);
}

TEST(Pruning, KeepsMinimalRhsPerPattern) {
    std::vector<EntropyRow> rows(3);
    rows[0].add(1, 1.0);
    rows[0].rhs = 2.0;
    rows[1].add(1, 1.0);
    rows[1].rhs = 1.0;
    rows[2].add(2, 1.0);
    rows[2].rhs = 5.0;
    prune_redundant_rows(rows);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].rhs, 1.0);
    EXPECT_EQ(rows[1].rhs, 5.0);
}

TEST(SolveLp, OneVariable) {
    EntropicProgram p;
    p.n = 1;
    p.rows = elemental_inequalities(1);
    EntropyRow cap;
    cap.add(1, 1.0);
    cap.rhs = std::log(2.0);
    p.rows.push_back(cap);
    const BoundResult r = solve_lp(p);
    ASSERT_EQ(r.status, BoundStatus::optimal);
    EXPECT_NEAR(r.ln_bound, std::log(2.0), kObjectiveTolerance);
    EXPECT_DOUBLE_EQ(r.bound, std::exp(r.ln_bound));
    EXPECT_NE(std::find(r.tight_rows.begin(), r.tight_rows.end(), 1u), r.tight_rows.end());
}

TEST(SolveLp, TriangleWithoutStatisticsIsUnbounded) {
    EntropicProgram p;
    p.n = 3;
    p.rows = elemental_inequalities(3);
    EXPECT_EQ(solve_lp(p).status, BoundStatus::unbounded);
}

TEST(SolveLp, PivotLimitReportsNumericFailure) {
    const Relation e = symmetrize(relation_from_pairs({{1, 2}}));
    std::vector<const MomentGrid*> grids;
    const MomentGrid g = build_moment_grid(e, GridSpec::coarse());
    grids.assign(3, &g);
    SimplexOptions tight;
    tight.max_iterations = 1;
    EXPECT_EQ(solve_lp(build_program(lookup_named_query("K3"), grids, BoundMode::dexterous), tight).status,
              BoundStatus::numeric_failure);
}

// On the single undirected edge every row caps h at ln 2 and h_S = ln 2 is feasible.
TEST(ComputeBound, TriangleOnSingleEdge) {
    const Relation e = symmetrize(relation_from_pairs({{1, 2}}));
    for (auto mode : {BoundMode::dexterous, BoundMode::ambidextrous}) {
        const BoundResult r = compute_bound(lookup_named_query("K3"), e, mode);
        ASSERT_EQ(r.status, BoundStatus::optimal);
        EXPECT_NEAR(r.ln_bound, std::log(2.0), kObjectiveTolerance);
        EXPECT_NEAR(r.bound, 2.0, 1e-6);
        for (double h : r.entropy) EXPECT_NEAR(h, std::log(2.0), 1e-6);
        EXPECT_EQ(r.query_name, "K3");
        EXPECT_EQ(r.mode, mode);
    }
    EXPECT_EQ(count_homomorphisms(lookup_named_query("K3"), DataGraph::from_relation(e)), 0);
}

TEST(ComputeBound, TriangleOnTriangleIsSound) {
    const Relation k3 = symmetrize(relation_from_pairs({{1, 2}, {2, 3}, {1, 3}}));
    const auto q = lookup_named_query("K3");
    const BoundResult dex = compute_bound(q, k3, BoundMode::dexterous);
    const BoundResult ambi = compute_bound(q, k3, BoundMode::ambidextrous);
    EXPECT_GE(ambi.ln_bound, std::log(6.0) - 1e-6);
    EXPECT_LE(ambi.ln_bound, dex.ln_bound + 1e-6);
}

TEST(ComputeBound, RequiresSymmetricRelation) {
    EXPECT_THROW(compute_bound(lookup_named_query("K3"), testing::z_relation(), BoundMode::dexterous), DomainError);
}

TEST(ComputeBound, SoundAndDominatedOnRandomGraphs) {
    std::mt19937_64 rng(23);
    const auto queries = experiment_queries();
    for (int trial = 0; trial < 6; ++trial) {
        const Relation rel = testing::random_symmetric_relation(rng, 6 + trial % 3, trial % 2 ? 0.5 : 0.3);
        const DataGraph g = DataGraph::from_relation(rel);
        const MomentGrid grid = build_moment_grid(rel, GridSpec::coarse());
        for (const auto& q : queries) {
            const BoundResult dex = compute_bound(q, rel, grid, BoundMode::dexterous);
            const BoundResult ambi = compute_bound(q, rel, grid, BoundMode::ambidextrous);
            ASSERT_EQ(dex.status, BoundStatus::optimal) << q.name;
            ASSERT_EQ(ambi.status, BoundStatus::optimal) << q.name;
            const double truth = static_cast<double>(testing::brute_force_homomorphisms(q, g));
            EXPECT_LE(ambi.ln_bound, dex.ln_bound + 1e-6) << q.name;
            if (truth > 0) {
                EXPECT_GE(ambi.ln_bound, std::log(truth) - 1e-6) << q.name;
            }
        }
    }
}

TEST(ComputeBound, AgmForTriangle) {
    std::mt19937_64 rng(29);
    GridSpec p1;
    p1.dex_ps = {1};
    const StatisticsOptions sizes_only{.dexterous_rows = true, .max_degree_rows = false};
    for (int trial = 0; trial < 10; ++trial) {
        const Relation r = testing::random_symmetric_relation(rng, 8, 0.2 + 0.05 * trial);
        const Relation s = testing::random_symmetric_relation(rng, 6, 0.3);
        const Relation t = testing::random_symmetric_relation(rng, 12, 0.6);
        const MomentGrid gr = build_moment_grid(r, p1), gs = build_moment_grid(s, p1), gt = build_moment_grid(t, p1);
        const double a = std::log(double(r.size())), b = std::log(double(s.size())), c = std::log(double(t.size()));

        // Self-join: (1/2) * 3 ln |R|.
        const auto q = lookup_named_query("K3");
        const BoundResult self = compute_bound(q, r, gr, BoundMode::dexterous, sizes_only);
        EXPECT_NEAR(self.ln_bound, 1.5 * a, 1e-6);

        // Distinct relations on edges (0,1), (0,2), (1,2): best vertex of the edge-cover polytope.
        std::vector<const MomentGrid*> grids = {&gr, &gt, &gs};
        const BoundResult mixed = compute_bound(q, grids, BoundMode::dexterous, sizes_only);
        const double agm = std::min({0.5 * (a + b + c), a + b, a + c, b + c});
        EXPECT_NEAR(mixed.ln_bound, agm, 1e-6);
    }
}

TEST(ComputeBound, ChainBoundWithMaxDegrees) {
    std::mt19937_64 rng(31);
    GridSpec p1;
    p1.dex_ps = {1};
    for (int trial = 0; trial < 10; ++trial) {
        const Relation r = testing::random_symmetric_relation(rng, 9, 0.4);
        const BoundResult b = compute_bound(lookup_named_query("K3"), r, build_moment_grid(r, p1), BoundMode::dexterous);
        const double chain = std::log(double(r.size())) + std::log(double(r.max_degree(Side::left)));
        EXPECT_LE(b.ln_bound, chain + 1e-6);
    }
}

TEST(ComputeBound, RefiningTheGridNeverLoosens) {
    std::mt19937_64 rng(37);
    GridSpec coarse;
    coarse.dex_ps = {0, 1, 2};
    coarse.ambi_pqs = {{1, 1}, {2, 2}};
    GridSpec fine = coarse;
    fine.dex_ps.insert(fine.dex_ps.end(), {1.5, 3, 4});
    fine.ambi_pqs.insert(fine.ambi_pqs.end(), {{1.5, 2}, {3, 3}});
    for (int trial = 0; trial < 5; ++trial) {
        const Relation r = testing::random_symmetric_relation(rng, 9, 0.4);
        for (const char* name : {"K3", "cycle4", "path4", "K4"}) {
            const auto q = lookup_named_query(name);
            for (auto mode : {BoundMode::dexterous, BoundMode::ambidextrous}) {
                const double before = compute_bound(q, r, mode, coarse).ln_bound;
                const double after = compute_bound(q, r, mode, fine).ln_bound;
                EXPECT_LE(after, before + 1e-7) << name;
            }
        }
    }
}

TEST(ComputeBound, Deterministic) {
    std::mt19937_64 rng(41);
    const Relation r = testing::random_symmetric_relation(rng, 10, 0.4);
    const auto q = lookup_named_query("house");
    const BoundResult a = compute_bound(q, r, BoundMode::ambidextrous);
    const BoundResult b = compute_bound(q, r, BoundMode::ambidextrous);
    EXPECT_EQ(a.ln_bound, b.ln_bound);
    EXPECT_EQ(a.tight_rows, b.tight_rows);
}

TEST(ComputeBound, CertificateRowsAreActive) {
    const Relation z = symmetrize(testing::z_relation());
    const auto q = lookup_named_query("K3");
    const MomentGrid g = load_or_build_moment_grid(z, GridSpec::coarse(), {});
    std::vector<const MomentGrid*> grids(3, &g);
    const EntropicProgram program = build_program(q, grids, BoundMode::ambidextrous);
    const BoundResult r = solve_lp(program);
    ASSERT_EQ(r.status, BoundStatus::optimal);
    ASSERT_FALSE(r.tight_rows.empty());
    for (auto i : r.tight_rows) EXPECT_NEAR(row_value(program.rows[i], r.entropy), program.rows[i].rhs, kActivityTolerance);
    EXPECT_NEAR(r.entropy[program.objective_slot()], r.ln_bound, 1e-12);
}

TEST(LpDump, WritesCplexFormat) {
    const Relation e = symmetrize(relation_from_pairs({{1, 2}}));
    GridSpec spec;
    spec.dex_ps = {1};
    const MomentGrid g = build_moment_grid(e, spec);
    std::vector<const MomentGrid*> grids(3, &g);
    std::ostringstream out;
    write_lp_format(out, build_program(lookup_named_query("K3"), grids, BoundMode::dexterous));
    const std::string text = out.str();
    EXPECT_NE(text.find("Maximize\n obj: h_XYZ"), std::string::npos);
    EXPECT_NE(text.find("Subject To"), std::string::npos);
    EXPECT_NE(text.find(" h_XY free"), std::string::npos);
    EXPECT_NE(text.find("End"), std::string::npos);
}

}  // namespace
}  // namespace cardbound
