#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "starhomog/analysis.hpp"
#include "starhomog/upscale.hpp"

using namespace starhomog;

namespace {
constexpr double pi = std::numbers::pi;

StageProblem problem_for(const std::string& id, CoefficientRule rule = CoefficientRule::deterministic()) {
    StageProblem p;
    p.id = id;
    p.coefficients = rule;
    p.field = [id](std::size_t) { return builtin_field(id); };
    return p;
}

struct Gen {
    std::uint64_t state;
    double unit() {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        return static_cast<double>(state >> 11) * 0x1.0p-53;
    }
};

GridFunction random_grid(Gen& g, std::size_t m) {
    GridFunction f(m);
    for (double& v : f.values()) v = 2.0 * g.unit() - 1.0;
    return f;
}
} // namespace

TEST(GridNorms, ClosedForms) {
    const std::size_t m = 1000;
    const GridFunction zero(m);
    const auto s = grid_norms(GridFunction::sample(m, [](double t) { return std::sin(pi * t); }), zero);
    EXPECT_NEAR(s.l2, 0.70711, 1e-5);
    EXPECT_NEAR(s.h1, 2.2214, 1e-4);
    const auto lin = grid_norms(GridFunction::sample(m, [](double t) { return 1.0 - t; }), zero);
    EXPECT_NEAR(lin.l2, 1.0 / std::sqrt(3.0), 1e-12);
    EXPECT_NEAR(lin.h1, 1.0, 1e-12);
    const auto full = grid_norms(GridFunction::sample(m, [](double t) { return 1.0 - t; }), zero, H1Kind::full);
    EXPECT_NEAR(full.h1, std::sqrt(4.0 / 3.0), 1e-12);
}

TEST(GridNorms, OddIntervalCountUsesThreeEighths) {
    const auto q = grid_norms(GridFunction::sample(7, [](double t) { return t; }), GridFunction(7));
    EXPECT_NEAR(q.l2, 1.0 / std::sqrt(3.0), 1e-14);
}

TEST(GridNorms, RejectsMeshMismatch) {
    EXPECT_THROW(grid_norms(GridFunction(10), GridFunction(20)), std::invalid_argument);
}

TEST(GridNorms, MetricProperties) {
    Gen gen{3};
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t m = 2 + static_cast<std::size_t>(gen.unit() * 60);
        const auto f = random_grid(gen, m), g = random_grid(gen, m), k = random_grid(gen, m);
        for (H1Kind kind : {H1Kind::seminorm, H1Kind::full}) {
            const auto fg = grid_norms(f, g, kind), gf = grid_norms(g, f, kind);
            EXPECT_DOUBLE_EQ(fg.l2, gf.l2);
            EXPECT_DOUBLE_EQ(fg.h1, gf.h1);
            EXPECT_EQ(grid_norms(f, f, kind).l2, 0.0);
            EXPECT_EQ(grid_norms(f, f, kind).h1, 0.0);
            EXPECT_LE(fg.h1, grid_norms(f, k, kind).h1 + grid_norms(k, g, kind).h1 + 1e-12);
        }
    }
}

TEST(FeErrorNorms, InterpolantOfSmoothFunction) {
    auto f = [](double t) { return std::sin(pi * t); };
    auto df = [](double t) { return pi * std::cos(pi * t); };
    double prev_l2 = 0.0, prev_h1 = 0.0;
    for (std::size_t m : {16u, 32u, 64u}) {
        const auto err = fe_error_norms(GridFunction::sample(m, f), f, df);
        if (prev_l2 > 0.0) {
            EXPECT_NEAR(std::log2(prev_l2 / err.l2), 2.0, 0.05);
            EXPECT_NEAR(std::log2(prev_h1 / err.h1), 1.0, 0.05);
        }
        prev_l2 = err.l2;
        prev_h1 = err.h1;
    }
}

TEST(CesaroSolutionAverage, MeanOfGroupEdges) {
    const auto stage = build_stage(9, CoefficientRule::deterministic());
    const ForcingField F("lin", [](std::size_t l, double) { return static_cast<double>(l); });
    const auto sol = solve_stage(stage, F, 0.0, 10);
    const auto avg = cesaro_solution_average(sol, 0);
    for (std::size_t j = 0; j <= 10; ++j)
        EXPECT_NEAR(avg[j], (sol.edges[2][j] + sol.edges[5][j] + sol.edges[8][j]) / 3.0, 1e-15);
    EXPECT_EQ(group_averages(sol).size(), 2u);
    const auto tiny = solve_stage(build_stage(2, CoefficientRule::deterministic()), F, 0.0, 10);
    EXPECT_THROW(cesaro_solution_average(tiny, 0), EmptyGroupError);
}

TEST(ConvergenceTable, RowsAndOrdering) {
    const auto problem = problem_for("ex1");
    const std::vector<GridFunction> zero(2, GridFunction(20));
    const std::vector<std::size_t> stages{10, 20, 100};
    const auto rows = convergence_table(problem, stages, 20, zero, "oracle:ex1");
    ASSERT_EQ(rows.size(), 6u);
    EXPECT_EQ(rows[0].n, 10u);
    EXPECT_EQ(rows[1].group, 1u);
    EXPECT_EQ(rows[5].n, 100u);
    EXPECT_EQ(rows[0].reference, "oracle:ex1");
    EXPECT_FALSE(rows[0].seed);
    const std::vector<std::size_t> bad{10, 10};
    EXPECT_THROW(convergence_table(problem, bad, 20, zero, "x"), std::invalid_argument);
    const std::vector<GridFunction> one(1, GridFunction(20));
    EXPECT_THROW(convergence_table(problem, stages, 20, one, "x"), std::invalid_argument);
}

TEST(ConvergenceTable, ThreadsDoNotChangeNumbers) {
    const auto problem = problem_for("ex3");
    const std::vector<GridFunction> zero(2, GridFunction(30));
    const std::vector<std::size_t> stages{10, 11, 12, 40};
    const auto a = convergence_table(problem, stages, 30, zero, "z");
    const auto b = convergence_table(problem, stages, 30, zero, "z", {H1Kind::seminorm, {3, 4}});
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].l2_error, b[i].l2_error);
        EXPECT_EQ(a[i].h1_error, b[i].h1_error);
    }
}

TEST(Cauchy, ConstantFieldWithUniformCoefficientsIsStationary) {
    const auto problem = problem_for("constant", CoefficientRule::uniform(1.0));
    const std::vector<std::size_t> centers{10, 30};
    const auto rows = cauchy_diagnostics(problem, centers, 10, 20);
    ASSERT_EQ(rows.size(), 2u);
    for (const auto& r : rows) {
        EXPECT_NEAR(r.epsilon, 0.0, 1e-14);
        EXPECT_NEAR(r.delta, 0.0, 1e-12);
        EXPECT_EQ(r.window, 10u);
    }
}

TEST(Cauchy, LinearInTheLoad) {
    auto a = problem_for("ex4");
    auto b = problem_for("ex4");
    b.field = [](std::size_t) {
        const auto base = builtin_field("ex4");
        return ForcingField("ex4x3", [base](std::size_t l, double t) { return 3.0 * base(l, t); });
    };
    const std::vector<std::size_t> centers{20};
    const auto ra = cauchy_diagnostics(a, centers, 4, 20);
    const auto rb = cauchy_diagnostics(b, centers, 4, 20);
    for (std::size_t g = 0; g < 2; ++g) {
        EXPECT_NEAR(rb[g].epsilon, 3.0 * ra[g].epsilon, 1e-12 * (1.0 + ra[g].epsilon));
        EXPECT_NEAR(rb[g].delta, 3.0 * ra[g].delta, 1e-11 * (1.0 + ra[g].delta));
    }
}

TEST(Cauchy, WindowValidation) {
    const auto problem = problem_for("ex1");
    const std::vector<std::size_t> ok{10}, low{6};
    EXPECT_THROW(cauchy_diagnostics(problem, ok, 3, 10), std::invalid_argument);
    EXPECT_THROW(cauchy_diagnostics(problem, ok, 0, 10), std::invalid_argument);
    EXPECT_THROW(cauchy_diagnostics(problem, low, 10, 10), std::invalid_argument);
}

TEST(Cauchy, ExampleFourDropsWithStage) {
    const auto problem = problem_for("ex4");
    const std::vector<std::size_t> centers{10, 1000};
    const auto rows = cauchy_diagnostics(problem, centers, 10, 100, {H1Kind::seminorm, {3, 4}});
    for (std::size_t g = 0; g < 2; ++g) EXPECT_LE(rows[2 + g].epsilon * 10.0, rows[g].epsilon) << "group " << g + 1;
}

TEST(Rate, KnownValues) {
    EXPECT_NEAR(rate_estimate(1.0, 0.5, 0.25), 1.0, 1e-15);
    EXPECT_NEAR(rate_estimate(0.3, 0.1, 0.01), 2.0959032742893846, 1e-12);
    const std::vector<double> seq{1.0, 0.5, 0.3, 0.1};
    EXPECT_NEAR(rate_from_sequence(seq), std::log(0.2 / 0.2) / std::log(0.2 / 0.5), 1e-15);
    const std::vector<double> seq2{0.0, 0.5, 0.7, 0.7};
    EXPECT_THROW(rate_from_sequence(seq2), UndefinedRate);
    EXPECT_THROW(rate_estimate(0.2, 0.2, 0.1), UndefinedRate);
    EXPECT_THROW(rate_estimate(0.2, 0.0, 0.1), UndefinedRate);
}

TEST(Rate, FromErrorSequence) {
    const std::vector<double> errors{1e-1, 1e-2, 1e-4, 1e-8};
    EXPECT_NEAR(rate_from_sequence(errors), 2.0818, 1e-4);
    for (double r : {0.3, 0.5, 0.9}) {
        const std::vector<double> geometric{r, r * r, r * r * r, r * r * r * r};
        EXPECT_NEAR(rate_from_sequence(geometric), 1.0, 1e-12);
    }
}

TEST(Weyl, FractionAndMean) {
    const double f = weyl_fraction(100000, 0.0, pi);
    EXPECT_GE(f, 0.49);
    EXPECT_LE(f, 0.51);
    EXPECT_NEAR(weyl_fraction(1000, 0.0, two_pi), 1.0, 0.0);
    for (std::size_t n : {10u, 100u, 1000u, 12345u})
        EXPECT_LE(std::abs(weyl_mean(n, [](double a) { return std::cos(a); })), 2.09 / static_cast<double>(n));
    EXPECT_THROW(weyl_fraction(0, 0.0, 1.0), std::invalid_argument);
    EXPECT_THROW(weyl_fraction(10, 2.0, 1.0), std::invalid_argument);
    EXPECT_THROW(weyl_fraction(10, 0.0, 7.0), std::invalid_argument);
}

TEST(Weyl, DiscrepancyShrinks) {
    double worst_small = 0.0, worst_large = 0.0;
    for (int k = 1; k < 20; ++k) {
        const double d = two_pi * k / 20.0;
        worst_small = std::max(worst_small, std::abs(weyl_fraction(100, 0.0, d) - d / two_pi));
        worst_large = std::max(worst_large, std::abs(weyl_fraction(100000, 0.0, d) - d / two_pi));
    }
    EXPECT_LT(worst_large, worst_small);
    EXPECT_LT(worst_large, 1e-3);
}

TEST(Csv, NumberFormatAndQuoting) {
    EXPECT_EQ(csv_number(5.8352e-4), "5.83520e-04");
    EXPECT_EQ(csv_number(-1.0), "-1.00000e+00");
    EXPECT_EQ(csv_field("oracle:ex1"), "oracle:ex1");
    EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
    EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
}

TEST(Csv, TableLayout) {
    std::vector<ConvergenceRow> rows{{10, 0, 0.5, 0.25, 1.0, "upscaled", 100, 3.0, std::nullopt},
                                     {10, 1, 0.125, 0.0625, 1.0, "upscaled", 100, 3.0, 7}};
    std::ostringstream a, b;
    write_table_csv(a, rows);
    EXPECT_EQ(a.str(),
              "n,group,l2_error,h1_error,center_value,reference,m,seed\n"
              "10,1,5.00000e-01,2.50000e-01,1.00000e+00,upscaled,100,\n"
              "10,2,1.25000e-01,6.25000e-02,1.00000e+00,upscaled,100,7\n");
    write_table_csv(b, rows, true);
    EXPECT_NE(b.str().find(",wall_ms\n"), std::string::npos);
    EXPECT_NE(b.str().find(",7,3.00000e+00\n"), std::string::npos);
    std::vector<CauchyRow> c{{1000, 1, 1e-3, 2e-3, 10}};
    std::ostringstream cs;
    write_cauchy_csv(cs, c);
    EXPECT_EQ(cs.str(), "n,group,epsilon,delta,window\n1000,2,1.00000e-03,2.00000e-03,10\n");
}
