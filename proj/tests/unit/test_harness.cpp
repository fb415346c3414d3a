#include <gtest/gtest.h>

#include <sstream>

#include "galga/harness.hpp"

using namespace galga;

namespace {

ComparisonConfig small_comparison(std::size_t runs)
{
    ComparisonConfig cc;
    cc.build.space = test_case(1).space;
    cc.build.acquisition.epsilon_t = 0.5;
    cc.build.max_nodes = 600;
    cc.runs = runs;
    cc.truth_count = 300;
    return cc;
}

Lut lut_on(const InputSpace& space, const Matrix& interior_u, const TargetFunction& f)
{
    Lut lut;
    lut.space = space;
    lut.wavelengths = f.wavelengths();
    const auto c = hypercube_vertices(space.dim());
    for (Eigen::Index i = 0; i < interior_u.rows(); ++i) {
        const Vector x = space.scale(interior_u.row(i).transpose());
        lut.append(x, f.evaluate(x), false);
    }
    for (Eigen::Index i = 0; i < c.points.rows(); ++i) {
        const Vector x = space.scale(c.points.row(i).transpose());
        lut.append(x, f.evaluate(x), true);
    }
    return lut;
}

}  // namespace

TEST(GroundTruthTest, DeterministicAndSized)
{
    ToyAtmosphere t(test_case(1).space, {});
    const auto a = make_ground_truth(t.space(), t, 50, 3);
    const auto b = make_ground_truth(t.space(), t, 50, 3);
    EXPECT_EQ(a.X, b.X);
    EXPECT_EQ(a.Y, b.Y);
    EXPECT_EQ(make_ground_truth(t.space(), t, 1, 3).size(), 1U);
    EXPECT_THROW(make_ground_truth(t.space(), t, 0, 3), InvalidArgument);
    for (Eigen::Index i = 0; i < a.X.rows(); ++i) {
        EXPECT_GE(a.X(i, 0), 0.05);
        EXPECT_LT(a.X(i, 0), 0.4);
    }
}

TEST(TruePercentilesTest, AffineIsZero)
{
    const SyntheticTarget f(SyntheticKind::Affine, InputSpace::unit(3), 4);
    const auto lut = lut_on(f.space(), latin_hypercube(3, 30, 2).points, f);
    const auto truth = make_ground_truth(f.space(), f, 500, 7);
    const auto p = true_error_percentiles(lut, truth);
    EXPECT_LE(p.p100, 1e-9);
}

TEST(TruePercentilesTest, NodesEqualTruthPoints)
{
    ToyAtmosphere t(test_case(1).space, {});
    const auto truth = make_ground_truth(t.space(), t, 40, 5);
    const auto lut = lut_on(t.space(), t.space().normalize_rows(truth.X), t);
    const auto p = true_error_percentiles(lut, truth);
    EXPECT_LE(p.p100, 1e-12);
}

TEST(TruePercentilesTest, Ordering)
{
    ToyAtmosphere t(test_case(1).space, {});
    const auto lut = lut_on(t.space(), latin_hypercube(2, 20, 1).points, t);
    const auto p = true_error_percentiles(lut, make_ground_truth(t.space(), t, 400, 2));
    EXPECT_GT(p.p95, 0.0);
    EXPECT_LE(p.p95, p.p975);
    EXPECT_LE(p.p975, p.p100);
}

TEST(Comparison, SingleRunHasZeroSpread)
{
    ToyAtmosphere t(test_case(1).space, {});
    const auto r = run_comparison(small_comparison(1), t);
    ASSERT_FALSE(r.galga.points.empty());
    for (const auto& p : r.galga.points) EXPECT_EQ(p.std_p95, 0.0);
    EXPECT_TRUE(r.all_converged);
    EXPECT_GT(r.sobol_required, 0U);
    EXPECT_DOUBLE_EQ(r.node_ratio, r.galga_mean_final / static_cast<double>(r.sobol_required));
}

TEST(Comparison, CurvesAreOrderedAndShareGrid)
{
    ToyAtmosphere t(test_case(1).space, {});
    const auto r = run_comparison(small_comparison(2), t);
    for (const auto* c : {&r.galga, &r.sobol}) {
        for (std::size_t i = 0; i < c->points.size(); ++i) {
            const auto& p = c->points[i];
            if (i) EXPECT_GT(p.m, c->points[i - 1].m);
            EXPECT_LE(p.p95, p.p975);
            EXPECT_LE(p.p975, p.p100);
        }
    }
    for (std::size_t i = 0; i < r.galga.points.size(); ++i) EXPECT_EQ(r.sobol.points[i].m, r.galga.points[i].m);
    EXPECT_EQ(r.galga.points.front().m, 24U);
    EXPECT_EQ(r.runs.size(), 2U);
    EXPECT_EQ(r.runs[1].seed, 2U);
}

TEST(Comparison, SobolLutLayout)
{
    ToyAtmosphere t(test_case(1).space, {});
    const auto space = t.space();
    const Matrix sx = scale_to_space(sobol_sequence(2, 10), space);
    const Matrix sy = evaluate_rows(t, sx);
    Lut corners;
    corners.space = space;
    corners.X = scale_to_space(hypercube_vertices(2), space);
    corners.Y = evaluate_rows(t, corners.X);
    const auto lut = sobol_lut(space, t, sx, sy, 12, corners);
    EXPECT_EQ(lut.size(), 12U);
    EXPECT_EQ(lut.vertex_count(), 4U);
    EXPECT_EQ(lut.X.topRows(8), sx.topRows(8));
    EXPECT_NO_THROW(validate(lut));
}

TEST(Csv, CurveRoundTrip)
{
    PerformanceCurve c{"GALGA", {{24, 1.5, 0.25, 1.0, 1.25, 3.0}, {30, 0.1234567890123456789, 0.0, 0.5, 0.75, 1.0}}};
    std::stringstream ss;
    write_curve_csv(ss, c);
    const auto back = read_curve_csv(ss);
    EXPECT_EQ(back.method, "GALGA");
    ASSERT_EQ(back.points.size(), 2U);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_EQ(back.points[i].m, c.points[i].m);
        EXPECT_EQ(back.points[i].mean_p95, c.points[i].mean_p95);
        EXPECT_EQ(back.points[i].std_p95, c.points[i].std_p95);
        EXPECT_EQ(back.points[i].p95, c.points[i].p95);
        EXPECT_EQ(back.points[i].p975, c.points[i].p975);
        EXPECT_EQ(back.points[i].p100, c.points[i].p100);
    }
    std::istringstream bad("method,m\nGALGA,1,2\n");
    EXPECT_THROW(read_curve_csv(bad), FormatError);
}

TEST(ErrorMapTest, AffineTruthIsZero)
{
    const SyntheticTarget f(SyntheticKind::Affine, InputSpace::unit(2), 3);
    const auto lut = lut_on(f.space(), latin_hypercube(2, 20, 4).points, f);
    const auto map = error_map_2d(lut, f, 30);
    EXPECT_LE(map.truth.maxCoeff(), 1e-9);
    EXPECT_EQ(map.axis0.size(), 30U);
}

TEST(ErrorMapTest, CrossValidationExactAtNodes)
{
    ToyAtmosphere t(test_case(1).space, {});
    // interior nodes on points of an 11 x 11 grid
    Matrix u(14, 2);
    const int ij[14][2] = {{1, 1}, {3, 2}, {5, 1}, {8, 2}, {9, 5}, {2, 5}, {4, 4}, {6, 6},
                           {7, 8}, {1, 9}, {4, 8}, {9, 9}, {5, 3}, {3, 7}};
    for (int r = 0; r < 14; ++r) u(r, 0) = ij[r][0] / 10.0, u(r, 1) = ij[r][1] / 10.0;
    const auto lut = lut_on(t.space(), u, t);
    const auto rep = loo_errors(lut);
    const auto map = error_map_2d(lut, t, 11, 1, &rep);
    for (std::size_t k = 0; k < rep.size(); ++k) {
        const auto r = static_cast<Eigen::Index>(rep.node_ids[k]);
        EXPECT_NEAR(map.cv(ij[r][0], ij[r][1]), rep.delta[k], 1e-12 * rep.delta[k]);
    }
    EXPECT_TRUE(std::isnan(map.cv(0, 0)));
}

TEST(ErrorMapTest, RequiresTwoDimensions)
{
    const SyntheticTarget f(SyntheticKind::Affine, InputSpace::unit(3), 3);
    const auto lut = lut_on(f.space(), latin_hypercube(3, 20, 4).points, f);
    EXPECT_THROW(error_map_2d(lut, f), DimensionMismatch);
}

TEST(Csv, SummaryAndMapFormat)
{
    ComparisonResult r;
    r.runs.resize(1);
    std::ostringstream s;
    write_summary_csv(s, r);
    EXPECT_EQ(s.str().substr(0, 10), "key,value\n");
    ErrorMap m;
    m.axis0 = {0.0, 1.0};
    m.axis1 = {2.0, 3.0};
    Matrix v(2, 2);
    v << 1, std::nan(""), 3, 4;
    std::ostringstream o;
    write_map_csv(o, m, v, InputSpace({{"AOT", 0, 1}, {"SZA", 2, 3}}));
    EXPECT_EQ(o.str(), "AOT,SZA,delta\n0,2,1\n0,3,nan\n1,2,3\n1,3,4\n");
}
