#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>
#include <set>

#include "../oracles.hpp"
#include "galga/geometry.hpp"
#include "galga/rng.hpp"
#include "galga/sampling.hpp"

using namespace galga;

namespace {

Matrix random_points(std::size_t n, std::size_t dim, std::uint64_t seed)
{
    Xoshiro256 rng(seed);
    Matrix p(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < p.rows(); ++i)
        for (Eigen::Index d = 0; d < p.cols(); ++d) p(i, d) = rng.uniform();
    return p;
}

double total_volume(const Triangulation& tri)
{
    double v = 0.0;
    for (std::size_t s = 0; s < tri.simplex_count(); ++s) v += simplex_volume(tri, s);
    return v;
}

std::set<std::vector<int>> simplex_set(const Triangulation& tri)
{
    std::set<std::vector<int>> out;
    for (std::size_t s = 0; s < tri.simplex_count(); ++s) {
        std::vector<int> v(tri.simplex(s).begin(), tri.simplex(s).end());
        std::sort(v.begin(), v.end());
        out.insert(v);
    }
    return out;
}

}  // namespace

TEST(Triangulate, UnitSquare)
{
    const auto tri = triangulate(hypercube_vertices(2).points);
    EXPECT_EQ(tri.simplex_count(), 2U);
    EXPECT_NEAR(total_volume(tri), 1.0, 1e-12);
    EXPECT_EQ(tri.hidden_vertex_count(), 0U);
}

TEST(Triangulate, SingleSimplex)
{
    for (std::size_t D = 1; D <= 6; ++D) {
        Matrix p = Matrix::Zero(static_cast<Eigen::Index>(D + 1), static_cast<Eigen::Index>(D));
        for (std::size_t d = 0; d < D; ++d) p(static_cast<Eigen::Index>(d + 1), static_cast<Eigen::Index>(d)) = 1.0;
        const auto tri = triangulate(p);
        EXPECT_EQ(tri.simplex_count(), 1U) << "D=" << D;
    }
}

TEST(Triangulate, MatchesBruteForceDelaunay)
{
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        const std::size_t dim = seed % 2 ? 2 : 3;
        const Matrix p = random_points(dim == 2 ? 30 : 18, dim, seed);
        const auto tri = triangulate(p);
        const oracle::Mat pts = p;
        std::set<std::vector<int>> expect;
        for (auto s : oracle::delaunay(pts)) expect.insert(s);
        EXPECT_EQ(simplex_set(tri), expect) << "seed " << seed;
        for (std::size_t s = 0; s < tri.simplex_count(); ++s) {
            std::vector<int> idx(tri.simplex(s).begin(), tri.simplex(s).end());
            EXPECT_TRUE(oracle::empty_circumsphere(pts, idx));
        }
    }
}

TEST(Triangulate, CubeVolumesSumToOne)
{
    for (std::size_t D = 2; D <= 6; ++D) {
        const auto tri = triangulate(hypercube_vertices(D).points);
        EXPECT_NEAR(total_volume(tri), 1.0, 1e-9) << "D=" << D;
    }
}

TEST(Triangulate, LutLikeSetsCoverTheCube)
{
    for (std::size_t D = 2; D <= 5; ++D) {
        const auto lhs = latin_hypercube(D, design_size(D), 3);
        const auto corners = hypercube_vertices(D);
        Matrix p(static_cast<Eigen::Index>(lhs.size() + corners.size()), static_cast<Eigen::Index>(D));
        p << lhs.points, corners.points;
        const auto tri = triangulate(p);
        EXPECT_NEAR(total_volume(tri), 1.0, 1e-9) << "D=" << D;
        EXPECT_EQ(tri.hidden_vertex_count(), 0U);
    }
}

TEST(Triangulate, CocircularGridIsValid)
{
    Matrix p(25, 2);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) p(i * 5 + j, 0) = i / 4.0, p(i * 5 + j, 1) = j / 4.0;
    const auto tri = triangulate(p);
    EXPECT_EQ(tri.simplex_count(), 32U);
    EXPECT_NEAR(total_volume(tri), 1.0, 1e-12);
}

TEST(Triangulate, Deterministic)
{
    const Matrix p = random_points(40, 3, 9);
    const auto a = triangulate(p);
    const auto b = triangulate(p);
    ASSERT_EQ(a.simplex_count(), b.simplex_count());
    for (std::size_t s = 0; s < a.simplex_count(); ++s)
        EXPECT_TRUE(std::equal(a.simplex(s).begin(), a.simplex(s).end(), b.simplex(s).begin()));
}

TEST(Triangulate, Errors)
{
    Matrix few(2, 2);
    few << 0, 0, 1, 1;
    EXPECT_THROW(triangulate(few), DegenerateInput);
    Matrix collinear(4, 2);
    collinear << 0, 0, 0.25, 0.25, 0.5, 0.5, 0.75, 0.75;
    EXPECT_THROW(triangulate(collinear), DegenerateInput);
    Matrix dup(5, 2);
    dup << 0, 0, 1, 0, 0, 1, 1, 1, 1, 1;
    EXPECT_THROW(triangulate(dup), DuplicatePoint);
    Matrix nan = hypercube_vertices(2).points;
    nan(1, 1) = std::nan("");
    EXPECT_THROW(triangulate(nan), InvalidArgument);
}

TEST(Locate, VertexBarycenterAndOutside)
{
    const Matrix p = random_points(30, 2, 4);
    Matrix all(34, 2);
    all << p, hypercube_vertices(2).points;
    const auto tri = triangulate(all);
    for (std::size_t v = 0; v < tri.vertex_count(); ++v) {
        const Vector q = tri.vertex(v).transpose();
        const auto s = locate(tri, q);
        ASSERT_TRUE(s);
        const auto bc = barycentric(tri, *s, q);
        const auto idx = tri.simplex(*s);
        const auto k = std::find(idx.begin(), idx.end(), static_cast<int>(v)) - idx.begin();
        ASSERT_LT(k, static_cast<long>(idx.size()));
        EXPECT_NEAR(bc.weights[k], 1.0, 1e-12);
    }
    for (std::size_t s = 0; s < tri.simplex_count(); ++s) EXPECT_EQ(locate(tri, barycenter(tri, s), 0), s);
    Vector out(2);
    out << -0.1, 0.5;
    EXPECT_FALSE(locate(tri, out));
}

TEST(Barycentric, ReferenceTriangle)
{
    Matrix p(3, 2);
    p << 0, 0, 1, 0, 0, 1;
    const auto tri = triangulate(p);
    const auto s = tri.simplex(0);
    Vector q(2);
    q << 0.25, 0.25;
    const auto bc = barycentric(tri, 0, q);
    for (int k = 0; k < 3; ++k) {
        const Vector x = tri.vertex(static_cast<std::size_t>(s[static_cast<std::size_t>(k)])).transpose();
        const double expect = x.isZero() ? 0.5 : 0.25;
        EXPECT_NEAR(bc.weights[k], expect, 1e-15);
    }
    const auto c = barycentric(tri, 0, barycenter(tri, 0));
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(c.weights[k], 1.0 / 3.0, 1e-15);
    EXPECT_THROW(barycentric(tri, 1, q), InvalidArgument);
    EXPECT_THROW(barycentric(tri, 0, Vector::Zero(3)), DimensionMismatch);
}

TEST(SimplexVolume, References)
{
    Matrix p2(3, 2);
    p2 << 0, 0, 1, 0, 0, 1;
    EXPECT_DOUBLE_EQ(simplex_volume(triangulate(p2), 0), 0.5);
    Matrix p3(4, 3);
    p3 << 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1;
    EXPECT_DOUBLE_EQ(simplex_volume(triangulate(p3), 0), 1.0 / 6.0);
}

TEST(Barycenter, References)
{
    Matrix p2(3, 2);
    p2 << 0, 0, 1, 0, 0, 1;
    const Vector c = barycenter(triangulate(p2), 0);
    EXPECT_DOUBLE_EQ(c[0], 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(c[1], 1.0 / 3.0);

    // regular simplex (equilateral triangle) centred at (0.4, 0.6)
    Matrix eq(3, 2);
    for (int k = 0; k < 3; ++k) {
        const double a = 2.0 * std::numbers::pi * k / 3.0;
        eq(k, 0) = 0.4 + 0.2 * std::cos(a);
        eq(k, 1) = 0.6 + 0.2 * std::sin(a);
    }
    const Vector r = barycenter(triangulate(eq), 0);
    EXPECT_NEAR(r[0], 0.4, 1e-15);
    EXPECT_NEAR(r[1], 0.6, 1e-15);
}

TEST(Incidence, EveryVertexHasSimplices)
{
    const Matrix p = random_points(25, 3, 12);
    const auto tri = triangulate(p);
    std::size_t total = 0;
    for (std::size_t v = 0; v < tri.vertex_count(); ++v) {
        for (int s : tri.incident(v)) {
            const auto idx = tri.simplex(static_cast<std::size_t>(s));
            EXPECT_NE(std::find(idx.begin(), idx.end(), static_cast<int>(v)), idx.end());
        }
        total += tri.incident(v).size();
    }
    EXPECT_EQ(total, tri.simplex_count() * 4);
}

TEST(Neighbors, SharedFacets)
{
    const Matrix p = random_points(30, 2, 21);
    const auto tri = triangulate(p);
    for (std::size_t s = 0; s < tri.simplex_count(); ++s)
        for (std::size_t k = 0; k <= tri.dim(); ++k) {
            const int n = tri.neighbor(s, k);
            if (n < 0) continue;
            const auto a = tri.simplex(s);
            const auto b = tri.simplex(static_cast<std::size_t>(n));
            int shared = 0;
            for (int v : a) shared += std::find(b.begin(), b.end(), v) != b.end();
            EXPECT_EQ(shared, 2);
            EXPECT_EQ(std::find(b.begin(), b.end(), a[k]), b.end());
        }
}
