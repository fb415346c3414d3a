#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "galga/error.hpp"
#include "galga/geometry.hpp"
#include "galga/parallel.hpp"
#include "galga/space.hpp"
#include "galga/types.hpp"

namespace galga {

/// Look-up table: m input nodes (physical units) and their K-channel outputs.
struct Lut {
    InputSpace space;
    Matrix X;  // m x D
    Matrix Y;  // m x K
    std::vector<double> wavelengths;
    std::vector<bool> is_vertex;

    std::size_t size() const noexcept { return static_cast<std::size_t>(X.rows()); }
    std::size_t dim() const noexcept { return space.dim(); }
    std::size_t channels() const noexcept { return static_cast<std::size_t>(Y.cols()); }

    std::size_t vertex_count() const noexcept
    {
        return static_cast<std::size_t>(std::count(is_vertex.begin(), is_vertex.end(), true));
    }

    Matrix normalized() const { return space.normalize_rows(X); }

    void append(const Vector& x, const Vector& y, bool vertex)
    {
        if (static_cast<std::size_t>(x.size()) != dim()) throw DimensionMismatch("Lut::append: input dimension");
        if (size() > 0 && static_cast<std::size_t>(y.size()) != channels())
            throw DimensionMismatch("Lut::append: output length");
        const auto m = X.rows();
        X.conservativeResize(m + 1, static_cast<Eigen::Index>(dim()));
        Y.conservativeResize(m + 1, y.size());
        X.row(m) = x.transpose();
        Y.row(m) = y.transpose();
        is_vertex.push_back(vertex);
    }
};

/// Checks the structural invariants of a Lut; throws InvalidArgument naming
/// the first violation.
inline void validate(const Lut& lut)
{
    const std::size_t m = lut.size();
    const std::size_t dim = lut.dim();
    if (static_cast<std::size_t>(lut.X.cols()) != dim) throw InvalidArgument("Lut: X column count differs from D");
    if (static_cast<std::size_t>(lut.Y.rows()) != m || lut.is_vertex.size() != m)
        throw InvalidArgument("Lut: X, Y and vertex flags have different row counts");
    if (lut.wavelengths.size() != lut.channels())
        throw InvalidArgument("Lut: wavelength grid length differs from K");
    for (std::size_t k = 1; k < lut.wavelengths.size(); ++k)
        if (!(lut.wavelengths[k] > lut.wavelengths[k - 1]))
            throw InvalidArgument("Lut: wavelengths must be strictly increasing");
    if (!lut.Y.allFinite()) throw InvalidArgument("Lut: non-finite output");
    if (dim < 63 && lut.vertex_count() != (std::size_t{1} << dim))
        throw InvalidArgument("Lut: expected 2^D vertex nodes, found " + std::to_string(lut.vertex_count()));
    const Matrix u = lut.normalized();
    for (std::size_t i = 0; i < m; ++i) {
        if (!lut.is_vertex[i]) continue;
        for (std::size_t d = 0; d < dim; ++d) {
            const double c = u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d));
            if (std::abs(c) > 1e-12 && std::abs(c - 1.0) > 1e-12)
                throw InvalidArgument("Lut: vertex node " + std::to_string(i) + " is not a hypercube corner");
        }
    }
    // uniqueness, via the same band search the triangulation uses
    std::vector<Eigen::Index> order(m);
    for (std::size_t i = 0; i < m; ++i) order[i] = static_cast<Eigen::Index>(i);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return u(a, 0) < u(b, 0); });
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b) {
            if (u(order[b], 0) - u(order[a], 0) > kDuplicateTolerance) break;
            if ((u.row(order[a]) - u.row(order[b])).cwiseAbs().maxCoeff() <= kDuplicateTolerance)
                throw InvalidArgument("Lut: duplicate nodes " + std::to_string(order[a]) + " and " +
                                      std::to_string(order[b]));
        }
}

struct RelativeError {
    double delta = 0.0;        // percent
    std::size_t channel = 0;   // channel attaining the maximum (lowest on ties)
    bool guarded = false;      // a near-zero denominator was floored
};

/// Relative error floor: denominators are at least this fraction of the
/// largest |y_true| component.
inline constexpr double kDenominatorFloor = 1e-9;

/// max over channels of 100 * |r| / |y| for a residual r = y_hat - y, with
/// the denominator floored at kDenominatorFloor * max|y|.
template <typename A, typename B>
RelativeError relative_residual(const Eigen::MatrixBase<A>& residual, const Eigen::MatrixBase<B>& y_true)
{
    if (residual.size() != y_true.size()) throw DimensionMismatch("relative_error: length mismatch");
    if (y_true.size() == 0) throw InvalidArgument("relative_error: empty spectra");
    const double scale = y_true.cwiseAbs().maxCoeff();
    const double floor = std::max(kDenominatorFloor * scale, std::numeric_limits<double>::min());
    RelativeError out;
    for (Eigen::Index k = 0; k < y_true.size(); ++k) {
        const double mag = std::abs(y_true[k]);
        double denom = mag;
        if (mag < floor) {
            denom = floor;
            out.guarded = true;
        }
        const double e = 100.0 * std::abs(residual[k]) / denom;
        if (e > out.delta) {
            out.delta = e;
            out.channel = static_cast<std::size_t>(k);
        }
    }
    return out;
}

template <typename A, typename B>
RelativeError relative_error(const Eigen::MatrixBase<A>& y_hat, const Eigen::MatrixBase<B>& y_true)
{
    if (y_hat.size() != y_true.size()) throw DimensionMismatch("relative_error: length mismatch");
    return relative_residual(y_hat - y_true, y_true);
}

/// Linear-interpolated order statistic at rank r = 1 + p (n - 1) / 100.
inline double percentile(std::span<const double> values, double p)
{
    if (values.empty()) throw InvalidArgument("percentile: empty input");
    if (!(p >= 0.0 && p <= 100.0)) throw InvalidArgument("percentile: p must be in [0, 100]");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const double rank = 1.0 + p * static_cast<double>(v.size() - 1) / 100.0;
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const double frac = rank - static_cast<double>(lo);
    if (lo >= v.size()) return v.back();
    return v[lo - 1] + frac * (v[lo] - v[lo - 1]);
}

namespace detail {

/// Linear interpolation of per-vertex values at normalized point u. Row r of
/// `values` belongs to triangulation vertex rows.empty() ? r : rows[r]. With
/// `offset`, returns the interpolant of (values - offset), which avoids the
/// cancellation of forming y_hat first when y_hat is close to offset.
template <typename Derived>
Vector interpolate_normalized(const Triangulation& tri, const Matrix& values, std::span<const std::size_t> rows,
                              const Eigen::MatrixBase<Derived>& u, std::size_t* hint = nullptr,
                              const Vector* offset = nullptr)
{
    const auto s = locate(tri, u, hint ? *hint : 0);
    if (!s) throw OutsideHull("interpolate: query lies outside the triangulated hull");
    if (hint) *hint = *s;
    const auto bc = barycentric(tri, *s, u);
    Vector out = Vector::Zero(values.cols());
    const auto idx = tri.simplex(*s);
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const auto v = static_cast<std::size_t>(idx[k]);
        const auto r = static_cast<Eigen::Index>(rows.empty() ? v : rows[v]);
        if (offset) out += bc.weights[static_cast<Eigen::Index>(k)] * (values.row(r).transpose() - *offset);
        else out += bc.weights[static_cast<Eigen::Index>(k)] * values.row(r).transpose();
    }
    return out;
}

template <typename Derived>
Vector checked_normalize(const InputSpace& space, const Eigen::MatrixBase<Derived>& q)
{
    Vector u = space.normalize(q);
    for (Eigen::Index d = 0; d < u.size(); ++d)
        if (!(u[d] >= -kWeightTolerance && u[d] <= 1.0 + kWeightTolerance))
            throw OutsideHull("interpolate: coordinate " + std::to_string(d) + " outside the input range");
    return u;
}

}  // namespace detail

/// Simplex-linear interpolation of the LUT at physical point q; `tri` must be
/// the triangulation of lut.normalized().
template <typename Derived>
Vector interpolate(const Lut& lut, const Triangulation& tri, const Eigen::MatrixBase<Derived>& q)
{
    if (tri.vertex_count() != lut.size()) throw InvalidArgument("interpolate: triangulation does not match LUT");
    return detail::interpolate_normalized(tri, lut.Y, {}, detail::checked_normalize(lut.space, q));
}

/// A LUT together with its triangulation; remembers the last located simplex
/// to speed up spatially coherent query streams.
class LutInterpolator {
public:
    explicit LutInterpolator(const Lut& lut) : lut_(&lut), tri_(triangulate(lut.normalized())) {}

    const Triangulation& triangulation() const noexcept { return tri_; }

    template <typename Derived>
    Vector operator()(const Eigen::MatrixBase<Derived>& q)
    {
        return detail::interpolate_normalized(tri_, lut_->Y, {}, detail::checked_normalize(lut_->space, q), &hint_);
    }

private:
    const Lut* lut_;
    Triangulation tri_;
    std::size_t hint_ = 0;
};

/// Leave-one-out errors over the non-vertex nodes.
struct ErrorReport {
    std::vector<std::size_t> node_ids;
    std::vector<double> delta;
    std::vector<std::size_t> lambda_max_index;
    double p95 = 0.0;
    std::size_t guarded_count = 0;

    std::size_t size() const noexcept { return node_ids.size(); }
};

inline constexpr double kStopPercentile = 95.0;

/// For every non-vertex node j: triangulate all other nodes, interpolate at
/// x_j and compare against Y[j]. Vertex nodes are never left out, so x_j is
/// always inside the hull of the remaining nodes.
inline ErrorReport loo_errors(const Lut& lut, unsigned threads = 1)
{
    const std::size_t m = lut.size();
    const std::size_t dim = lut.dim();
    std::vector<std::size_t> ids;
    for (std::size_t i = 0; i < m; ++i)
        if (!lut.is_vertex[i]) ids.push_back(i);
    if (m < dim + 2 || ids.empty())
        throw InsufficientNodes("loo_errors: need m >= D+2 and at least one non-vertex node");

    const Matrix u = lut.normalized();
    ErrorReport report;
    report.node_ids = ids;
    report.delta.resize(ids.size());
    report.lambda_max_index.resize(ids.size());
    std::vector<char> guarded(ids.size(), 0);

    parallel_for(ids.size(), threads, [&](std::size_t t) {
        const std::size_t j = ids[t];
        Matrix rest(static_cast<Eigen::Index>(m - 1), static_cast<Eigen::Index>(dim));
        std::vector<std::size_t> rows(m - 1);
        for (std::size_t i = 0, r = 0; i < m; ++i) {
            if (i == j) continue;
            rest.row(static_cast<Eigen::Index>(r)) = u.row(static_cast<Eigen::Index>(i));
            rows[r++] = i;
        }
        Triangulation tri;
        try {
            tri = triangulate(rest);
        } catch (const DegenerateInput& e) {
            throw InsufficientNodes("loo_errors: removing node " + std::to_string(j) + " leaves a degenerate set (" +
                                    e.what() + ")");
        }
        const auto row = static_cast<Eigen::Index>(j);
        const Vector y = lut.Y.row(row).transpose();
        const Vector residual = detail::interpolate_normalized(tri, lut.Y, rows, u.row(row).transpose(), nullptr, &y);
        const auto err = relative_residual(residual, y);
        report.delta[t] = err.delta;
        report.lambda_max_index[t] = err.channel;
        guarded[t] = err.guarded ? 1 : 0;
    });
    report.guarded_count = static_cast<std::size_t>(std::count(guarded.begin(), guarded.end(), 1));
    report.p95 = percentile(report.delta, kStopPercentile);
    return report;
}

}  // namespace galga
