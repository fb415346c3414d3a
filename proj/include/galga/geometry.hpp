#pragma once

// D-dimensional Delaunay triangulation and simplex primitives.
//
// The triangulation is the lower convex hull of the points lifted onto the
// paraboloid h = |x|^2, computed with an incremental (Quickhull-style)
// beneath-beyond algorithm in D+1 dimensions. Degenerate inputs such as the
// hypercube corners (cospherical, with coplanar faces) are resolved by
// joggling the coordinates fed to the hull by a tiny deterministic offset
// derived from each point's coordinate bits; the combinatorics come from the
// joggled hull while volumes and weights use the true coordinates. If the
// hull loses a point or its horizon stops being a manifold, the joggle is
// enlarged tenfold and the hull rebuilt.
// Predicates are plain floating point with fixed tolerances; exact
// arithmetic is not attempted.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "galga/error.hpp"
#include "galga/rng.hpp"
#include "galga/types.hpp"

namespace galga {

inline constexpr std::size_t kMaxTriangulationDim = 9;
/// Two points closer than this (max-norm, normalized units) are duplicates.
inline constexpr double kDuplicateTolerance = 1e-12;
/// Barycentric weights >= -kWeightTolerance count as inside.
inline constexpr double kWeightTolerance = 1e-12;
/// Simplices whose volume is below this fraction of (longest edge)^D / D!
/// are dropped as degenerate.
inline constexpr double kMinSimplexQuality = 1e-12;
/// Condition number above which a simplex is reported singular.
inline constexpr double kMaxSimplexCondition = 1e12;
/// Initial and largest coordinate joggle used for tie-breaking. Both shrink
/// for inputs whose features (point spacing, distance of interior
/// coordinates to the cube faces) are small, so the joggle never reorders
/// nearby points.
inline constexpr double kJoggle = 1e-7;
inline constexpr double kMaxJoggle = 1e-5;

namespace detail {

inline constexpr int kMaxLift = static_cast<int>(kMaxTriangulationDim) + 1;

/// Determinant of the n x n row-major matrix in `a`; `a` is overwritten.
inline double det_inplace(double* a, int n) noexcept
{
    double det = 1.0;
    for (int c = 0; c < n; ++c) {
        int piv = c;
        double best = std::abs(a[c * n + c]);
        for (int r = c + 1; r < n; ++r) {
            const double v = std::abs(a[r * n + c]);
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (best == 0.0) return 0.0;
        if (piv != c) {
            for (int k = c; k < n; ++k) std::swap(a[c * n + k], a[piv * n + k]);
            det = -det;
        }
        const double p = a[c * n + c];
        det *= p;
        for (int r = c + 1; r < n; ++r) {
            const double f = a[r * n + c] / p;
            if (f == 0.0) continue;
            for (int k = c + 1; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
        }
    }
    return det;
}

/// Inverts the n x n row-major matrix `a` into `inv` (Gauss-Jordan with
/// partial pivoting). Returns false when a zero pivot is met.
inline bool invert_small(const double* a, double* inv, int n) noexcept
{
    std::array<double, kMaxLift * kMaxLift> m{};
    for (int i = 0; i < n * n; ++i) m[i] = a[i];
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) inv[r * n + c] = (r == c) ? 1.0 : 0.0;
    for (int c = 0; c < n; ++c) {
        int piv = c;
        double best = std::abs(m[c * n + c]);
        for (int r = c + 1; r < n; ++r) {
            const double v = std::abs(m[r * n + c]);
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (best == 0.0) return false;
        if (piv != c) {
            for (int k = 0; k < n; ++k) {
                std::swap(m[c * n + k], m[piv * n + k]);
                std::swap(inv[c * n + k], inv[piv * n + k]);
            }
        }
        const double p = m[c * n + c];
        for (int k = 0; k < n; ++k) {
            m[c * n + k] /= p;
            inv[c * n + k] /= p;
        }
        for (int r = 0; r < n; ++r) {
            if (r == c) continue;
            const double f = m[r * n + c];
            if (f == 0.0) continue;
            for (int k = 0; k < n; ++k) {
                m[r * n + k] -= f * m[c * n + k];
                inv[r * n + k] -= f * inv[c * n + k];
            }
        }
    }
    return true;
}

inline double factorial(std::size_t n) noexcept
{
    double f = 1.0;
    for (std::size_t k = 2; k <= n; ++k) f *= static_cast<double>(k);
    return f;
}

/// Deterministic offset in [-1, 1) for coordinate k of point x. Derived from
/// the coordinate bits, so a point keeps its tie-break regardless of its
/// position in the input list.
inline double joggle_offset(const double* x, int dim, int k) noexcept
{
    std::uint64_t h = 0x243F6A8885A308D3ULL + static_cast<std::uint64_t>(k);
    for (int j = 0; j < dim; ++j) h = SplitMix64(h ^ std::bit_cast<std::uint64_t>(x[j] + 0.0)).next();
    return static_cast<double>(h >> 11) * 0x1.0p-52 - 1.0;
}

}  // namespace detail

/// Delaunay triangulation over normalized points. Immutable once built.
class Triangulation {
public:
    static constexpr int kBoundary = -1;

    Triangulation() = default;

    std::size_t dim() const noexcept { return dim_; }
    std::size_t vertex_count() const noexcept { return static_cast<std::size_t>(vertices_.rows()); }
    std::size_t simplex_count() const noexcept { return dim_ == 0 ? 0 : simplices_.size() / (dim_ + 1); }

    const Matrix& vertices() const noexcept { return vertices_; }
    auto vertex(std::size_t i) const { return vertices_.row(static_cast<Eigen::Index>(i)); }

    /// Vertex indices of simplex s (D+1 entries).
    std::span<const int> simplex(std::size_t s) const
    {
        return {simplices_.data() + s * (dim_ + 1), dim_ + 1};
    }

    /// Simplex sharing the facet opposite vertex slot k of s, or kBoundary.
    int neighbor(std::size_t s, std::size_t k) const { return neighbors_[s * (dim_ + 1) + k]; }

    /// Simplices having vertex v as a corner, in increasing id order.
    std::span<const int> incident(std::size_t v) const
    {
        return {incident_.data() + incident_offsets_[v], incident_offsets_[v + 1] - incident_offsets_[v]};
    }

    /// Input points that ended up strictly inside the lifted hull and so are
    /// not vertices of any simplex (only possible for near-cospherical input).
    std::size_t hidden_vertex_count() const noexcept { return hidden_; }

private:
    friend Triangulation triangulate(const Matrix& points);

    void build_incidence()
    {
        const std::size_t n = vertex_count();
        incident_offsets_.assign(n + 1, 0);
        for (int v : simplices_) ++incident_offsets_[static_cast<std::size_t>(v) + 1];
        for (std::size_t i = 0; i < n; ++i) incident_offsets_[i + 1] += incident_offsets_[i];
        incident_.assign(simplices_.size(), 0);
        std::vector<std::size_t> fill(incident_offsets_.begin(), incident_offsets_.end() - 1);
        for (std::size_t s = 0; s < simplex_count(); ++s)
            for (int v : simplex(s)) incident_[fill[static_cast<std::size_t>(v)]++] = static_cast<int>(s);
        hidden_ = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (incident_offsets_[i + 1] == incident_offsets_[i]) ++hidden_;
    }

    std::size_t dim_ = 0;
    Matrix vertices_;
    std::vector<int> simplices_;
    std::vector<int> neighbors_;
    std::vector<std::size_t> incident_offsets_;
    std::vector<int> incident_;
    std::size_t hidden_ = 0;
};

struct BarycentricCoords {
    Vector weights;
    std::size_t simplex_id = 0;
};

namespace detail {

/// Unnormalized barycentric weights of q in simplex s. Returns the 1-norm
/// condition estimate of the edge matrix (infinity if singular).
template <typename Derived>
double simplex_weights(const Triangulation& tri, std::size_t s, const Eigen::MatrixBase<Derived>& q,
                       double* w) noexcept
{
    const int n = static_cast<int>(tri.dim());
    const auto idx = tri.simplex(s);
    const auto x0 = tri.vertex(static_cast<std::size_t>(idx[0]));
    std::array<double, kMaxLift * kMaxLift> t{};
    std::array<double, kMaxLift * kMaxLift> inv{};
    // columns are edge vectors x_k - x_0
    for (int k = 1; k <= n; ++k) {
        const auto xk = tri.vertex(static_cast<std::size_t>(idx[k]));
        for (int r = 0; r < n; ++r) t[r * n + (k - 1)] = xk[r] - x0[r];
    }
    if (!invert_small(t.data(), inv.data(), n)) return std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (int r = 0; r < n; ++r) {
        double acc = 0.0;
        for (int c = 0; c < n; ++c) acc += inv[r * n + c] * (q[c] - x0[c]);
        w[r + 1] = acc;
        sum += acc;
    }
    w[0] = 1.0 - sum;

    double norm_t = 0.0;
    double norm_inv = 0.0;
    for (int c = 0; c < n; ++c) {
        double ct = 0.0;
        double ci = 0.0;
        for (int r = 0; r < n; ++r) {
            ct += std::abs(t[r * n + c]);
            ci += std::abs(inv[r * n + c]);
        }
        norm_t = std::max(norm_t, ct);
        norm_inv = std::max(norm_inv, ci);
    }
    return norm_t * norm_inv;
}

class LiftedHull {
public:
    struct Facet {
        std::array<int, kMaxLift> v{};
        std::array<int, kMaxLift> nb{};
        std::array<double, kMaxLift> normal{};
        double offset = 0.0;
        std::vector<int> outside;
        int furthest = -1;
        double furthest_dist = 0.0;
        bool alive = true;
    };

    LiftedHull(std::vector<double> lifted, int d) : p_(std::move(lifted)), d_(d) {}

    void build(const std::vector<int>& initial)
    {
        const int n = static_cast<int>(p_.size() / static_cast<std::size_t>(d_));
        interior_.fill(0.0);
        for (int i : initial)
            for (int k = 0; k < d_; ++k) interior_[k] += p_[idx(i, k)] / static_cast<double>(d_ + 1);

        // facet t omits initial vertex t
        for (int t = 0; t <= d_; ++t) {
            Facet f;
            int slot = 0;
            for (int j = 0; j <= d_; ++j) {
                if (j == t) continue;
                f.v[slot] = initial[j];
                f.nb[slot] = j;
                ++slot;
            }
            set_plane(f);
            facets_.push_back(std::move(f));
        }

        std::vector<char> used(static_cast<std::size_t>(n), 0);
        for (int i : initial) used[i] = 1;
        for (int i = 0; i < n; ++i) {
            if (used[i]) continue;
            assign(i, 0, static_cast<int>(facets_.size()));
        }
        for (int f = 0; f <= d_; ++f)
            if (!facets_[f].outside.empty()) queue_.push_back(f);

        std::vector<int> visible;
        std::vector<std::pair<int, int>> horizon;
        std::vector<int> orphans;
        while (!queue_.empty()) {
            const int f0 = queue_.front();
            queue_.pop_front();
            if (!facets_[f0].alive || facets_[f0].outside.empty()) continue;
            const int apex = facets_[f0].furthest;

            // facets visible from the apex, grown from f0 across neighbors
            ++epoch_;
            visible.clear();
            horizon.clear();
            visible.push_back(f0);
            mark(f0, true);
            for (std::size_t q = 0; q < visible.size(); ++q) {
                const int f = visible[q];
                for (int k = 0; k < d_; ++k) {
                    const int g = facets_[f].nb[k];
                    if (g < 0) {
                        failed_ = true;
                        return;
                    }
                    if (visited(g)) continue;
                    const bool vis = distance(facets_[g], apex) > kVisibleTol;
                    mark(g, vis);
                    if (vis) visible.push_back(g);
                }
            }
            for (int f : visible)
                for (int k = 0; k < d_; ++k)
                    if (!is_visible(facets_[f].nb[k])) horizon.emplace_back(f, k);

            const int first_new = static_cast<int>(facets_.size());
            std::map<std::array<int, kMaxLift>, std::pair<int, int>> ridges;
            for (auto [f, k] : horizon) {
                Facet g;
                g.v = facets_[f].v;
                g.v[k] = apex;
                const int outer = facets_[f].nb[k];
                g.nb.fill(-1);
                g.nb[k] = outer;
                set_plane(g);
                const int gid = static_cast<int>(facets_.size());
                for (int j = 0; j < d_; ++j)
                    if (facets_[outer].nb[j] == f) facets_[outer].nb[j] = gid;
                facets_.push_back(std::move(g));
                // ridges through the apex are shared with other new facets
                for (int t = 0; t < d_; ++t) {
                    if (t == k) continue;
                    std::array<int, kMaxLift> key;
                    key.fill(std::numeric_limits<int>::max());
                    int m = 0;
                    for (int j = 0; j < d_; ++j)
                        if (j != t) key[m++] = facets_[gid].v[j];
                    std::sort(key.begin(), key.begin() + m);
                    auto [it, inserted] = ridges.try_emplace(key, gid, t);
                    if (!inserted) {
                        facets_[gid].nb[t] = it->second.first;
                        facets_[it->second.first].nb[it->second.second] = gid;
                        ridges.erase(it);
                    }
                }
            }
            if (!ridges.empty()) {
                failed_ = true;
                return;
            }

            orphans.clear();
            for (int f : visible) {
                facets_[f].alive = false;
                for (int pt : facets_[f].outside)
                    if (pt != apex) orphans.push_back(pt);
                facets_[f].outside.clear();
                facets_[f].outside.shrink_to_fit();
            }
            const int end_new = static_cast<int>(facets_.size());
            for (int pt : orphans) assign(pt, first_new, end_new);
            for (int g = first_new; g < end_new; ++g)
                if (!facets_[g].outside.empty()) queue_.push_back(g);
        }
    }

    const std::vector<Facet>& facets() const noexcept { return facets_; }
    /// True if every input point became a hull vertex and the incremental
    /// construction stayed consistent.
    bool ok() const noexcept { return !failed_ && dropped_ == 0; }

private:
    static constexpr double kVisibleTol = 1e-13;

    std::size_t idx(int i, int k) const noexcept
    {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(d_) + static_cast<std::size_t>(k);
    }

    double distance(const Facet& f, int pt) const noexcept
    {
        double s = -f.offset;
        for (int k = 0; k < d_; ++k) s += f.normal[k] * p_[idx(pt, k)];
        return s;
    }

    void assign(int pt, int begin, int end)
    {
        for (int f = begin; f < end; ++f) {
            if (!facets_[f].alive) continue;
            const double dist = distance(facets_[f], pt);
            if (dist > kVisibleTol) {
                auto& fa = facets_[f];
                fa.outside.push_back(pt);
                if (fa.furthest < 0 || dist > fa.furthest_dist) {
                    fa.furthest = pt;
                    fa.furthest_dist = dist;
                }
                return;
            }
        }
        ++dropped_;
    }

    /// Hyperplane through the facet vertices, oriented away from the interior.
    void set_plane(Facet& f) const
    {
        const int m = d_ - 1;
        std::array<double, kMaxLift * kMaxLift> rows{};
        for (int i = 1; i < d_; ++i)
            for (int k = 0; k < d_; ++k) rows[(i - 1) * d_ + k] = p_[idx(f.v[i], k)] - p_[idx(f.v[0], k)];
        std::array<double, kMaxLift * kMaxLift> minor{};
        double norm = 0.0;
        for (int j = 0; j < d_; ++j) {
            for (int r = 0; r < m; ++r) {
                int c2 = 0;
                for (int c = 0; c < d_; ++c)
                    if (c != j) minor[r * m + c2++] = rows[r * d_ + c];
            }
            const double cof = det_inplace(minor.data(), m);
            f.normal[j] = (j % 2 == 0) ? cof : -cof;
            norm += f.normal[j] * f.normal[j];
        }
        norm = std::sqrt(norm);
        if (norm == 0.0) {
            f.normal.fill(0.0);
            f.offset = 0.0;
            return;
        }
        double side = 0.0;
        for (int k = 0; k < d_; ++k) {
            f.normal[k] /= norm;
            side += f.normal[k] * (interior_[k] - p_[idx(f.v[0], k)]);
        }
        if (side > 0.0)
            for (int k = 0; k < d_; ++k) f.normal[k] = -f.normal[k];
        f.offset = 0.0;
        for (int k = 0; k < d_; ++k) f.offset += f.normal[k] * p_[idx(f.v[0], k)];
    }

    void mark(int f, bool vis)
    {
        if (seen_.size() <= static_cast<std::size_t>(f)) {
            seen_.resize(facets_.size() * 2 + 16, 0);
            vis_.resize(seen_.size(), 0);
        }
        seen_[f] = epoch_;
        vis_[f] = vis ? 1 : 0;
    }
    bool visited(int f) const noexcept
    {
        return static_cast<std::size_t>(f) < seen_.size() && seen_[f] == epoch_;
    }
    bool is_visible(int f) const noexcept { return visited(f) && vis_[f]; }

    std::vector<double> p_;
    int d_;
    std::array<double, kMaxLift> interior_{};
    std::vector<Facet> facets_;
    std::deque<int> queue_;
    std::vector<unsigned> seen_;
    std::vector<char> vis_;
    unsigned epoch_ = 0;
    int dropped_ = 0;
    bool failed_ = false;
};

/// Greedily extends `chosen` to `want` affinely independent points, each time
/// taking the point farthest from the current affine hull.
inline bool extend_affine_basis(const double* pts, int n, int dim, std::vector<int>& chosen, int want, double tol)
{
    std::vector<std::array<double, kMaxLift>> basis;
    const double* origin = pts + static_cast<std::size_t>(chosen[0]) * dim;
    auto residual = [&](int i, std::array<double, kMaxLift>& r) {
        for (int k = 0; k < dim; ++k) r[k] = pts[static_cast<std::size_t>(i) * dim + k] - origin[k];
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& b : basis) {
                double dot = 0.0;
                for (int k = 0; k < dim; ++k) dot += r[k] * b[k];
                for (int k = 0; k < dim; ++k) r[k] -= dot * b[k];
            }
        double nn = 0.0;
        for (int k = 0; k < dim; ++k) nn += r[k] * r[k];
        return std::sqrt(nn);
    };
    std::array<double, kMaxLift> r{};
    for (std::size_t c = 1; c < chosen.size(); ++c) {
        const double nr = residual(chosen[c], r);
        if (nr <= tol) return false;
        for (int k = 0; k < dim; ++k) r[k] /= nr;
        basis.push_back(r);
    }
    while (static_cast<int>(chosen.size()) < want) {
        int best = -1;
        double best_norm = tol;
        for (int i = 0; i < n; ++i) {
            const double nr = residual(i, r);
            if (nr > best_norm) {
                best_norm = nr;
                best = i;
            }
        }
        if (best < 0) return false;
        residual(best, r);
        for (int k = 0; k < dim; ++k) r[k] /= best_norm;
        basis.push_back(r);
        chosen.push_back(best);
    }
    return true;
}

}  // namespace detail

/// Delaunay triangulation of normalized points (rows of `points`, each
/// coordinate in [0,1]). Deterministic for a given input order.
inline Triangulation triangulate(const Matrix& points)
{
    const auto n = static_cast<int>(points.rows());
    const auto dim = static_cast<int>(points.cols());
    if (dim < 1) throw InvalidArgument("triangulate: dimension must be >= 1");
    if (static_cast<std::size_t>(dim) > kMaxTriangulationDim)
        throw CapacityError("triangulate: dimension " + std::to_string(dim) + " exceeds " +
                            std::to_string(kMaxTriangulationDim));
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < dim; ++k) {
            const double c = points(i, k);
            if (!std::isfinite(c) || c < -kDuplicateTolerance || c > 1.0 + kDuplicateTolerance)
                throw InvalidArgument("triangulate: point " + std::to_string(i) +
                                      " has a coordinate outside [0,1]");
        }

    // duplicates: sort by first coordinate, compare within the tolerance band
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        for (int k = 0; k < dim; ++k)
            if (points(a, k) != points(b, k)) return points(a, k) < points(b, k);
        return a < b;
    });
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            const int i = order[a];
            const int j = order[b];
            if (points(j, 0) - points(i, 0) > kDuplicateTolerance) break;
            if ((points.row(i) - points.row(j)).cwiseAbs().maxCoeff() <= kDuplicateTolerance)
                throw DuplicatePoint("triangulate: points " + std::to_string(std::min(i, j)) + " and " +
                                     std::to_string(std::max(i, j)) + " coincide");
        }
    }

    if (n < dim + 1)
        throw DegenerateInput("triangulate: need at least D+1 = " + std::to_string(dim + 1) + " points");

    std::vector<double> flat(static_cast<std::size_t>(n) * dim);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < dim; ++k) flat[static_cast<std::size_t>(i) * dim + k] = points(i, k);

    std::vector<int> chosen{order[0]};
    if (!detail::extend_affine_basis(flat.data(), n, dim, chosen, dim + 1, kDuplicateTolerance))
        throw DegenerateInput("triangulate: points lie in a proper affine subspace");

    Triangulation tri;
    tri.dim_ = static_cast<std::size_t>(dim);
    tri.vertices_ = points;

    if (n == dim + 1) {
        std::sort(chosen.begin(), chosen.end());
        tri.simplices_ = chosen;
        tri.neighbors_.assign(chosen.size(), Triangulation::kBoundary);
        tri.build_incidence();
        return tri;
    }

    const int d = dim + 1;
    const double inv_fact = 1.0 / detail::factorial(static_cast<std::size_t>(dim));
    // Projected volume of a hull facet in true coordinates, or 0 if it is
    // degenerate relative to its longest edge.
    auto projected_volume = [&](const detail::LiftedHull::Facet& fa) {
        std::array<double, detail::kMaxLift * detail::kMaxLift> m{};
        for (int k = 1; k <= dim; ++k)
            for (int r = 0; r < dim; ++r) m[r * dim + (k - 1)] = points(fa.v[k], r) - points(fa.v[0], r);
        double longest = 0.0;
        for (int a = 0; a <= dim; ++a)
            for (int b = a + 1; b <= dim; ++b)
                longest = std::max(longest, (points.row(fa.v[a]) - points.row(fa.v[b])).norm());
        const double vol = std::abs(detail::det_inplace(m.data(), dim)) * inv_fact;
        return vol <= kMinSimplexQuality * std::pow(longest, dim) * inv_fact ? 0.0 : vol;
    };

    // smallest feature: nearest-pair distance or an interior coordinate's gap
    // to the unit-cube faces
    double feature = 1.0;
    for (int a = 0; a < n; ++a) {
        const int i = order[a];
        for (int k = 0; k < dim; ++k) {
            const double c = points(i, k);
            if (c > 0.0 && c < 1.0) feature = std::min(feature, std::min(c, 1.0 - c));
        }
        for (int b = a + 1; b < n; ++b) {
            const int j = order[b];
            if (points(j, 0) - points(i, 0) >= feature) break;
            feature = std::min(feature, (points.row(i) - points.row(j)).norm());
        }
    }
    const double joggle_start = std::min(kJoggle, 1e-2 * feature);
    const double joggle_end = std::max(joggle_start, std::min(kMaxJoggle, 1e-1 * feature));

    std::vector<double> lifted(static_cast<std::size_t>(n) * d);
    std::optional<detail::LiftedHull> hull;
    std::vector<int> simplex_of;
    int count = 0;
    bool accepted = false;
    for (double joggle = joggle_start; joggle <= joggle_end * 1.0001 && !accepted; joggle *= 10.0) {
        for (int i = 0; i < n; ++i) {
            const double* x = flat.data() + static_cast<std::size_t>(i) * dim;
            double h = 0.0;
            for (int k = 0; k < dim; ++k) {
                const double c = x[k] + joggle * detail::joggle_offset(x, dim, k);
                lifted[static_cast<std::size_t>(i) * d + k] = c;
                h += c * c;
            }
            lifted[static_cast<std::size_t>(i) * d + dim] = h;
        }
        std::vector<int> start = chosen;
        if (!detail::extend_affine_basis(lifted.data(), n, d, start, d + 1, 1e-15)) continue;
        hull.emplace(lifted, d);
        hull->build(start);
        if (!hull->ok()) continue;

        // Lower and upper sheets both project onto the convex hull of the
        // input; unequal areas mean the hull went wrong numerically.
        const auto& facets = hull->facets();
        simplex_of.assign(facets.size(), Triangulation::kBoundary);
        count = 0;
        double lower = 0.0;
        double upper = 0.0;
        for (std::size_t f = 0; f < facets.size(); ++f) {
            const auto& fa = facets[f];
            if (!fa.alive) continue;
            const bool is_lower = fa.normal[dim] < -1e-12;
            if (!is_lower && !(fa.normal[dim] > 1e-12)) continue;
            const double vol = projected_volume(fa);
            if (vol == 0.0) continue;
            if (is_lower) {
                lower += vol;
                simplex_of[f] = count++;
            } else {
                upper += vol;
            }
        }
        accepted = std::abs(lower - upper) <= 1e-9 * std::max(lower, upper);
    }
    if (!accepted)
        throw DegenerateInput("triangulate: convex hull construction failed at the largest joggle");
    const auto& facets = hull->facets();

    tri.simplices_.resize(static_cast<std::size_t>(count) * d);
    tri.neighbors_.resize(static_cast<std::size_t>(count) * d);
    for (std::size_t f = 0; f < facets.size(); ++f) {
        const int s = simplex_of[f];
        if (s < 0) continue;
        for (int k = 0; k < d; ++k) {
            tri.simplices_[static_cast<std::size_t>(s) * d + k] = facets[f].v[k];
            const int nb = facets[f].nb[k];
            tri.neighbors_[static_cast<std::size_t>(s) * d + k] = nb >= 0 ? simplex_of[nb] : Triangulation::kBoundary;
        }
    }
    tri.build_incidence();
    return tri;
}

/// Barycentric coordinates of q with respect to simplex s, normalized to sum
/// to one. Throws SingularSimplex for numerically flat simplices.
template <typename Derived>
BarycentricCoords barycentric(const Triangulation& tri, std::size_t s, const Eigen::MatrixBase<Derived>& q)
{
    if (s >= tri.simplex_count()) throw InvalidArgument("barycentric: no simplex " + std::to_string(s));
    if (static_cast<std::size_t>(q.size()) != tri.dim()) throw DimensionMismatch("barycentric: query dimension");
    std::array<double, detail::kMaxLift> w{};
    const double cond = detail::simplex_weights(tri, s, q, w.data());
    if (!(cond <= kMaxSimplexCondition))
        throw SingularSimplex("barycentric: simplex " + std::to_string(s) + " is numerically singular");
    BarycentricCoords out{Vector(static_cast<Eigen::Index>(tri.dim() + 1)), s};
    double sum = 0.0;
    for (std::size_t k = 0; k <= tri.dim(); ++k) sum += w[k];
    for (std::size_t k = 0; k <= tri.dim(); ++k) out.weights[static_cast<Eigen::Index>(k)] = w[k] / sum;
    return out;
}

/// Simplex containing q (all barycentric weights >= -kWeightTolerance), or
/// nullopt when q is outside the triangulated hull. Walks from `hint`
/// toward q and falls back to a scan of all simplices.
template <typename Derived>
std::optional<std::size_t> locate(const Triangulation& tri, const Eigen::MatrixBase<Derived>& q, std::size_t hint = 0)
{
    const std::size_t count = tri.simplex_count();
    if (count == 0) return std::nullopt;
    if (static_cast<std::size_t>(q.size()) != tri.dim()) throw DimensionMismatch("locate: query dimension");
    const std::size_t d1 = tri.dim() + 1;
    std::array<double, detail::kMaxLift> w{};

    std::size_t s = std::min(hint, count - 1);
    for (std::size_t steps = 0; steps <= count; ++steps) {
        const double cond = detail::simplex_weights(tri, s, q, w.data());
        if (!std::isfinite(cond)) break;
        std::size_t worst = 0;
        for (std::size_t k = 1; k < d1; ++k)
            if (w[k] < w[worst]) worst = k;
        if (w[worst] >= -kWeightTolerance) return s;
        const int next = tri.neighbor(s, worst);
        if (next < 0) break;
        s = static_cast<std::size_t>(next);
    }

    // The walk stops at facets whose neighbour was a dropped flat simplex;
    // fall back to a scan with a cheap bounding-box rejection.
    std::optional<std::size_t> best;
    double best_min = -std::numeric_limits<double>::infinity();
    constexpr double kBoxSlack = 1e-9;
    for (std::size_t t = 0; t < count; ++t) {
        const auto idx = tri.simplex(t);
        bool in_box = true;
        for (std::size_t k = 0; k < tri.dim() && in_box; ++k) {
            const auto c = static_cast<Eigen::Index>(k);
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (int v : idx) {
                const double x = tri.vertex(static_cast<std::size_t>(v))[c];
                lo = std::min(lo, x);
                hi = std::max(hi, x);
            }
            in_box = q[c] >= lo - kBoxSlack && q[c] <= hi + kBoxSlack;
        }
        if (!in_box) continue;
        const double cond = detail::simplex_weights(tri, t, q, w.data());
        if (!std::isfinite(cond)) continue;
        double mn = w[0];
        for (std::size_t k = 1; k < d1; ++k) mn = std::min(mn, w[k]);
        if (mn > best_min) {
            best_min = mn;
            best = t;
        }
    }
    if (best && best_min >= -kWeightTolerance) return best;
    return std::nullopt;
}

/// |det(x_1 - x_0, ..., x_D - x_0)| / D!
inline double simplex_volume(const Triangulation& tri, std::size_t s)
{
    if (s >= tri.simplex_count()) throw InvalidArgument("simplex_volume: no simplex " + std::to_string(s));
    const int n = static_cast<int>(tri.dim());
    const auto idx = tri.simplex(s);
    std::array<double, detail::kMaxLift * detail::kMaxLift> m{};
    for (int k = 1; k <= n; ++k)
        for (int r = 0; r < n; ++r)
            m[r * n + (k - 1)] = tri.vertex(static_cast<std::size_t>(idx[k]))[r] - tri.vertex(static_cast<std::size_t>(idx[0]))[r];
    return std::abs(detail::det_inplace(m.data(), n)) / detail::factorial(tri.dim());
}

/// Arithmetic mean of the simplex vertices.
inline Vector barycenter(const Triangulation& tri, std::size_t s)
{
    if (s >= tri.simplex_count()) throw InvalidArgument("barycenter: no simplex " + std::to_string(s));
    Vector c = Vector::Zero(static_cast<Eigen::Index>(tri.dim()));
    for (int v : tri.simplex(s)) c += tri.vertex(static_cast<std::size_t>(v)).transpose();
    return c / static_cast<double>(tri.dim() + 1);
}

}  // namespace galga
