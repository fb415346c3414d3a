#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "galga/error.hpp"
#include "galga/geometry.hpp"
#include "galga/interpolation.hpp"
#include "galga/sampling.hpp"

namespace galga {

struct AcquisitionConfig {
    double epsilon_t = 1.0;  // percent
    unsigned period = 3;
    /// Density-term proposals per iteration; 0 means 5 * 2^D.
    std::size_t density_count = 0;
    double min_node_separation = 1e-9;
    /// Divide each output difference by the normalized node distance.
    bool distance_normalized = false;
    /// Geometry proposals from a simplex whose facet opposite the source node
    /// lies in a face of the unit cube go to that facet's barycenter.
    bool snap_to_boundary = false;

    void validate() const
    {
        if (!(epsilon_t > 0.0) || !std::isfinite(epsilon_t)) throw InvalidArgument("epsilon_t must be positive");
        if (period < 2) throw InvalidArgument("period must be at least 2");
        if (!(min_node_separation >= 0.0)) throw InvalidArgument("min_node_separation must be non-negative");
    }

    std::size_t density_cap(std::size_t dim) const { return density_count ? density_count : design_size(dim); }
};

enum class Term { Init, Geometry, Density };

inline std::string_view to_string(Term t)
{
    switch (t) {
    case Term::Init: return "init";
    case Term::Geometry: return "geometry";
    case Term::Density: return "density";
    }
    return "?";
}

inline Term parse_term(std::string_view s)
{
    if (s == "init") return Term::Init;
    if (s == "geometry") return Term::Geometry;
    if (s == "density") return Term::Density;
    throw FormatError("unknown term '" + std::string(s) + "'");
}

/// 1 selects the geometry term, 0 the density term. Iterations count from 1;
/// every T-th iteration is a density iteration.
inline int beta(std::size_t iteration, unsigned period)
{
    if (iteration < 1) throw InvalidArgument("beta: iterations start at 1");
    if (period < 1) throw InvalidArgument("beta: period must be positive");
    return iteration % period == 0 ? 0 : 1;
}

inline Term scheduled_term(std::size_t iteration, unsigned period)
{
    return beta(iteration, period) ? Term::Geometry : Term::Density;
}

/// New nodes in normalized coordinates. For geometry proposals source_node is
/// the high-error node that selected the simplex; for density proposals it is
/// kNoSource.
struct Proposal {
    static constexpr std::size_t kNoSource = static_cast<std::size_t>(-1);

    Term term = Term::Geometry;
    Matrix points;
    std::vector<std::size_t> source_node;
    std::vector<std::size_t> source_simplex;

    std::size_t size() const noexcept { return static_cast<std::size_t>(points.rows()); }
};

namespace detail {

/// Accumulates candidate points, dropping any within `sep` of an existing
/// node, an already accepted candidate, or a cube face it does not lie on.
/// The face rule stops sliver barycenters from creeping geometrically
/// toward the boundary.
class ProposalBuilder {
public:
    ProposalBuilder(const Matrix& existing, double sep, Term term) : existing_(existing), sep2_(sep * sep)
    {
        out_.term = term;
    }

    bool add(const Vector& p, std::size_t node, std::size_t simplex)
    {
        for (Eigen::Index d = 0; d < p.size(); ++d) {
            const double gap = std::min(p[d], 1.0 - p[d]);
            if (gap > 0.0 && gap * gap <= sep2_) return false;
        }
        for (Eigen::Index i = 0; i < existing_.rows(); ++i)
            if ((existing_.row(i).transpose() - p).squaredNorm() <= sep2_) return false;
        for (const auto& q : accepted_)
            if ((q - p).squaredNorm() <= sep2_) return false;
        accepted_.push_back(p);
        out_.source_node.push_back(node);
        out_.source_simplex.push_back(simplex);
        return true;
    }

    Proposal finish(std::size_t dim) &&
    {
        out_.points.resize(static_cast<Eigen::Index>(accepted_.size()), static_cast<Eigen::Index>(dim));
        for (std::size_t i = 0; i < accepted_.size(); ++i)
            out_.points.row(static_cast<Eigen::Index>(i)) = accepted_[i].transpose();
        return std::move(out_);
    }

private:
    const Matrix& existing_;
    double sep2_;
    std::vector<Vector> accepted_;
    Proposal out_;
};

}  // namespace detail

/// RMS over the simplex's other vertices k of |y_j - y_k| at `channel`.
inline double simplex_gradient(const Lut& lut, const Triangulation& tri, std::size_t s, std::size_t j,
                               std::size_t channel, bool distance_normalized = false)
{
    const auto c = static_cast<Eigen::Index>(channel);
    const auto jr = static_cast<Eigen::Index>(j);
    double sum = 0.0;
    std::size_t n = 0;
    for (int v : tri.simplex(s)) {
        if (static_cast<std::size_t>(v) == j) continue;
        double g = std::abs(lut.Y(jr, c) - lut.Y(v, c));
        if (distance_normalized) g /= (tri.vertex(j) - tri.vertex(static_cast<std::size_t>(v))).norm();
        sum += g * g;
        ++n;
    }
    return n ? std::sqrt(sum / static_cast<double>(n)) : 0.0;
}

/// Barycenter of the facet of simplex s opposite vertex j, if that facet lies
/// in a face of the unit cube (all its vertices share a coordinate equal to
/// 0 or 1).
inline std::optional<Vector> boundary_facet_center(const Triangulation& tri, std::size_t s, std::size_t j)
{
    const std::size_t dim = tri.dim();
    std::vector<std::size_t> facet;
    for (int v : tri.simplex(s))
        if (static_cast<std::size_t>(v) != j) facet.push_back(static_cast<std::size_t>(v));
    if (facet.size() != dim) return std::nullopt;
    for (std::size_t d = 0; d < dim; ++d) {
        const auto c = static_cast<Eigen::Index>(d);
        const double side = tri.vertex(facet[0])[c];
        if (side != 0.0 && side != 1.0) continue;
        bool on_face = true;
        for (std::size_t v : facet) on_face = on_face && tri.vertex(v)[c] == side;
        if (!on_face) continue;
        Vector center = Vector::Zero(static_cast<Eigen::Index>(dim));
        for (std::size_t v : facet) center += tri.vertex(v).transpose();
        center /= static_cast<double>(dim);
        center[c] = side;
        return center;
    }
    return std::nullopt;
}

/// For every node with LOO error above epsilon_t, proposes the barycenter of
/// its incident simplex with the largest RMS output difference at the node's
/// worst channel. `tri` must triangulate lut.normalized() in row order.
/// Proposals are emitted in order of decreasing source-node error.
inline Proposal geometry_term(const Lut& lut, const Triangulation& tri, const ErrorReport& report,
                              const AcquisitionConfig& cfg)
{
    if (tri.vertex_count() != lut.size()) throw InvalidArgument("geometry_term: triangulation does not match LUT");
    std::vector<std::size_t> selected;
    for (std::size_t t = 0; t < report.size(); ++t)
        if (report.delta[t] > cfg.epsilon_t) selected.push_back(t);
    std::stable_sort(selected.begin(), selected.end(), [&](std::size_t a, std::size_t b) {
        if (report.delta[a] != report.delta[b]) return report.delta[a] > report.delta[b];
        return report.node_ids[a] < report.node_ids[b];
    });

    detail::ProposalBuilder pb(tri.vertices(), cfg.min_node_separation, Term::Geometry);
    for (std::size_t t : selected) {
        const std::size_t j = report.node_ids[t];
        const auto inc = tri.incident(j);
        if (inc.empty()) continue;
        std::size_t best = static_cast<std::size_t>(inc[0]);
        double best_g = -1.0;
        for (int s : inc) {
            const double g = simplex_gradient(lut, tri, static_cast<std::size_t>(s), j, report.lambda_max_index[t],
                                              cfg.distance_normalized);
            if (g > best_g || (g == best_g && static_cast<std::size_t>(s) < best)) {
                best_g = g;
                best = static_cast<std::size_t>(s);
            }
        }
        const auto face = cfg.snap_to_boundary ? boundary_facet_center(tri, best, j) : std::nullopt;
        pb.add(face ? *face : barycenter(tri, best), j, best);
    }
    return std::move(pb).finish(lut.dim());
}

/// Barycenters of the largest simplices (volume descending, lower id first
/// on ties), at most cfg.density_cap(D) of them.
inline Proposal density_term(const Triangulation& tri, const Matrix& existing, const AcquisitionConfig& cfg)
{
    const std::size_t n = tri.simplex_count();
    if (n == 0) throw InvalidArgument("density_term: empty triangulation");
    std::vector<double> vol(n);
    for (std::size_t s = 0; s < n; ++s) vol[s] = simplex_volume(tri, s);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vol[a] > vol[b]; });
    order.resize(std::min(n, cfg.density_cap(tri.dim())));

    detail::ProposalBuilder pb(existing, cfg.min_node_separation, Term::Density);
    for (std::size_t s : order) pb.add(barycenter(tri, s), Proposal::kNoSource, s);
    return std::move(pb).finish(tri.dim());
}

}  // namespace galga
