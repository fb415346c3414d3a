#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "galga/builder.hpp"
#include "galga/interpolation.hpp"
#include "galga/sampling.hpp"
#include "galga/targets.hpp"

namespace galga {

/// Dense independent sample of the target used to measure true errors.
struct GroundTruth {
    Matrix X;
    Matrix Y;

    std::size_t size() const noexcept { return static_cast<std::size_t>(X.rows()); }
};

inline GroundTruth make_ground_truth(const InputSpace& space, const TargetFunction& target, std::size_t n,
                                     std::uint64_t seed, unsigned threads = 1)
{
    if (n < 1) throw InvalidArgument("make_ground_truth: n must be >= 1");
    GroundTruth g;
    g.X = scale_to_space(latin_hypercube(space.dim(), n, seed), space);
    g.Y = evaluate_rows(target, g.X, threads);
    return g;
}

struct TruePercentiles {
    double p95 = 0.0;
    double p975 = 0.0;
    double p100 = 0.0;
};

/// Relative error (percent) of the LUT interpolant at every truth point.
inline std::vector<double> true_errors(const Lut& lut, const GroundTruth& truth)
{
    if (static_cast<std::size_t>(truth.Y.cols()) != lut.channels())
        throw DimensionMismatch("true_errors: channel count differs");
    LutInterpolator interp(lut);
    std::vector<double> d(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        d[i] = relative_error(interp(truth.X.row(r).transpose()), truth.Y.row(r).transpose()).delta;
    }
    return d;
}

inline TruePercentiles true_error_percentiles(const Lut& lut, const GroundTruth& truth)
{
    const auto d = true_errors(lut, truth);
    return {percentile(d, 95.0), percentile(d, 97.5), percentile(d, 100.0)};
}

// ---------------------------------------------------------------------------
// GALGA vs Sobol comparison
// ---------------------------------------------------------------------------

struct ComparisonConfig {
    BuildConfig build;  // build.seed is ignored; run r uses base_seed + r
    std::uint64_t base_seed = 1;
    std::size_t runs = 10;
    std::size_t truth_count = 2000;
    std::uint64_t truth_seed = 20190201;
    /// Node-count increment used to extend the Sobol arm past the largest
    /// count visited by any GALGA run.
    std::size_t checkpoint_step = 8;
};

struct CurvePoint {
    std::size_t m = 0;
    double mean_p95 = 0.0;  // LOO estimate
    double std_p95 = 0.0;
    double p95 = 0.0;  // true error vs ground truth, mean over runs
    double p975 = 0.0;
    double p100 = 0.0;
};

struct PerformanceCurve {
    std::string method;
    std::vector<CurvePoint> points;
};

/// One LUT state along a run: node count, LOO P95 and true percentiles.
struct Snapshot {
    std::size_t m = 0;
    double loo_p95 = 0.0;
    TruePercentiles truth;
};

struct RunSummary {
    std::size_t run = 0;
    std::uint64_t seed = 0;
    Termination termination = Termination::Running;
    Snapshot final_state;
    Snapshot sobol_at_final;  // Sobol LUT with the same node count
};

struct ComparisonResult {
    PerformanceCurve galga;
    PerformanceCurve sobol;
    std::vector<RunSummary> runs;
    std::vector<Snapshot> sobol_snapshots;
    /// Smallest checkpoint count at which the Sobol LUT meets the stop
    /// criterion; 0 if it never does within max_nodes.
    std::size_t sobol_required = 0;
    double galga_mean_final = 0.0;
    double node_ratio = std::numeric_limits<double>::quiet_NaN();
    double galga_mean_p100 = 0.0;
    double sobol_mean_p100 = 0.0;
    bool all_converged = false;
};

/// Vertices followed by no points; sobol rows are appended in sequence order.
inline Lut sobol_lut(const InputSpace& space, const TargetFunction& target, const Matrix& sobol_x,
                     const Matrix& sobol_y, std::size_t m, const Lut& corners)
{
    const std::size_t nv = corners.size();
    if (m < nv) throw InvalidArgument("sobol_lut: m below the vertex count");
    const auto ns = static_cast<Eigen::Index>(m - nv);
    if (ns > sobol_x.rows()) throw InvalidArgument("sobol_lut: not enough Sobol points");
    Lut lut;
    lut.space = space;
    lut.wavelengths = target.wavelengths();
    lut.X.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(space.dim()));
    lut.Y.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(target.channels()));
    lut.X << sobol_x.topRows(ns), corners.X;
    lut.Y << sobol_y.topRows(ns), corners.Y;
    lut.is_vertex.assign(static_cast<std::size_t>(ns), false);
    lut.is_vertex.resize(m, true);
    return lut;
}

namespace detail {

inline double mean(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

/// Population standard deviation (zero for a single run).
inline double stddev(const std::vector<double>& v)
{
    const double mu = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - mu) * (x - mu);
    return v.empty() ? 0.0 : std::sqrt(s / static_cast<double>(v.size()));
}

/// Latest snapshot with m <= count (snapshots sorted by m).
inline const Snapshot& carried(const std::vector<Snapshot>& s, std::size_t count)
{
    auto it = std::upper_bound(s.begin(), s.end(), count, [](std::size_t c, const Snapshot& x) { return c < x.m; });
    return it == s.begin() ? s.front() : *(it - 1);
}

}  // namespace detail

inline ComparisonResult run_comparison(const ComparisonConfig& cc, const TargetFunction& target)
{
    if (cc.runs < 1) throw InvalidArgument("run_comparison: runs must be >= 1");
    if (cc.checkpoint_step < 1) throw InvalidArgument("run_comparison: checkpoint_step must be >= 1");
    cc.build.validate();
    const InputSpace& space = cc.build.space;
    const double eps = cc.build.acquisition.epsilon_t;
    const unsigned threads = cc.build.threads;
    const GroundTruth truth = make_ground_truth(space, target, cc.truth_count, cc.truth_seed, threads);

    ComparisonResult res;
    std::vector<std::vector<Snapshot>> traces;
    for (std::size_t r = 0; r < cc.runs; ++r) {
        BuildConfig cfg = cc.build;
        cfg.seed = cc.base_seed + r;
        std::vector<Snapshot> trace;
        auto observe = [&](const StepEvent& ev) {
            const auto& rec = ev.result.record;
            if (rec.iteration > 0 && rec.added == 0) return;
            trace.push_back({ev.result.lut.size(), ev.result.report.p95, true_error_percentiles(ev.result.lut, truth)});
        };
        const BuildResult br = run(cfg, target, observe);
        RunSummary s;
        s.run = r;
        s.seed = cfg.seed;
        s.termination = br.history.termination;
        s.final_state = trace.back();
        res.runs.push_back(s);
        traces.push_back(std::move(trace));
    }

    std::vector<std::size_t> grid;
    for (const auto& t : traces)
        for (const auto& s : t) grid.push_back(s.m);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    for (std::size_t m : grid) {
        CurvePoint p;
        p.m = m;
        std::vector<double> loo, t95, t975, t100;
        for (const auto& t : traces) {
            const auto& s = detail::carried(t, m);
            loo.push_back(s.loo_p95);
            t95.push_back(s.truth.p95);
            t975.push_back(s.truth.p975);
            t100.push_back(s.truth.p100);
        }
        p.mean_p95 = detail::mean(loo);
        p.std_p95 = detail::stddev(loo);
        p.p95 = detail::mean(t95);
        p.p975 = detail::mean(t975);
        p.p100 = detail::mean(t100);
        res.galga.points.push_back(p);
    }
    res.galga.method = "GALGA";

    // Sobol arm: deterministic, so a single series serves every run.
    const std::size_t nv = std::size_t{1} << space.dim();
    const std::size_t cap = cc.build.max_nodes;
    const Matrix sx = scale_to_space(sobol_sequence(space.dim(), cap - nv), space);
    Lut corners;
    corners.space = space;
    corners.X = scale_to_space(hypercube_vertices(space.dim()), space);
    corners.Y = evaluate_rows(target, corners.X, threads);
    Matrix sy(0, static_cast<Eigen::Index>(target.channels()));

    auto score = [&](std::size_t m) {
        const auto need = static_cast<Eigen::Index>(m - nv);
        if (need > sy.rows()) {
            const Eigen::Index have = sy.rows();
            const Matrix more = evaluate_rows(target, sx.middleRows(have, need - have), threads);
            sy.conservativeResize(need, Eigen::NoChange);
            sy.bottomRows(need - have) = more;
        }
        const Lut lut = sobol_lut(space, target, sx, sy, m, corners);
        const Snapshot s{m, loo_errors(lut, threads).p95, true_error_percentiles(lut, truth)};
        res.sobol_snapshots.push_back(s);
        if (res.sobol_required == 0 && s.loo_p95 < eps) res.sobol_required = m;
        return s;
    };
    for (std::size_t m : grid) score(m);
    for (std::size_t m = grid.back() + cc.checkpoint_step; res.sobol_required == 0 && m <= cap;
         m += cc.checkpoint_step)
        score(m);

    res.sobol.method = "Sobol";
    for (const auto& s : res.sobol_snapshots)
        res.sobol.points.push_back({s.m, s.loo_p95, 0.0, s.truth.p95, s.truth.p975, s.truth.p100});

    std::vector<double> finals, gp100, sp100;
    res.all_converged = true;
    for (auto& r : res.runs) {
        r.sobol_at_final = detail::carried(res.sobol_snapshots, r.final_state.m);
        finals.push_back(static_cast<double>(r.final_state.m));
        gp100.push_back(r.final_state.truth.p100);
        sp100.push_back(r.sobol_at_final.truth.p100);
        res.all_converged = res.all_converged && r.termination == Termination::Converged;
    }
    res.galga_mean_final = detail::mean(finals);
    res.galga_mean_p100 = detail::mean(gp100);
    res.sobol_mean_p100 = detail::mean(sp100);
    if (res.sobol_required > 0) res.node_ratio = res.galga_mean_final / static_cast<double>(res.sobol_required);
    return res;
}

// ---------------------------------------------------------------------------
// 2-D error maps
// ---------------------------------------------------------------------------

struct ErrorMap {
    std::vector<double> axis0;  // physical grid coordinates
    std::vector<double> axis1;
    Matrix cv;     // cv(i, j) at (axis0[i], axis1[j]); NaN outside the LOO node hull
    Matrix truth;  // true relative error at every grid point
};

/// Cross-validation map (LOO errors of the non-vertex nodes, linearly
/// interpolated over their own triangulation) and true-error map on an
/// n x n grid spanning the input ranges.
inline ErrorMap error_map_2d(const Lut& lut, const TargetFunction& target, std::size_t n = 100, unsigned threads = 1,
                             const ErrorReport* report = nullptr)
{
    if (lut.dim() != 2) throw DimensionMismatch("error_map_2d: LUT must be 2-D");
    if (target.dim() != 2) throw DimensionMismatch("error_map_2d: target must be 2-D");
    if (n < 2) throw InvalidArgument("error_map_2d: grid needs n >= 2");
    const ErrorReport rep = report ? *report : loo_errors(lut, threads);

    ErrorMap map;
    map.axis0 = linspace(lut.space[0].min, lut.space[0].max, n);
    map.axis1 = linspace(lut.space[1].min, lut.space[1].max, n);
    const auto N = static_cast<Eigen::Index>(n);
    map.cv.setConstant(N, N, std::numeric_limits<double>::quiet_NaN());
    map.truth.resize(N, N);

    Matrix grid(N * N, 2);
    for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index j = 0; j < N; ++j) {
            grid(i * N + j, 0) = map.axis0[static_cast<std::size_t>(i)];
            grid(i * N + j, 1) = map.axis1[static_cast<std::size_t>(j)];
        }
    const Matrix y_true = evaluate_rows(target, grid, threads);

    LutInterpolator interp(lut);
    for (Eigen::Index g = 0; g < N * N; ++g)
        map.truth(g / N, g % N) = relative_error(interp(grid.row(g).transpose()), y_true.row(g).transpose()).delta;

    const Matrix u = lut.normalized();
    Matrix pts(static_cast<Eigen::Index>(rep.size()), 2);
    Matrix vals(static_cast<Eigen::Index>(rep.size()), 1);
    for (std::size_t t = 0; t < rep.size(); ++t) {
        pts.row(static_cast<Eigen::Index>(t)) = u.row(static_cast<Eigen::Index>(rep.node_ids[t]));
        vals(static_cast<Eigen::Index>(t), 0) = rep.delta[t];
    }
    if (rep.size() >= 3) {
        Triangulation tri;
        try {
            tri = triangulate(pts);
        } catch (const DegenerateInput&) {
            return map;
        }
        std::size_t hint = 0;
        for (Eigen::Index g = 0; g < N * N; ++g) {
            const Vector q = lut.space.normalize(grid.row(g).transpose());
            try {
                map.cv(g / N, g % N) = detail::interpolate_normalized(tri, vals, {}, q, &hint)[0];
            } catch (const OutsideHull&) {
            }
        }
    }
    return map;
}

// ---------------------------------------------------------------------------
// CSV output
// ---------------------------------------------------------------------------

inline void write_curve_csv(std::ostream& os, const PerformanceCurve& c)
{
    os << "method,m,mean_p95,std_p95,p95,p97_5,p100\n" << std::setprecision(17);
    for (const auto& p : c.points)
        os << c.method << ',' << p.m << ',' << p.mean_p95 << ',' << p.std_p95 << ',' << p.p95 << ',' << p.p975 << ','
           << p.p100 << '\n';
}

inline PerformanceCurve read_curve_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line)) throw FormatError("curve CSV: missing header");
    PerformanceCurve c;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 7) throw FormatError("curve CSV: bad row '" + line + "'");
        if (c.points.empty()) c.method = f[0];
        else if (f[0] != c.method) throw FormatError("curve CSV: mixed methods");
        c.points.push_back({parse_count(f[1]), parse_double(f[2]), parse_double(f[3]), parse_double(f[4]),
                            parse_double(f[5]), parse_double(f[6])});
    }
    return c;
}

inline void write_runs_csv(std::ostream& os, const ComparisonResult& r)
{
    os << "run,seed,termination,m,loo_p95,p95,p97_5,p100,sobol_loo_p95,sobol_p95,sobol_p97_5,sobol_p100\n"
       << std::setprecision(17);
    for (const auto& s : r.runs) {
        const auto& g = s.final_state;
        const auto& b = s.sobol_at_final;
        os << s.run << ',' << s.seed << ',' << to_string(s.termination) << ',' << g.m << ',' << g.loo_p95 << ','
           << g.truth.p95 << ',' << g.truth.p975 << ',' << g.truth.p100 << ',' << b.loo_p95 << ',' << b.truth.p95
           << ',' << b.truth.p975 << ',' << b.truth.p100 << '\n';
    }
}

inline void write_summary_csv(std::ostream& os, const ComparisonResult& r)
{
    os << "key,value\n" << std::setprecision(17);
    os << "runs," << r.runs.size() << '\n';
    os << "all_converged," << (r.all_converged ? 1 : 0) << '\n';
    os << "galga_mean_final_m," << r.galga_mean_final << '\n';
    os << "sobol_required_m," << r.sobol_required << '\n';
    os << "node_ratio," << r.node_ratio << '\n';
    os << "galga_mean_p100," << r.galga_mean_p100 << '\n';
    os << "sobol_mean_p100_matched," << r.sobol_mean_p100 << '\n';
}

/// One row per grid point: the two variable values and the error.
inline void write_map_csv(std::ostream& os, const ErrorMap& map, const Matrix& values, const InputSpace& space)
{
    os << space[0].name << ',' << space[1].name << ",delta\n" << std::setprecision(17);
    for (std::size_t i = 0; i < map.axis0.size(); ++i)
        for (std::size_t j = 0; j < map.axis1.size(); ++j) {
            const double v = values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            os << map.axis0[i] << ',' << map.axis1[j] << ',';
            if (std::isnan(v)) os << "nan";
            else os << v;
            os << '\n';
        }
}

}  // namespace galga
