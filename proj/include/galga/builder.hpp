#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "galga/acquisition.hpp"
#include "galga/error.hpp"
#include "galga/geometry.hpp"
#include "galga/interpolation.hpp"
#include "galga/sampling.hpp"
#include "galga/targets.hpp"

namespace galga {

struct BuildConfig {
    InputSpace space;
    AcquisitionConfig acquisition;
    std::uint64_t seed = 0;
    std::size_t max_iterations = 200;
    std::size_t max_nodes = 100000;
    unsigned threads = 1;

    std::size_t initial_size() const { return design_size(space.dim()) + (std::size_t{1} << space.dim()); }

    void validate() const
    {
        acquisition.validate();
        if (space.dim() < 1) throw InvalidArgument("BuildConfig: empty input space");
        if (space.dim() > kMaxTriangulationDim)
            throw InvalidArgument("BuildConfig: D > " + std::to_string(kMaxTriangulationDim) + " is not supported");
        if (max_iterations < 1) throw InvalidArgument("BuildConfig: max_iterations must be >= 1");
        if (max_nodes <= initial_size())
            throw InvalidArgument("BuildConfig: max_nodes must exceed the initial node count " +
                                  std::to_string(initial_size()));
    }
};

enum class Termination { Running, Converged, MaxIterations, MaxNodes, NoProgress };

inline std::string_view to_string(Termination t)
{
    switch (t) {
    case Termination::Running: return "running";
    case Termination::Converged: return "converged";
    case Termination::MaxIterations: return "max_iterations";
    case Termination::MaxNodes: return "max_nodes";
    case Termination::NoProgress: return "no_progress";
    }
    return "?";
}

inline Termination parse_termination(std::string_view s)
{
    for (auto t : {Termination::Running, Termination::Converged, Termination::MaxIterations, Termination::MaxNodes,
                   Termination::NoProgress})
        if (to_string(t) == s) return t;
    throw FormatError("unknown termination reason '" + std::string(s) + "'");
}

/// Iteration 0 is initialization. For i >= 1, `nodes` is the count after the
/// iteration's additions and `p95` is the LOO P95 of that LUT. An iteration
/// that finds the stop condition already met (or proposes nothing) adds 0.
struct IterationRecord {
    std::size_t iteration = 0;
    std::size_t nodes = 0;
    Term term = Term::Init;
    std::size_t added = 0;
    double p95 = 0.0;
    double seconds = 0.0;
};

struct BuildHistory {
    std::vector<IterationRecord> records;
    Termination termination = Termination::Running;
};

/// m0 = 5 * 2^D Latin hypercube nodes followed by the 2^D hypercube vertices.
inline Lut initialize(const BuildConfig& cfg, const TargetFunction& target)
{
    if (target.dim() != cfg.space.dim())
        throw DimensionMismatch("initialize: target and config dimensions differ");
    const std::size_t dim = cfg.space.dim();
    const auto lhs = latin_hypercube(dim, design_size(dim), cfg.seed);
    const auto corners = hypercube_vertices(dim);
    Matrix u(static_cast<Eigen::Index>(lhs.size() + corners.size()), static_cast<Eigen::Index>(dim));
    u << lhs.points, corners.points;

    Lut lut;
    lut.space = cfg.space;
    lut.X = cfg.space.scale_rows(u);
    // exact corners, free of rounding in min + 1 * (max - min)
    for (std::size_t i = 0; i < corners.size(); ++i)
        for (std::size_t d = 0; d < dim; ++d) {
            const auto r = static_cast<Eigen::Index>(lhs.size() + i);
            const auto c = static_cast<Eigen::Index>(d);
            lut.X(r, c) = u(r, c) == 0.0 ? cfg.space[d].min : cfg.space[d].max;
        }
    lut.Y = evaluate_rows(target, lut.X, cfg.threads);
    lut.wavelengths = target.wavelengths();
    lut.is_vertex.assign(lhs.size(), false);
    lut.is_vertex.resize(lhs.size() + corners.size(), true);
    return lut;
}

struct StepResult {
    Lut lut;
    IterationRecord record;
    ErrorReport report;  // LOO report of `lut`
    std::optional<Termination> terminal;
    Proposal proposal;
};

/// One interpolate -> acquire -> evaluate cycle. `current` is the LOO report of
/// `lut` if already known.
inline StepResult step(const Lut& lut, std::size_t iteration, const BuildConfig& cfg, const TargetFunction& target,
                       const ErrorReport* current = nullptr)
{
    if (iteration < 1) throw InvalidArgument("step: iterations start at 1");
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

    StepResult out;
    out.report = current ? *current : loo_errors(lut, cfg.threads);
    out.record.iteration = iteration;
    out.record.term = scheduled_term(iteration, cfg.acquisition.period);
    out.proposal.term = out.record.term;
    out.record.nodes = lut.size();
    out.record.p95 = out.report.p95;
    if (out.report.p95 < cfg.acquisition.epsilon_t) {
        out.lut = lut;
        out.terminal = Termination::Converged;
        out.record.seconds = elapsed();
        return out;
    }

    const Matrix u = lut.normalized();
    const Triangulation tri = triangulate(u);
    out.proposal = out.record.term == Term::Geometry ? geometry_term(lut, tri, out.report, cfg.acquisition)
                                                     : density_term(tri, u, cfg.acquisition);
    if (out.proposal.size() == 0) {
        out.lut = lut;
        out.terminal = Termination::NoProgress;
        out.record.seconds = elapsed();
        return out;
    }
    const std::size_t room = cfg.max_nodes > lut.size() ? cfg.max_nodes - lut.size() : 0;
    const std::size_t take = std::min(room, out.proposal.size());

    const Matrix xs = cfg.space.scale_rows(out.proposal.points.topRows(static_cast<Eigen::Index>(take)));
    const Matrix ys = evaluate_rows(target, xs, cfg.threads);
    out.lut = lut;
    for (Eigen::Index r = 0; r < xs.rows(); ++r) out.lut.append(xs.row(r).transpose(), ys.row(r).transpose(), false);
    out.report = loo_errors(out.lut, cfg.threads);
    out.record.nodes = out.lut.size();
    out.record.added = take;
    out.record.p95 = out.report.p95;
    out.record.seconds = elapsed();
    return out;
}

/// Called after initialization (with iteration 0 and no proposal) and after
/// every step. `before` is the LUT the step started from.
struct StepEvent {
    const Lut& before;
    const ErrorReport& before_report;
    const StepResult& result;
};
using StepObserver = std::function<void(const StepEvent&)>;

struct BuildResult {
    Lut lut;
    BuildHistory history;
    ErrorReport report;
};

inline BuildResult run(const BuildConfig& cfg, const TargetFunction& target, const StepObserver& observer = {})
{
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    BuildResult res;
    res.lut = initialize(cfg, target);
    res.report = loo_errors(res.lut, cfg.threads);
    IterationRecord init;
    init.nodes = res.lut.size();
    init.added = res.lut.size();
    init.p95 = res.report.p95;
    init.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.history.records.push_back(init);
    if (observer) {
        StepResult r{res.lut, init, res.report, std::nullopt, Proposal{Term::Init, {}, {}, {}}};
        observer({res.lut, res.report, r});
    }

    for (std::size_t i = 1;; ++i) {
        if (i > cfg.max_iterations && res.report.p95 >= cfg.acquisition.epsilon_t) {
            res.history.termination = Termination::MaxIterations;
            break;
        }
        if (res.lut.size() >= cfg.max_nodes && res.report.p95 >= cfg.acquisition.epsilon_t) {
            res.history.termination = Termination::MaxNodes;
            break;
        }
        StepResult r = step(res.lut, i, cfg, target, &res.report);
        res.history.records.push_back(r.record);
        if (observer) observer({res.lut, res.report, r});
        res.lut = std::move(r.lut);
        res.report = std::move(r.report);
        if (r.terminal) {
            res.history.termination = *r.terminal;
            break;
        }
    }
    return res;
}

// History CSV: i,m,term,added,p95,seconds

inline void write_history_csv(std::ostream& os, const BuildHistory& h, bool with_seconds = true)
{
    os << "i,m,term,added,p95" << (with_seconds ? ",seconds" : "") << '\n';
    os << std::setprecision(17);
    for (const auto& r : h.records) {
        os << r.iteration << ',' << r.nodes << ',' << to_string(r.term) << ',' << r.added << ',' << r.p95;
        if (with_seconds) os << ',' << r.seconds;
        os << '\n';
    }
}

inline std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline double parse_double(const std::string& s)
{
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw FormatError("trailing characters in number '" + s + "'");
        return v;
    } catch (const std::logic_error&) {
        if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
        throw FormatError("invalid number '" + s + "'");
    }
}

inline std::size_t parse_count(const std::string& s)
{
    const double v = parse_double(s);
    if (!(v >= 0.0) || v != std::floor(v)) throw FormatError("invalid count '" + s + "'");
    return static_cast<std::size_t>(v);
}

inline BuildHistory read_history_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line)) throw FormatError("history CSV: missing header");
    const bool with_seconds = split_csv_line(line).size() == 6;
    BuildHistory h;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto c = split_csv_line(line);
        if (c.size() != (with_seconds ? 6u : 5u)) throw FormatError("history CSV: bad row '" + line + "'");
        IterationRecord r;
        r.iteration = parse_count(c[0]);
        r.nodes = parse_count(c[1]);
        r.term = parse_term(c[2]);
        r.added = parse_count(c[3]);
        r.p95 = parse_double(c[4]);
        if (with_seconds) r.seconds = parse_double(c[5]);
        h.records.push_back(r);
    }
    return h;
}

}  // namespace galga
