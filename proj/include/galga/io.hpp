#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "galga/builder.hpp"
#include "galga/harness.hpp"
#include "galga/targets.hpp"

namespace galga {

inline constexpr int kLutSchemaVersion = 1;

namespace detail {

/// Shortest text that still round-trips a binary64 value.
inline std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string quoted(const std::string& s) { return nlohmann::json(s).dump(); }

}  // namespace detail

struct LutFileMeta {
    std::optional<std::uint64_t> seed;
    Termination termination = Termination::Running;
};

/// JSON document: header fields then one record per node. Written by hand so
/// every number carries 17 significant digits.
inline void write_lut(std::ostream& os, const Lut& lut, const LutFileMeta& meta = {})
{
    using detail::num;
    os << "{\n  \"schema_version\": " << kLutSchemaVersion << ",\n";
    os << "  \"dim\": " << lut.dim() << ",\n  \"channels\": " << lut.channels() << ",\n";
    os << "  \"variables\": [";
    for (std::size_t d = 0; d < lut.dim(); ++d) {
        const auto& v = lut.space[d];
        os << (d ? ", " : "") << "{\"name\": " << detail::quoted(v.name) << ", \"min\": " << num(v.min)
           << ", \"max\": " << num(v.max) << "}";
    }
    os << "],\n  \"wavelengths\": [";
    for (std::size_t k = 0; k < lut.wavelengths.size(); ++k) os << (k ? ", " : "") << num(lut.wavelengths[k]);
    os << "],\n  \"seed\": ";
    if (meta.seed) os << *meta.seed;
    else os << "null";
    os << ",\n  \"termination\": \"" << to_string(meta.termination) << "\",\n  \"nodes\": [";
    for (std::size_t i = 0; i < lut.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        os << (i ? ",\n" : "\n") << "    {\"vertex\": " << (lut.is_vertex[i] ? "true" : "false") << ", \"x\": [";
        for (Eigen::Index d = 0; d < lut.X.cols(); ++d) os << (d ? ", " : "") << num(lut.X(r, d));
        os << "], \"y\": [";
        for (Eigen::Index k = 0; k < lut.Y.cols(); ++k) os << (k ? ", " : "") << num(lut.Y(r, k));
        os << "]}";
    }
    os << "\n  ]\n}\n";
}

inline Lut read_lut(std::istream& is, LutFileMeta* meta = nullptr)
{
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("LUT file: ") + e.what());
    }
    try {
        if (j.at("schema_version").get<int>() != kLutSchemaVersion)
            throw FormatError("LUT file: unsupported schema_version");
        std::vector<Variable> vars;
        for (const auto& v : j.at("variables"))
            vars.push_back({v.at("name").get<std::string>(), v.at("min").get<double>(), v.at("max").get<double>()});
        Lut lut;
        lut.space = InputSpace(vars);
        lut.wavelengths = j.at("wavelengths").get<std::vector<double>>();
        const auto dim = j.at("dim").get<std::size_t>();
        const auto K = j.at("channels").get<std::size_t>();
        if (dim != vars.size() || K != lut.wavelengths.size()) throw FormatError("LUT file: inconsistent header");
        const auto& nodes = j.at("nodes");
        lut.X.resize(static_cast<Eigen::Index>(nodes.size()), static_cast<Eigen::Index>(dim));
        lut.Y.resize(static_cast<Eigen::Index>(nodes.size()), static_cast<Eigen::Index>(K));
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const auto x = nodes[i].at("x").get<std::vector<double>>();
            const auto y = nodes[i].at("y").get<std::vector<double>>();
            if (x.size() != dim || y.size() != K) throw FormatError("LUT file: node " + std::to_string(i) + " size");
            for (std::size_t d = 0; d < dim; ++d) lut.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = x[d];
            for (std::size_t k = 0; k < K; ++k) lut.Y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = y[k];
            lut.is_vertex.push_back(nodes[i].at("vertex").get<bool>());
        }
        if (meta) {
            meta->seed = j.at("seed").is_null() ? std::nullopt : std::optional(j.at("seed").get<std::uint64_t>());
            meta->termination = parse_termination(j.at("termination").get<std::string>());
        }
        validate(lut);
        return lut;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("LUT file: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw FormatError(std::string("LUT file: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct TargetSpec {
    std::string kind = "toy";  // toy | affine | product-exponential | airmass-like
    std::size_t channels = 64;
    ToyAtmosphereParams toy;
};

struct RunConfig {
    std::string name;
    ComparisonConfig comparison;
    TargetSpec target;
    std::size_t map_grid = 100;

    BuildConfig build_config() const
    {
        BuildConfig b = comparison.build;
        b.seed = comparison.base_seed;
        return b;
    }
};

inline std::unique_ptr<TargetFunction> make_target(const TargetSpec& spec, const InputSpace& space)
{
    if (spec.kind == "toy") {
        ToyAtmosphereParams p = spec.toy;
        return std::make_unique<ToyAtmosphere>(space, std::move(p));
    }
    return std::make_unique<SyntheticTarget>(parse_synthetic_kind(spec.kind), space, spec.channels);
}

/// Keys (all optional except a way to define the input space):
///   case (1|2|3) or variables [{name,min,max}], epsilon_t, period, seed,
///   runs, max_iterations, max_nodes, threads, checkpoint_step, map_grid,
///   truth {count, seed}, density_count, distance_normalized, snap_to_boundary,
///   target {kind, channels, reflectance, rayleigh_scale, wavelength_min,
///           wavelength_max, fixed {name: value}}
inline RunConfig parse_config(const nlohmann::json& j)
{
    static const char* known[] = {"name",      "case",           "variables",       "epsilon_t", "period",
                                  "seed",      "runs",           "max_iterations",  "max_nodes", "threads",
                                  "truth",     "checkpoint_step", "density_count",  "target",    "map_grid",
                                  "distance_normalized", "snap_to_boundary"};
    try {
        for (const auto& [key, _] : j.items())
            if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) ==
                std::end(known))
                throw FormatError("config: unknown key '" + key + "'");

        RunConfig rc;
        auto& cc = rc.comparison;
        auto& b = cc.build;
        rc.name = j.value("name", std::string{});
        if (j.contains("case")) {
            const auto def = test_case(j.at("case").get<int>());
            b.space = def.space;
            b.acquisition.epsilon_t = def.epsilon_t;
            if (rc.name.empty()) rc.name = "case" + std::to_string(def.id);
        }
        if (j.contains("variables")) {
            std::vector<Variable> vars;
            for (const auto& v : j.at("variables"))
                vars.push_back({v.at("name").get<std::string>(), v.at("min").get<double>(), v.at("max").get<double>()});
            b.space = InputSpace(vars);
        }
        if (b.space.dim() == 0) throw FormatError("config: needs 'case' or 'variables'");
        b.acquisition.epsilon_t = j.value("epsilon_t", b.acquisition.epsilon_t);
        b.acquisition.period = j.value("period", b.acquisition.period);
        b.acquisition.density_count = j.value("density_count", b.acquisition.density_count);
        b.acquisition.distance_normalized = j.value("distance_normalized", false);
        b.acquisition.snap_to_boundary = j.value("snap_to_boundary", false);
        b.max_iterations = j.value("max_iterations", b.max_iterations);
        b.max_nodes = j.value("max_nodes", b.max_nodes);
        b.threads = j.value("threads", 1U);
        cc.base_seed = j.value("seed", cc.base_seed);
        cc.runs = j.value("runs", cc.runs);
        cc.checkpoint_step = j.value("checkpoint_step", cc.checkpoint_step);
        rc.map_grid = j.value("map_grid", rc.map_grid);
        if (j.contains("truth")) {
            cc.truth_count = j["truth"].value("count", cc.truth_count);
            cc.truth_seed = j["truth"].value("seed", cc.truth_seed);
        }
        if (j.contains("target")) {
            const auto& t = j.at("target");
            auto& spec = rc.target;
            spec.kind = t.value("kind", spec.kind);
            spec.channels = t.value("channels", spec.channels);
            spec.toy.reflectance = t.value("reflectance", spec.toy.reflectance);
            spec.toy.rayleigh_scale = t.value("rayleigh_scale", spec.toy.rayleigh_scale);
            if (t.contains("fixed"))
                for (const auto& [k, v] : t.at("fixed").items()) spec.toy.fixed[k] = v.get<double>();
            spec.toy.wavelengths =
                linspace(t.value("wavelength_min", 400.0), t.value("wavelength_max", 550.0), spec.channels);
        }
        b.validate();
        return rc;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("config: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw FormatError(std::string("config: ") + e.what());
    }
}

inline RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open config '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("config '" + path + "': " + e.what());
    }
    return parse_config(j);
}

}  // namespace galga
