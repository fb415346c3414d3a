#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "galga/galga.hpp"

namespace fs = std::filesystem;
using namespace galga;

namespace {

std::ofstream open_out(const fs::path& p)
{
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream os(p);
    if (!os) throw std::runtime_error("cannot write '" + p.string() + "'");
    return os;
}

Lut load_lut(const std::string& path, LutFileMeta* meta = nullptr)
{
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open LUT '" + path + "'");
    return read_lut(in, meta);
}

struct Common {
    std::string config;
    std::optional<unsigned> threads;
    RunConfig load() const
    {
        RunConfig rc = load_config(config);
        if (threads) rc.comparison.build.threads = *threads;
        return rc;
    }
};

void add_common(CLI::App* app, Common& c)
{
    app->add_option("-c,--config", c.config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
    app->add_option("-j,--threads", c.threads, "worker threads");
}

int cmd_build(const Common& c, const std::string& out, const std::string& history, std::optional<std::uint64_t> seed)
{
    const RunConfig rc = c.load();
    BuildConfig cfg = rc.build_config();
    if (seed) cfg.seed = *seed;
    const auto target = make_target(rc.target, cfg.space);
    const auto res = run(cfg, *target, [](const StepEvent& ev) {
        const auto& r = ev.result.record;
        std::cerr << "iter " << r.iteration << "  " << to_string(r.term) << "  m=" << r.nodes << "  +" << r.added
                  << "  p95=" << r.p95 << "\n";
    });
    auto os = open_out(out);
    write_lut(os, res.lut, {cfg.seed, res.history.termination});
    if (!history.empty()) {
        auto hs = open_out(history);
        write_history_csv(hs, res.history);
    }
    std::cout << to_string(res.history.termination) << ": " << res.lut.size() << " nodes, LOO p95 " << res.report.p95
              << "%\n";
    return res.history.termination == Termination::Converged ? 0 : 2;
}

int cmd_eval(const Common& c, const std::string& lut_path, const std::string& out)
{
    const RunConfig rc = c.load();
    const Lut lut = load_lut(lut_path);
    if (!(lut.space == rc.comparison.build.space)) throw InvalidArgument("LUT input space differs from the config");
    const auto target = make_target(rc.target, lut.space);
    const auto truth = make_ground_truth(lut.space, *target, rc.comparison.truth_count, rc.comparison.truth_seed,
                                         rc.comparison.build.threads);
    const auto p = true_error_percentiles(lut, truth);
    const auto loo = loo_errors(lut, rc.comparison.build.threads);
    std::ostringstream csv;
    csv << std::setprecision(17) << "m,truth_count,loo_p95,p95,p97_5,p100\n"
        << lut.size() << ',' << truth.size() << ',' << loo.p95 << ',' << p.p95 << ',' << p.p975 << ',' << p.p100
        << '\n';
    if (out.empty()) std::cout << csv.str();
    else open_out(out) << csv.str();
    return 0;
}

int cmd_compare(const Common& c, const fs::path& dir, std::optional<std::size_t> runs)
{
    RunConfig rc = c.load();
    if (runs) rc.comparison.runs = *runs;
    const auto target = make_target(rc.target, rc.comparison.build.space);
    const auto r = run_comparison(rc.comparison, *target);
    fs::create_directories(dir);
    {
        auto os = open_out(dir / "galga_curve.csv");
        write_curve_csv(os, r.galga);
    }
    {
        auto os = open_out(dir / "sobol_curve.csv");
        write_curve_csv(os, r.sobol);
    }
    {
        auto os = open_out(dir / "runs.csv");
        write_runs_csv(os, r);
    }
    {
        auto os = open_out(dir / "summary.csv");
        write_summary_csv(os, r);
    }
    std::cout << "GALGA mean final m " << r.galga_mean_final << ", Sobol required m " << r.sobol_required
              << ", ratio " << r.node_ratio << "\n"
              << "mean P100 at final m: GALGA " << r.galga_mean_p100 << "%, Sobol " << r.sobol_mean_p100 << "%\n";
    return 0;
}

int cmd_errormap(const Common& c, const std::string& lut_path, const fs::path& dir, std::optional<std::size_t> grid)
{
    const RunConfig rc = c.load();
    const Lut lut = load_lut(lut_path);
    const auto target = make_target(rc.target, lut.space);
    const auto map = error_map_2d(lut, *target, grid.value_or(rc.map_grid), rc.comparison.build.threads);
    fs::create_directories(dir);
    {
        auto os = open_out(dir / "cv_map.csv");
        write_map_csv(os, map, map.cv, lut.space);
    }
    {
        auto os = open_out(dir / "true_map.csv");
        write_map_csv(os, map, map.truth, lut.space);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Adaptive look-up table builder"};
    app.require_subcommand(1);

    Common bc;
    std::string build_out, build_history;
    std::optional<std::uint64_t> build_seed;
    auto* build = app.add_subcommand("build", "build one LUT and write it with its iteration history");
    add_common(build, bc);
    build->add_option("-o,--out", build_out, "LUT file (JSON)")->required();
    build->add_option("--history", build_history, "iteration history CSV");
    build->add_option("--seed", build_seed, "override the config seed");

    Common ec;
    std::string eval_lut, eval_out;
    auto* eval = app.add_subcommand("eval", "score a LUT against a ground-truth sample");
    add_common(eval, ec);
    eval->add_option("-l,--lut", eval_lut, "LUT file")->required()->check(CLI::ExistingFile);
    eval->add_option("-o,--out", eval_out, "percentiles CSV (default: stdout)");

    Common cc;
    std::string cmp_dir;
    std::optional<std::size_t> cmp_runs;
    auto* compare = app.add_subcommand("compare", "adaptive vs Sobol performance curves");
    add_common(compare, cc);
    compare->add_option("-o,--out-dir", cmp_dir, "output directory")->required();
    compare->add_option("--runs", cmp_runs, "override the number of runs");

    Common mc;
    std::string map_lut, map_dir;
    std::optional<std::size_t> map_grid;
    auto* errormap = app.add_subcommand("errormap", "cross-validation and true error maps of a 2-D LUT");
    add_common(errormap, mc);
    errormap->add_option("-l,--lut", map_lut, "LUT file")->required()->check(CLI::ExistingFile);
    errormap->add_option("-o,--out-dir", map_dir, "output directory")->required();
    errormap->add_option("--grid", map_grid, "grid points per axis");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*build) return cmd_build(bc, build_out, build_history, build_seed);
        if (*eval) return cmd_eval(ec, eval_lut, eval_out);
        if (*compare) return cmd_compare(cc, cmp_dir, cmp_runs);
        if (*errormap) return cmd_errormap(mc, map_lut, map_dir, map_grid);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
