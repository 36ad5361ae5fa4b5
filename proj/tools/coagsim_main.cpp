#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "coagsim/config.hpp"
#include "coagsim/dynamics.hpp"
#include "coagsim/io.hpp"
#include "coagsim/solver.hpp"
#include "coagsim/threading.hpp"
#include "coagsim/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace coagsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCertification = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct Overrides {
    std::optional<std::string> config_path;
    std::string output_dir = "out";
    std::optional<double> alpha, beta, grid_min, grid_max, damping, tol;
    std::optional<int> grid_n, max_iters;
    int threads = 1;
    std::uint64_t seed = 20260801ull;
    std::optional<std::string> profile_path;
    int samples = 1000;
};

const std::map<std::string, std::map<std::string, bool>> kSchema = {
    {"kernel", {{"kind", 1}, {"alpha", 1}, {"beta", 1}, {"K0", 1}, {"k0", 1}}},
    {"grid", {{"x_min_log", 1}, {"x_max_log", 1}, {"n", 1}}},
    {"solver",
     {{"damping", 1}, {"max_iterations", 1}, {"residual_tol", 1}, {"gauge", 1}}},
    {"quadrature",
     {{"panels_per_cell", 1}, {"tail_cutoff_tol", 1}, {"interior_margin", 1}}},
    {"dynamics",
     {{"xi_min", 1}, {"xi_max", 1}, {"cells", 1}, {"t_end", 1}, {"cfl", 1},
      {"snapshots", 1}, {"s0", 1}, {"init", 1}}},
    {"verify", {{"small_x_decades", 1}, {"r_decades", 1}, {"profile", 1}}},
    {"compare", {{"profile", 1}}},
};

KeyValueConfig effective_config(const Overrides& o) {
    KeyValueConfig cfg;
    if (o.config_path) cfg = KeyValueConfig::parse_file(*o.config_path);
    cfg.validate_schema(kSchema);
    auto setd = [&](const char* sec, const char* key, const std::optional<double>& v) {
        if (v) cfg.set(sec, key, format_full_precision(*v));
    };
    setd("kernel", "alpha", o.alpha);
    setd("kernel", "beta", o.beta);
    setd("grid", "x_min_log", o.grid_min);
    setd("grid", "x_max_log", o.grid_max);
    if (o.grid_n) cfg.set("grid", "n", std::to_string(*o.grid_n));
    setd("solver", "damping", o.damping);
    setd("solver", "residual_tol", o.tol);
    if (o.max_iters) cfg.set("solver", "max_iterations", std::to_string(*o.max_iters));
    if (o.profile_path) cfg.set("verify", "profile", *o.profile_path);
    return cfg;
}

KernelSpec kernel_from(const KeyValueConfig& cfg) {
    const std::string kind = cfg.get_string("kernel", "kind", "product");
    if (kind != "product")
        throw std::invalid_argument("config key [kernel] kind must be 'product' "
                                    "(custom kernels are library-only)");
    const double alpha = cfg.get_double("kernel", "alpha", 0.25);
    const double beta = cfg.get_double("kernel", "beta", 0.25);
    const double K0 = cfg.get_double("kernel", "K0", 1.0);
    const double k0 = cfg.get_double("kernel", "k0", -1.0);
    return KernelSpec::product(alpha, beta, K0, k0);
}

LogGrid grid_from(const KeyValueConfig& cfg) {
    return LogGrid(cfg.get_double("grid", "x_min_log", -18.0),
                   cfg.get_double("grid", "x_max_log", 7.0), cfg.get_int("grid", "n", 512));
}

SolverConfig solver_from(const KeyValueConfig& cfg) {
    SolverConfig sc;
    sc.damping = cfg.get_double("solver", "damping", 0.5);
    sc.max_iterations = cfg.get_int("solver", "max_iterations", 500);
    sc.residual_tol = cfg.get_double("solver", "residual_tol", 1e-4);
    const std::string g = cfg.get_string("solver", "gauge", "pin_half_plateau");
    if (g == "pin_half_plateau")
        sc.gauge = GaugeMode::PinHalfPlateau;
    else if (g == "none")
        sc.gauge = GaugeMode::None;
    else
        throw std::invalid_argument("config key [solver] gauge must be "
                                    "'pin_half_plateau' or 'none'");
    sc.validate();
    return sc;
}

QuadratureConfig quad_from(const KeyValueConfig& cfg) {
    QuadratureConfig q;
    q.panels_per_cell = cfg.get_int("quadrature", "panels_per_cell", 2);
    q.tail_cutoff_tol = cfg.get_double("quadrature", "tail_cutoff_tol", 1e-10);
    q.interior_margin = cfg.get_double("quadrature", "interior_margin", 2.0);
    q.validate();
    return q;
}

void write_manifest(const Overrides& o, const KeyValueConfig& cfg, const std::string& command,
                    const std::vector<std::string>& outputs) {
    json j;
    j["command"] = command;
    j["threads"] = o.threads;
    j["seed"] = o.seed;
    j["output_dir"] = o.output_dir;
    json c;
    for (const auto& [sec, kv] : cfg.sections()) {
        for (const auto& [k, v] : kv) c[sec][k] = v;
    }
    j["config"] = c;
    j["outputs"] = outputs;
    std::ofstream out(fs::path(o.output_dir) / "manifest.json");
    out << j.dump(2) << "\n";
}

std::vector<SizeDistribution> run_simulation(const KeyValueConfig& cfg, const KernelSpec& kernel,
                                             std::vector<double>* scales) {
    const double xi_min = cfg.get_double("dynamics", "xi_min", 1e-3);
    const double xi_max = cfg.get_double("dynamics", "xi_max", 1e2);
    const int cells = cfg.get_int("dynamics", "cells", 256);
    const double t_end = cfg.get_double("dynamics", "t_end", 1.0);
    const double cfl = cfg.get_double("dynamics", "cfl", 0.25);
    const int snapshots = cfg.get_int("dynamics", "snapshots", 11);
    const double s0 = cfg.get_double("dynamics", "s0", 1.0);
    const std::string init = cfg.get_string("dynamics", "init", "expdecay");

    SizeDistribution f0 = geometric_cells(xi_min, xi_max, cells);
    if (init == "expdecay") {
        for (int k = 0; k < f0.cells(); ++k) {
            const double a = f0.cell_edges[k], b = f0.cell_edges[k + 1];
            f0.cell_values[k] = (std::exp(-a) - std::exp(-b)) / (b - a);
        }
    } else {
        throw std::invalid_argument("config key [dynamics] init must be 'expdecay'");
    }
    auto traj = simulate(f0, kernel, t_end, cfl, snapshots);
    if (scales) {
        scales->clear();
        for (const auto& f : traj) {
            ScaleState st{s0, 1.0};
            scales->push_back(evolve_scale(st, f.time, kernel.lambda()).s);
        }
    }
    return traj;
}

int cmd_hlambda(const Overrides& o) {
    const KeyValueConfig cfg = effective_config(o);
    const KernelSpec k = kernel_from(cfg);
    const QuadratureConfig q = quad_from(cfg);
    double est = 0.0;
    const double quadv = h_lambda_quadrature(k, q, &est);
    const double closed = h_lambda_closed_form(k);
    const HLambda hl = compute_h_lambda(k, q);
    std::printf("h_lambda    = %.15g\n", hl.value);
    std::printf("closed form = %.15g\n", closed);
    std::printf("quadrature  = %.15g (estimated error %.3g)\n", quadv, est);
    std::printf("agreement   = %.3g relative\n", std::fabs(closed - quadv) / closed);
    return kExitOk;
}

int cmd_validate_kernel(const Overrides& o) {
    const KeyValueConfig cfg = effective_config(o);
    const KernelSpec k = kernel_from(cfg);
    const ValidationOutcome v = validate_kernel(k, o.samples, o.seed);
    auto line = [](const char* name, const AssumptionCheck& c) {
        std::printf("%-14s %s", name, c.passed ? "pass" : "FAIL");
        if (!c.passed)
            std::printf("  violated: %s at (x,y,a)=(%.17g, %.17g, %.17g)", c.inequality.c_str(),
                        c.witness_x, c.witness_y, c.witness_a);
        std::printf("\n");
    };
    line("homogeneity", v.homogeneity);
    line("power growth", v.power_growth);
    line("nondegeneracy", v.nondegeneracy);
    std::printf("observed min on [1/4,1]^2 = %.15g (k0 = %.15g)\n", v.observed_min_box, k.k0);
    return v.passed() ? kExitOk : kExitCertification;
}

int cmd_solve(const Overrides& o) {
    const KeyValueConfig cfg = effective_config(o);
    const KernelSpec kernel = kernel_from(cfg);
    const LogGrid grid = grid_from(cfg);
    const SolverConfig sc = solver_from(cfg);
    const QuadratureConfig quad = quad_from(cfg);
    const HLambda hl = compute_h_lambda(kernel, quad);
    const Profile init = default_initial_profile(grid, kernel, hl);

    auto [prof, rep] = solve_profile(init, sc, quad);

    fs::create_directories(o.output_dir);
    const fs::path dir(o.output_dir);
    write_profile_csv(prof, (dir / "profile.csv").string());
    write_profile_meta_json(prof, (dir / "profile.meta.json").string());
    write_solve_report_json(rep, (dir / "report.json").string());
    write_manifest(o, cfg, "solve", {"profile.csv", "profile.meta.json", "report.json"});
    std::printf("solve: %s after %d iterations, final residual %.3g, gauge offset %.6g\n",
                rep.converged ? "converged" : "NOT converged", rep.iterations,
                rep.residual_history.empty() ? 0.0 : rep.residual_history.back(),
                rep.final_gauge_offset);
    return rep.converged ? kExitOk : kExitNumerical;
}

int cmd_verify(const Overrides& o) {
    const KeyValueConfig cfg = effective_config(o);
    const std::string ppath = cfg.get_string("verify", "profile", "");
    if (ppath.empty())
        throw std::invalid_argument("verify needs --profile PATH (or [verify] profile)");
    Profile p = read_profile(ppath);
    const QuadratureConfig quad = quad_from(cfg);
    VerifyOptions opt;
    opt.small_x_decades = cfg.get_double("verify", "small_x_decades", 2.0);
    opt.r_decades = cfg.get_int("verify", "r_decades", 2);
    const VerificationReport rep = verify_profile(p, opt, quad);

    fs::create_directories(o.output_dir);
    write_verification_json(rep, (fs::path(o.output_dir) / "verify.json").string());
    write_manifest(o, cfg, "verify", {"verify.json"});
    std::fputs(format_report_table(rep).c_str(), stdout);
    const bool certified = std::isfinite(rep.sup_h) && rep.inf_h_small_x > 0.0;
    return certified ? kExitOk : kExitCertification;
}

int cmd_simulate(const Overrides& o) {
    const KeyValueConfig cfg = effective_config(o);
    const KernelSpec kernel = kernel_from(cfg);
    std::vector<double> scales;
    const auto traj = run_simulation(cfg, kernel, &scales);
    fs::create_directories(o.output_dir);
    write_trajectory_csv(traj, scales, (fs::path(o.output_dir) / "trajectory.csv").string());
    write_manifest(o, cfg, "simulate", {"trajectory.csv"});
    const double m0 = traj.front().total_mass();
    const double mend = traj.back().total_mass() + traj.back().mass_lost_right;
    std::printf("simulate: %zu snapshots to t=%.6g, mass drift %.3g relative\n", traj.size(),
                traj.back().time, std::fabs(mend - m0) / m0);
    return kExitOk;
}

int cmd_compare(const Overrides& o) {
    const KeyValueConfig cfg = effective_config(o);
    std::string ppath = cfg.get_string("compare", "profile", "");
    if (ppath.empty()) ppath = cfg.get_string("verify", "profile", "");
    if (ppath.empty())
        throw std::invalid_argument("compare needs --profile PATH (or [compare] profile)");
    const Profile p = read_profile(ppath);
    const KernelSpec kernel = kernel_from(cfg);
    std::vector<double> scales;
    const auto traj = run_simulation(cfg, kernel, &scales);

    fs::create_directories(o.output_dir);
    const fs::path dir(o.output_dir);
    write_trajectory_csv(traj, scales, (dir / "trajectory.csv").string());
    std::ofstream out(dir / "distance.csv");
    out << "t,distance,shift\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        double shift = 0.0;
        const double d = rescaled_compare(traj[i], ScaleState{scales[i], 1.0}, p, &shift);
        out << format_full_precision(traj[i].time) << ',' << format_full_precision(d) << ','
            << format_full_precision(shift) << '\n';
    }
    write_manifest(o, cfg, "compare", {"trajectory.csv", "distance.csv"});
    std::printf("compare: wrote distance-vs-time for %zu snapshots\n", traj.size());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Self-similar coagulation profiles: solve, verify, simulate"};
    app.require_subcommand(1);

    Overrides o;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config_path, "key-value config file");
        sub->add_option("--output", o.output_dir, "output directory");
        sub->add_option("--alpha", o.alpha, "kernel exponent alpha");
        sub->add_option("--beta", o.beta, "kernel exponent beta");
        sub->add_option("--grid-min", o.grid_min, "grid X minimum");
        sub->add_option("--grid-max", o.grid_max, "grid X maximum");
        sub->add_option("--grid-n", o.grid_n, "grid node count");
        sub->add_option("--damping", o.damping, "solver damping theta");
        sub->add_option("--tol", o.tol, "solver residual tolerance");
        sub->add_option("--max-iters", o.max_iters, "solver iteration cap");
        sub->add_option("--threads", o.threads, "internal parallelism cap");
        sub->add_option("--seed", o.seed, "seed for sampled checks");
    };

    auto* s_hl = app.add_subcommand("hlambda", "compute h_lambda by both methods");
    add_common(s_hl);
    auto* s_vk = app.add_subcommand("validate-kernel", "check the structural assumptions");
    add_common(s_vk);
    s_vk->add_option("--samples", o.samples, "sample count (>= 16)");
    auto* s_solve = app.add_subcommand("solve", "solve for the self-similar profile");
    add_common(s_solve);
    auto* s_verify = app.add_subcommand("verify", "certify a computed profile");
    add_common(s_verify);
    s_verify->add_option("--profile", o.profile_path, "profile.csv to verify");
    auto* s_sim = app.add_subcommand("simulate", "time-dependent finite-volume run");
    add_common(s_sim);
    auto* s_cmp = app.add_subcommand("compare", "simulate and compare to a profile");
    add_common(s_cmp);
    s_cmp->add_option("--profile", o.profile_path, "reference profile.csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        set_max_threads(o.threads);
        if (s_hl->parsed()) return cmd_hlambda(o);
        if (s_vk->parsed()) return cmd_validate_kernel(o);
        if (s_solve->parsed()) return cmd_solve(o);
        if (s_verify->parsed()) return cmd_verify(o);
        if (s_sim->parsed()) return cmd_simulate(o);
        if (s_cmp->parsed()) return cmd_compare(o);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumerical;
    }
    return kExitUsage;
}
