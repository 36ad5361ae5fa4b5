#include "coagsim/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace coagsim {

using nlohmann::json;

std::string format_full_precision(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_profile_csv(const Profile& p, const std::string& csv_path) {
    std::ofstream out(csv_path);
    if (!out) throw std::invalid_argument("cannot open for writing: " + csv_path);
    out << "X,x,h,g\n";
    const std::vector<double> g = h_to_g(p);
    for (int i = 0; i < p.grid.n; ++i) {
        const double X = p.grid.node(i);
        out << format_full_precision(X) << ',' << format_full_precision(std::exp(X)) << ','
            << format_full_precision(p.values[i]) << ',' << format_full_precision(g[i]) << '\n';
    }
}

namespace {

json tail_to_json(const LeftTail& t) {
    json j;
    j["kind"] = t.kind == LeftTailKind::Constant ? "constant" : "zero";
    if (t.kind == LeftTailKind::Constant) j["c"] = t.c;
    return j;
}

json tail_to_json(const RightTail& t, double anchor) {
    json j;
    switch (t.kind) {
        case RightTailKind::Exponential:
            j["kind"] = "exponential";
            j["rate"] = t.rate;
            j["anchor"] = anchor;
            break;
        case RightTailKind::Constant:
            j["kind"] = "constant";
            j["c"] = t.c;
            break;
        case RightTailKind::Zero:
            j["kind"] = "zero";
            break;
    }
    return j;
}

}  // namespace

void write_profile_meta_json(const Profile& p, const std::string& json_path) {
    json j;
    j["lambda"] = p.kernel.lambda();
    j["alpha"] = p.kernel.alpha;
    j["beta"] = p.kernel.beta;
    j["K0"] = p.kernel.K0;
    j["k0"] = p.kernel.k0;
    j["kernel_kind"] = p.kernel.kind == KernelKind::Product ? "product" : "custom";
    j["h_lambda"] = p.h_lambda.value;
    j["h_lambda_method"] =
        p.h_lambda.method == HLambdaMethod::ClosedForm ? "closed_form" : "quadrature";
    j["h_lambda_estimated_error"] = p.h_lambda.estimated_error;
    j["grid"] = {{"x_min_log", p.grid.x_min_log},
                 {"x_max_log", p.grid.x_max_log},
                 {"n", p.grid.n}};
    j["left_tail"] = tail_to_json(p.left_tail);
    j["right_tail"] = tail_to_json(p.right_tail, p.grid.x_max_log);
    j["gauge_offset"] = p.gauge_offset;
    std::ofstream out(json_path);
    if (!out) throw std::invalid_argument("cannot open for writing: " + json_path);
    out << j.dump(2) << "\n";
}

Profile read_profile(const std::string& csv_path, const std::string& meta_path) {
    std::string mpath = meta_path;
    if (mpath.empty()) {
        mpath = csv_path;
        const auto pos = mpath.rfind(".csv");
        if (pos != std::string::npos)
            mpath = mpath.substr(0, pos) + ".meta.json";
        else
            mpath += ".meta.json";
    }
    std::ifstream metain(mpath);
    if (!metain) throw std::invalid_argument("profile sidecar not found: " + mpath);
    json j;
    metain >> j;

    Profile p;
    p.grid = LogGrid(j["grid"]["x_min_log"].get<double>(), j["grid"]["x_max_log"].get<double>(),
                     j["grid"]["n"].get<int>());
    const double alpha = j["alpha"].get<double>();
    const double beta = j["beta"].get<double>();
    if (j["kernel_kind"].get<std::string>() == "product") {
        p.kernel = KernelSpec::product(alpha, beta, j["K0"].get<double>(), j["k0"].get<double>());
    } else {
        throw std::invalid_argument("cannot reconstruct a custom kernel from a sidecar");
    }
    p.h_lambda.value = j["h_lambda"].get<double>();
    p.h_lambda.method = j["h_lambda_method"].get<std::string>() == "closed_form"
                            ? HLambdaMethod::ClosedForm
                            : HLambdaMethod::Quadrature;
    p.h_lambda.estimated_error = j["h_lambda_estimated_error"].get<double>();
    {
        const json& t = j["left_tail"];
        if (t["kind"] == "constant")
            p.left_tail = {LeftTailKind::Constant, t["c"].get<double>()};
        else
            p.left_tail = {LeftTailKind::Zero, 0.0};
    }
    {
        const json& t = j["right_tail"];
        if (t["kind"] == "exponential")
            p.right_tail = {RightTailKind::Exponential, t["rate"].get<double>(), 0.0};
        else if (t["kind"] == "constant")
            p.right_tail = {RightTailKind::Constant, 1.0, t["c"].get<double>()};
        else
            p.right_tail = {RightTailKind::Zero, 1.0, 0.0};
    }
    p.gauge_offset = j["gauge_offset"].get<double>();

    std::ifstream in(csv_path);
    if (!in) throw std::invalid_argument("profile csv not found: " + csv_path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("X,x,h,g", 0) != 0)
        throw std::invalid_argument("profile csv has an unexpected header: " + csv_path);
    p.values.clear();
    p.values.reserve(p.grid.n);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        double cols[4];
        for (int c = 0; c < 4; ++c) {
            if (!std::getline(ls, cell, ','))
                throw std::invalid_argument("profile csv row with fewer than 4 columns");
            cols[c] = std::stod(cell);
        }
        p.values.push_back(cols[2]);
    }
    p.validate();
    return p;
}

void write_solve_report_json(const SolveReport& r, const std::string& path) {
    json j;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["final_gauge_offset"] = r.final_gauge_offset;
    j["residual_history"] = r.residual_history;
    j["clamping_flag"] = r.clamping_flag;
    j["clamped_nodes_total"] = r.clamped_nodes_total;
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
}

void write_verification_json(const VerificationReport& r, const std::string& path) {
    json j;
    j["sup_h"] = r.sup_h;
    j["inf_h_small_x"] = r.inf_h_small_x;
    j["dyadic_avg_sup"] = r.dyadic_avg_sup;
    if (std::isfinite(r.min_growth_D))
        j["min_growth_D"] = r.min_growth_D;
    else
        j["min_growth_D"] = "infinity";
    j["flux_residual_sup"] = r.flux_residual_sup;
    if (r.osc_period)
        j["osc_period"] = *r.osc_period;
    else
        j["osc_period"] = nullptr;
    j["left_plateau_mean"] = r.left_plateau_mean;
    j["windows"] = {{"small_x", {r.small_x_window.lo, r.small_x_window.hi}},
                    {"interior", {r.interior.lo, r.interior.hi}}};
    j["r_decades"] = r.r_decades;
    j["growth_zeros_flagged"] = r.growth_zeros_flagged;
    j["flux_skipped_nodes"] = r.flux_skipped_nodes;
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
}

void write_trajectory_csv(const std::vector<SizeDistribution>& traj,
                          const std::vector<double>& scales, const std::string& path) {
    if (traj.size() != scales.size())
        throw std::invalid_argument("trajectory and scale arrays differ in length");
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open for writing: " + path);
    out << "t,cell_center,f,x_rescaled,g_candidate\n";
    for (std::size_t s = 0; s < traj.size(); ++s) {
        const SizeDistribution& f = traj[s];
        const double sc = scales[s];
        for (int k = 0; k < f.cells(); ++k) {
            const double c = f.cell_center(k);
            out << format_full_precision(f.time) << ',' << format_full_precision(c) << ','
                << format_full_precision(f.cell_values[k]) << ','
                << format_full_precision(c / sc) << ','
                << format_full_precision(sc * sc * f.cell_values[k]) << '\n';
        }
    }
}

}  // namespace coagsim
