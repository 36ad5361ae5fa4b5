#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "coagsim/dynamics.hpp"
#include "coagsim/io.hpp"
#include "coagsim/solver.hpp"
#include "coagsim/threading.hpp"
#include "coagsim/verify.hpp"

namespace py = pybind11;
using namespace coagsim;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Self-similar coagulation profiles: kernels, fixed-point operator, "
              "solver, dynamics and verification";

    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
    py::register_exception<CollapseError>(m, "CollapseError", PyExc_RuntimeError);

    py::enum_<KernelKind>(m, "KernelKind")
        .value("Product", KernelKind::Product)
        .value("Custom", KernelKind::Custom);

    py::class_<PowerTerm>(m, "PowerTerm")
        .def(py::init<double, double, double>(), py::arg("coef"), py::arg("a"), py::arg("b"))
        .def_readwrite("coef", &PowerTerm::coef)
        .def_readwrite("a", &PowerTerm::a)
        .def_readwrite("b", &PowerTerm::b);

    py::class_<KernelSpec>(m, "KernelSpec")
        .def_static("product", &KernelSpec::product, py::arg("alpha"), py::arg("beta"),
                    py::arg("K0") = 1.0, py::arg("k0") = -1.0)
        .def_static("custom", &KernelSpec::custom, py::arg("evaluator"), py::arg("alpha"),
                    py::arg("beta"), py::arg("K0"), py::arg("k0"),
                    py::arg("separable") = std::vector<PowerTerm>{})
        .def_readonly("alpha", &KernelSpec::alpha)
        .def_readonly("beta", &KernelSpec::beta)
        .def_readonly("K0", &KernelSpec::K0)
        .def_readonly("k0", &KernelSpec::k0)
        .def_readonly("kind", &KernelSpec::kind)
        .def_property_readonly("lam", &KernelSpec::lambda)
        .def("__repr__", [](const KernelSpec& k) {
            return "KernelSpec(alpha=" + std::to_string(k.alpha) +
                   ", beta=" + std::to_string(k.beta) + ")";
        });

    m.def("kernel_eval", &kernel_eval, py::arg("kernel"), py::arg("x"), py::arg("y"));

    py::class_<AssumptionCheck>(m, "AssumptionCheck")
        .def_readonly("passed", &AssumptionCheck::passed)
        .def_readonly("inequality", &AssumptionCheck::inequality)
        .def_readonly("witness_x", &AssumptionCheck::witness_x)
        .def_readonly("witness_y", &AssumptionCheck::witness_y)
        .def_readonly("witness_a", &AssumptionCheck::witness_a)
        .def_readonly("worst", &AssumptionCheck::worst);

    py::class_<ValidationOutcome>(m, "ValidationOutcome")
        .def_readonly("homogeneity", &ValidationOutcome::homogeneity)
        .def_readonly("power_growth", &ValidationOutcome::power_growth)
        .def_readonly("nondegeneracy", &ValidationOutcome::nondegeneracy)
        .def_readonly("observed_min_box", &ValidationOutcome::observed_min_box)
        .def("passed", &ValidationOutcome::passed);

    m.def("validate_kernel", &validate_kernel, py::arg("kernel"), py::arg("samples"),
          py::arg("seed") = 20260801ull);

    py::enum_<HLambdaMethod>(m, "HLambdaMethod")
        .value("Quadrature", HLambdaMethod::Quadrature)
        .value("ClosedForm", HLambdaMethod::ClosedForm);

    py::class_<HLambda>(m, "HLambda")
        .def_readonly("value", &HLambda::value)
        .def_readonly("method", &HLambda::method)
        .def_readonly("estimated_error", &HLambda::estimated_error);

    py::class_<QuadratureConfig>(m, "QuadratureConfig")
        .def(py::init<>())
        .def_readwrite("panels_per_cell", &QuadratureConfig::panels_per_cell)
        .def_readwrite("tail_cutoff_tol", &QuadratureConfig::tail_cutoff_tol)
        .def_readwrite("interior_margin", &QuadratureConfig::interior_margin);

    m.def("h_lambda_closed_form", &h_lambda_closed_form, py::arg("kernel"));
    m.def(
        "h_lambda_quadrature",
        [](const KernelSpec& k, const QuadratureConfig& q) {
            double est = 0.0;
            const double v = h_lambda_quadrature(k, q, &est);
            return py::make_tuple(v, est);
        },
        py::arg("kernel"), py::arg("quad") = QuadratureConfig{});
    m.def("compute_h_lambda", &compute_h_lambda, py::arg("kernel"),
          py::arg("quad") = QuadratureConfig{});
    m.def("weight_G", &weight_G, py::arg("kernel"), py::arg("h_lambda"), py::arg("Y"),
          py::arg("Z"));
    m.def("gdec_residual", &gdec_residual, py::arg("kernel"), py::arg("h_lambda"), py::arg("Y"),
          py::arg("Z"), py::arg("eps"));

    py::class_<LogGrid>(m, "LogGrid")
        .def(py::init<double, double, int>(), py::arg("x_min_log"), py::arg("x_max_log"),
             py::arg("n"))
        .def_readonly("x_min_log", &LogGrid::x_min_log)
        .def_readonly("x_max_log", &LogGrid::x_max_log)
        .def_readonly("n", &LogGrid::n)
        .def("dx", &LogGrid::dx)
        .def("node", &LogGrid::node);

    py::enum_<LeftTailKind>(m, "LeftTailKind")
        .value("Constant", LeftTailKind::Constant)
        .value("Zero", LeftTailKind::Zero);
    py::enum_<RightTailKind>(m, "RightTailKind")
        .value("Exponential", RightTailKind::Exponential)
        .value("Constant", RightTailKind::Constant)
        .value("Zero", RightTailKind::Zero);

    py::class_<LeftTail>(m, "LeftTail")
        .def(py::init<>())
        .def_readwrite("kind", &LeftTail::kind)
        .def_readwrite("c", &LeftTail::c);
    py::class_<RightTail>(m, "RightTail")
        .def(py::init<>())
        .def_readwrite("kind", &RightTail::kind)
        .def_readwrite("rate", &RightTail::rate)
        .def_readwrite("c", &RightTail::c);

    py::class_<Profile>(m, "Profile")
        .def(py::init<>())
        .def_readwrite("grid", &Profile::grid)
        .def_readwrite("values", &Profile::values)
        .def_readwrite("left_tail", &Profile::left_tail)
        .def_readwrite("right_tail", &Profile::right_tail)
        .def_readwrite("kernel", &Profile::kernel)
        .def_readwrite("h_lambda", &Profile::h_lambda)
        .def_readwrite("gauge_offset", &Profile::gauge_offset)
        .def("eval_H", &Profile::eval_H)
        .def("scaled", &Profile::scaled)
        .def("validate", &Profile::validate);

    m.def("constant_profile", &constant_profile, py::arg("grid"), py::arg("value"),
          py::arg("kernel"), py::arg("h_lambda"));
    m.def("h_to_g", &h_to_g, py::arg("profile"));
    m.def("g_to_f", &g_to_f, py::arg("profile"), py::arg("s"), py::arg("xi_targets"));
    m.def("translate_profile", &translate_profile, py::arg("profile"), py::arg("shift"));

    m.def(
        "apply_T",
        [](const Profile& p, const QuadratureConfig& q) {
            ApplyDiagnostics d;
            Profile out = apply_T(p, q, &d);
            return py::make_tuple(out, d.left_truncation_warning);
        },
        py::arg("profile"), py::arg("quad") = QuadratureConfig{});
    m.def("flux", &flux, py::arg("profile"), py::arg("x"),
          py::arg("quad") = QuadratureConfig{});
    m.def("flux_all_nodes", &flux_all_nodes, py::arg("profile"),
          py::arg("quad") = QuadratureConfig{});

    py::enum_<GaugeMode>(m, "GaugeMode")
        .value("PinHalfPlateau", GaugeMode::PinHalfPlateau)
        .value("NoGauge", GaugeMode::None);

    py::class_<SolverConfig>(m, "SolverConfig")
        .def(py::init<>())
        .def_readwrite("damping", &SolverConfig::damping)
        .def_readwrite("max_iterations", &SolverConfig::max_iterations)
        .def_readwrite("residual_tol", &SolverConfig::residual_tol)
        .def_readwrite("gauge", &SolverConfig::gauge);

    py::class_<SolveReport>(m, "SolveReport")
        .def_readonly("iterations", &SolveReport::iterations)
        .def_readonly("residual_history", &SolveReport::residual_history)
        .def_readonly("converged", &SolveReport::converged)
        .def_readonly("final_gauge_offset", &SolveReport::final_gauge_offset)
        .def_readonly("clamping_flag", &SolveReport::clamping_flag)
        .def_readonly("clamped_nodes_total", &SolveReport::clamped_nodes_total);

    m.def("solve_profile", &solve_profile, py::arg("initial"), py::arg("config"),
          py::arg("quad") = QuadratureConfig{});
    m.def("rescale_solution", &rescale_solution, py::arg("profile"), py::arg("a"));
    m.def("default_initial_profile", &default_initial_profile, py::arg("grid"),
          py::arg("kernel"), py::arg("h_lambda"));
    m.def("first_moment", &first_moment, py::arg("profile"));

    py::class_<SizeDistribution>(m, "SizeDistribution")
        .def(py::init<>())
        .def_readwrite("cell_edges", &SizeDistribution::cell_edges)
        .def_readwrite("cell_values", &SizeDistribution::cell_values)
        .def_readwrite("time", &SizeDistribution::time)
        .def_readwrite("mass_lost_right", &SizeDistribution::mass_lost_right)
        .def("cells", &SizeDistribution::cells)
        .def("cell_center", &SizeDistribution::cell_center)
        .def("total_mass", &SizeDistribution::total_mass);

    m.def("geometric_cells", &geometric_cells, py::arg("xi_min"), py::arg("xi_max"),
          py::arg("cells"));

    py::class_<ScaleState>(m, "ScaleState")
        .def(py::init<>())
        .def(py::init([](double s) {
                 ScaleState st;
                 st.s = s;
                 return st;
             }),
             py::arg("s"))
        .def_readwrite("s", &ScaleState::s)
        .def_readonly("w", &ScaleState::w);

    m.def("evolve_scale", &evolve_scale, py::arg("state"), py::arg("dt"), py::arg("lam"));
    m.def("simulate", &simulate, py::arg("f0"), py::arg("kernel"), py::arg("t_end"),
          py::arg("cfl"), py::arg("snapshots") = 2);
    m.def(
        "rescaled_compare",
        [](const SizeDistribution& f, const ScaleState& st, const Profile& p) {
            double shift = 0.0;
            const double d = rescaled_compare(f, st, p, &shift);
            return py::make_tuple(d, shift);
        },
        py::arg("f"), py::arg("state"), py::arg("profile"));

    py::class_<XWindow>(m, "XWindow")
        .def(py::init<double, double>(), py::arg("lo"), py::arg("hi"))
        .def_readwrite("lo", &XWindow::lo)
        .def_readwrite("hi", &XWindow::hi);

    py::class_<VerificationReport>(m, "VerificationReport")
        .def_readonly("sup_h", &VerificationReport::sup_h)
        .def_readonly("inf_h_small_x", &VerificationReport::inf_h_small_x)
        .def_readonly("dyadic_avg_sup", &VerificationReport::dyadic_avg_sup)
        .def_readonly("min_growth_D", &VerificationReport::min_growth_D)
        .def_readonly("flux_residual_sup", &VerificationReport::flux_residual_sup)
        .def_readonly("osc_period", &VerificationReport::osc_period)
        .def_readonly("left_plateau_mean", &VerificationReport::left_plateau_mean)
        .def_readonly("growth_zeros_flagged", &VerificationReport::growth_zeros_flagged)
        .def_readonly("flux_skipped_nodes", &VerificationReport::flux_skipped_nodes);

    m.def("bounds_report", &bounds_report, py::arg("profile"), py::arg("small_x_window"),
          py::arg("quad") = QuadratureConfig{});
    m.def("dyadic_average_sup", &dyadic_average_sup, py::arg("profile"), py::arg("r_decades"),
          py::arg("quad") = QuadratureConfig{});
    m.def(
        "growth_rate_check",
        [](const Profile& p, const QuadratureConfig& q) {
            const GrowthResult r = growth_rate_check(p, q);
            return py::make_tuple(r.D, r.zeros_flagged);
        },
        py::arg("profile"), py::arg("quad") = QuadratureConfig{});
    m.def(
        "flux_residual",
        [](const Profile& p, const QuadratureConfig& q) {
            const FluxResidualResult r = flux_residual(p, q);
            return py::make_tuple(r.sup, r.skipped_nodes);
        },
        py::arg("profile"), py::arg("quad") = QuadratureConfig{});
    m.def("oscillation_diagnostic", &oscillation_diagnostic, py::arg("profile"),
          py::arg("window"));
    m.def(
        "verify_profile",
        [](const Profile& p, double small_x_decades, int r_decades, const QuadratureConfig& q) {
            VerifyOptions opt;
            opt.small_x_decades = small_x_decades;
            opt.r_decades = r_decades;
            return verify_profile(p, opt, q);
        },
        py::arg("profile"), py::arg("small_x_decades") = 2.0, py::arg("r_decades") = 2,
        py::arg("quad") = QuadratureConfig{});
    m.def("default_small_x_window", &default_small_x_window, py::arg("profile"),
          py::arg("quad") = QuadratureConfig{}, py::arg("decades") = 2.0);
    m.def("format_report_table", &format_report_table, py::arg("report"));

    m.def("write_profile_csv", &write_profile_csv, py::arg("profile"), py::arg("csv_path"));
    m.def("write_profile_meta_json", &write_profile_meta_json, py::arg("profile"),
          py::arg("json_path"));
    m.def("read_profile", &read_profile, py::arg("csv_path"), py::arg("meta_path") = "");

    m.def("set_max_threads", &set_max_threads, py::arg("n"));
    m.def("max_threads", &max_threads);
}
