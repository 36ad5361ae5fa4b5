#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "coagsim/dynamics.hpp"
#include "coagsim/numerics.hpp"
#include "coagsim/solver.hpp"

using namespace coagsim;

namespace {

// frozen from tests/oracles/oracles.py
constexpr double kScale025 = 2.25;               // lambda = 1/4, s0 = 1, t = 1
constexpr double kScale0125 = 2.1088744811533262;  // lambda = 1/8

KernelSpec constant_kernel() {
    // K == 1, homogeneity degree 0; admissible for the dynamics only
    return KernelSpec::custom([](double, double) { return 1.0; }, 0.0, 0.0, 0.5, 1.0,
                              {{0.5, 0.0, 0.0}});
}

// exact solution for K = 1 with f(xi,0) = e^-xi (unit mass):
// f(xi,t) = (2/(t+2))^2 exp(-2 xi/(t+2)); verified symbolically in the oracle
double exact_constant_kernel(double xi, double t) {
    const double N = 2.0 / (t + 2.0);
    return N * N * std::exp(-N * xi);
}

SizeDistribution exp_init(double xi_min, double xi_max, int cells) {
    SizeDistribution f = geometric_cells(xi_min, xi_max, cells);
    for (int k = 0; k < f.cells(); ++k) {
        const double a = f.cell_edges[k], b = f.cell_edges[k + 1];
        f.cell_values[k] = (std::exp(-a) - std::exp(-b)) / (b - a);  // exact cell mean
    }
    return f;
}

double exact_cell_mean(double a, double b, double t) {
    const double N = 2.0 / (t + 2.0);
    return N * N * (std::exp(-N * a) - std::exp(-N * b)) / (N * (b - a));
}

}  // namespace

TEST_CASE("evolve_scale closed form, flow property, RK4 agreement") {
    ScaleState s0;
    CHECK(evolve_scale(s0, 0.0, 0.25).s == 1.0);
    CHECK(evolve_scale(s0, 1.0, 0.25).s == doctest::Approx(kScale025).epsilon(1e-15));
    CHECK(evolve_scale(s0, 1.0, 0.125).s == doctest::Approx(kScale0125).epsilon(1e-14));

    // flow property: two half steps equal one step
    for (double lam : {0.15, 0.25, 0.35, 0.45}) {
        const ScaleState half = evolve_scale(evolve_scale(s0, 0.5, lam), 0.5, lam);
        const ScaleState full = evolve_scale(s0, 1.0, lam);
        CHECK(std::fabs(half.s - full.s) / full.s <= 1e-13);
    }

    // high-order integrator agreement
    for (double lam : {0.15, 0.35}) {
        double s = 1.0;
        const int steps = 4000;
        const double hstep = 1.0 / steps;
        auto f = [lam](double v) { return std::pow(v, 2.0 * lam); };
        for (int i = 0; i < steps; ++i) {
            const double k1 = f(s), k2 = f(s + 0.5 * hstep * k1), k3 = f(s + 0.5 * hstep * k2),
                         k4 = f(s + hstep * k3);
            s += hstep / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        }
        CHECK(std::fabs(s - evolve_scale(ScaleState{}, 1.0, lam).s) <= 1e-10);
    }
}

TEST_CASE("zero initial data stays zero") {
    SizeDistribution f0 = geometric_cells(1e-2, 1e1, 32);
    const auto traj = simulate(f0, constant_kernel(), 1.0, 0.5, 3);
    for (const auto& f : traj) {
        for (double v : f.cell_values) CHECK(v == 0.0);
        CHECK(f.mass_lost_right == 0.0);
    }
}

TEST_CASE("mass conservation for the product kernel") {
    const KernelSpec k = KernelSpec::product(0.2, 0.4);
    SizeDistribution f0 = exp_init(1e-3, 1e2, 128);
    const double m0 = f0.total_mass();
    const auto traj = simulate(f0, k, 0.5, 0.25, 3);
    for (const auto& f : traj) {
        const double m = f.total_mass() + f.mass_lost_right;
        CHECK(std::fabs(m - m0) / m0 <= 1e-8);
    }
}

TEST_CASE("positivity under the cfl bound") {
    const KernelSpec k = KernelSpec::product(0.25, 0.25);
    SizeDistribution f0 = exp_init(1e-2, 50.0, 96);
    const auto traj = simulate(f0, k, 1.0, 0.5, 3);
    for (const auto& f : traj)
        for (double v : f.cell_values) CHECK(v >= 0.0);
}

TEST_CASE("constant kernel explicit solution at moderate resolution") {
    SizeDistribution f0 = exp_init(1e-3, 1e2, 128);
    const auto traj = simulate(f0, constant_kernel(), 1.0, 0.25, 3);
    const SizeDistribution& f = traj.back();
    CHECK(f.time == doctest::Approx(1.0));
    // relative sup-norm error against the exact cell means
    double sup_ref = 0.0, sup_err = 0.0;
    for (int kc = 0; kc < f.cells(); ++kc) {
        const double ex = exact_cell_mean(f.cell_edges[kc], f.cell_edges[kc + 1], 1.0);
        sup_ref = std::max(sup_ref, ex);
        sup_err = std::max(sup_err, std::fabs(f.cell_values[kc] - ex));
    }
    CHECK(sup_err / sup_ref <= 0.04);  // 256-cell acceptance run tightens this to 2%

    const double m = f.total_mass() + f.mass_lost_right;
    CHECK(std::fabs(m - f0.total_mass()) / f0.total_mass() <= 1e-8);
}

TEST_CASE("rescaled_compare round trip and degenerate cases") {
    const KernelSpec k = KernelSpec::product(0.25, 0.25);
    const HLambda hl = compute_h_lambda(k);
    const LogGrid g(-8.0, 3.0, 256);
    Profile p;
    p.grid = g;
    p.values.resize(g.n);
    for (int i = 0; i < g.n; ++i) p.values[i] = std::exp(-std::exp(g.node(i)));
    p.kernel = k;
    p.h_lambda = hl;
    p.left_tail = {LeftTailKind::Constant, p.values.front()};
    p.right_tail = {RightTailKind::Exponential, 20.0, 0.0};

    // cells whose centers land exactly on s * grid nodes
    const double s = 3.0;
    const int nc = g.n - 1;
    SizeDistribution f;
    f.cell_edges.resize(nc + 1);
    for (int kc = 0; kc <= nc; ++kc)
        f.cell_edges[kc] = s * std::exp(g.node(kc) - 0.5 * g.dx() + 0.5 * g.dx() * 0.0 +
                                        (kc == 0 ? 0.0 : 0.0));
    // geometric edges straddling the node positions
    for (int kc = 0; kc <= nc; ++kc)
        f.cell_edges[kc] = s * std::exp(g.x_min_log + (kc - 0.5) * g.dx());
    f.cell_values.resize(nc);
    const std::vector<double> gv = h_to_g(p);
    for (int kc = 0; kc < nc; ++kc) f.cell_values[kc] = gv[kc] / (s * s);
    f.time = 0.0;

    const ScaleState st{s, 1.0};
    double shift = 0.0;
    const double d = rescaled_compare(f, st, p, &shift);
    CHECK(d <= 1e-8);
    CHECK(std::fabs(shift) <= 1e-6);

    // f == 0: distance equals the profile mass over the window
    SizeDistribution z = f;
    for (double& v : z.cell_values) v = 0.0;
    const double dz = rescaled_compare(z, st, p);
    CHECK(dz > 0.0);

    // empty overlap
    SizeDistribution far = geometric_cells(1e6, 1e7, 16);
    CHECK_THROWS_AS(rescaled_compare(far, st, p), std::invalid_argument);
}

TEST_CASE("distribution validation errors") {
    SizeDistribution f = geometric_cells(1e-2, 1e1, 16);
    f.cell_values[3] = -1.0;
    CHECK_THROWS_AS(f.validate(), std::invalid_argument);
    CHECK_THROWS_AS(geometric_cells(1.0, 0.5, 16), std::invalid_argument);
    SizeDistribution g0 = geometric_cells(1e-2, 1e1, 16);
    CHECK_THROWS_AS(simulate(g0, constant_kernel(), -1.0, 0.5), std::invalid_argument);
}
