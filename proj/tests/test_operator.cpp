#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "coagsim/numerics.hpp"
#include "coagsim/operator.hpp"
#include "coagsim/threading.hpp"

using namespace coagsim;

namespace {

Profile smooth_random_profile(const LogGrid& g, const KernelSpec& k, const HLambda& hl,
                              std::uint64_t seed) {
    // plateau + decay shape with smooth random modulation
    Rng rng(seed);
    const double a1 = rng.uniform(0.02, 0.2), p1 = rng.uniform(0.8, 3.0);
    const double a2 = rng.uniform(0.02, 0.2), p2 = rng.uniform(0.3, 1.5);
    Profile p;
    p.grid = g;
    p.values.resize(g.n);
    for (int i = 0; i < g.n; ++i) {
        const double X = g.node(i);
        const double base = std::exp(-std::exp(X));
        const double mod = 1.0 + a1 * std::sin(2.0 * M_PI * X / p1) +
                           a2 * std::cos(2.0 * M_PI * X / p2);
        p.values[i] = base * std::max(mod, 0.0);
    }
    p.kernel = k;
    p.h_lambda = hl;
    p.left_tail = {LeftTailKind::Constant, p.values.front()};
    p.right_tail = {RightTailKind::Exponential, 5.0, 0.0};
    return p;
}

double max_abs_dev(const std::vector<double>& v, double target) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x - target));
    return m;
}

}  // namespace

TEST_CASE("grid and profile validation") {
    CHECK_THROWS_AS(LogGrid(0.0, -1.0, 64), std::invalid_argument);
    CHECK_THROWS_AS(LogGrid(0.0, 1.0, 8), std::invalid_argument);
    const KernelSpec k = KernelSpec::product(0.25, 0.25);
    const HLambda hl = compute_h_lambda(k);
    Profile p = constant_profile(LogGrid(-5.0, 5.0, 32), 1.0, k, hl);
    p.values[3] = -0.5;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("h_to_g and the round trip") {
    const KernelSpec k = KernelSpec::product(0.25, 0.25);
    const HLambda hl = compute_h_lambda(k);
    LogGrid g(0.0, 5.0, 16);
    Profile p = constant_profile(g, 1.0, k, hl);
    const std::vector<double> gv = h_to_g(p);
    CHECK(gv[0] == doctest::Approx(1.0).epsilon(1e-15));  // X=0: g = h
    // at X = ln 2 with lambda = 1/4: g = 2^{-3/2}
    Profile p2 = constant_profile(LogGrid(std::log(2.0), 5.0, 16), 1.0, k, hl);
    CHECK(h_to_g(p2)[0] == doctest::Approx(std::pow(2.0, -1.5)).epsilon(1e-14));
}

TEST_CASE("constant solution is a fixed point up to discretization") {
    const KernelSpec k = KernelSpec::product(0.25, 0.25);
    const HLambda hl = compute_h_lambda(k);
    QuadratureConfig quad;

    double prev = 0.0;
    for (int n : {128, 256}) {
        const Profile one = constant_profile(LogGrid(-18.0, 7.0, n), 1.0, k, hl);
        const Profile t1 = apply_T(one, quad);
        const double dev = max_abs_dev(t1.values, 1.0);
        CAPTURE(n);
        CHECK(dev <= 1e-3);
        if (prev > 0.0) CHECK(prev / dev >= 3.5);  // second-order refinement
        prev = dev;
    }
}

TEST_CASE("zero maps to zero and constants scale quadratically") {
    const KernelSpec k = KernelSpec::product(0.2, 0.4);
    const HLambda hl = compute_h_lambda(k);
    QuadratureConfig quad;
    const LogGrid g(-14.0, 6.0, 128);

    const Profile zero = constant_profile(g, 0.0, k, hl);
    CHECK(max_abs_dev(apply_T(zero, quad).values, 0.0) == 0.0);

    const Profile two = constant_profile(g, 2.0, k, hl);
    const double dev1 = max_abs_dev(apply_T(constant_profile(g, 1.0, k, hl), quad).values, 1.0);
    CHECK(max_abs_dev(apply_T(two, quad).values, 4.0) <= 4.0 * dev1 * 1.0001 + 1e-15);
}

TEST_CASE("bilinearity: T(c h) = c^2 T(h)") {
    const KernelSpec k = KernelSpec::product(0.25, 0.25);
    const HLambda hl = compute_h_lambda(k);
    QuadratureConfig quad;
    const Profile p = smooth_random_profile(LogGrid(-12.0, 5.0, 96), k, hl, 42);
    const std::vector<double> base = apply_T(p, quad).values;
    for (double c : {0.5, 2.0, 10.0}) {
        const std::vector<double> scaled = apply_T(p.scaled(c), quad).values;
        double worst = 0.0;
        for (int i = 0; i < p.grid.n; ++i) {
            if (base[i] == 0.0) continue;
            worst = std::max(worst, std::fabs(scaled[i] - c * c * base[i]) / (c * c * base[i]));
        }
        CAPTURE(c);
        CHECK(worst <= 1e-12);
    }
}

TEST_CASE("translation equivariance to machine precision") {
    const KernelSpec k = KernelSpec::product(0.25, 0.25);
    const HLambda hl = compute_h_lambda(k);
    QuadratureConfig quad;
    const Profile p = smooth_random_profile(LogGrid(-12.0, 5.0, 96), k, hl, 7);
    for (double shift : {0.37, -1.2, 4.0}) {
        const Profile a = apply_T(translate_profile(p, shift), quad);
        const Profile b = translate_profile(apply_T(p, quad), shift);
        double worst = 0.0;
        for (int i = 0; i < p.grid.n; ++i) {
            const double ref = std::max(std::fabs(b.values[i]), 1e-300);
            worst = std::max(worst, std::fabs(a.values[i] - b.values[i]) / ref);
        }
        CAPTURE(shift);
        CHECK(worst <= 1e-12);
    }
}

TEST_CASE("translate round trip and gauge bookkeeping") {
    const KernelSpec k = KernelSpec::product(0.25, 0.25);
    const HLambda hl = compute_h_lambda(k);
    const Profile p = constant_profile(LogGrid(-5.0, 5.0, 32), 1.0, k, hl);
    const Profile q = translate_profile(translate_profile(p, 1.3), -1.3);
    CHECK(q.grid.x_min_log == doctest::Approx(p.grid.x_min_log).epsilon(1e-15));
    CHECK(q.gauge_offset == doctest::Approx(0.0));
    CHECK(q.values == p.values);
    const Profile r = translate_profile(p, 0.0);
    CHECK(r.grid.x_min_log == p.grid.x_min_log);
}

TEST_CASE("positivity on seeded nonnegative profiles") {
    const KernelSpec k = KernelSpec::product(0.15, 0.35);
    const HLambda hl = compute_h_lambda(k);
    QuadratureConfig quad;
    const LogGrid g(-10.0, 4.0, 64);
    CoagulationOperator op(g, k, hl, quad);
    Rng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        Profile p;
        p.grid = g;
        p.values.resize(g.n);
        for (int i = 0; i < g.n; ++i) p.values[i] = rng.uniform(0.0, 2.0);
        p.kernel = k;
        p.h_lambda = hl;
        p.left_tail = {LeftTailKind::Constant, rng.uniform(0.0, 1.0)};
        p.right_tail = {RightTailKind::Zero, 1.0, 0.0};
        const std::vector<double> th = op.apply(p);
        for (double v : th) CHECK(v >= 0.0);
    }
}

TEST_CASE("flux of the constant solution and shared-quadrature identity") {
    const KernelSpec k = KernelSpec::product(0.25, 0.25);
    const HLambda hl = compute_h_lambda(k);
    QuadratureConfig quad;
    const Profile one = constant_profile(LogGrid(-18.0, 7.0, 256), 1.0, k, hl);

    // flux(x) = x^{1-2 lambda} for the exact solution, to discretization
    for (double X : {-8.0, -3.0, 0.0, 2.0}) {
        const double x = std::exp(X);
        const double expect = std::pow(x, 1.0 - 2.0 * k.lambda());
        CHECK(std::fabs(flux(one, x, quad) - expect) / expect <= 1e-3);
    }
    CHECK_THROWS_AS(flux(one, std::exp(-17.5), quad), std::invalid_argument);

    // zero profile has zero flux
    const Profile zero = constant_profile(LogGrid(-18.0, 7.0, 64), 0.0, k, hl);
    CHECK(flux(zero, 1.0, quad) == 0.0);

    // doubling h quadruples the flux
    const Profile two = one.scaled(2.0);
    const double f1 = flux(one, 1.0, quad), f2 = flux(two, 1.0, quad);
    CHECK(f2 == doctest::Approx(4.0 * f1).epsilon(1e-12));

    // flux == x^2 g(x) (T h)(x)/h(x) with shared quadrature, node-exact
    const Profile p = smooth_random_profile(LogGrid(-12.0, 5.0, 96), k, hl, 3);
    const std::vector<double> fx = flux_all_nodes(p, quad);
    const std::vector<double> th = apply_T(p, quad).values;
    const std::vector<double> gv = h_to_g(p);
    const auto [i0, i1] = p.interior_nodes(quad);
    for (int i = i0; i <= i1; ++i) {
        if (p.values[i] == 0.0 || fx[i] == 0.0) continue;
        const double x = std::exp(p.grid.node(i));
        const double lhs = x * x * gv[i] * th[i] / p.values[i];
        CHECK(std::fabs(lhs - fx[i]) / fx[i] <= 1e-10);
    }
}

TEST_CASE("left truncation warning for Zero left tail") {
    const KernelSpec k = KernelSpec::product(0.25, 0.25);
    const HLambda hl = compute_h_lambda(k);
    QuadratureConfig quad;
    Profile p = constant_profile(LogGrid(-10.0, 4.0, 64), 1.0, k, hl);
    p.left_tail = {LeftTailKind::Zero, 0.0};
    ApplyDiagnostics diag;
    apply_T(p, quad, &diag);
    CHECK(diag.left_truncation_warning);
    p.left_tail = {LeftTailKind::Constant, 1.0};
    apply_T(p, quad, &diag);
    CHECK_FALSE(diag.left_truncation_warning);
}

TEST_CASE("g_to_f: identity scale, mass invariance, zero map") {
    const KernelSpec k = KernelSpec::product(0.25, 0.25);
    const HLambda hl = compute_h_lambda(k);
    Profile p = smooth_random_profile(LogGrid(-10.0, 4.0, 128), k, hl, 5);

    std::vector<double> xi(p.grid.n);
    for (int i = 0; i < p.grid.n; ++i) xi[i] = std::exp(p.grid.node(i));
    const std::vector<double> f1 = g_to_f(p, 1.0, xi);
    const std::vector<double> gv = h_to_g(p);
    for (int i = 0; i < p.grid.n; ++i)
        CHECK(f1[i] == doctest::Approx(gv[i]).epsilon(1e-12));

    // mass invariance: int xi f(xi) dxi = int x g(x) dx under xi = s x
    const double s = 2.0;
    std::vector<double> xi2(p.grid.n);
    for (int i = 0; i < p.grid.n; ++i) xi2[i] = s * xi[i];
    const std::vector<double> f2 = g_to_f(p, s, xi2);
    double m_g = 0.0, m_f = 0.0;
    for (int i = 0; i + 1 < p.grid.n; ++i) {
        m_g += 0.5 * (xi[i] * gv[i] + xi[i + 1] * gv[i + 1]) * (xi[i + 1] - xi[i]);
        m_f += 0.5 * (xi2[i] * f2[i] + xi2[i + 1] * f2[i + 1]) * (xi2[i + 1] - xi2[i]);
    }
    CHECK(m_f == doctest::Approx(m_g).epsilon(1e-12));

    const Profile z = constant_profile(p.grid, 0.0, k, hl);
    for (double v : g_to_f(z, 3.0, xi)) CHECK(v == 0.0);
}

TEST_CASE("thread count does not change results") {
    const KernelSpec k = KernelSpec::product(0.25, 0.25);
    const HLambda hl = compute_h_lambda(k);
    QuadratureConfig quad;
    const Profile p = smooth_random_profile(LogGrid(-12.0, 5.0, 128), k, hl, 12);
    set_max_threads(1);
    const std::vector<double> a = apply_T(p, quad).values;
    set_max_threads(8);
    const std::vector<double> b = apply_T(p, quad).values;
    set_max_threads(1);
    CHECK(a == b);  // bit identical
}
