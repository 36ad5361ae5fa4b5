#include "coagsim/verify.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

#include "coagsim/numerics.hpp"

namespace coagsim {

namespace {

// int_{Xa}^{Xb} h(e^X) e^X dX for the piecewise-linear interpolant of h,
// exact per cell (weight e^X against linear H).
double integral_h_dx(const Profile& p, double Xa, double Xb) {
    const double dx = p.grid.dx();
    NeumaierSum s;
    const int n = p.grid.n;
    for (int i = 0; i + 1 < n; ++i) {
        const double lo = p.grid.node(i), hi = p.grid.node(i + 1);
        const double a = std::max(lo, Xa), b = std::min(hi, Xb);
        if (!(a < b)) continue;
        const double fa = (a - lo) / dx, fb = (b - lo) / dx;
        const double Ha = p.values[i] * (1.0 - fa) + p.values[i + 1] * fa;
        const double Hb = p.values[i] * (1.0 - fb) + p.values[i + 1] * fb;
        s.add(exp_linear_segment(1.0, a, b, Ha, Hb));
    }
    return s.value();
}

}  // namespace

XWindow default_small_x_window(const Profile& p, const QuadratureConfig& quad, double decades) {
    const auto [i0, i1] = p.interior_nodes(quad);
    const double lo = p.grid.node(i0);
    const double hi = std::min(p.grid.node(i1), lo + decades * std::log(10.0));
    return {lo, hi};
}

std::pair<double, double> bounds_report(const Profile& p, const XWindow& w,
                                        const QuadratureConfig& quad) {
    p.validate();
    const auto [i0, i1] = p.interior_nodes(quad);
    if (w.lo < p.grid.node(i0) - 1e-12 || w.hi > p.grid.node(i1) + 1e-12 || !(w.lo < w.hi))
        throw std::invalid_argument("small-x window outside the interior");
    double sup = 0.0;
    for (int i = i0; i <= i1; ++i) sup = std::max(sup, p.values[i]);
    double inf = std::numeric_limits<double>::infinity();
    for (int i = i0; i <= i1; ++i) {
        const double X = p.grid.node(i);
        if (X >= w.lo - 1e-12 && X <= w.hi + 1e-12) inf = std::min(inf, p.values[i]);
    }
    if (!std::isfinite(inf)) throw std::invalid_argument("small-x window contains no nodes");
    return {sup, inf};
}

double dyadic_average_sup(const Profile& p, int r_decades, const QuadratureConfig& quad) {
    p.validate();
    if (r_decades < 1) throw std::invalid_argument("r_decades must be >= 1");
    const auto [i0, i1] = p.interior_nodes(quad);
    constexpr double kLn2 = 0.6931471805599453094172321;
    const double Rlo = -r_decades * std::log(10.0);
    double best = -1.0;
    for (int i = i0; i <= i1; ++i) {
        const double XR = p.grid.node(i);  // R = e^{XR}
        if (XR < Rlo || XR > 0.0) continue;
        if (XR - kLn2 < p.grid.node(i0)) continue;  // [R/2, R] must stay interior
        const double R = std::exp(XR);
        const double avg = integral_h_dx(p, XR - kLn2, XR) / (0.5 * R);
        best = std::max(best, avg);
    }
    if (best < 0.0)
        throw std::invalid_argument("insufficient interior span for dyadic averages");
    return best;
}

GrowthResult growth_rate_check(const Profile& p, const QuadratureConfig& quad) {
    p.validate();
    const auto [i0, i1] = p.interior_nodes(quad);
    GrowthResult out;
    double D = 0.0;
    bool zero_before_positive = false;
    bool any_zero = false;
    bool zero_seen = false;
    for (int j = i0; j <= i1; ++j) {
        const double Hj = p.values[j];
        if (Hj == 0.0) {
            any_zero = true;
            zero_seen = true;
            continue;
        }
        if (zero_seen) zero_before_positive = true;
        for (int i = i0; i < j; ++i) {
            const double Hi = p.values[i];
            if (Hi == 0.0) continue;
            const double r = std::log(Hj / (2.0 * Hi)) / (p.grid.node(j) - p.grid.node(i));
            if (r > D) D = r;
        }
    }
    out.zeros_flagged = any_zero;
    out.D = zero_before_positive ? std::numeric_limits<double>::infinity() : D;
    return out;
}

FluxResidualResult flux_residual(const Profile& p, const QuadratureConfig& quad) {
    p.validate();
    const std::vector<double> fx = flux_all_nodes(p, quad);
    const std::vector<double> g = h_to_g(p);
    const auto [i0, i1] = p.interior_nodes(quad);
    FluxResidualResult out;
    for (int i = i0; i <= i1; ++i) {
        const double x = std::exp(p.grid.node(i));
        const double lhs = x * x * g[i];  // = x^{1-2 lambda} h(x)
        if (lhs == 0.0) {
            ++out.skipped_nodes;
            continue;
        }
        out.sup = std::max(out.sup, std::fabs(lhs - fx[i]) / lhs);
    }
    return out;
}

std::optional<double> oscillation_diagnostic(const Profile& p, const XWindow& window) {
    p.validate();
    std::vector<double> d;
    std::vector<int> idx;
    for (int i = 0; i < p.grid.n; ++i) {
        const double X = p.grid.node(i);
        if (X >= window.lo - 1e-12 && X <= window.hi + 1e-12) idx.push_back(i);
    }
    const int m = static_cast<int>(idx.size());
    if (m < 16) return std::nullopt;
    double mean = 0.0;
    for (int i : idx) mean += p.values[i];
    mean /= m;
    d.reserve(m);
    for (int i : idx) d.push_back(p.values[i] - mean);

    const double span = p.grid.node(idx.back()) - p.grid.node(idx.front());
    // modes with at least 4 full periods in the window are candidates
    const int kmax = m / 2;
    if (kmax < 5) return std::nullopt;
    std::vector<double> mag(kmax + 1, 0.0);
    for (int k = 1; k <= kmax; ++k) {
        std::complex<double> acc(0.0, 0.0);
        for (int j = 0; j < m; ++j) {
            const double ph = -2.0 * M_PI * k * j / m;
            acc += d[j] * std::complex<double>(std::cos(ph), std::sin(ph));
        }
        mag[k] = std::abs(acc);
    }
    std::vector<double> sorted(mag.begin() + 1, mag.end());
    std::sort(sorted.begin(), sorted.end());
    const double med = sorted[sorted.size() / 2];
    int kpk = 4;
    for (int k = 4; k <= kmax; ++k)
        if (mag[k] > mag[kpk]) kpk = k;
    if (!(mag[kpk] > 3.0 * med) || kpk >= kmax) return std::nullopt;
    // parabolic refinement of the peak bin
    double kref = kpk;
    if (kpk > 4 && kpk < kmax) {
        const double y0 = mag[kpk - 1], y1 = mag[kpk], y2 = mag[kpk + 1];
        const double den = y0 - 2.0 * y1 + y2;
        if (den < 0.0) kref += 0.5 * (y0 - y2) / den;
    }
    return span * m / ((m - 1.0) * kref);
}

VerificationReport verify_profile(const Profile& p, const VerifyOptions& opt,
                                  const QuadratureConfig& quad) {
    VerificationReport r;
    r.interior = {p.interior_lo(quad), p.interior_hi(quad)};
    r.small_x_window = default_small_x_window(p, quad, opt.small_x_decades);
    r.r_decades = opt.r_decades;
    auto [sup, inf] = bounds_report(p, r.small_x_window, quad);
    r.sup_h = sup;
    r.inf_h_small_x = inf;
    r.dyadic_avg_sup = dyadic_average_sup(p, opt.r_decades, quad);
    const GrowthResult gr = growth_rate_check(p, quad);
    r.min_growth_D = gr.D;
    r.growth_zeros_flagged = gr.zeros_flagged;
    const FluxResidualResult fr = flux_residual(p, quad);
    r.flux_residual_sup = fr.sup;
    r.flux_skipped_nodes = fr.skipped_nodes;
    r.osc_period = oscillation_diagnostic(p, opt.osc_window.value_or(r.small_x_window));
    {
        const auto [i0, i1] = p.interior_nodes(quad);
        double sum = 0.0;
        int cnt = 0;
        for (int i = i0; i <= i1; ++i) {
            const double X = p.grid.node(i);
            if (X >= r.small_x_window.lo - 1e-12 && X <= r.small_x_window.hi + 1e-12) {
                sum += p.values[i];
                ++cnt;
            }
        }
        r.left_plateau_mean = cnt ? sum / cnt : 0.0;
    }
    return r;
}

std::string format_report_table(const VerificationReport& r) {
    std::ostringstream os;
    os.precision(10);
    os << "verification summary\n";
    os << "  sup h (interior)          " << r.sup_h << "\n";
    os << "  inf h (small-x window)    " << r.inf_h_small_x << "\n";
    os << "  dyadic average sup        " << r.dyadic_avg_sup << "\n";
    os << "  min growth constant D     " << r.min_growth_D
       << (r.growth_zeros_flagged ? "  [zeros skipped]" : "") << "\n";
    os << "  flux residual sup         " << r.flux_residual_sup;
    if (r.flux_skipped_nodes) os << "  [" << r.flux_skipped_nodes << " zero nodes skipped]";
    os << "\n";
    os << "  oscillation period        ";
    if (r.osc_period)
        os << *r.osc_period << "\n";
    else
        os << "absent\n";
    os << "  left plateau mean         " << r.left_plateau_mean << "\n";
    os << "  small-x window            [" << r.small_x_window.lo << ", " << r.small_x_window.hi
       << "]\n";
    os << "  interior                  [" << r.interior.lo << ", " << r.interior.hi << "]\n";
    return os.str();
}

}  // namespace coagsim
