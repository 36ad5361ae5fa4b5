#include "coagsim/solver.hpp"

#include <algorithm>
#include <cmath>

#include "coagsim/numerics.hpp"

namespace coagsim {

void SolverConfig::validate() const {
    if (!(damping > 0.0 && damping <= 1.0))
        throw std::invalid_argument("damping must lie in (0,1]");
    if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
    if (!(residual_tol > 0.0)) throw std::invalid_argument("residual_tol must be positive");
}

Profile default_initial_profile(const LogGrid& grid, const KernelSpec& kernel,
                                const HLambda& hl) {
    Profile p;
    p.grid = grid;
    p.values.resize(grid.n);
    for (int i = 0; i < grid.n; ++i) p.values[i] = std::exp(-std::exp(grid.node(i)));
    p.kernel = kernel;
    p.h_lambda = hl;
    p.left_tail = {LeftTailKind::Constant, p.values.front()};
    p.right_tail = {RightTailKind::Exponential, 1.0, 0.0};
    refit_right_tail(p);
    p.validate();
    return p;
}

// Least-squares slope of ln h over the last decade of the grid, positive
// values only. A non-decaying fit keeps the previous tail model.
void refit_right_tail(Profile& p) {
    const double lo = p.grid.x_max_log - std::log(10.0);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (int i = 0; i < p.grid.n; ++i) {
        const double X = p.grid.node(i);
        if (X < lo || p.values[i] <= 0.0) continue;
        const double y = std::log(p.values[i]);
        sx += X;
        sy += y;
        sxx += X * X;
        sxy += X * y;
        ++m;
    }
    if (m < 2) return;
    const double det = m * sxx - sx * sx;
    if (det <= 0.0) return;
    const double slope = (m * sxy - sx * sy) / det;
    if (slope < 0.0) p.right_tail = {RightTailKind::Exponential, -slope, 0.0};
}

namespace {

// node index range of the left-plateau window (leftmost two decades of the
// interior), shared by the tail closure and the gauge pin
std::pair<int, int> plateau_window(const Profile& p, const QuadratureConfig& quad) {
    const auto [i0, i1] = p.interior_nodes(quad);
    const double hi = p.grid.node(i0) + 2.0 * std::log(10.0);
    int iw = i0;
    while (iw + 1 <= i1 && p.grid.node(iw + 1) <= hi) ++iw;
    return {i0, iw};
}

double plateau_mean(const Profile& p, const QuadratureConfig& quad) {
    const auto [a, b] = plateau_window(p, quad);
    double s = 0.0;
    for (int i = a; i <= b; ++i) s += p.values[i];
    return s / (b - a + 1);
}

}  // namespace

double pin_half_plateau(Profile& p, const QuadratureConfig& quad) {
    const double plateau = plateau_mean(p, quad);
    if (!(plateau > 0.0)) return 0.0;
    const double half = 0.5 * plateau;
    const auto [i0, i1] = p.interior_nodes(quad);
    (void)i1;
    double crossing = 0.0;
    bool found = false;
    for (int i = i0 + 1; i < p.grid.n; ++i) {
        if (p.values[i - 1] >= half && p.values[i] < half) {
            const double f = (p.values[i - 1] - half) / (p.values[i - 1] - p.values[i]);
            crossing = p.grid.node(i - 1) + f * p.grid.dx();
            found = true;
            break;
        }
    }
    if (!found || std::fabs(crossing) < 1e-12) return 0.0;
    p = translate_profile(p, crossing);
    return crossing;
}

double first_moment(const Profile& p) {
    // int x g dx = int e^{(1-2 lambda) X} H(X) dX over the grid
    const double b = 1.0 - 2.0 * p.kernel.lambda();
    NeumaierSum s;
    for (int i = 0; i + 1 < p.grid.n; ++i) {
        s.add(exp_linear_segment(b, p.grid.node(i), p.grid.node(i + 1), p.values[i],
                                 p.values[i + 1]));
    }
    return s.value();
}

namespace {

// Last downward crossing of h through half the plateau level: robust
// against transient dips, used to keep the decay front inside the window.
double robust_front_position(const Profile& p, const QuadratureConfig& quad, bool* found) {
    *found = false;
    const double plateau = plateau_mean(p, quad);
    if (!(plateau > 0.0)) return 0.0;
    const double half = 0.5 * plateau;
    const auto [i0, i1] = p.interior_nodes(quad);
    (void)i1;
    double pos = 0.0;
    for (int i = i0 + 1; i < p.grid.n; ++i) {
        if (p.values[i - 1] >= half && p.values[i] < half) {
            const double f = (p.values[i - 1] - half) / (p.values[i - 1] - p.values[i]);
            pos = p.grid.node(i - 1) + f * p.grid.dx();
            *found = true;
        }
    }
    return pos;
}

// Emergency recentring when the front has drifted far from the window
// center: whole-cell shifts are exact (index relabeling), the left side
// refills from the plateau constant and the right side from the fitted tail.
void recenter_by_resampling(Profile& p, const QuadratureConfig& quad) {
    bool found = false;
    const double Xs = robust_front_position(p, quad, &found);
    if (!found) return;
    const double span = p.grid.x_max_log - p.grid.x_min_log;
    if (std::fabs(Xs) < 0.25 * span) return;
    const int n = p.grid.n;
    const double dx = p.grid.dx();
    const int k = static_cast<int>(std::lround(Xs / dx));
    if (k == 0) return;
    std::vector<double> nv(n);
    for (int i = 0; i < n; ++i) {
        const int j = i + k;
        if (j < 0) {
            nv[i] = p.left_tail.kind == LeftTailKind::Constant ? p.left_tail.c : 0.0;
        } else if (j >= n) {
            nv[i] = p.eval_H(p.grid.node(n - 1) + (j - (n - 1)) * dx);
        } else {
            nv[i] = p.values[j];
        }
    }
    p.values = std::move(nv);
    p.gauge_offset += k * dx;
}

// Newton works on the samples with the left extension anchored at the
// exact constant limit: a coag11 solution with a nonzero constant limit c
// must satisfy c = c^2, so c = 1. A self-referential closure (constant
// refit from the window) admits spurious oscillating roots instead.
struct NewtonContext {
    const CoagulationOperator& op;
    RightTail right;  // rate frozen inside one linear solve
    double mu = 0.0;  // Levenberg shift

    std::vector<double> T(const std::vector<double>& w) const {
        return op.apply_data(w, 1.0, right);
    }

    // F(w) = w - T(w)
    std::vector<double> F(const std::vector<double>& w) const {
        std::vector<double> f = T(w);
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = w[i] - f[i];
        return f;
    }

    // (J + mu I) v; the map is bilinear in the extended data (samples, left
    // constant, right amplitude), so the directional derivative is exact:
    // directions carry a zero left extension.
    std::vector<double> Jv(const std::vector<double>& h, const std::vector<double>& Th,
                           const std::vector<double>& v) const {
        std::vector<double> hv(h.size());
        for (std::size_t i = 0; i < h.size(); ++i) hv[i] = h[i] + v[i];
        const std::vector<double> Thv = op.apply_data(hv, 1.0, right);
        const std::vector<double> Tv = op.apply_data(v, 0.0, right);
        std::vector<double> out(h.size());
        for (std::size_t i = 0; i < h.size(); ++i)
            out[i] = (1.0 + mu) * v[i] - (Thv[i] - Th[i] - Tv[i]);
        return out;
    }
};

double nrm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// restarted-free GMRES(m); returns the approximate solution of J x = b
std::vector<double> gmres(const NewtonContext& ctx, const std::vector<double>& h,
                          const std::vector<double>& Th, const std::vector<double>& b,
                          int m, double rel_tol) {
    const int n = static_cast<int>(b.size());
    const double beta = nrm2(b);
    std::vector<double> x(n, 0.0);
    if (!(beta > 0.0)) return x;

    std::vector<std::vector<double>> V;
    V.push_back(b);
    for (double& e : V[0]) e /= beta;
    std::vector<std::vector<double>> Hm;  // Hessenberg columns
    std::vector<double> cs, sn, g;
    g.assign(m + 1, 0.0);
    g[0] = beta;

    int k = 0;
    for (; k < m; ++k) {
        std::vector<double> w = ctx.Jv(h, Th, V[k]);
        std::vector<double> hcol(k + 2, 0.0);
        for (int j = 0; j <= k; ++j) {
            double d = 0.0;
            for (int i = 0; i < n; ++i) d += w[i] * V[j][i];
            hcol[j] = d;
            for (int i = 0; i < n; ++i) w[i] -= d * V[j][i];
        }
        const double hsub = nrm2(w);  // Arnoldi subdiagonal, pre-rotation
        hcol[k + 1] = hsub;
        // apply accumulated rotations
        for (int j = 0; j < k; ++j) {
            const double t = cs[j] * hcol[j] + sn[j] * hcol[j + 1];
            hcol[j + 1] = -sn[j] * hcol[j] + cs[j] * hcol[j + 1];
            hcol[j] = t;
        }
        const double denom = std::hypot(hcol[k], hcol[k + 1]);
        const double c = denom > 0 ? hcol[k] / denom : 1.0;
        const double s = denom > 0 ? hcol[k + 1] / denom : 0.0;
        cs.push_back(c);
        sn.push_back(s);
        hcol[k] = denom;
        hcol[k + 1] = 0.0;
        g[k + 1] = -s * g[k];
        g[k] = c * g[k];
        Hm.push_back(hcol);
        if (std::fabs(g[k + 1]) <= rel_tol * beta || hsub <= 1e-14 * beta) {
            ++k;
            break;
        }
        std::vector<double> vn = std::move(w);
        for (double& e : vn) e /= hsub;
        V.push_back(std::move(vn));
    }
    // back substitution
    std::vector<double> y(k, 0.0);
    for (int i = k - 1; i >= 0; --i) {
        double s = g[i];
        for (int j = i + 1; j < k; ++j) s -= Hm[j][i] * y[j];
        y[i] = s / Hm[i][i];
    }
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < n; ++i) x[i] += y[j] * V[j][i];
    return x;
}

}  // namespace

std::pair<Profile, SolveReport> solve_profile(const Profile& initial, const SolverConfig& cfg,
                                              const QuadratureConfig& quad) {
    cfg.validate();
    quad.validate();
    initial.validate();

    Profile p = initial;
    SolveReport rep;

    const double sup0 = *std::max_element(p.values.begin(), p.values.end());
    if (!(sup0 > 0.0)) throw CollapseError("initial profile is identically zero");

    CoagulationOperator op(p.grid, p.kernel, p.h_lambda, quad);
    const auto [i0, i1] = p.interior_nodes(quad);

    double mu = 1e-2;  // Levenberg regularization, adapted by step outcomes
    for (int it = 0; it < cfg.max_iterations; ++it) {
        NewtonContext ctx{op, p.right_tail, mu};
        std::vector<double> th = ctx.T(p.values);
        double res = 0.0;
        for (int i = i0; i <= i1; ++i) res = std::max(res, std::fabs(p.values[i] - th[i]));
        rep.residual_history.push_back(res);
        rep.iterations = it + 1;
        if (res <= cfg.residual_tol) {
            rep.converged = true;
            break;
        }

        std::vector<double> F(p.grid.n);
        for (int i = 0; i < p.grid.n; ++i) F[i] = p.values[i] - th[i];
        const double f0 = nrm2(F);
        std::vector<double> rhs(p.grid.n);
        for (int i = 0; i < p.grid.n; ++i) rhs[i] = -F[i];
        const std::vector<double> delta = gmres(ctx, p.values, th, rhs, 60, 1e-4);

        // backtracking on ||F||_2, starting from the configured damping
        std::vector<double> trial(p.grid.n);
        double step = cfg.damping;
        bool accepted = false;
        double fnew = f0;
        for (int bt = 0; bt < 5; ++bt, step *= 0.5) {
            for (int i = 0; i < p.grid.n; ++i)
                trial[i] = std::max(p.values[i] + step * delta[i], 0.0);
            fnew = nrm2(ctx.F(trial));
            if (fnew < (1.0 - 1e-4 * step) * f0) {
                accepted = true;
                break;
            }
        }
        if (accepted) {
            mu = std::max(mu * 0.3, 1e-10);
        } else {
            // reject: raise the regularization and fall back to a short
            // damped Picard step so the iteration keeps moving
            mu = std::min(mu * 8.0, 1e3);
            step = 0.1 * cfg.damping;
            for (int i = 0; i < p.grid.n; ++i)
                trial[i] = (1.0 - step) * p.values[i] + step * th[i];
        }

        double sup = 0.0, clamped_mag = 0.0;
        for (int i = 0; i < p.grid.n; ++i) {
            const double raw =
                accepted ? p.values[i] + step * delta[i] : trial[i];
            if (raw < 0.0) {
                clamped_mag = std::max(clamped_mag, -raw);
                ++rep.clamped_nodes_total;
            }
            p.values[i] = std::max(raw, 0.0);
            sup = std::max(sup, p.values[i]);
        }
        if (clamped_mag > 1e-6 * sup) rep.clamping_flag = true;
        if (!(sup > 1e-8 * sup0))
            throw CollapseError("profile collapsed to the trivial fixed point");
        p.left_tail = {LeftTailKind::Constant, 1.0};
        refit_right_tail(p);
        if (cfg.gauge == GaugeMode::PinHalfPlateau) recenter_by_resampling(p, quad);
    }
    p.left_tail = {LeftTailKind::Constant, 1.0};
    if (cfg.gauge == GaugeMode::PinHalfPlateau) {
        // final exact pin: pure coordinate shift, values untouched
        pin_half_plateau(p, quad);
    }
    rep.final_gauge_offset = p.gauge_offset;
    return {std::move(p), std::move(rep)};
}

Profile rescale_solution(const Profile& p, double a) {
    if (!(a > 0.0)) throw std::invalid_argument("rescale_solution requires a > 0");
    return translate_profile(p, std::log(a));
}

}  // namespace coagsim
