#include "coagsim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coagsim/numerics.hpp"
#include "coagsim/threading.hpp"

namespace coagsim {

void SizeDistribution::validate() const {
    if (cell_edges.size() < 2 || cell_values.size() + 1 != cell_edges.size())
        throw std::invalid_argument("size distribution needs N cells and N+1 edges");
    for (std::size_t i = 0; i + 1 < cell_edges.size(); ++i)
        if (!(cell_edges[i] < cell_edges[i + 1]) || !(cell_edges[i] > 0.0))
            throw std::invalid_argument("cell edges must be positive and strictly increasing");
    for (double v : cell_values)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("cell values must be nonnegative and finite");
    if (!(mass_lost_right >= 0.0))
        throw std::invalid_argument("mass_lost_right must be nonnegative");
}

double SizeDistribution::cell_center(int k) const {
    return std::sqrt(cell_edges[k] * cell_edges[k + 1]);
}

double SizeDistribution::cell_mass(int k) const {
    const double a = cell_edges[k], b = cell_edges[k + 1];
    return cell_values[k] * 0.5 * (b * b - a * a);
}

double SizeDistribution::total_mass() const {
    NeumaierSum s;
    for (int k = 0; k < cells(); ++k) s.add(cell_mass(k));
    return s.value();
}

SizeDistribution geometric_cells(double xi_min, double xi_max, int cells) {
    if (!(xi_min > 0.0 && xi_min < xi_max)) throw std::invalid_argument("bad cell range");
    if (cells < 2) throw std::invalid_argument("need at least 2 cells");
    SizeDistribution f;
    f.cell_edges.resize(cells + 1);
    const double r = std::log(xi_max / xi_min) / cells;
    for (int k = 0; k <= cells; ++k) f.cell_edges[k] = xi_min * std::exp(r * k);
    f.cell_values.assign(cells, 0.0);
    return f;
}

ScaleState evolve_scale(const ScaleState& state, double dt, double lambda) {
    if (!(dt >= 0.0)) throw std::invalid_argument("evolve_scale requires dt >= 0");
    if (!(state.s > 0.0)) throw std::invalid_argument("scale factor must be positive");
    const double e = 1.0 - 2.0 * lambda;
    ScaleState out = state;
    out.s = std::pow(std::pow(state.s, e) + e * dt, 1.0 / e);
    return out;
}

namespace {

// Mass flux across size x, the triangle integral over {y < x < y + z} of
// y K(y,z) f(y) f(z), evaluated with piecewise-constant f. Separable kernel
// terms use exact suffix power moments; evaluator-only kernels fall back to
// midpoint sums.
class FluxAssembler {
public:
    FluxAssembler(const SizeDistribution& f, const KernelSpec& k)
        : f_(f), k_(k), n_(f.cells()) {
        if (!k.separable_terms.empty()) {
            for (const PowerTerm& t : k.separable_terms) {
                if (t.a == t.b) {
                    terms_.push_back({2.0 * t.coef, t.a, t.b});
                } else {
                    terms_.push_back({t.coef, t.a, t.b});
                    terms_.push_back({t.coef, t.b, t.a});
                }
            }
            // suffix moments S_q(edge_l) = int_{edge_l}^{xi_max} z^q f dz
            suffix_.resize(terms_.size());
            for (std::size_t ti = 0; ti < terms_.size(); ++ti) {
                const double q = terms_[ti].b;
                std::vector<double>& S = suffix_[ti];
                S.assign(n_ + 1, 0.0);
                for (int l = n_ - 1; l >= 0; --l)
                    S[l] = S[l + 1] + f_.cell_values[l] * pow_cell(q, f_.cell_edges[l],
                                                                  f_.cell_edges[l + 1]);
            }
        }
    }

    // One-sided first-order evaluation: the y-power moment is exact per
    // cell, the suffix factor is sampled at the cell's right edge (the
    // transport direction), keeping the flux nonnegative and conservative.
    double flux_at_edge(int i) const {
        if (i <= 0) return 0.0;
        NeumaierSum J;
        const double ei = f_.cell_edges[i];
        if (!terms_.empty()) {
            for (std::size_t ti = 0; ti < terms_.size(); ++ti) {
                const auto& t = terms_[ti];
                for (int j = 0; j < i; ++j) {
                    if (f_.cell_values[j] == 0.0) continue;
                    const double a = f_.cell_edges[j], b = f_.cell_edges[j + 1];
                    const double mom = pow_cell(1.0 + t.a, a, b);
                    J.add(t.coef * f_.cell_values[j] * mom * suffix_eval(ti, ei - b));
                }
            }
        } else {
            for (int j = 0; j < i; ++j) {
                if (f_.cell_values[j] == 0.0) continue;
                const double a = f_.cell_edges[j], b = f_.cell_edges[j + 1];
                const double mom = pow_cell(1.0, a, b);
                J.add(f_.cell_values[j] * mom * inner_custom(f_.cell_center(j), ei - b));
            }
        }
        return J.value();
    }

    // per-particle loss rate at each cell center, for the CFL bound
    double max_rate() const {
        const int n = n_;
        double worst = 0.0;
        if (!terms_.empty()) {
            for (int kcell = 0; kcell < n; ++kcell) {
                const double x = f_.cell_center(kcell);
                double rate = 0.0;
                for (std::size_t ti = 0; ti < terms_.size(); ++ti)
                    rate += terms_[ti].coef * std::pow(x, terms_[ti].a) * suffix_[ti][0];
                worst = std::max(worst, rate);
            }
        } else {
            for (int kcell = 0; kcell < n; ++kcell) {
                const double x = f_.cell_center(kcell);
                double rate = 0.0;
                for (int l = 0; l < n; ++l) {
                    if (f_.cell_values[l] == 0.0) continue;
                    rate += kernel_eval(k_, x, f_.cell_center(l)) * f_.cell_values[l] *
                            (f_.cell_edges[l + 1] - f_.cell_edges[l]);
                }
                worst = std::max(worst, rate);
            }
        }
        return worst;
    }

private:
    struct Expanded {
        double coef, a, b;
    };

    static double pow_cell(double q, double a, double b) {
        // int_a^b z^q dz
        if (q == -1.0) return std::log(b / a);
        return (std::pow(b, q + 1.0) - std::pow(a, q + 1.0)) / (q + 1.0);
    }

    double suffix_eval(std::size_t ti, double w) const {
        const std::vector<double>& S = suffix_[ti];
        const double q = terms_[ti].b;
        if (w <= f_.cell_edges[0]) return S[0];
        if (w >= f_.cell_edges[n_]) return 0.0;
        const int l = locate(w);
        return S[l + 1] + f_.cell_values[l] * pow_cell(q, w, f_.cell_edges[l + 1]);
    }

    double inner_custom(double y, double w) const {
        // int_w^inf K(y,z) f(z) dz with midpoint kernel values per cell
        if (w < f_.cell_edges[0]) w = f_.cell_edges[0];
        NeumaierSum s;
        for (int l = n_ - 1; l >= 0; --l) {
            const double hi = f_.cell_edges[l + 1];
            if (hi <= w) break;
            if (f_.cell_values[l] == 0.0) continue;
            const double lo = std::max(w, f_.cell_edges[l]);
            s.add(kernel_eval(k_, y, f_.cell_center(l)) * f_.cell_values[l] * (hi - lo));
        }
        return s.value();
    }

    int locate(double w) const {
        const auto it = std::upper_bound(f_.cell_edges.begin(), f_.cell_edges.end(), w);
        int l = static_cast<int>(it - f_.cell_edges.begin()) - 1;
        return std::clamp(l, 0, n_ - 1);
    }

    const SizeDistribution& f_;
    const KernelSpec& k_;
    int n_;
    std::vector<Expanded> terms_;
    std::vector<std::vector<double>> suffix_;
};

}  // namespace

std::vector<SizeDistribution> simulate(const SizeDistribution& f0, const KernelSpec& kernel,
                                       double t_end, double cfl, int snapshots) {
    f0.validate();
    if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
    if (!(cfl > 0.0 && cfl <= 1.0)) throw std::invalid_argument("cfl must lie in (0,1]");
    if (snapshots < 2) snapshots = 2;

    SizeDistribution f = f0;
    const int n = f.cells();
    std::vector<double> vol(n);
    for (int k = 0; k < n; ++k) {
        const double a = f.cell_edges[k], b = f.cell_edges[k + 1];
        vol[k] = 0.5 * (b * b - a * a);
    }
    std::vector<double> mass(n);
    for (int k = 0; k < n; ++k) mass[k] = f.cell_values[k] * vol[k];

    std::vector<SizeDistribution> traj;
    traj.push_back(f);
    int next_snap = 1;

    const double dt_floor = 1e-14 * t_end;
    std::vector<double> J(n + 1), J2(n + 1);
    std::vector<double> mass1(n);
    SizeDistribution stage = f;
    while (f.time < t_end * (1.0 - 1e-14)) {
        const FluxAssembler fa(f, kernel);
        J[0] = 0.0;
        parallel_for(n, [&](int i) { J[i + 1] = fa.flux_at_edge(i + 1); });

        // cell-crossing CFL: a cluster doubling in size sweeps ln2 / r cells,
        // so the mesh enters the time step through the cell log-width r
        const double rate = fa.max_rate();
        const double r = std::log(f.cell_edges[1] / f.cell_edges[0]);
        double dt = (rate > 0.0) ? cfl * r / rate : (t_end - f.time);
        for (int k = 0; k < n; ++k) {
            const double out = J[k + 1] - J[k];
            if (out > 0.0 && mass[k] > 0.0) dt = std::min(dt, cfl * mass[k] / out);
        }
        const double t_snap = t_end * next_snap / (snapshots - 1);
        bool snap_now = false;
        if (f.time + dt >= t_snap * (1.0 - 1e-14)) {
            dt = std::max(t_snap - f.time, 0.0);
            snap_now = true;
        }
        if (!(dt > dt_floor) && !snap_now)
            throw NumericalError("time step underflow in simulate");

        // Heun (SSP-RK2): positivity-preserving average of two Euler stages
        for (int k = 0; k < n; ++k) {
            mass1[k] = mass[k] + dt * (J[k] - J[k + 1]);
            if (mass1[k] < 0.0) {
                if (mass1[k] < -1e-14 * vol[k]) throw NumericalError("negative cell value");
                mass1[k] = 0.0;
            }
            stage.cell_values[k] = mass1[k] / vol[k];
        }
        const FluxAssembler fa2(stage, kernel);
        J2[0] = 0.0;
        parallel_for(n, [&](int i) { J2[i + 1] = fa2.flux_at_edge(i + 1); });
        for (int k = 0; k < n; ++k) {
            double m2 = mass1[k] + dt * (J2[k] - J2[k + 1]);
            if (m2 < 0.0) {
                if (m2 < -1e-14 * vol[k]) throw NumericalError("negative cell value");
                m2 = 0.0;
            }
            mass[k] = 0.5 * (mass[k] + m2);
            f.cell_values[k] = mass[k] / vol[k];
        }
        f.mass_lost_right += 0.5 * dt * (J[n] + J2[n]);
        f.time += dt;

        if (snap_now) {
            f.time = t_snap;  // avoid drift in recorded times
            traj.push_back(f);
            ++next_snap;
            if (next_snap >= snapshots) break;
        }
    }
    if (static_cast<int>(traj.size()) < snapshots) traj.push_back(f);
    return traj;
}

double rescaled_compare(const SizeDistribution& f, const ScaleState& state, const Profile& p,
                        double* best_shift) {
    f.validate();
    p.validate();
    const double s = state.s;
    const double lam = p.kernel.lambda();

    // candidate ghat(x) = s^2 f(s x) as a piecewise-linear function of ln x
    const int n = f.cells();
    std::vector<double> cx(n), cg(n);
    for (int k = 0; k < n; ++k) {
        cx[k] = std::log(f.cell_center(k) / s);
        cg[k] = s * s * f.cell_values[k];
    }
    const std::vector<double> gp = h_to_g(p);

    const double plo = p.grid.x_min_log, phi_ = p.grid.x_max_log;
    auto cand = [&](double X) -> double {
        // linear interp in log x; outside the cells the candidate is unknown
        if (X <= cx.front() || X >= cx.back()) return std::numeric_limits<double>::quiet_NaN();
        const auto it = std::upper_bound(cx.begin(), cx.end(), X);
        const int j = static_cast<int>(it - cx.begin()) - 1;
        const double fr = (X - cx[j]) / (cx[j + 1] - cx[j]);
        return cg[j] * (1.0 - fr) + cg[j + 1] * fr;
    };

    auto distance = [&](double shift) -> double {
        // ghat_a(x) = a^{1+2 lambda} ghat(a x), a = e^{shift}
        const double amp = std::exp((1.0 + 2.0 * lam) * shift);
        const double lo = std::max(plo, cx.front() - shift);
        const double hi = std::min(phi_, cx.back() - shift);
        if (!(lo < hi)) return std::numeric_limits<double>::infinity();
        NeumaierSum d;
        double prevX = 0, prevY = 0;
        bool have = false;
        for (int i = 0; i < p.grid.n; ++i) {
            const double X = p.grid.node(i);
            if (X < lo || X > hi) continue;
            const double c = cand(X + shift);
            if (std::isnan(c)) continue;
            // integrand x |ghat - g| dx = e^{2X} |ghat - g| dX
            const double y = std::exp(2.0 * X) * std::fabs(amp * c - gp[i]);
            if (have) d.add(0.5 * (prevY + y) * (X - prevX));
            prevX = X;
            prevY = y;
            have = true;
        }
        return d.value();
    };

    {
        // requires some overlap at zero shift
        const double lo = std::max(plo, cx.front());
        const double hi = std::min(phi_, cx.back());
        if (!(lo < hi)) throw std::invalid_argument("rescaled_compare: empty overlap");
    }

    // golden-section search over the translation gauge
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = -1.5, b = 1.5;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = distance(x1), f2 = distance(x2);
    for (int it = 0; it < 80; ++it) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = distance(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = distance(x2);
        }
    }
    const double shift = 0.5 * (a + b);
    if (best_shift) *best_shift = shift;
    return distance(shift);
}

}  // namespace coagsim
