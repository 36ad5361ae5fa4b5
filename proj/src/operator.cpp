#include "coagsim/operator.hpp"

#include <algorithm>
#include <cmath>

#include "coagsim/numerics.hpp"
#include "coagsim/threading.hpp"

namespace coagsim {

namespace {

constexpr double kLn2 = 0.6931471805599453094172321;
constexpr int kTailLevels = 48;  // dyadic grading depth of the sub-grid tails

// Dyadically graded Gauss-8 panels on (0, W], finest toward 0 where the
// substituted integrands keep fractional-power derivatives.
template <typename Emit>
void graded_tail_points(double W, const Emit& emit) {
    double hi = W;
    for (int level = 0; level < kTailLevels; ++level) {
        const double lo = 0.5 * hi;
        const double c = 0.5 * (hi + lo), r = 0.5 * (hi - lo);
        for (std::size_t g = 0; g < kGauss8X.size(); ++g)
            emit(c + r * kGauss8X[g], kGauss8W[g] * r);
        hi = lo;
    }
}

// Splitting of the map per power component y^p z^q (q = 2 lambda - p):
//
//   (T h)(x_i) / h_lambda = sum_terms coef * [ C_i A_i + Dfar_i + Dnear_i ]
//
// with, in offsets u = Y - X_i, v = Z - X_i:
//   C_i = int_{-inf}^0 e^{(1-q)u} H(X_i+u) du          (prefix, exact)
//   A_i = int_0^inf  e^{-p v}  H(X_i+v) dv             (suffix, exact)
//   P_i(v) = int_v^0 e^{-p V} H(X_i+V) dV              (head, exact)
//   Dfar_i  = int_{-inf}^{-ln2} e^{(1-q)u} H(X_i+u) P_i(ln(1-e^u)) du
//   Dnear_i = int_{-inf}^{-ln2} e^{(1-p)v} (1-e^v)^{-q} H(X_i+ln(1-e^v))
//                                [e^{p v} P_i(v)] dv
// Dfar/Dnear carry the curved near-diagonal composition: the exponential
// weight is integrated exactly against a piecewise-linear fit of the
// bracketed remainder on sub-cell panels; below the grid the remainder is
// closed out by sigma-substituted Gauss panels that absorb the power
// endpoint exactly.

struct SigmaPointFar {
    double w;     // quadrature weight (includes the substitution jacobian)
    double vln;   // ln(1 - tau): argument of P
    double empv;  // e^{-p vln} for the below-edge branch of P
    int m;        // floor(-vln/dx)
    double f0, f1;  // partial-cell factors at rate -p, e^{-p vln} folded in
    int hoff;       // H probe at vln
    double hfr;
};

struct SigmaPointNear {
    double w;
    double powf;  // (1 - tau)^{-q}, singular list also carries (1 - K tau^p)
    double vpos;  // ln(1 - tau): offset of the H probe
};

struct NodeTails {
    std::vector<SigmaPointFar> far;
    std::vector<SigmaPointNear> near_bounded;   // against the regular part of P
    std::vector<SigmaPointNear> near_singular;  // against (c/p) tau^{-p}
};

struct Term {
    double coef;
    double p;  // y-side exponent
    double q;  // z-side exponent, p + q = 2 lambda

    double rateC;                 // 1 - q
    double decC, cw0, cw1;        // prefix recurrence
    double decA, aw0, aw1;        // suffix recurrence
    double pw0, pw1;              // head-cell step (rate -p)
    std::vector<double> pExp;     // e^{p m dx}, m = 0..n

    // panel boundaries A_k = -ln2 - k*delta and per-boundary geometry
    std::vector<double> bnd;
    std::vector<double> wfar0, wfar1;    // seg weights at rate 1-q for panel [A_{k+1}, A_k]
    std::vector<double> wnear0, wnear1;  // seg weights at rate 1-p
    std::vector<int> hOff;               // floor(A_k/dx)
    std::vector<double> hFr;
    std::vector<double> vdiag;           // ln(1 - e^{A_k}) in (-ln2, 0)
    std::vector<int> vdOff;
    std::vector<double> vdFr;
    std::vector<double> eAp;             // e^{p A_k}
    std::vector<double> oneMexpQ;        // (1 - e^{A_k})^{-q}
    // head partial-cell geometry at the boundaries: P(A_k) = Pb[mk] + partial
    std::vector<int> mk;
    std::vector<double> eMinusPA;        // e^{-p A_k}
    std::vector<double> pf0, pf1;        // dpart*phi at rate -p
    // same geometry at the diagonal images vdiag_k = ln(1 - e^{A_k})
    std::vector<int> vdm;
    std::vector<double> vdf0, vdf1;      // e^{-p vdiag} folded in

    std::vector<NodeTails> tails;        // per node
};

double interp_rel(const std::vector<double>& H, double cleft, int i, int off, double fr) {
    // sample of the interpolant at X_i + (off+fr)*dx, off <= -1
    const int j = i + off;
    if (j < 0) return cleft;
    return H[j] * (1.0 - fr) + H[j + 1] * fr;
}

}  // namespace

struct CoagulationOperator::Impl {
    int n;
    double dx;
    double hl;
    double lambda;
    QuadratureConfig quad;
    KernelKind kind;
    double alpha, beta;
    std::vector<Term> terms;

    Impl(const LogGrid& grid, const KernelSpec& kernel, const HLambda& hlam,
         const QuadratureConfig& q)
        : n(grid.n), dx(grid.dx()), hl(hlam.value), lambda(kernel.lambda()), quad(q),
          kind(kernel.kind), alpha(kernel.alpha), beta(kernel.beta) {
        grid.validate();
        q.validate();
        kernel.require_profile_admissible("CoagulationOperator");
        if (kernel.separable_terms.empty())
            throw std::invalid_argument(
                "CoagulationOperator requires a separable kernel (product or declared terms)");
        if (!(hl > 0.0) || !std::isfinite(hl))
            throw std::invalid_argument("CoagulationOperator requires a positive h_lambda");
        const double span = grid.x_max_log - grid.x_min_log;
        if (span * std::max(1.0, 2.0 * lambda) > 600.0)
            throw NumericalError("quadrature weight overflow: grid spans too many decades");
        for (const PowerTerm& t : kernel.separable_terms) {
            const double twol = 2.0 * lambda;
            if (std::fabs(t.a + t.b - twol) > 1e-12 || !(t.a > 0.0) || !(t.b > 0.0) ||
                !(std::max(t.a, t.b) < 0.5))
                throw std::invalid_argument(
                    "separable kernel term outside the admissible exponent box");
            build_term(t.coef, t.a, t.b);
            build_term(t.coef, t.b, t.a);
        }
    }

    void build_term(double coef, double p, double q) {
        Term t;
        t.coef = coef;
        t.p = p;
        t.q = q;
        t.rateC = 1.0 - q;
        t.decC = std::exp(-t.rateC * dx);
        t.cw0 = dx * phi0(t.rateC * dx) * t.decC;
        t.cw1 = dx * phi1(t.rateC * dx) * t.decC;
        t.decA = std::exp(-p * dx);
        t.aw0 = dx * phi0(-p * dx);
        t.aw1 = dx * phi1(-p * dx);
        t.pw0 = dx * phi0(-p * dx);
        t.pw1 = dx * phi1(-p * dx);
        t.pExp.resize(n + 1);
        for (int m = 0; m <= n; ++m) t.pExp[m] = std::exp(p * m * dx);

        const double delta = dx / quad.panels_per_cell;
        const int kmax = (n - 1) * quad.panels_per_cell + 2;
        t.bnd.resize(kmax + 1);
        for (int k = 0; k <= kmax; ++k) t.bnd[k] = -kLn2 - k * delta;
        t.wfar0.resize(kmax);
        t.wfar1.resize(kmax);
        t.wnear0.resize(kmax);
        t.wnear1.resize(kmax);
        t.hOff.resize(kmax + 1);
        t.hFr.resize(kmax + 1);
        t.vdiag.resize(kmax + 1);
        t.vdOff.resize(kmax + 1);
        t.vdFr.resize(kmax + 1);
        t.eAp.resize(kmax + 1);
        t.oneMexpQ.resize(kmax + 1);
        t.mk.resize(kmax + 1);
        t.eMinusPA.resize(kmax + 1);
        t.pf0.resize(kmax + 1);
        t.pf1.resize(kmax + 1);
        t.vdm.resize(kmax + 1);
        t.vdf0.resize(kmax + 1);
        t.vdf1.resize(kmax + 1);
        const double f0far = delta * phi0(t.rateC * delta);
        const double f1far = delta * phi1(t.rateC * delta);
        const double rateN = 1.0 - p;
        const double f0near = delta * phi0(rateN * delta);
        const double f1near = delta * phi1(rateN * delta);
        for (int k = 0; k <= kmax; ++k) {
            const double A = t.bnd[k];
            if (k < kmax) {
                // full panel [A_{k+1}, A_k]: e^{rate*A_{k+1}} * delta * phi
                t.wfar0[k] = std::exp(t.rateC * t.bnd[k + 1]) * f0far;
                t.wfar1[k] = std::exp(t.rateC * t.bnd[k + 1]) * f1far;
                t.wnear0[k] = std::exp(rateN * t.bnd[k + 1]) * f0near;
                t.wnear1[k] = std::exp(rateN * t.bnd[k + 1]) * f1near;
            }
            const double rel = A / dx;
            t.hOff[k] = static_cast<int>(std::floor(rel));
            t.hFr[k] = rel - t.hOff[k];
            const double vd = std::log1p(-std::exp(A));
            t.vdiag[k] = vd;
            const double relv = vd / dx;
            t.vdOff[k] = static_cast<int>(std::floor(relv));
            t.vdFr[k] = relv - t.vdOff[k];
            t.eAp[k] = std::exp(p * A);
            t.oneMexpQ[k] = std::pow(-std::expm1(A), -q);
            const int m = static_cast<int>(std::floor(-A / dx));
            t.mk[k] = m;
            t.eMinusPA[k] = std::exp(-p * A);
            const double dpart = (-m * dx) - A;
            t.pf0[k] = dpart * phi0(-p * dpart);
            t.pf1[k] = dpart * phi1(-p * dpart);
            const int mv = static_cast<int>(std::floor(-vd / dx));
            t.vdm[k] = mv;
            const double dv = (-mv * dx) - vd;
            const double epv = std::exp(-p * vd);
            t.vdf0[k] = epv * dv * phi0(-p * dv);
            t.vdf1[k] = epv * dv * phi1(-p * dv);
        }

        // sigma-substituted sub-grid tails, one set per node
        t.tails.resize(n);
        for (int i = 0; i < n; ++i) {
            NodeTails& nt = t.tails[i];
            const double u_edge = -i * dx;
            const double uL = std::min(-kLn2, u_edge);
            // far: c * int_0^{tauL} tau^{-q} P(ln(1-tau)) dtau, sigma = tau^{1-q}
            {
                const double tauL = std::exp(uL);
                const double sL = std::pow(tauL, 1.0 - q);
                nt.far.reserve(kTailLevels * kGauss8X.size());
                graded_tail_points(sL, [&](double sg, double w) {
                    const double tau = std::pow(sg, 1.0 / (1.0 - q));
                    const double vln = std::log1p(-tau);
                    SigmaPointFar pt;
                    pt.w = w / (1.0 - q);
                    pt.vln = vln;
                    pt.empv = std::exp(-p * vln);
                    pt.m = static_cast<int>(std::floor(-vln / dx));
                    const double dv = (-pt.m * dx) - vln;
                    pt.f0 = pt.empv * dv * phi0(-p * dv);
                    pt.f1 = pt.empv * dv * phi1(-p * dv);
                    const double rel = vln / dx;
                    pt.hoff = static_cast<int>(std::floor(rel));
                    pt.hfr = rel - pt.hoff;
                    nt.far.push_back(pt);
                });
            }
            // near: P(ln tau) = P_edge + (c/p)(tau^{-p} - K), K = e^{p i dx},
            // both addends nonnegative for tau <= tauL:
            //   P_edge * int Phi(tau) dtau  +  (c/p) int (tau^{-p} - K) Phi(tau) dtau
            // with Phi(tau) = (1-tau)^{-q} H(X_i + ln(1-tau)); the second
            // integral runs in sigma = tau^{1-p}, absorbing the power.
            {
                const double vL = std::min(-kLn2, u_edge);
                const double tauL = std::exp(vL);
                const double K = t.pExp[i];
                nt.near_bounded.reserve(kTailLevels * kGauss8X.size());
                graded_tail_points(tauL, [&](double tau, double w) {
                    nt.near_bounded.push_back({w, std::pow(1.0 - tau, -q), std::log1p(-tau)});
                });
                const double sL = std::pow(tauL, 1.0 - p);
                nt.near_singular.reserve(kTailLevels * kGauss8X.size());
                graded_tail_points(sL, [&](double sg, double w) {
                    const double tau = std::pow(sg, 1.0 / (1.0 - p));
                    const double reg = std::max(0.0, 1.0 - K * std::pow(tau, p));
                    nt.near_singular.push_back(
                        {w / (1.0 - p), std::pow(1.0 - tau, -q) * reg, std::log1p(-tau)});
                });
            }
        }
        terms.push_back(std::move(t));
    }

    // P_i(v) for v in [v_edge, 0] given boundary partial sums Pb.
    double P_of(const Term& t, const std::vector<double>& H, const std::vector<double>& Pb,
                double cleft, int i, double v) const {
        if (v >= 0.0) return 0.0;
        const double v_edge = -i * dx;
        if (v < v_edge) {
            return Pb[i] + cleft * (std::exp(-t.p * v) - std::exp(-t.p * v_edge)) / t.p;
        }
        int m = static_cast<int>(std::floor(-v / dx));
        if (m > i - 1) m = i - 1;
        if (m < 0) m = 0;
        const double vtop = -m * dx;
        const double hv_rel = v / dx;
        const int off = static_cast<int>(std::floor(hv_rel));
        const double fr = hv_rel - off;
        const double Hv = interp_rel(H, cleft, i, off, fr);
        return Pb[m] + exp_linear_segment(-t.p, v, vtop, Hv, H[i - m]);
    }

    std::vector<double> apply_data(const std::vector<double>& H, double cleft,
                                   const RightTail& right) const {
        if (static_cast<int>(H.size()) != n)
            throw std::invalid_argument("sample count does not match the operator workspace");
        const int nt = static_cast<int>(terms.size());
        // prefix/suffix transforms, exact with tails
        std::vector<std::vector<double>> Chat(nt), Ahat(nt);
        for (int ti = 0; ti < nt; ++ti) {
            const Term& t = terms[ti];
            std::vector<double>& C = Chat[ti];
            C.resize(n);
            C[0] = cleft / t.rateC;
            for (int i = 1; i < n; ++i)
                C[i] = t.decC * C[i - 1] + t.cw0 * H[i - 1] + t.cw1 * H[i];
            std::vector<double>& A = Ahat[ti];
            A.resize(n);
            double base = 0.0;
            switch (right.kind) {
                case RightTailKind::Exponential:
                    base = H.back() / (t.p + right.rate);
                    break;
                case RightTailKind::Constant:
                    base = right.c / t.p;
                    break;
                case RightTailKind::Zero:
                    base = 0.0;
                    break;
            }
            A[n - 1] = base;
            for (int i = n - 2; i >= 0; --i)
                A[i] = t.decA * A[i + 1] + t.aw0 * H[i] + t.aw1 * H[i + 1];
        }

        std::vector<double> TH(n, 0.0);
        parallel_for(n, [&](int i) {
            thread_local std::vector<double> Pb;
            NeumaierSum node;
            for (int ti = 0; ti < nt; ++ti) {
                const Term& t = terms[ti];
                // head partial sums at cell boundaries: Pb[m] = P_i(-m dx)
                Pb.resize(i + 1);
                Pb[0] = 0.0;
                for (int m = 0; m < i; ++m)
                    Pb[m + 1] = Pb[m] + t.pExp[m + 1] * (t.pw0 * H[i - m - 1] + t.pw1 * H[i - m]);

                const double v_edge = -i * dx;
                node.add(t.coef * Chat[ti][i] * Ahat[ti][i]);

                // ---- far part: panels on [u_edge, -ln2], remainder H * P(ln(1-e^u))
                NeumaierSum dfar;
                auto Pdiag = [&](int k) {
                    const int m = t.vdm[k];
                    return Pb[m] +
                           t.vdf0[k] * interp_rel(H, cleft, i, t.vdOff[k], t.vdFr[k]) +
                           t.vdf1[k] * H[i - m];
                };
                if (v_edge < -kLn2) {
                    double Rprev = interp_rel(H, cleft, i, t.hOff[0], t.hFr[0]) * Pdiag(0);
                    int k = 0;
                    for (;; ++k) {
                        const double lo = t.bnd[k + 1];
                        if (lo <= v_edge) break;
                        const double Rn =
                            interp_rel(H, cleft, i, t.hOff[k + 1], t.hFr[k + 1]) * Pdiag(k + 1);
                        dfar.add(t.wfar0[k] * Rn + t.wfar1[k] * Rprev);
                        Rprev = Rn;
                    }
                    // partial panel [v_edge, A_k]
                    const double hi = t.bnd[k];
                    if (hi > v_edge + 1e-15) {
                        const double vd = std::log1p(-std::exp(v_edge));
                        const double Redge = H[0] * P_of(t, H, Pb, cleft, i, vd);
                        dfar.add(exp_linear_segment(t.rateC, v_edge, hi, Redge, Rprev));
                    }
                }
                // sigma tail below the grid: H = cleft there
                if (cleft != 0.0) {
                    NeumaierSum st;
                    for (const SigmaPointFar& pt : t.tails[i].far) {
                        double Pv;
                        if (pt.vln >= v_edge) {
                            Pv = Pb[pt.m] +
                                 pt.f0 * interp_rel(H, cleft, i, pt.hoff, pt.hfr) +
                                 pt.f1 * H[i - pt.m];
                        } else {
                            Pv = Pb[i] + cleft * (pt.empv - t.pExp[i]) / t.p;
                        }
                        st.add(pt.w * Pv);
                    }
                    dfar.add(cleft * st.value());
                }
                node.add(t.coef * dfar.value());

                // ---- near part: panels in v, remainder (1-e^v)^{-q} H(...) e^{pv} P(v)
                NeumaierSum dnear;
                if (v_edge < -kLn2) {
                    double Rprev = t.oneMexpQ[0] *
                                   interp_rel(H, cleft, i, t.vdOff[0], t.vdFr[0]) * t.eAp[0] *
                                   (Pb[t.mk[0]] +
                                    t.eMinusPA[0] *
                                        (interp_rel(H, cleft, i, t.hOff[0], t.hFr[0]) * t.pf0[0] +
                                         H[i - t.mk[0]] * t.pf1[0]));
                    int k = 0;
                    for (;; ++k) {
                        const double lo = t.bnd[k + 1];
                        if (lo <= v_edge) break;
                        const int kk = k + 1;
                        const double Pv =
                            Pb[t.mk[kk]] +
                            t.eMinusPA[kk] *
                                (interp_rel(H, cleft, i, t.hOff[kk], t.hFr[kk]) * t.pf0[kk] +
                                 H[i - t.mk[kk]] * t.pf1[kk]);
                        const double Rn = t.oneMexpQ[kk] *
                                          interp_rel(H, cleft, i, t.vdOff[kk], t.vdFr[kk]) *
                                          t.eAp[kk] * Pv;
                        dnear.add(t.wnear0[k] * Rn + t.wnear1[k] * Rprev);
                        Rprev = Rn;
                    }
                    const double hi = t.bnd[k];
                    if (hi > v_edge + 1e-15) {
                        const double emv = -std::expm1(v_edge);  // 1 - e^{v_edge}
                        const double Redge = std::pow(emv, -t.q) *
                                             interp_rel_or_tail(H, cleft, i, std::log(emv)) *
                                             std::exp(t.p * v_edge) * Pb[i];
                        dnear.add(exp_linear_segment(1.0 - t.p, v_edge, hi, Redge, Rprev));
                    }
                }
                {
                    const double Pedge = Pb[i];
                    if (Pedge != 0.0) {
                        NeumaierSum sb;
                        for (const SigmaPointNear& pt : t.tails[i].near_bounded)
                            sb.add(pt.w * pt.powf * interp_rel_or_tail(H, cleft, i, pt.vpos));
                        dnear.add(Pedge * sb.value());
                    }
                    if (cleft != 0.0) {
                        NeumaierSum ss;
                        for (const SigmaPointNear& pt : t.tails[i].near_singular)
                            ss.add(pt.w * pt.powf * interp_rel_or_tail(H, cleft, i, pt.vpos));
                        dnear.add((cleft / t.p) * ss.value());
                    }
                }
                node.add(t.coef * dnear.value());
            }
            TH[i] = hl * node.value();
        });
        return TH;
    }

    // H at X_i + vpos (vpos in (-ln2, 0)); below the grid -> cleft
    double interp_rel_or_tail(const std::vector<double>& H, double cleft, int i,
                              double vpos) const {
        const double rel = vpos / dx;
        const int off = static_cast<int>(std::floor(rel));
        if (i + off < 0) return cleft;
        return interp_rel(H, cleft, i, off, rel - off);
    }
};

CoagulationOperator::CoagulationOperator(const LogGrid& grid, const KernelSpec& kernel,
                                         const HLambda& hl, const QuadratureConfig& quad)
    : impl_(std::make_unique<Impl>(grid, kernel, hl, quad)) {}

CoagulationOperator::~CoagulationOperator() = default;
CoagulationOperator::CoagulationOperator(CoagulationOperator&&) noexcept = default;
CoagulationOperator& CoagulationOperator::operator=(CoagulationOperator&&) noexcept = default;

std::vector<double> CoagulationOperator::apply(const Profile& p, ApplyDiagnostics* diag) const {
    p.validate();
    if (p.grid.n != impl_->n ||
        std::fabs(p.grid.dx() - impl_->dx) > 1e-13 * std::max(1.0, std::fabs(impl_->dx)))
        throw std::invalid_argument("profile grid does not match the operator workspace");
    if (diag) {
        diag->left_truncation_warning =
            (p.left_tail.kind == LeftTailKind::Zero && p.values.front() > 0.0);
    }
    const double cleft = p.left_tail.kind == LeftTailKind::Constant ? p.left_tail.c : 0.0;
    return impl_->apply_data(p.values, cleft, p.right_tail);
}

std::vector<double> CoagulationOperator::apply_data(const std::vector<double>& values,
                                                    double cleft,
                                                    const RightTail& right) const {
    return impl_->apply_data(values, cleft, right);
}

const QuadratureConfig& CoagulationOperator::quad() const { return impl_->quad; }

Profile apply_T(const Profile& p, const QuadratureConfig& quad, ApplyDiagnostics* diag) {
    CoagulationOperator op(p.grid, p.kernel, p.h_lambda, quad);
    Profile out = p;
    out.values = op.apply(p, diag);
    return out;
}

std::vector<double> flux_all_nodes(const Profile& p, const QuadratureConfig& quad) {
    CoagulationOperator op(p.grid, p.kernel, p.h_lambda, quad);
    std::vector<double> th = op.apply(p);
    const double e = 1.0 - 2.0 * p.kernel.lambda();
    for (int i = 0; i < p.grid.n; ++i) th[i] *= std::exp(e * p.grid.node(i));
    return th;
}

double flux(const Profile& p, double x, const QuadratureConfig& quad) {
    if (!(x > 0.0)) throw std::invalid_argument("flux requires x > 0");
    const double X = std::log(x);
    if (X < p.interior_lo(quad) || X > p.interior_hi(quad))
        throw std::invalid_argument("flux: x outside the interior window");
    CoagulationOperator op(p.grid, p.kernel, p.h_lambda, quad);
    const std::vector<double> th = op.apply(p);
    const double t = (X - p.grid.x_min_log) / p.grid.dx();
    int j = std::clamp(static_cast<int>(std::floor(t)), 0, p.grid.n - 2);
    const double f = t - j;
    const double thx = th[j] * (1.0 - f) + th[j + 1] * f;
    return std::exp((1.0 - 2.0 * p.kernel.lambda()) * X) * thx;
}

}  // namespace coagsim
