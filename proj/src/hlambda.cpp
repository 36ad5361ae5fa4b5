#include <cmath>
#include <functional>
#include <sstream>

#include "coagsim/kernel.hpp"
#include "coagsim/numerics.hpp"

namespace coagsim {

double h_lambda_closed_form(const KernelSpec& k) {
    if (k.kind != KernelKind::Product)
        throw std::invalid_argument("h_lambda_closed_form requires a product kernel");
    k.require_profile_admissible("h_lambda_closed_form");
    const double a = k.alpha, b = k.beta, lam = k.lambda();
    // the two beta integrals collapse to Gamma factors; all arguments in (0,2)
    const double inv = std::tgamma(1.0 - a) * std::tgamma(1.0 - b) /
                       std::tgamma(2.0 - 2.0 * lam) * (2.0 * lam) / (a * b);
    return 1.0 / inv;
}

namespace {

// integral_{w}^inf K(s,t) t^{-(1+2 lambda)} dt with w = 1-s carried
// separately so endpoint grading keeps full accuracy near s = 1.
class InnerIntegral {
public:
    InnerIntegral(const KernelSpec& k, double tail_tol) : k_(k), tail_tol_(tail_tol) {}

    double operator()(double s, double w) const {
        const double a = k_.alpha, b = k_.beta, lam2 = 2.0 * k_.lambda();
        if (k_.kind == KernelKind::Product) {
            // exact per power term: int_w^inf t^{q-1-2 lambda} dt = w^{q-2 lambda}/(2 lambda - q)
            return std::pow(s, a) * std::pow(w, b - lam2) / (lam2 - b) +
                   std::pow(s, b) * std::pow(w, a - lam2) / (lam2 - a);
        }
        // custom kernels: geometric panels from w up to the truncation point T
        // where the K0 envelope bounds the remainder below tail_tol
        const double decay = lam2 - b;  // slowest tail exponent
        const double T = std::pow(2.0 * k_.K0 / (decay * tail_tol_), 1.0 / decay);
        double lo = w;
        NeumaierSum sum;
        while (lo < T) {
            const double hi = std::min(2.0 * lo, T);
            const double c = 0.5 * (hi + lo), r = 0.5 * (hi - lo);
            double panel = 0.0;
            for (std::size_t g = 0; g < kGauss16X.size(); ++g) {
                const double t = c + r * kGauss16X[g];
                panel += kGauss16W[g] * kernel_eval(k_, s, t) * std::pow(t, -(1.0 + lam2));
            }
            sum.add(panel * r);
            lo = hi;
        }
        return sum.value();
    }

private:
    const KernelSpec& k_;
    double tail_tol_;
};

// integral_0^W f(u) du with dyadically graded panels toward u = 0; the
// grading resolves the endpoint behavior left by the substitutions.
template <typename F>
double graded_panels(const F& f, double W, int gauss_points) {
    NeumaierSum sum;
    double hi = W;
    for (int level = 0; level < 60; ++level) {
        const double lo = hi * 0.5;
        const double c = 0.5 * (hi + lo), r = 0.5 * (hi - lo);
        double panel = 0.0;
        if (gauss_points >= 16) {
            for (std::size_t g = 0; g < kGauss16X.size(); ++g)
                panel += kGauss16W[g] * f(c + r * kGauss16X[g]);
        } else {
            for (std::size_t g = 0; g < kGauss8X.size(); ++g)
                panel += kGauss8W[g] * f(c + r * kGauss8X[g]);
        }
        sum.add(panel * r);
        hi = lo;
    }
    return sum.value();
}

double outer_integral(const KernelSpec& k, const InnerIntegral& inner, int gauss_points) {
    const double a = k.alpha, b = k.beta, lam2 = 2.0 * k.lambda();
    // left half: substitute u = s^{1-beta}, absorbing the s^{-beta} endpoint
    const double pl = 1.0 - b;
    const double Wl = std::pow(0.5, pl);
    const double left = graded_panels(
        [&](double u) {
            const double s = std::pow(u, 1.0 / pl);
            return std::pow(s, -lam2) * inner(s, 1.0 - s) * std::pow(u, b / pl) / pl;
        },
        Wl, gauss_points);
    // right half: substitute v = (1-s)^{1-alpha}; w = 1-s stays exact
    const double pr = 1.0 - a;
    const double Wr = std::pow(0.5, pr);
    const double right = graded_panels(
        [&](double v) {
            const double w = std::pow(v, 1.0 / pr);
            const double s = 1.0 - w;
            return std::pow(s, -lam2) * inner(s, w) * std::pow(v, a / pr) / pr;
        },
        Wr, gauss_points);
    return left + right;
}

}  // namespace

double h_lambda_quadrature(const KernelSpec& k, const QuadratureConfig& q,
                           double* error_estimate) {
    k.require_profile_admissible("h_lambda_quadrature");
    q.validate();
    const InnerIntegral inner(k, std::min(q.tail_cutoff_tol, 1e-10));
    const double coarse = outer_integral(k, inner, 8);
    const double fine = outer_integral(k, inner, 16);
    const double est = std::fabs(fine - coarse) / std::fabs(fine);
    if (error_estimate) *error_estimate = est;
    if (!(std::isfinite(fine) && fine > 0.0))
        throw NumericalError("h_lambda quadrature produced a non-finite value");
    if (est > 1e-8) {
        std::ostringstream os;
        os << "h_lambda quadrature did not converge: estimated relative error " << est;
        throw QuadratureError(os.str(), est);
    }
    return 1.0 / fine;
}

HLambda compute_h_lambda(const KernelSpec& k, const QuadratureConfig& q) {
    double est = 0.0;
    const double quad = h_lambda_quadrature(k, q, &est);
    if (k.kind == KernelKind::Product) {
        const double closed = h_lambda_closed_form(k);
        const double rel = std::fabs(closed - quad) / closed;
        if (rel > 1e-8) {
            std::ostringstream os;
            os << "h_lambda paths disagree: closed form " << closed << " vs quadrature "
               << quad << " (relative " << rel << ")";
            throw QuadratureError(os.str(), rel);
        }
        return HLambda{closed, HLambdaMethod::ClosedForm, rel};
    }
    return HLambda{quad, HLambdaMethod::Quadrature, est};
}

}  // namespace coagsim
