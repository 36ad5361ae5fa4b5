#include "coagsim/kernel.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "coagsim/numerics.hpp"

namespace coagsim {

void QuadratureConfig::validate() const {
    if (panels_per_cell < 1) throw std::invalid_argument("panels_per_cell must be >= 1");
    if (!(tail_cutoff_tol > 0.0 && tail_cutoff_tol <= 1e-4))
        throw std::invalid_argument("tail_cutoff_tol must lie in (0, 1e-4]");
    if (!(interior_margin >= 0.0)) throw std::invalid_argument("interior_margin must be >= 0");
}

namespace {

void check_exponents(double alpha, double beta, bool strict) {
    if (!(std::isfinite(alpha) && std::isfinite(beta)))
        throw std::invalid_argument("kernel exponents must be finite");
    if (strict) {
        if (!(alpha > 0.0 && alpha <= beta && beta < 0.5))
            throw std::invalid_argument(
                "product kernel requires 0 < alpha <= beta < 1/2");
    } else {
        if (!(alpha >= 0.0 && alpha <= beta && beta < 0.5))
            throw std::invalid_argument(
                "kernel exponents must satisfy 0 <= alpha <= beta < 1/2");
    }
}

}  // namespace

KernelSpec KernelSpec::product(double alpha, double beta, double K0, double k0) {
    check_exponents(alpha, beta, /*strict=*/true);
    if (!(K0 > 0.0)) throw std::invalid_argument("K0 must be positive");
    KernelSpec k;
    k.kind = KernelKind::Product;
    k.alpha = alpha;
    k.beta = beta;
    k.K0 = K0;
    k.k0 = (k0 < 0.0) ? 2.0 * std::pow(4.0, -(alpha + beta)) : k0;
    if (!(k.k0 > 0.0)) throw std::invalid_argument("k0 must be positive");
    k.separable_terms = {{1.0, alpha, beta}};
    return k;
}

KernelSpec KernelSpec::custom(KernelFn f, double alpha, double beta, double K0, double k0,
                              std::vector<PowerTerm> separable) {
    check_exponents(alpha, beta, /*strict=*/false);
    if (!f) throw std::invalid_argument("custom kernel requires an evaluator");
    if (!(K0 > 0.0 && k0 > 0.0)) throw std::invalid_argument("K0 and k0 must be positive");
    KernelSpec k;
    k.kind = KernelKind::Custom;
    k.alpha = alpha;
    k.beta = beta;
    k.K0 = K0;
    k.k0 = k0;
    k.evaluator = std::move(f);
    k.separable_terms = std::move(separable);
    return k;
}

bool KernelSpec::profile_admissible() const {
    return alpha > 0.0 && alpha <= beta && beta < 0.5;
}

void KernelSpec::require_profile_admissible(const char* where) const {
    if (!profile_admissible()) {
        std::ostringstream os;
        os << where << ": kernel outside the admissible class (needs 0 < alpha <= beta < 1/2,"
           << " got alpha=" << alpha << ", beta=" << beta << ")";
        throw std::invalid_argument(os.str());
    }
}

double kernel_eval(const KernelSpec& k, double x, double y) {
    if (!(x > 0.0) || !(y > 0.0))
        throw std::invalid_argument("kernel_eval requires positive sizes");
    if (k.kind == KernelKind::Product) {
        return std::pow(x, k.alpha) * std::pow(y, k.beta) +
               std::pow(x, k.beta) * std::pow(y, k.alpha);
    }
    const double v = k.evaluator(x, y);
    if (!(v >= 0.0)) throw NumericalError("custom kernel returned a negative or NaN rate");
    return v;
}

ValidationOutcome validate_kernel(const KernelSpec& k, int samples, std::uint64_t seed) {
    if (samples < 16) throw std::invalid_argument("validate_kernel requires samples >= 16");
    ValidationOutcome out;
    Rng rng(seed);
    const double lam2 = 2.0 * k.lambda();

    // (i) homogeneity on seeded log-uniform samples
    {
        double worst = 0.0;
        for (int s = 0; s < samples; ++s) {
            const double x = std::exp(rng.uniform(-5.0, 5.0));
            const double y = std::exp(rng.uniform(-5.0, 5.0));
            const double a = std::exp(rng.uniform(-2.0, 2.0));
            const double lhs = kernel_eval(k, a * x, a * y);
            const double rhs = std::pow(a, lam2) * kernel_eval(k, x, y);
            const double rel = std::fabs(lhs - rhs) / rhs;
            if (rel > worst) {
                worst = rel;
                out.homogeneity.witness_x = x;
                out.homogeneity.witness_y = y;
                out.homogeneity.witness_a = a;
            }
        }
        out.homogeneity.worst = worst;
        if (worst > 1e-12) {
            out.homogeneity.passed = false;
            out.homogeneity.inequality = "|K(ax,ay) - a^{2 lambda} K(x,y)| <= 1e-12 a^{2 lambda} K(x,y)";
        }
    }

    // (ii) power-law growth bound (tiny slack covers the equality case)
    {
        Rng rng2(seed ^ 0x9e3779b97f4a7c15ull);
        double worst = 0.0;
        for (int s = 0; s < samples; ++s) {
            const double x = std::exp(rng2.uniform(-5.0, 5.0));
            const double y = std::exp(rng2.uniform(-5.0, 5.0));
            const double bound = k.K0 * (std::pow(x, k.alpha) * std::pow(y, k.beta) +
                                         std::pow(x, k.beta) * std::pow(y, k.alpha));
            const double v = kernel_eval(k, x, y);
            const double excess = (v - bound) / bound;
            if (excess > worst) {
                worst = excess;
                out.power_growth.witness_x = x;
                out.power_growth.witness_y = y;
            }
        }
        out.power_growth.worst = worst;
        if (worst > 1e-12) {
            out.power_growth.passed = false;
            out.power_growth.inequality = "K(x,y) <= K0 (x^alpha y^beta + x^beta y^alpha)";
        }
    }

    // (iii) non-degeneracy: min over a uniform grid of [1/4,1]^2
    {
        const int g = 64;
        double mn = std::numeric_limits<double>::infinity();
        double wx = 0.25, wy = 0.25;
        for (int i = 0; i < g; ++i) {
            const double x = 0.25 + 0.75 * i / (g - 1);
            for (int j = 0; j < g; ++j) {
                const double y = 0.25 + 0.75 * j / (g - 1);
                const double v = kernel_eval(k, x, y);
                if (v < mn) {
                    mn = v;
                    wx = x;
                    wy = y;
                }
            }
        }
        out.observed_min_box = mn;
        out.nondegeneracy.worst = mn;
        out.nondegeneracy.witness_x = wx;
        out.nondegeneracy.witness_y = wy;
        if (!(mn >= k.k0)) {
            out.nondegeneracy.passed = false;
            out.nondegeneracy.inequality = "min over [1/4,1]^2 of K >= k0";
        }
    }
    return out;
}

double weight_G(const KernelSpec& k, const HLambda& hl, double Y, double Z) {
    if (!(std::isfinite(Y) && std::isfinite(Z)))
        throw std::invalid_argument("weight_G requires finite log sizes");
    const double lam = k.lambda();
    const double e1 = (1.0 - 2.0 * lam) * Y;
    const double e2 = -2.0 * lam * Z;
    // kernel magnitude in log scale: bounded by K0 growth envelope
    const double ek = std::fabs(k.beta * Y) + std::fabs(k.beta * Z) + 2.0;
    if (e1 + e2 + ek > 700.0 || std::fabs(Y) > 700.0 || std::fabs(Z) > 700.0)
        throw NumericalError("weight_G overflow for extreme arguments");
    return hl.value * std::exp(e1) * std::exp(e2) * kernel_eval(k, std::exp(Y), std::exp(Z));
}

double gdec_residual(const KernelSpec& k, const HLambda& hl, double Y, double Z, double eps) {
    const double g0 = weight_G(k, hl, Y, Z);
    const double g1 = weight_G(k, hl, Y - eps, Z - eps);
    const double lam = k.lambda();
    return std::fabs(g1 - g0 * std::exp(-(1.0 - 2.0 * lam) * eps)) / g0;
}

}  // namespace coagsim
