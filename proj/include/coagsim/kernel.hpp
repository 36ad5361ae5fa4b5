#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "coagsim/errors.hpp"

namespace coagsim {

struct QuadratureConfig {
    int panels_per_cell = 2;        // sub-panels per grid cell in the operator
    double tail_cutoff_tol = 1e-10; // in (0, 1e-4]
    double interior_margin = 2.0;   // boundary-contaminated band, in X
    void validate() const;
};

enum class KernelKind { Product, Custom };

// One symmetric power component c*(x^a y^b + x^b y^a) of a separable kernel.
struct PowerTerm {
    double coef;
    double a;
    double b;
};

using KernelFn = std::function<double(double, double)>;

// Homogeneous symmetric coagulation kernel of degree 2*lambda with
// power-law growth bounds. lambda is derived from (alpha, beta), never
// stored independently. Product kernels satisfy every structural
// assumption by construction; Custom kernels declare their parameters and
// validate_kernel checks the declaration.
struct KernelSpec {
    KernelKind kind = KernelKind::Product;
    double alpha = 0.25;
    double beta = 0.25;
    double K0 = 1.0;
    double k0 = 1.0;
    KernelFn evaluator;                      // Custom only
    std::vector<PowerTerm> separable_terms;  // filled for Product; optional for Custom

    double lambda() const { return 0.5 * (alpha + beta); }

    // k0 < 0 picks the tight default min over [1/4,1]^2, i.e. 2*4^{-2 lambda}.
    static KernelSpec product(double alpha, double beta, double K0 = 1.0, double k0 = -1.0);
    static KernelSpec custom(KernelFn f, double alpha, double beta, double K0, double k0,
                             std::vector<PowerTerm> separable = {});

    // Hypotheses of the profile equation: 0 < alpha <= beta < 1/2.
    bool profile_admissible() const;
    void require_profile_admissible(const char* where) const;
};

double kernel_eval(const KernelSpec& k, double x, double y);

struct AssumptionCheck {
    bool passed = true;
    std::string inequality;  // violated inequality, empty when passed
    double witness_x = 0.0;
    double witness_y = 0.0;
    double witness_a = 1.0;
    double worst = 0.0;  // worst observed deviation / value
};

struct ValidationOutcome {
    AssumptionCheck homogeneity;    // K(ax,ay) = a^{2 lambda} K(x,y)
    AssumptionCheck power_growth;   // K <= K0 (x^a y^b + x^b y^a)
    AssumptionCheck nondegeneracy;  // min over [1/4,1]^2 >= k0
    double observed_min_box = 0.0;
    bool passed() const {
        return homogeneity.passed && power_growth.passed && nondegeneracy.passed;
    }
};

ValidationOutcome validate_kernel(const KernelSpec& k, int samples,
                                  std::uint64_t seed = 20260801ull);

enum class HLambdaMethod { Quadrature, ClosedForm };

struct HLambda {
    double value = 0.0;
    HLambdaMethod method = HLambdaMethod::ClosedForm;
    double estimated_error = 0.0;
};

// Beta-reduction closed form; Product kernels only.
double h_lambda_closed_form(const KernelSpec& k);

// Double-integral quadrature path; works for Product and Custom kernels.
double h_lambda_quadrature(const KernelSpec& k, const QuadratureConfig& q,
                           double* error_estimate = nullptr);

// Product kernels cross-check both paths (relative 1e-8) and return the
// closed form; Custom kernels get the quadrature value.
HLambda compute_h_lambda(const KernelSpec& k, const QuadratureConfig& q = {});

// Log-variable weight h_lambda e^{(1-2 lambda) Y} e^{-2 lambda Z} K(e^Y, e^Z).
double weight_G(const KernelSpec& k, const HLambda& hl, double Y, double Z);

// |G(Y-eps, Z-eps) - G(Y,Z) e^{-(1-2 lambda) eps}| / G(Y,Z)
double gdec_residual(const KernelSpec& k, const HLambda& hl, double Y, double Z, double eps);

}  // namespace coagsim
