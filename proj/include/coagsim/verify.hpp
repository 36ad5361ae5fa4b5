#pragma once

#include <optional>
#include <string>
#include <utility>

#include "coagsim/operator.hpp"

namespace coagsim {

struct XWindow {
    double lo = 0.0;
    double hi = 0.0;
};

struct GrowthResult {
    double D = 0.0;  // +inf when a zero precedes a positive interior value
    bool zeros_flagged = false;
};

struct FluxResidualResult {
    double sup = 0.0;
    int skipped_nodes = 0;  // h == 0 nodes
};

// Observed bound constants and diagnostics for a computed profile.
struct VerificationReport {
    double sup_h = 0.0;            // observed M over the interior
    double inf_h_small_x = 0.0;    // observed m over the small-x window
    double dyadic_avg_sup = 0.0;   // observed C: sup_R of the [R/2, R] mean
    double min_growth_D = 0.0;     // smallest D in the exponential change bound
    double flux_residual_sup = 0.0;
    std::optional<double> osc_period;
    double left_plateau_mean = 0.0;  // evidence only; limit at x -> 0 is conjectural
    XWindow small_x_window{};
    XWindow interior{};
    int r_decades = 2;
    bool growth_zeros_flagged = false;
    int flux_skipped_nodes = 0;
};

// (sup over interior nodes, min over the window). The window must sit in
// the interior near the left edge.
std::pair<double, double> bounds_report(const Profile& p, const XWindow& small_x_window,
                                        const QuadratureConfig& quad);

// max over R (R at every interior node with ln R in [-r_decades*ln10, 0])
// of the mean of h over [R/2, R], by exact integration of the interpolant.
double dyadic_average_sup(const Profile& p, int r_decades, const QuadratureConfig& quad);

// Smallest D >= 0 with H(X_j) <= 2 H(X_i) e^{D (X_j - X_i)} over all
// interior node pairs i < j.
GrowthResult growth_rate_check(const Profile& p, const QuadratureConfig& quad);

// sup over interior nodes of |x^2 g - flux| / (x^2 g); h == 0 nodes are
// skipped and counted.
FluxResidualResult flux_residual(const Profile& p, const QuadratureConfig& quad);

// Dominant log-period of the mean-subtracted profile over the window, if a
// spectral peak exceeds 3x the median magnitude; absent otherwise.
std::optional<double> oscillation_diagnostic(const Profile& p, const XWindow& window);

struct VerifyOptions {
    double small_x_decades = 2.0;  // width of the small-x window, in decades
    int r_decades = 2;
    std::optional<XWindow> osc_window;  // default: the small-x window
};

VerificationReport verify_profile(const Profile& p, const VerifyOptions& opt,
                                  const QuadratureConfig& quad);

// Default window: leftmost `decades` decades of the interior.
XWindow default_small_x_window(const Profile& p, const QuadratureConfig& quad,
                               double decades = 2.0);

std::string format_report_table(const VerificationReport& r);

}  // namespace coagsim
