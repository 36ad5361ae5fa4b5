#pragma once

#include <utility>
#include <vector>

#include "coagsim/operator.hpp"

namespace coagsim {

enum class GaugeMode { PinHalfPlateau, None };

struct SolverConfig {
    double damping = 0.5;  // theta in (0,1]
    int max_iterations = 500;
    double residual_tol = 1e-4;
    GaugeMode gauge = GaugeMode::PinHalfPlateau;
    void validate() const;
};

struct SolveReport {
    int iterations = 0;
    std::vector<double> residual_history;  // interior sup residual per iteration
    bool converged = false;
    double final_gauge_offset = 0.0;
    // clamped negative mass exceeded 1e-6 of sup(h) in some iteration
    bool clamping_flag = false;
    long clamped_nodes_total = 0;
};

// Damped fixed-point iteration h <- (1-theta) h + theta T h with negative
// clamping, right-tail refit and translation gauge pinning. Non-convergence
// is reported, not thrown; collapse to h == 0 throws CollapseError.
std::pair<Profile, SolveReport> solve_profile(const Profile& initial, const SolverConfig& cfg,
                                              const QuadratureConfig& quad);

// The scaling family ghat(x) = a^{1+2 lambda} g(a x): a pure translation by
// ln a in log variables. First moment transforms as a^{2 lambda - 1} M1.
Profile rescale_solution(const Profile& p, double a);

// Default initialization H0(X) = exp(-e^X): plateau 1 for X << 0,
// superexponential decay for X >> 0.
Profile default_initial_profile(const LogGrid& grid, const KernelSpec& kernel,
                                const HLambda& hl);

// Translates p so the first fall of h to half its left-plateau average sits
// at X = 0. Returns the applied shift.
double pin_half_plateau(Profile& p, const QuadratureConfig& quad);

// Refits the exponential right tail by least squares on ln h over the last
// decade of the grid; keeps the current model when the data do not decay.
void refit_right_tail(Profile& p);

// Numeric first moment int x g dx over the grid (no tail extension).
double first_moment(const Profile& p);

}  // namespace coagsim
