#pragma once

#include <vector>

#include "coagsim/grid.hpp"

namespace coagsim {

// Finite-volume representation of the number density f on geometric cells.
// cell_values are mean densities; mass_lost_right accumulates first-moment
// outflux past the largest edge.
struct SizeDistribution {
    std::vector<double> cell_edges;   // size N+1, strictly increasing
    std::vector<double> cell_values;  // size N, nonnegative
    double time = 0.0;
    double mass_lost_right = 0.0;

    void validate() const;
    int cells() const { return static_cast<int>(cell_values.size()); }
    double cell_center(int k) const;  // geometric mean of the edges
    double cell_mass(int k) const;    // f_k * int_cell xi dxi
    double total_mass() const;        // first moment over the domain
};

SizeDistribution geometric_cells(double xi_min, double xi_max, int cells);

struct ScaleState {
    double s = 1.0;
    double w = 1.0;  // fixed normalization
};

// Exact solution of s' = s^{2 lambda}.
ScaleState evolve_scale(const ScaleState& state, double dt, double lambda);

// Explicit conservative flux-form step; trajectory snapshots at evenly
// spaced times (first entry is the initial state). Mass plus right outflux
// is conserved to roundoff by construction.
std::vector<SizeDistribution> simulate(const SizeDistribution& f0, const KernelSpec& kernel,
                                       double t_end, double cfl, int snapshots = 2);

// Maps f to the candidate profile ghat(x) = s^2 f(s x), resamples onto p's
// grid and returns the mass-weighted L1 distance over the overlap window
// after optimizing the translation gauge by golden-section search.
double rescaled_compare(const SizeDistribution& f, const ScaleState& state, const Profile& p,
                        double* best_shift = nullptr);

}  // namespace coagsim
