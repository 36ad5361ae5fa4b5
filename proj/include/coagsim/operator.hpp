#pragma once

#include <memory>
#include <vector>

#include "coagsim/grid.hpp"

namespace coagsim {

struct ApplyDiagnostics {
    // Zero left tail while the leftmost sample still carries mass: the
    // small-x flux demand is truncated.
    bool left_truncation_warning = false;
};

// Evaluates the profile fixed-point map on gridded data. All power-law
// weights are integrated in closed form against piecewise-linear data in
// log variables; the curved near-diagonal factors are approximated
// piecewise-linearly per panel, which is the sole discretization error.
// Weights depend only on node offsets, so one workspace serves every
// translate of a grid and application commutes with translation.
class CoagulationOperator {
public:
    CoagulationOperator(const LogGrid& grid, const KernelSpec& kernel, const HLambda& hl,
                        const QuadratureConfig& quad);
    ~CoagulationOperator();
    CoagulationOperator(CoagulationOperator&&) noexcept;
    CoagulationOperator& operator=(CoagulationOperator&&) noexcept;

    // T h at every node; tail models are taken from p. p must share the
    // workspace grid spacing, node count and kernel.
    std::vector<double> apply(const Profile& p, ApplyDiagnostics* diag = nullptr) const;

    // Evaluation on raw (possibly signed) sample data with an explicit
    // constant left extension and right tail; the map is then bilinear in
    // (values, cleft, right amplitude), which Newton-type solvers exploit
    // for exact directional derivatives.
    std::vector<double> apply_data(const std::vector<double>& values, double cleft,
                                   const RightTail& right) const;

    const QuadratureConfig& quad() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// One-shot application; builds a workspace internally.
Profile apply_T(const Profile& p, const QuadratureConfig& quad,
                ApplyDiagnostics* diag = nullptr);

// Mass flux across size x of the normalized profile equation; shares the
// operator quadrature, so flux(x) = x^2 g(x) (T h)(x)/h(x) holds exactly
// at the nodes. x must lie inside the interior window.
double flux(const Profile& p, double x, const QuadratureConfig& quad);

// flux at every node from a single operator application
std::vector<double> flux_all_nodes(const Profile& p, const QuadratureConfig& quad);

}  // namespace coagsim
