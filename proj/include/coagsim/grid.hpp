#pragma once

#include <utility>
#include <vector>

#include "coagsim/kernel.hpp"

namespace coagsim {

// Uniform grid in the log size variable X = ln x.
struct LogGrid {
    double x_min_log = -18.0;
    double x_max_log = 7.0;
    int n = 512;

    LogGrid() = default;
    LogGrid(double lo, double hi, int nodes) : x_min_log(lo), x_max_log(hi), n(nodes) {
        validate();
    }
    double dx() const { return (x_max_log - x_min_log) / (n - 1); }
    double node(int i) const { return x_min_log + i * dx(); }
    void validate() const;
};

enum class LeftTailKind { Constant, Zero };
enum class RightTailKind { Exponential, Constant, Zero };

struct LeftTail {
    LeftTailKind kind = LeftTailKind::Constant;
    double c = 0.0;
};

// Exponential tail is anchored at the last node: H(X) = H(X_max) e^{-rate (X - X_max)}.
struct RightTail {
    RightTailKind kind = RightTailKind::Zero;
    double rate = 1.0;
    double c = 0.0;
};

// Sampled rescaled profile h on a LogGrid plus tail extensions and gauge
// bookkeeping. values[i] = h(e^{X_i}).
struct Profile {
    LogGrid grid;
    std::vector<double> values;
    LeftTail left_tail{};
    RightTail right_tail{};
    KernelSpec kernel;
    HLambda h_lambda;
    double gauge_offset = 0.0;

    void validate() const;

    // H at arbitrary X: piecewise linear between nodes, tail models outside.
    double eval_H(double X) const;

    double interior_lo(const QuadratureConfig& q) const { return grid.x_min_log + q.interior_margin; }
    double interior_hi(const QuadratureConfig& q) const { return grid.x_max_log - q.interior_margin; }
    // inclusive node index range [first, last] inside the interior window
    std::pair<int, int> interior_nodes(const QuadratureConfig& q) const;

    // scales sample values and tail amplitudes by c >= 0
    Profile scaled(double c) const;
};

Profile constant_profile(const LogGrid& g, double value, const KernelSpec& k, const HLambda& hl);

// g_i = e^{-(1+2 lambda) X_i} h_i
std::vector<double> h_to_g(const Profile& p);

// f(xi) = s^{-2} g(xi/s) at the requested sizes, interpolated linearly in
// log variables; tail models extend g outside the grid.
std::vector<double> g_to_f(const Profile& p, double s, const std::vector<double>& xi_targets);

// Grid shifted by -shift, identical sample values; gauge_offset accumulates.
Profile translate_profile(const Profile& p, double shift);

}  // namespace coagsim
