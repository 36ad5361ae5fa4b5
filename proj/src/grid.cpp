#include "coagsim/grid.hpp"

#include <algorithm>
#include <cmath>

namespace coagsim {

void LogGrid::validate() const {
    if (!(x_min_log < x_max_log)) throw std::invalid_argument("grid requires x_min_log < x_max_log");
    if (n < 16) throw std::invalid_argument("grid requires n >= 16");
    if (!(std::isfinite(x_min_log) && std::isfinite(x_max_log)))
        throw std::invalid_argument("grid bounds must be finite");
}

void Profile::validate() const {
    grid.validate();
    if (static_cast<int>(values.size()) != grid.n)
        throw std::invalid_argument("profile sample count does not match the grid");
    for (double v : values) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("profile values must be nonnegative and finite");
    }
    if (left_tail.kind == LeftTailKind::Constant && !(left_tail.c >= 0.0))
        throw std::invalid_argument("constant left tail requires c >= 0");
    if (right_tail.kind == RightTailKind::Exponential && !(right_tail.rate > 0.0))
        throw std::invalid_argument("exponential right tail requires rate > 0");
    if (right_tail.kind == RightTailKind::Constant && !(right_tail.c >= 0.0))
        throw std::invalid_argument("constant right tail requires c >= 0");
}

double Profile::eval_H(double X) const {
    if (X < grid.x_min_log) {
        return left_tail.kind == LeftTailKind::Constant ? left_tail.c : 0.0;
    }
    if (X > grid.x_max_log) {
        switch (right_tail.kind) {
            case RightTailKind::Exponential:
                return values.back() * std::exp(-right_tail.rate * (X - grid.x_max_log));
            case RightTailKind::Constant:
                return right_tail.c;
            case RightTailKind::Zero:
                return 0.0;
        }
    }
    const double t = (X - grid.x_min_log) / grid.dx();
    int j = static_cast<int>(std::floor(t));
    j = std::clamp(j, 0, grid.n - 2);
    const double f = t - j;
    return values[j] * (1.0 - f) + values[j + 1] * f;
}

std::pair<int, int> Profile::interior_nodes(const QuadratureConfig& q) const {
    const double lo = interior_lo(q), hi = interior_hi(q);
    const double dx = grid.dx();
    int first = static_cast<int>(std::ceil((lo - grid.x_min_log) / dx - 1e-12));
    int last = static_cast<int>(std::floor((hi - grid.x_min_log) / dx + 1e-12));
    first = std::clamp(first, 0, grid.n - 1);
    last = std::clamp(last, 0, grid.n - 1);
    if (first > last) throw std::invalid_argument("interior margin leaves no interior nodes");
    return {first, last};
}

Profile Profile::scaled(double c) const {
    if (!(c >= 0.0)) throw std::invalid_argument("profile scale must be nonnegative");
    Profile out = *this;
    for (double& v : out.values) v *= c;
    if (out.left_tail.kind == LeftTailKind::Constant) out.left_tail.c *= c;
    if (out.right_tail.kind == RightTailKind::Constant) out.right_tail.c *= c;
    // the exponential tail amplitude anchors to the last sample, so it scales
    // through values automatically
    return out;
}

Profile constant_profile(const LogGrid& g, double value, const KernelSpec& k, const HLambda& hl) {
    if (!(value >= 0.0)) throw std::invalid_argument("constant profile level must be >= 0");
    Profile p;
    p.grid = g;
    p.values.assign(g.n, value);
    p.left_tail = {LeftTailKind::Constant, value};
    p.right_tail = {RightTailKind::Constant, 1.0, value};
    p.kernel = k;
    p.h_lambda = hl;
    p.validate();
    return p;
}

std::vector<double> h_to_g(const Profile& p) {
    const double e = 1.0 + 2.0 * p.kernel.lambda();
    std::vector<double> g(p.values.size());
    for (int i = 0; i < p.grid.n; ++i) g[i] = std::exp(-e * p.grid.node(i)) * p.values[i];
    return g;
}

std::vector<double> g_to_f(const Profile& p, double s, const std::vector<double>& xi_targets) {
    if (!(s > 0.0)) throw std::invalid_argument("g_to_f requires s > 0");
    const double e = 1.0 + 2.0 * p.kernel.lambda();
    std::vector<double> f(xi_targets.size());
    for (std::size_t i = 0; i < xi_targets.size(); ++i) {
        const double xi = xi_targets[i];
        if (!(xi > 0.0)) throw std::invalid_argument("g_to_f requires positive sizes");
        const double X = std::log(xi / s);
        // below the grid a Zero tail means the support is truncated, not empty
        if (X < p.grid.x_min_log && p.left_tail.kind == LeftTailKind::Zero)
            throw std::invalid_argument("requested size below g's support (Zero left tail)");
        const double g = std::exp(-e * X) * p.eval_H(X);
        f[i] = g / (s * s);
    }
    return f;
}

Profile translate_profile(const Profile& p, double shift) {
    Profile out = p;
    out.grid.x_min_log -= shift;
    out.grid.x_max_log -= shift;
    out.gauge_offset += shift;
    return out;
}

}  // namespace coagsim
