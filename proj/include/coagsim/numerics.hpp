#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace coagsim {

// Hat-function moments of e^{u t} on [0,1]:
//   phi0(u) = int_0^1 (1-t) e^{u t} dt = (e^u - u - 1)/u^2
//   phi1(u) = int_0^1 t e^{u t} dt     = ((u-1) e^u + 1)/u^2
// Series fallback near u = 0 keeps full accuracy.
inline double phi0(double u) {
    if (std::fabs(u) < 1e-4) {
        return 0.5 + u * (1.0 / 6.0 + u * (1.0 / 24.0 + u * (1.0 / 120.0 + u / 720.0)));
    }
    return (std::expm1(u) - u) / (u * u);
}

inline double phi1(double u) {
    if (std::fabs(u) < 1e-4) {
        return 0.5 + u * (1.0 / 3.0 + u * (1.0 / 8.0 + u * (1.0 / 30.0 + u / 144.0)));
    }
    return ((u - 1.0) * std::exp(u) + 1.0) / (u * u);
}

// integral_{v0}^{v1} e^{b v} L(v) dv with L linear, L(v0) = hl, L(v1) = hr.
inline double exp_linear_segment(double b, double v0, double v1, double hl, double hr) {
    const double d = v1 - v0;
    const double u = b * d;
    return std::exp(b * v0) * d * (hl * phi0(u) + hr * phi1(u));
}

// Neumaier compensated accumulator; summation order is part of the contract
// wherever bit-stable results are required.
struct NeumaierSum {
    double s = 0.0;
    double c = 0.0;
    void add(double x) {
        const double t = s + x;
        if (std::fabs(s) >= std::fabs(x)) {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }
    double value() const { return s + c; }
};

// 8-point Gauss-Legendre rule on [-1,1].
inline constexpr std::array<double, 8> kGauss8X = {
    -0.9602898564975362316835609, -0.7966664774136267395915539,
    -0.5255324099163289858177390, -0.1834346424956498049394761,
    0.1834346424956498049394761,  0.5255324099163289858177390,
    0.7966664774136267395915539,  0.9602898564975362316835609};
inline constexpr std::array<double, 8> kGauss8W = {
    0.1012285362903762591525314, 0.2223810344533744705443560,
    0.3137066458778872873379622, 0.3626837833783619829651504,
    0.3626837833783619829651504, 0.3137066458778872873379622,
    0.2223810344533744705443560, 0.1012285362903762591525314};

// 16-point Gauss-Legendre rule on [-1,1].
inline constexpr std::array<double, 16> kGauss16X = {
    -0.9894009349916499325961542, -0.9445750230732325760779884,
    -0.8656312023878317438804679, -0.7554044083550030338951012,
    -0.6178762444026437484466718, -0.4580167776572273863424194,
    -0.2816035507792589132304605, -0.0950125098376374401853193,
    0.0950125098376374401853193,  0.2816035507792589132304605,
    0.4580167776572273863424194,  0.6178762444026437484466718,
    0.7554044083550030338951012,  0.8656312023878317438804679,
    0.9445750230732325760779884,  0.9894009349916499325961542};
inline constexpr std::array<double, 16> kGauss16W = {
    0.0271524594117540948517806, 0.0622535239386478928628438,
    0.0951585116824927848099251, 0.1246289712555338720524763,
    0.1495959888165767320815017, 0.1691565193950025381893121,
    0.1826034150449235888667637, 0.1894506104550684962853967,
    0.1894506104550684962853967, 0.1826034150449235888667637,
    0.1691565193950025381893121, 0.1495959888165767320815017,
    0.1246289712555338720524763, 0.0951585116824927848099251,
    0.0622535239386478928628438, 0.0271524594117540948517806};

// Deterministic uniform doubles from splitmix64; identical streams on every
// platform, unlike std::uniform_real_distribution.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) {
        const double u = static_cast<double>(next() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    }

private:
    std::uint64_t state_;
};

}  // namespace coagsim
