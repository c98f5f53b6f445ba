#pragma once
// Normalizing constants of the nonlocal gradient/divergence calculus.
//
// Everything here is closed-form arithmetic on Gamma functions. The only
// numerically delicate spot is mu(n,a)/(1-a) near a=1, where the direct
// quotient Gamma((1-a)/2) blows up; mu_over_gap() uses the rearranged form
// that stays O(1) there.

#include <cmath>
#include <stdexcept>
#include <string>

namespace riesz {

inline constexpr double pi = 3.141592653589793238462643383279502884;

// Lanczos approximation, g = 7, 9 coefficients. Relative error well below
// 1e-13 for x >= 0.5; values in (0, 0.5) go through Gamma(x) = Gamma(x+1)/x,
// which preserves relative accuracy (no reflection needed: domain is x > 0).
inline double gamma_fn(double x) {
    if (!(x > 0.0))
        throw std::domain_error("gamma_fn: requires x > 0, got " + std::to_string(x));
    static constexpr double g = 7.0;
    static constexpr double c[9] = {
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    };
    double shift = 1.0;
    while (x < 0.5) {       // at most a handful of steps for our domain
        shift *= x;
        x += 1.0;
    }
    double a = c[0];
    for (int i = 1; i < 9; ++i)
        a += c[i] / (x - 1.0 + i);
    const double t = x + g - 0.5;
    return std::sqrt(2.0 * pi) * std::pow(t, x - 0.5) * std::exp(-t) * a / shift;
}

struct FracOrder {
    double alpha;
    int n;
    FracOrder(int n_, double alpha_) : alpha(alpha_), n(n_) {
        if (n < 1)
            throw std::invalid_argument("FracOrder: n must be >= 1");
        if (!(alpha > 0.0) || !(alpha < 1.0))
            throw std::invalid_argument("FracOrder: alpha must lie strictly in (0,1), got " +
                                        std::to_string(alpha));
    }
};

inline double unit_ball_volume(int n) {
    if (n < 1)
        throw std::invalid_argument("unit_ball_volume: n must be >= 1");
    return std::pow(pi, 0.5 * n) / gamma_fn(0.5 * n + 1.0);
}

inline double mu(int n, double alpha) {
    FracOrder check(n, alpha);
    return std::pow(2.0, alpha) * std::pow(pi, -0.5 * n) *
           gamma_fn(0.5 * (n + alpha + 1.0)) / gamma_fn(0.5 * (1.0 - alpha));
}

// mu(n,a)/(1-a) without the cancellation: fold (1-a) into the Gamma argument,
// Gamma((1-a)/2 + 1) = ((1-a)/2) Gamma((1-a)/2).
inline double mu_over_gap(int n, double alpha) {
    FracOrder check(n, alpha);
    return std::pow(2.0, alpha - 1.0) * std::pow(pi, -0.5 * n) *
           gamma_fn(0.5 * (n + alpha + 1.0)) / gamma_fn(0.5 * (1.0 - alpha) + 1.0);
}

// Uniform-in-alpha upper bound for mu_over_gap.
inline double c_upper(int n) {
    return std::pow(pi, -0.5 * n) * std::sqrt(1.5) * gamma_fn(0.5 * n + 1.0) / gamma_fn(1.5);
}

struct RegionStats {
    double diam;
    double vol;
    RegionStats(double diam_, double vol_) : diam(diam_), vol(vol_) {
        if (!(diam > 0.0) || !(vol > 0.0))
            throw std::invalid_argument("RegionStats: diam and vol must be positive");
    }
    bool isodiametric_ok(int n) const {
        return vol <= unit_ball_volume(n) * std::pow(0.5 * diam, n) * (1.0 + 1e-12);
    }
};

// Sup-norm constant of the nonlocal gradient over a bounded region U:
// C = n*mu/((1-a)(n+a-1)) * ( w_n diam^{1-a} + (n w_n/(n+a-1))^{(n+a-1)/n} vol^{(1-a)/n} ).
inline double c_region(int n, double alpha, const RegionStats& s) {
    FracOrder check(n, alpha);
    const double wn = unit_ball_volume(n);
    const double q = (n + alpha - 1.0) / n;
    return n * mu_over_gap(n, alpha) / (n + alpha - 1.0) *
           (wn * std::pow(s.diam, 1.0 - alpha) +
            std::pow(n * wn / (n + alpha - 1.0), q) * std::pow(s.vol, (1.0 - alpha) / n));
}

// alpha-independent bound for c_region, valid for alpha in (1/2, 1).
inline double kappa_region(int n, const RegionStats& s) {
    const double wn = unit_ball_volume(n);
    const double cn = c_upper(n);
    const double m1 = std::max(1.0, std::pow(s.vol / wn, 1.0 / n));
    const double m2 = std::max(1.0, std::sqrt(s.diam));
    return n * wn * cn / (n - 0.5) * (n / (n - 0.5) * m1 + m2);
}

} // namespace riesz
