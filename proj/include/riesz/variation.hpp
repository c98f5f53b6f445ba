// Seminorms, perimeters, and variations: the Gagliardo-type seminorm, the
// relative perimeter functional with its inner/cross breakdown, the total
// variation of the nonlocal gradient over a window, and a dual lower-bound
// estimator by projected gradient ascent.
#pragma once

#include <riesz/kernels.hpp>

#include <algorithm>
#include <random>
#include <vector>

namespace riesz {

// inner collects both orderings of the window-window part, cross is counted
// once per side; total = inner + 2*cross, tilde = inner + cross.
struct PerimeterBreakdown {
    double inner = 0.0;
    double cross = 0.0;
    double total() const { return inner + 2.0 * cross; }
    double tilde() const { return inner + cross; }
};

namespace detail {

// Window endpoints at or beyond 1e299 stand for an unbounded side.
inline bool side_unbounded(double v) { return std::abs(v) >= 1e299; }
inline double side_value(double v) { return side_unbounded(v) ? std::copysign(inf, v) : v; }

// int_(p,q) int_(r,s) |x-y|^{-1-a} dy dx for (p,q) left of (r,s), by the
// iterated primitive G(t) = t^{1-a}. An unbounded p or s is taken as the
// analytic limit; facing half-lines have no finite value.
inline double pair_interaction(double p, double q, double r, double s, double a) {
    const double c = a * (1.0 - a);
    auto GG = [a](double t) { return std::pow(t, 1.0 - a); };
    const bool pu = std::isinf(p), su = std::isinf(s);
    if (pu && su)
        throw std::invalid_argument(
            "frac_perimeter: divergent configuration (facing unbounded intervals)");
    if (pu) return (GG(s - q) - GG(r - q)) / c;
    if (su) return (GG(r - p) - GG(r - q)) / c;
    return (GG(r - p) - GG(r - q) - GG(s - p) + GG(s - q)) / c;
}

inline double interaction(const IntervalSet& A, const IntervalSet& B, double a) {
    detail::Kahan t;
    for (auto& u : A.iv)
        for (auto& v : B.iv) {
            if (u.first <= v.first)
                t.add(pair_interaction(u.first, u.second, v.first, v.second, a));
            else
                t.add(pair_interaction(v.first, v.second, u.first, u.second, a));
        }
    return t.result();
}

inline IntervalSet window_part(const IntervalSet& S, double lo, double hi) {
    return S.intersect(lo, hi);
}

inline IntervalSet outside_part(const IntervalSet& S, double lo, double hi) {
    IntervalSet r;
    if (std::isfinite(lo))
        for (auto& p : S.intersect(-inf, lo).iv) r.iv.push_back(p);
    if (std::isfinite(hi))
        for (auto& p : S.intersect(hi, inf).iv) r.iv.push_back(p);
    return r;
}

} // namespace detail

inline PerimeterBreakdown frac_perimeter(const IntervalSet& E, double alpha, const Window& w) {
    FracOrder ord(1, alpha);
    if (w.n != 1)
        throw std::invalid_argument("frac_perimeter: interval sets need a 1D window");
    PerimeterBreakdown b;
    if (E.empty()) return b;
    const IntervalSet Ec = E.complement();
    if (Ec.empty()) return b;
    const double lo = detail::side_value(w.lo[0]), hi = detail::side_value(w.hi[0]);
    const IntervalSet Ein = detail::window_part(E, lo, hi);
    const IntervalSet Ecin = detail::window_part(Ec, lo, hi);
    const IntervalSet Eout = detail::outside_part(E, lo, hi);
    const IntervalSet Ecout = detail::outside_part(Ec, lo, hi);
    b.inner = 2.0 * detail::interaction(Ein, Ecin, alpha);
    b.cross = detail::interaction(Ein, Ecout, alpha) + detail::interaction(Ecin, Eout, alpha);
    return b;
}

// ---------------------------------------------------------------------------
// planar perimeter: graded covariance quadrature + outside-tail cross term
// ---------------------------------------------------------------------------

namespace detail {

// Gauss-Legendre rule on (-1,1) by Newton iteration on the recurrence.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(std::size_t(n), 0.0);
    w.assign(std::size_t(n), 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double t = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 64; ++it) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (t * p1 - p0) / (t * t - 1.0);
            const double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-15) break;
        }
        x[std::size_t(i)] = -t;
        x[std::size_t(n - 1 - i)] = t;
        w[std::size_t(i)] = w[std::size_t(n - 1 - i)] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
}

inline double cov_overlap(const PolySet& E, double zx, double zy) {
    double c = 0.0;
    for (auto& r1 : E.rects)
        for (auto& r2 : E.rects) {
            const double ox = std::min(r1.x1, r2.x1 - zx) - std::max(r1.x0, r2.x0 - zx);
            if (ox <= 0.0) continue;
            const double oy = std::min(r1.y1, r2.y1 - zy) - std::max(r1.y0, r2.y0 - zy);
            if (oy > 0.0) c += ox * oy;
        }
    return c;
}

// P_a(E; R^2) = int (2|E| - 2cov(z)) |z|^{-2-a} dz, radially graded: log panels
// from the covariance diagonal out to the hull diameter D (first panel starts
// at 0), Gauss nodes in r and theta, exact tail beyond D where cov vanishes.
// Panels double until the refinement increment drops below the budget.
inline double global_perimeter_2d(const PolySet& E, double a) {
    double x0 = inf, x1 = -inf, y0 = inf, y1 = -inf;
    for (auto& r : E.rects) {
        x0 = std::min(x0, r.x0);
        x1 = std::max(x1, r.x1);
        y0 = std::min(y0, r.y0);
        y1 = std::max(y1, r.y1);
    }
    const double D = std::hypot(x1 - x0, y1 - y0);
    const double area = E.area();
    std::vector<double> tx, tw, rx, rw;
    gauss_legendre(96, tx, tw);
    gauss_legendre(48, rx, rw);
    std::vector<double> ct(96), st(96), wt(96);
    for (int t = 0; t < 96; ++t) {
        const double th = 0.5 * (tx[std::size_t(t)] + 1.0) * pi;
        ct[std::size_t(t)] = std::cos(th);
        st[std::size_t(t)] = std::sin(th);
        wt[std::size_t(t)] = tw[std::size_t(t)] * (pi / 2.0); // doubled below for (pi,2pi)
    }
    auto F_of_r = [&](double r) {
        detail::Kahan s;
        for (int t = 0; t < 96; ++t) {
            const double c = cov_overlap(E, r * ct[std::size_t(t)], r * st[std::size_t(t)]);
            s.add(wt[std::size_t(t)] * 4.0 * (area - c));
        }
        return s.result();
    };
    auto eval = [&](int edges) {
        detail::Kahan tot;
        double prev = 0.0;
        const double l0 = std::log(1e-8), l1 = std::log(D);
        for (int k = 0; k < edges; ++k) {
            const double e = std::exp(l0 + (l1 - l0) * k / (edges - 1));
            for (int i = 0; i < 48; ++i) {
                const double r = 0.5 * (prev + e) + 0.5 * (e - prev) * rx[std::size_t(i)];
                const double wq = 0.5 * (e - prev) * rw[std::size_t(i)];
                tot.add(wq * F_of_r(r) * std::pow(r, -1.0 - a));
            }
            prev = e;
        }
        return tot.result();
    };
    double last = eval(400);
    for (int n = 800; n <= 3200; n *= 2) {
        const double cur = eval(n);
        const double inc = std::abs(cur - last);
        last = cur;
        if (inc <= 1e-7 * std::abs(cur)) break;
    }
    return last + 2.0 * area * 2.0 * pi * std::pow(D, -a) / a;
}

// int_{|u|>d, v in R} (u^2+v^2)^{-(2+a)/2} du dv = b(a) d^{-a} / a
inline double slab_constant(double a) {
    return std::sqrt(pi) * std::tgamma((1.0 + a) / 2.0) / std::tgamma((2.0 + a) / 2.0);
}

// integral of |x-y|^{-2-a} over the complement of the window, seen from an
// interior point x: two full slabs plus two corner-free strips, the strip
// integral reduced to cos^a over a node-dependent angular range.
inline double outside_tail_2d(double x1, double x2, const Window& w, double a) {
    const double A0 = w.lo[0], A1 = w.hi[0], B0 = w.lo[1], B1 = w.hi[1];
    const double ba = slab_constant(a);
    double t = ba * (std::pow(A1 - x1, -a) + std::pow(x1 - A0, -a)) / a;
    const double u0 = A0 - x1, u1 = A1 - x1;
    for (double d : {B1 - x2, x2 - B0}) {
        const double segs[2][2] = {{u0, 0.0}, {0.0, u1}};
        for (auto& sg : segs) {
            if (!(sg[1] > sg[0])) continue;
            for (int i = 0; i < 24; ++i) {
                const double u = 0.5 * (sg[0] + sg[1]) + 0.5 * (sg[1] - sg[0]) * gl24_x[i];
                const double uw = 0.5 * (sg[1] - sg[0]) * gl24_w[i];
                const double au = std::abs(u);
                const double t0 = std::atan(d / au);
                double inner = 0.0;
                for (int j = 0; j < 24; ++j) {
                    const double th = 0.5 * (t0 + pi / 2.0) + 0.5 * (pi / 2.0 - t0) * gl24_x[j];
                    inner += 0.5 * (pi / 2.0 - t0) * gl24_w[j] * std::pow(std::cos(th), a);
                }
                t += uw * std::pow(au, -1.0 - a) * inner;
            }
        }
    }
    return t;
}

inline double cross_term_2d(const PolySet& E, const Window& w, double a) {
    detail::Kahan tot;
    for (auto& r : E.rects)
        for (int i = 0; i < 24; ++i) {
            const double xq = 0.5 * (r.x0 + r.x1) + 0.5 * (r.x1 - r.x0) * gl24_x[i];
            const double xw = 0.5 * (r.x1 - r.x0) * gl24_w[i];
            for (int j = 0; j < 24; ++j) {
                const double yq = 0.5 * (r.y0 + r.y1) + 0.5 * (r.y1 - r.y0) * gl24_x[j];
                const double yw = 0.5 * (r.y1 - r.y0) * gl24_w[j];
                tot.add(xw * yw * outside_tail_2d(xq, yq, w, a));
            }
        }
    return tot.result();
}

} // namespace detail

inline PerimeterBreakdown frac_perimeter(const PolySet& E, double alpha, const Window& w) {
    FracOrder ord(2, alpha);
    if (w.n != 2)
        throw std::invalid_argument("frac_perimeter: rectilinear sets need a 2D window");
    PerimeterBreakdown b;
    if (E.rects.empty()) return b;
    const double pg = detail::global_perimeter_2d(E, alpha);
    int open = 0;
    for (int s = 0; s < 2; ++s)
        open += detail::side_unbounded(w.lo[s]) + detail::side_unbounded(w.hi[s]);
    if (open == 4) {
        b.inner = pg;
        return b;
    }
    if (open != 0)
        throw std::invalid_argument("frac_perimeter: window must be bounded or the whole plane");
    for (auto& r : E.rects)
        if (!(r.x0 > w.lo[0] && r.x1 < w.hi[0] && r.y0 > w.lo[1] && r.y1 < w.hi[1]))
            throw std::invalid_argument(
                "frac_perimeter: rectilinear set must lie strictly inside the window");
    b.cross = detail::cross_term_2d(E, w, alpha);
    b.inner = pg - 2.0 * b.cross;
    return b;
}

// ---------------------------------------------------------------------------
// Gagliardo seminorm
// ---------------------------------------------------------------------------

// Node-pair double sum regrouped by offset: G(z) = int |f(x+z)-f(x)| dx is
// accumulated per node offset, the kernel |z|^{-n-a} is integrated against a
// piecewise-linear G in 1D and taken at the node in 2D; the diagonal cell uses
// the Lipschitz bound with the cell integral of |z|^{1-n-a} done analytically,
// and beyond twice the support radius G == 2 ||f||_1 gives an exact tail.
inline double sobolev_seminorm(const ScalarField& f, double alpha) {
    FracOrder ord(f.spec.n, alpha);
    detail::require_support(f.support_radius, "sobolev_seminorm");
    const GridSpec& s = f.spec;
    const double h = s.h(), a = alpha, R0 = *f.support_radius;
    auto g = local_gradient(f);
    if (s.n == 1) {
        const int m = s.m;
        const int jcut = int(std::ceil((2.0 * R0 + 2.0 * h) / h)) + 2;
        std::vector<double> Gv(std::size_t(jcut) + 1, 0.0);
        for (int j = 1; j <= jcut; ++j) {
            if (j >= m) continue;
            detail::Kahan acc;
            for (int i = 0; i + j < m; ++i)
                acc.add(std::abs(f.values[std::size_t(i + j)] - f.values[std::size_t(i)]));
            Gv[std::size_t(j)] = acc.result() * h;
        }
        detail::Kahan l1k, tvk;
        for (int i = 0; i < m; ++i) {
            l1k.add(std::abs(f.values[std::size_t(i)]));
            tvk.add(std::abs(g.comp[0][std::size_t(i)]));
        }
        const double l1 = l1k.result() * h, tv = tvk.result() * h;
        detail::Kahan S;
        S.add(tv * 2.0 * std::pow(h, 1.0 - a) / (1.0 - a));
        for (int j = 1; j < jcut; ++j) {
            const double z0 = j * h, z1 = (j + 1) * h;
            const double M0 = (std::pow(z0, -a) - std::pow(z1, -a)) / a;
            const double M1 = (std::pow(z1, 1.0 - a) - std::pow(z0, 1.0 - a)) / (1.0 - a);
            const double wl = (z1 * M0 - M1) / h, wr = (M1 - z0 * M0) / h;
            S.add(2.0 * (wl * Gv[std::size_t(j)] + wr * Gv[std::size_t(j + 1)]));
        }
        S.add(2.0 * l1 * 2.0 * std::pow(jcut * h, -a) / a);
        return S.result();
    }
    const int m = s.m;
    const int jc = int(std::ceil((2.0 * R0 + 2.0 * h) / h)) + 1;
    detail::Kahan l1k, tvk;
    for (std::size_t i = 0; i < s.size(); ++i) {
        l1k.add(std::abs(f.values[i]));
        tvk.add(std::hypot(g.comp[0][i], g.comp[1][i]));
    }
    const double l1 = l1k.result() * h * h, tv = tvk.result() * h * h;
    detail::Kahan S;
    for (int jy = -jc; jy <= jc; ++jy)
        for (int jx = -jc; jx <= jc; ++jx) {
            if (jx == 0 && jy == 0) continue;
            const double zx = jx * h, zy = jy * h, zc = jc * h;
            const double r2 = zx * zx + zy * zy;
            if (r2 > zc * zc) continue;
            const int ys0 = std::max(0, -jy), ys1 = std::min(m, m - jy);
            const int xs0 = std::max(0, -jx), xs1 = std::min(m, m - jx);
            detail::Kahan acc;
            for (int iy = ys0; iy < ys1; ++iy)
                for (int ix = xs0; ix < xs1; ++ix)
                    acc.add(std::abs(f.values[s.idx(ix + jx, iy + jy)] - f.values[s.idx(ix, iy)]));
            S.add(acc.result() * h * h * std::pow(r2, -(2.0 + a) / 2.0) * h * h);
        }
    double icell = 0.0;
    for (int i = 0; i < 16; ++i) {
        const double th = 0.25 * pi * 0.5 * (detail::gl16_x[i] + 1.0);
        icell += 8.0 * detail::gl16_w[i] * (pi / 16.0) *
                 std::pow(h / (2.0 * std::cos(th)), 1.0 - a) / (1.0 - a);
    }
    S.add(tv * icell);
    S.add(2.0 * l1 * 2.0 * pi * std::pow(jc * h, -a) / a);
    return S.result();
}

inline double sobolev_seminorm(const IntervalSet& E, double alpha) {
    return frac_perimeter(E, alpha, Window::whole_line()).total();
}

// ---------------------------------------------------------------------------
// variation |D^a f|(window)
// ---------------------------------------------------------------------------

inline double frac_variation(const ScalarField& f, double alpha, const Window& w,
                             const QuadParams& q = {}) {
    const GridSpec& s = f.spec;
    if (w.n != s.n)
        throw std::invalid_argument("frac_variation: window dimension mismatch");
    auto g = frac_gradient(f, FracOrder(s.n, alpha), q);
    const double h = s.h();
    detail::Kahan t;
    if (s.n == 1) {
        for (int i = 0; i < s.m; ++i)
            if (w.contains(s.coord(i))) t.add(std::abs(g.comp[0][std::size_t(i)]));
        return t.result() * h;
    }
    for (int iy = 0; iy < s.m; ++iy)
        for (int ix = 0; ix < s.m; ++ix)
            if (w.contains(s.coord(ix), s.coord(iy))) {
                const std::size_t i = s.idx(ix, iy);
                t.add(std::hypot(g.comp[0][i], g.comp[1][i]));
            }
    return t.result() * h * h;
}

namespace detail {

// antiderivative of the closed-form indicator gradient; vanishes at +-inf for
// bounded sets (infinite endpoints drop out, as in the density itself)
inline double indicator_gradient_primitive(const IntervalSet& E, double a, double x) {
    auto H = [a](double t) {
        return std::copysign(std::pow(std::abs(t), 1.0 - a), t) / (1.0 - a);
    };
    double s = 0.0;
    for (auto& p : E.iv) {
        if (std::isfinite(p.first)) s += H(x - p.first);
        if (std::isfinite(p.second)) s -= H(x - p.second);
    }
    return mu(1, a) / a * s;
}

} // namespace detail

// Exact path: the density has a closed-form antiderivative, so the integral of
// its absolute value reduces to locating the sign changes between consecutive
// jump points (sampling plus bisection; the density is sign-constant outside
// the extreme endpoints) and summing primitive differences.
inline double frac_variation(const IntervalSet& E, double alpha, const Window& w,
                             const QuadParams& = {}) {
    FracOrder ord(1, alpha);
    if (w.n != 1)
        throw std::invalid_argument("frac_variation: interval sets need a 1D window");
    if (E.empty()) return 0.0;
    const double lo = detail::side_value(w.lo[0]), hi = detail::side_value(w.hi[0]);
    if (!E.bounded() && (std::isinf(lo) || std::isinf(hi)))
        throw std::invalid_argument(
            "frac_variation: divergent configuration (unbounded set over an unbounded window)");
    std::vector<double> seg{lo};
    for (double e : E.finite_endpoints())
        if (e > lo && e < hi) seg.push_back(e);
    seg.push_back(hi);
    std::sort(seg.begin(), seg.end());
    auto V = [&](double x) { return detail::indicator_gradient_primitive(E, alpha, x); };
    auto v = [&](double x) { return closed_form_indicator_gradient(E, alpha, x); };
    detail::Kahan tot;
    for (std::size_t k = 0; k + 1 < seg.size(); ++k) {
        const double s0 = seg[k], s1 = seg[k + 1];
        if (!(s1 > s0)) continue;
        if (std::isinf(s0) || std::isinf(s1)) {
            const double V0 = std::isinf(s0) ? 0.0 : V(s0);
            const double V1 = std::isinf(s1) ? 0.0 : V(s1);
            tot.add(std::abs(V1 - V0));
            continue;
        }
        const double span = s1 - s0;
        std::vector<double> ts;
        for (int j = 1; j < 128; ++j) ts.push_back(s0 + span * j / 128.0);
        for (int j = 2; j <= 50; ++j) {
            ts.push_back(s0 + span * std::ldexp(1.0, -j));
            ts.push_back(s1 - span * std::ldexp(1.0, -j));
        }
        std::sort(ts.begin(), ts.end());
        ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
        std::vector<double> cuts{s0};
        double tp = ts.front(), vp = v(tp);
        for (std::size_t i = 1; i < ts.size(); ++i) {
            const double tn = ts[i], vn = v(tn);
            if (vp == 0.0) {
                cuts.push_back(tp);
            } else if (vp * vn < 0.0) {
                double a0 = tp, b0 = tn, fa = vp;
                for (int it = 0; it < 200 && b0 - a0 > 1e-16 * span; ++it) {
                    const double mid = 0.5 * (a0 + b0), fm = v(mid);
                    if (fm == 0.0) {
                        a0 = b0 = mid;
                    } else if (fa * fm < 0.0) {
                        b0 = mid;
                    } else {
                        a0 = mid;
                        fa = fm;
                    }
                }
                cuts.push_back(0.5 * (a0 + b0));
            }
            tp = tn;
            vp = vn;
        }
        cuts.push_back(s1);
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
            tot.add(std::abs(V(cuts[i + 1]) - V(cuts[i])));
    }
    return tot.result();
}

namespace detail {

// |grad^a chi_E|(x) in the plane: for each rectangle the kernel integral
// reduces to one-variable integrals with exact inner antiderivatives; nodes on
// an edge line (a null set of the quadrature grid) are flagged and skipped.
inline bool planar_indicator_density(const PolySet& E, double a, double x1, double x2,
                                     double& out) {
    double v1 = 0.0, v2 = 0.0;
    for (auto& r : E.rects) {
        const double p = r.x0 - x1, q = r.x1 - x1;
        const double c = r.y0 - x2, d = r.y1 - x2;
        if (std::abs(p) < 1e-12 || std::abs(q) < 1e-12 || std::abs(c) < 1e-12 ||
            std::abs(d) < 1e-12)
            return false;
        const double e = (1.0 + a) / 2.0;
        {
            const double segs[2][2] = {{c, std::min(d, 0.0)}, {std::max(c, 0.0), d}};
            for (auto& sg : segs) {
                if (!(sg[1] > sg[0])) continue;
                for (int i = 0; i < 16; ++i) {
                    const double t = 0.5 * (sg[0] + sg[1]) + 0.5 * (sg[1] - sg[0]) * gl16_x[i];
                    const double tw = 0.5 * (sg[1] - sg[0]) * gl16_w[i];
                    v1 += tw * (std::pow(p * p + t * t, -e) - std::pow(q * q + t * t, -e)) /
                          (1.0 + a);
                }
            }
        }
        {
            const double segs[2][2] = {{p, std::min(q, 0.0)}, {std::max(p, 0.0), q}};
            for (auto& sg : segs) {
                if (!(sg[1] > sg[0])) continue;
                for (int i = 0; i < 16; ++i) {
                    const double t = 0.5 * (sg[0] + sg[1]) + 0.5 * (sg[1] - sg[0]) * gl16_x[i];
                    const double tw = 0.5 * (sg[1] - sg[0]) * gl16_w[i];
                    v2 += tw * (std::pow(c * c + t * t, -e) - std::pow(d * d + t * t, -e)) /
                          (1.0 + a);
                }
            }
        }
    }
    out = mu(2, a) * std::hypot(v1, v2);
    return true;
}

} // namespace detail

inline double frac_variation(const PolySet& E, double alpha, const Window& w,
                             const QuadParams& = {}) {
    FracOrder ord(2, alpha);
    if (w.n != 2)
        throw std::invalid_argument("frac_variation: rectilinear sets need a 2D window");
    for (int s = 0; s < 2; ++s)
        if (detail::side_unbounded(w.lo[s]) || detail::side_unbounded(w.hi[s]))
            throw std::invalid_argument(
                "frac_variation: bounded window required for the planar set path");
    if (E.rects.empty()) return 0.0;
    const double h = 1.0 / 32.0;
    const int m1 = int(std::lround((w.hi[0] - w.lo[0]) / h)) + 1;
    const int m2 = int(std::lround((w.hi[1] - w.lo[1]) / h)) + 1;
    detail::Kahan tot;
    for (int j = 0; j < m2; ++j) {
        const double x2 = w.lo[1] + h * j;
        detail::Kahan row;
        for (int i = 0; i < m1; ++i) {
            double dens;
            if (detail::planar_indicator_density(E, alpha, w.lo[0] + h * i, x2, dens))
                row.add(dens);
        }
        tot.add(row.result() * h * h);
    }
    return tot.result();
}

// ---------------------------------------------------------------------------
// 1D perimeter, quadrature route: occupancy-weighted node double sum away from
// the jumps, exact pair primitives on the jump bands, exact outside tails
// ---------------------------------------------------------------------------

inline double perimeter_quadrature_1d(const IntervalSet& E, double alpha, double h,
                                      double half_width, int band_cells = 8) {
    FracOrder ord(1, alpha);
    if (!E.bounded())
        throw std::invalid_argument("perimeter_quadrature_1d: bounded set required");
    const int m = int(std::lround(2.0 * half_width / h)) + 1;
    const double B = band_cells * h, Bex = B + h / 2.0;
    const std::vector<double> ends = E.finite_endpoints();
    for (auto& p : E.iv)
        if (!(p.first > -half_width + Bex && p.second < half_width - Bex))
            throw std::invalid_argument("perimeter_quadrature_1d: set touches the box edge");
    for (std::size_t i = 0; i + 1 < ends.size(); ++i)
        if (ends[i + 1] - ends[i] <= 2.0 * Bex)
            throw std::invalid_argument("perimeter_quadrature_1d: jump bands overlap");
    std::vector<double> xs(std::size_t(m), 0.0), occ(std::size_t(m), 0.0);
    std::vector<char> band(std::size_t(m) * ends.size(), 0);
    for (int i = 0; i < m; ++i) {
        const double x = -half_width + h * i;
        xs[std::size_t(i)] = x;
        occ[std::size_t(i)] = E.intersect(x - h / 2.0, x + h / 2.0).measure() / h;
        for (std::size_t e = 0; e < ends.size(); ++e)
            band[std::size_t(i) * ends.size() + e] = std::abs(x - ends[e]) <= B;
    }
    detail::Kahan tot;
    for (int i = 0; i < m; ++i) {
        detail::Kahan row;
        for (int j = 0; j < m; ++j) {
            if (i == j) continue;
            bool excl = false;
            for (std::size_t e = 0; e < ends.size() && !excl; ++e)
                excl = band[std::size_t(i) * ends.size() + e] &&
                       band[std::size_t(j) * ends.size() + e];
            if (excl) continue;
            const double wgt = occ[std::size_t(i)] * (1.0 - occ[std::size_t(j)]);
            if (wgt == 0.0) continue;
            row.add(wgt * std::pow(std::abs(xs[std::size_t(i)] - xs[std::size_t(j)]),
                                   -1.0 - alpha));
        }
        tot.add(2.0 * row.result() * h * h);
    }
    for (double e : ends)
        tot.add(2.0 * detail::pair_interaction(e - Bex, e, e, e + Bex, alpha));
    for (auto& p : E.iv) {
        tot.add(2.0 * detail::pair_interaction(-inf, -half_width - h / 2.0, p.first, p.second,
                                               alpha));
        tot.add(2.0 * detail::pair_interaction(p.first, p.second, half_width + h / 2.0, inf,
                                               alpha));
    }
    return tot.result();
}

// ---------------------------------------------------------------------------
// dual lower bound by projected gradient ascent
// ---------------------------------------------------------------------------

struct DualAscentOptions {
    double step = 0.0; // 0 = set from a power-iteration estimate of the operator norm
    int iters = 500;
    unsigned long long seed = 3;
    QuadParams quad{};
};

struct DualBound {
    double value = 0.0;
    bool stagnated = false;
    std::vector<double> objective; // one entry per iteration, nondecreasing
};

// maximize int f div^a(phi) over fields |phi| <= 1 on window nodes, zero
// elsewhere; the ascent direction is the (negated) adjoint, i.e. -grad^a f,
// and each step projects node-wise onto the unit ball.
inline DualBound dual_variation_lower_bound(const ScalarField& f, double alpha,
                                            const Window& w,
                                            const DualAscentOptions& opt = {}) {
    const GridSpec& s = f.spec;
    FracOrder ord(s.n, alpha);
    detail::require_support(f.support_radius, "dual_variation_lower_bound");
    if (w.n != s.n)
        throw std::invalid_argument("dual_variation_lower_bound: window dimension mismatch");
    if (opt.iters < 1)
        throw std::invalid_argument("dual_variation_lower_bound: iters must be >= 1");
    const std::size_t sz = s.size();
    const double h = s.h();
    const double cell = s.n == 1 ? h : h * h;
    auto g = frac_gradient(f, ord, opt.quad);
    std::vector<char> win(sz);
    if (s.n == 1) {
        for (int i = 0; i < s.m; ++i) win[std::size_t(i)] = w.contains(s.coord(i));
    } else {
        for (int iy = 0; iy < s.m; ++iy)
            for (int ix = 0; ix < s.m; ++ix)
                win[s.idx(ix, iy)] = w.contains(s.coord(ix), s.coord(iy));
    }
    double step = opt.step;
    if (!(step > 0.0)) {
        // ||div||^2 = ||grad o div|| estimated by power iteration
        std::mt19937_64 rng(opt.seed);
        std::normal_distribution<double> nd(0.0, 1.0);
        VectorField v(s);
        v.support_radius = s.L;
        for (int c = 0; c < s.n; ++c)
            for (auto& x : v.comp[std::size_t(c)]) x = nd(rng);
        auto norm2 = [&](const VectorField& u) {
            double q = 0.0;
            for (int c = 0; c < s.n; ++c)
                for (double x : u.comp[std::size_t(c)]) q += x * x;
            return std::sqrt(q);
        };
        for (int it = 0; it < 20; ++it) {
            auto d = frac_divergence(v, ord, opt.quad);
            d.support_radius = s.L;
            auto u = frac_gradient(d, ord, opt.quad);
            const double nr = norm2(u);
            for (int c = 0; c < s.n; ++c)
                for (std::size_t i = 0; i < sz; ++i)
                    v.comp[std::size_t(c)][i] = u.comp[std::size_t(c)][i] / nr;
        }
        auto d = frac_divergence(v, ord, opt.quad);
        d.support_radius = s.L;
        step = 0.5 / std::sqrt(norm2(frac_gradient(d, ord, opt.quad)));
    }
    VectorField phi(s);
    phi.support_radius = s.L;
    DualBound out;
    out.objective.reserve(std::size_t(opt.iters));
    double best = -inf;
    for (int it = 0; it < opt.iters; ++it) {
        for (int c = 0; c < s.n; ++c)
            for (std::size_t i = 0; i < sz; ++i)
                phi.comp[std::size_t(c)][i] -= step * g.comp[std::size_t(c)][i];
        if (s.n == 1) {
            for (std::size_t i = 0; i < sz; ++i)
                phi.comp[0][i] = win[i] ? std::clamp(phi.comp[0][i], -1.0, 1.0) : 0.0;
        } else {
            for (std::size_t i = 0; i < sz; ++i) {
                if (!win[i]) {
                    phi.comp[0][i] = phi.comp[1][i] = 0.0;
                    continue;
                }
                const double r = std::hypot(phi.comp[0][i], phi.comp[1][i]);
                if (r > 1.0) {
                    phi.comp[0][i] /= r;
                    phi.comp[1][i] /= r;
                }
            }
        }
        auto dv = frac_divergence(phi, ord, opt.quad);
        detail::Kahan ob;
        for (std::size_t i = 0; i < sz; ++i) ob.add(f.values[i] * dv.values[i]);
        const double val = ob.result() * cell;
        out.objective.push_back(val);
        best = std::max(best, val);
    }
    out.value = best;
    const int n = opt.iters;
    out.stagnated =
        n > 50 && out.objective[std::size_t(n - 1)] - out.objective[std::size_t(n - 51)] < 1e-9;
    return out;
}

// ---------------------------------------------------------------------------
// equality vs strict comparison of the gradient mass against mu * tilde-P
// ---------------------------------------------------------------------------

enum class EqualityClass { equality, strict };

// Equality holds iff (a) the window part of E carries no mass strictly between
// the extremes of E^c, and (b) symmetrically for the window part of E^c against
// the extremes of E. Both conditions are exact interval-set computations.
inline EqualityClass equality_classifier_1d(const IntervalSet& E, const Window& w) {
    if (w.n != 1)
        throw std::invalid_argument("equality_classifier_1d: 1D window required");
    const double lo = detail::side_value(w.lo[0]), hi = detail::side_value(w.hi[0]);
    const IntervalSet Ec = E.complement();
    bool ok_a = true, ok_b = true;
    if (!Ec.empty())
        ok_a = E.intersect(lo, hi).intersect(Ec.iv.front().first, Ec.iv.back().second).empty();
    if (!E.empty())
        ok_b = Ec.intersect(lo, hi).intersect(E.iv.front().first, E.iv.back().second).empty();
    return ok_a && ok_b ? EqualityClass::equality : EqualityClass::strict;
}

} // namespace riesz
