#pragma once
// Sampled-function substrate: uniform grids on [-L,L]^n (n = 1 or 2), scalar and
// vector fields, analytic test-function constructors, exact 1D/2D set geometry,
// windows, integration, norms, and the classical h-gradient.

#include <riesz/constants.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace riesz {

inline constexpr double inf = std::numeric_limits<double>::infinity();

struct GridSpec {
    int n;
    double L;
    int m;

    GridSpec(int n_, double L_, int m_) : n(n_), L(L_), m(m_) {
        if (n != 1 && n != 2)
            throw std::invalid_argument("GridSpec: n must be 1 or 2");
        if (!(L > 0.0))
            throw std::invalid_argument("GridSpec: half-width must be positive");
        if (m < 3 || m % 2 == 0)
            throw std::invalid_argument("GridSpec: m must be an odd integer >= 3");
    }
    double h() const { return 2.0 * L / (m - 1); }
    std::size_t size() const { return n == 1 ? std::size_t(m) : std::size_t(m) * m; }
    double coord(int i) const { return -L + i * h(); }
    // n=2 storage is node-major with x fastest: values[iy*m + ix]
    std::size_t idx(int ix, int iy) const { return std::size_t(iy) * m + ix; }
    bool operator==(const GridSpec& o) const { return n == o.n && L == o.L && m == o.m; }
};

// Power-law far-field model |v(x)| ~= coef * |x|^{-expo} for |x| beyond the box;
// attached by the potential operator so that nested applications can integrate
// the mass that lives outside the grid.
struct TailInfo {
    double coef;
    double expo;
};

// ---------------------------------------------------------------------------
// exact set geometry
// ---------------------------------------------------------------------------

// Ordered disjoint open intervals; the outermost endpoints may be +-infinity
// (half-lines). Bounded operations reject unbounded sets explicitly.
struct IntervalSet {
    std::vector<std::pair<double, double>> iv;

    IntervalSet() = default;
    explicit IntervalSet(std::vector<std::pair<double, double>> raw) {
        for (auto& p : raw)
            if (!(p.first < p.second))
                throw std::invalid_argument("IntervalSet: need a < b for every interval");
        std::sort(raw.begin(), raw.end());
        for (auto& p : raw) {
            if (!iv.empty() && p.first <= iv.back().second) {
                if (p.first < iv.back().second)
                    throw std::invalid_argument("IntervalSet: overlapping intervals");
                iv.back().second = std::max(iv.back().second, p.second); // merge touching
            } else {
                iv.push_back(p);
            }
        }
    }

    bool empty() const { return iv.empty(); }
    bool bounded() const {
        return iv.empty() || (std::isfinite(iv.front().first) && std::isfinite(iv.back().second));
    }
    double measure() const {
        double s = 0.0;
        for (auto& p : iv) s += p.second - p.first;
        return s;
    }
    bool contains(double x) const {
        for (auto& p : iv)
            if (x > p.first && x < p.second) return true;
        return false;
    }
    // complement as an IntervalSet (always has unbounded ends unless covered)
    IntervalSet complement() const {
        IntervalSet c;
        double lo = -inf;
        for (auto& p : iv) {
            if (p.first > lo) c.iv.push_back({lo, p.first});
            lo = p.second;
        }
        if (lo < inf) c.iv.push_back({lo, inf});
        return c;
    }
    IntervalSet intersect(double a, double b) const {
        IntervalSet r;
        for (auto& p : iv) {
            const double lo = std::max(p.first, a), hi = std::min(p.second, b);
            if (lo < hi) r.iv.push_back({lo, hi});
        }
        return r;
    }
    std::vector<double> finite_endpoints() const {
        std::vector<double> e;
        for (auto& p : iv) {
            if (std::isfinite(p.first)) e.push_back(p.first);
            if (std::isfinite(p.second)) e.push_back(p.second);
        }
        return e;
    }
};

// Axis-aligned rectangle [x0,x1] x [y0,y1].
struct Rect {
    double x0, x1, y0, y1;
    double area() const { return (x1 - x0) * (y1 - y0); }
};

// Rectilinear set in the plane, stored as a union of rectangles with disjoint
// interiors. Constructible directly from rectangles or from rectilinear simple
// polygon rings (holes supported through even-odd scanline decomposition).
struct PolySet {
    std::vector<Rect> rects;

    PolySet() = default;
    explicit PolySet(std::vector<Rect> rs) : rects(std::move(rs)) {
        for (auto& r : rects)
            if (!(r.x0 < r.x1) || !(r.y0 < r.y1))
                throw std::invalid_argument("PolySet: degenerate rectangle");
        for (std::size_t i = 0; i < rects.size(); ++i)
            for (std::size_t j = i + 1; j < rects.size(); ++j) {
                const Rect &a = rects[i], &b = rects[j];
                if (a.x0 < b.x1 && b.x0 < a.x1 && a.y0 < b.y1 && b.y0 < a.y1)
                    throw std::invalid_argument("PolySet: rectangles overlap");
            }
    }

    // Decompose one or more rectilinear rings (vertex lists, consecutive points
    // differ in exactly one coordinate) into slab rectangles by even-odd rule.
    static PolySet from_rings(const std::vector<std::vector<std::array<double, 2>>>& rings) {
        struct HEdge { double xa, xb, y; };
        std::vector<HEdge> hedges;
        std::vector<double> xs;
        for (const auto& ring : rings) {
            const std::size_t k = ring.size();
            if (k < 4) throw std::invalid_argument("PolySet: ring too short");
            for (std::size_t i = 0; i < k; ++i) {
                const auto &p = ring[i], &q = ring[(i + 1) % k];
                const bool dx = p[0] != q[0], dy = p[1] != q[1];
                if (dx == dy)
                    throw std::invalid_argument("PolySet: ring is not rectilinear");
                if (dx)
                    hedges.push_back({std::min(p[0], q[0]), std::max(p[0], q[0]), p[1]});
                xs.push_back(p[0]);
            }
        }
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
        std::vector<Rect> out;
        for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
            const double xm = 0.5 * (xs[i] + xs[i + 1]);
            std::vector<double> cuts;
            for (const auto& e : hedges)
                if (e.xa < xm && xm < e.xb) cuts.push_back(e.y);
            std::sort(cuts.begin(), cuts.end());
            if (cuts.size() % 2)
                throw std::invalid_argument("PolySet: ring is not a closed rectilinear curve");
            for (std::size_t j = 0; j + 1 < cuts.size(); j += 2)
                out.push_back({xs[i], xs[i + 1], cuts[j], cuts[j + 1]});
        }
        return PolySet(out);
    }

    double area() const {
        double s = 0.0;
        for (auto& r : rects) s += r.area();
        return s;
    }
    bool contains(double x, double y) const {
        for (auto& r : rects)
            if (x > r.x0 && x < r.x1 && y > r.y0 && y < r.y1) return true;
        return false;
    }

    // Boundary of the union as maximal axis-aligned segments: for each rectangle
    // side, subtract the portions shared with a neighboring rectangle.
    struct Edge { double a, b, pos; bool vertical; }; // span [a,b] at coordinate pos
    std::vector<Edge> boundary_edges() const {
        std::vector<Edge> out;
        auto push_side = [&](bool vertical, double pos, double a, double b,
                             const Rect& self) {
            // collect covered sub-intervals from adjacent rectangles
            std::vector<std::pair<double, double>> cover;
            for (auto& r : rects) {
                if (&r == &self) continue;
                if (vertical) {
                    if (r.x0 == pos || r.x1 == pos) {
                        const double lo = std::max(a, r.y0), hi = std::min(b, r.y1);
                        if (lo < hi) cover.push_back({lo, hi});
                    }
                } else {
                    if (r.y0 == pos || r.y1 == pos) {
                        const double lo = std::max(a, r.x0), hi = std::min(b, r.x1);
                        if (lo < hi) cover.push_back({lo, hi});
                    }
                }
            }
            std::sort(cover.begin(), cover.end());
            double lo = a;
            for (auto& c : cover) {
                if (c.first > lo) out.push_back({lo, c.first, pos, vertical});
                lo = std::max(lo, c.second);
            }
            if (lo < b) out.push_back({lo, b, pos, vertical});
        };
        for (auto& r : rects) {
            push_side(true, r.x0, r.y0, r.y1, r);
            push_side(true, r.x1, r.y0, r.y1, r);
            push_side(false, r.y0, r.x0, r.x1, r);
            push_side(false, r.y1, r.x0, r.x1, r);
        }
        return out;
    }
    double perimeter() const {
        double s = 0.0;
        for (auto& e : boundary_edges()) s += e.b - e.a;
        return s;
    }
};

// Open axis-aligned window (interval in 1D, box in 2D).
struct Window {
    int n;
    std::array<double, 2> lo{}, hi{};

    Window(double a, double b) : n(1) {
        if (!(a < b)) throw std::invalid_argument("Window: need a < b");
        lo[0] = a; hi[0] = b;
    }
    Window(double ax, double bx, double ay, double by) : n(2) {
        if (!(ax < bx) || !(ay < by)) throw std::invalid_argument("Window: need a < b per axis");
        lo = {ax, ay}; hi = {bx, by};
    }
    static Window whole_line() { return Window(-1e300, 1e300); }
    static Window whole_plane() { return Window(-1e300, 1e300, -1e300, 1e300); }

    bool contains(double x) const { return n == 1 && x > lo[0] && x < hi[0]; }
    bool contains(double x, double y) const {
        return n == 2 && x > lo[0] && x < hi[0] && y > lo[1] && y < hi[1];
    }
    double measure() const {
        double s = 1.0;
        for (int a = 0; a < n; ++a) s *= hi[a] - lo[a];
        return s;
    }
    double diam() const {
        double s = 0.0;
        for (int a = 0; a < n; ++a) s += (hi[a] - lo[a]) * (hi[a] - lo[a]);
        return std::sqrt(s);
    }
};

// ---------------------------------------------------------------------------
// fields
// ---------------------------------------------------------------------------

struct ScalarField {
    GridSpec spec;
    std::vector<double> values;
    std::optional<double> support_radius;
    std::optional<TailInfo> tail;          // see TailInfo
    std::optional<IntervalSet> geometry;   // set when built as an exact 1D indicator

    explicit ScalarField(const GridSpec& s)
        : spec(s), values(s.size(), 0.0) {}
    ScalarField(const GridSpec& s, std::vector<double> v, std::optional<double> rad = {})
        : spec(s), values(std::move(v)), support_radius(rad) {
        if (values.size() != spec.size())
            throw std::invalid_argument("ScalarField: value count does not match grid");
        validate();
    }
    void validate() const {
        for (double v : values)
            if (!std::isfinite(v))
                throw std::invalid_argument("ScalarField: non-finite value");
    }
};

struct VectorField {
    GridSpec spec;
    std::array<std::vector<double>, 2> comp; // comp[1] unused when n == 1
    std::optional<double> support_radius;

    explicit VectorField(const GridSpec& s) : spec(s) {
        for (int a = 0; a < s.n; ++a) comp[a].assign(s.size(), 0.0);
    }
    void validate() const {
        for (int a = 0; a < spec.n; ++a)
            for (double v : comp[a])
                if (!std::isfinite(v))
                    throw std::invalid_argument("VectorField: non-finite value");
    }
};

// ---------------------------------------------------------------------------
// constructors
// ---------------------------------------------------------------------------

namespace detail {
inline double bump_profile(double t2) { // t2 = |x-c|^2 / r^2
    return t2 < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - t2)) : 0.0;
}
// C^infinity transition: 1 for t <= 0, 0 for t >= 1
inline double cutoff_psi(double t) {
    if (t <= 0.0) return 1.0;
    if (t >= 1.0) return 0.0;
    const double qa = std::exp(-1.0 / t), qb = std::exp(-1.0 / (1.0 - t));
    return qb / (qa + qb);
}
inline void check_margin(const GridSpec& s, double cabs, double radius) {
    if (cabs + radius > s.L - 4.0 * s.h())
        throw std::invalid_argument("support does not fit inside the grid box with 4h margin");
}
} // namespace detail

inline ScalarField make_bump(const GridSpec& s, double center, double radius,
                             double height = 1.0) {
    if (s.n != 1) throw std::invalid_argument("make_bump: 1D overload on a 2D grid");
    detail::check_margin(s, std::abs(center), radius);
    ScalarField f(s);
    for (int i = 0; i < s.m; ++i) {
        const double t = (s.coord(i) - center) / radius;
        f.values[i] = height * detail::bump_profile(t * t);
    }
    f.support_radius = std::abs(center) + radius;
    return f;
}

inline ScalarField make_bump(const GridSpec& s, std::array<double, 2> c, double radius,
                             double height = 1.0) {
    if (s.n != 2) throw std::invalid_argument("make_bump: 2D overload on a 1D grid");
    const double cx = c[0], cy = c[1];
    detail::check_margin(s, std::max(std::abs(cx), std::abs(cy)), radius);
    ScalarField f(s);
    for (int iy = 0; iy < s.m; ++iy)
        for (int ix = 0; ix < s.m; ++ix) {
            const double dx = s.coord(ix) - cx, dy = s.coord(iy) - cy;
            f.values[s.idx(ix, iy)] =
                height * detail::bump_profile((dx * dx + dy * dy) / (radius * radius));
        }
    f.support_radius = std::sqrt(cx * cx + cy * cy) + radius;
    return f;
}

inline ScalarField make_gaussian_cutoff(const GridSpec& s, double sigma,
                                        double cutoff_radius) {
    detail::check_margin(s, 0.0, cutoff_radius);
    const double r0 = 0.75 * cutoff_radius;
    ScalarField f(s);
    auto val = [&](double r2) {
        const double r = std::sqrt(r2);
        if (r >= cutoff_radius) return 0.0;
        return std::exp(-r2 / (2.0 * sigma * sigma)) *
               detail::cutoff_psi((r - r0) / (cutoff_radius - r0));
    };
    if (s.n == 1) {
        for (int i = 0; i < s.m; ++i) f.values[i] = val(s.coord(i) * s.coord(i));
    } else {
        for (int iy = 0; iy < s.m; ++iy)
            for (int ix = 0; ix < s.m; ++ix)
                f.values[s.idx(ix, iy)] =
                    val(s.coord(ix) * s.coord(ix) + s.coord(iy) * s.coord(iy));
    }
    f.support_radius = cutoff_radius;
    return f;
}

// Pointwise indicator sample carrying its exact geometry (open-set convention:
// endpoint nodes sample to 0).
inline ScalarField indicator(const GridSpec& s, const IntervalSet& E) {
    if (s.n != 1) throw std::invalid_argument("indicator: IntervalSet needs a 1D grid");
    ScalarField f(s);
    for (int i = 0; i < s.m; ++i) f.values[i] = E.contains(s.coord(i)) ? 1.0 : 0.0;
    const auto ep = E.finite_endpoints();
    if (!E.bounded()) {
        f.support_radius.reset();
    } else {
        double r = 0.0;
        for (double e : ep) r = std::max(r, std::abs(e));
        f.support_radius = r;
    }
    f.geometry = E;
    return f;
}

// ---------------------------------------------------------------------------
// integration, norms, classical derivative
// ---------------------------------------------------------------------------

namespace detail {
// per-axis cell weight: overlap of the node cell with both the grid box and the window
inline double axis_weight(const GridSpec& s, int i, double wlo, double whi) {
    const double h = s.h(), x = s.coord(i);
    const double lo = std::max({x - 0.5 * h, -s.L, wlo});
    const double hi = std::min({x + 0.5 * h, s.L, whi});
    return std::max(0.0, hi - lo);
}
} // namespace detail

inline double integrate(const ScalarField& f, const Window& w) {
    const GridSpec& s = f.spec;
    if (w.n != s.n) throw std::invalid_argument("integrate: window dimension mismatch");
    double acc = 0.0, comp = 0.0; // Kahan
    auto add = [&](double v) {
        const double y = v - comp, t = acc + y;
        comp = (t - acc) - y;
        acc = t;
    };
    if (s.n == 1) {
        for (int i = 0; i < s.m; ++i)
            add(f.values[i] * detail::axis_weight(s, i, w.lo[0], w.hi[0]));
    } else {
        std::vector<double> wx(s.m), wy(s.m);
        for (int i = 0; i < s.m; ++i) {
            wx[i] = detail::axis_weight(s, i, w.lo[0], w.hi[0]);
            wy[i] = detail::axis_weight(s, i, w.lo[1], w.hi[1]);
        }
        for (int iy = 0; iy < s.m; ++iy) {
            if (wy[iy] == 0.0) continue;
            for (int ix = 0; ix < s.m; ++ix)
                add(f.values[s.idx(ix, iy)] * wx[ix] * wy[iy]);
        }
    }
    return acc;
}

inline double integrate(const ScalarField& f) {
    return integrate(f, f.spec.n == 1 ? Window::whole_line() : Window::whole_plane());
}

namespace detail {
template <class MagAt>
double lp_norm_impl(const GridSpec& s, const Window& w, int p, MagAt mag) {
    if (w.n != s.n) throw std::invalid_argument("lp_norm: window dimension mismatch");
    if (p != 1 && p != 2 && p != 0 /*inf sentinel*/)
        throw std::invalid_argument("lp_norm: p must be 1, 2, or inf");
    double acc = 0.0, comp = 0.0, mx = 0.0;
    auto add = [&](double v) {
        const double y = v - comp, t = acc + y;
        comp = (t - acc) - y;
        acc = t;
    };
    auto visit = [&](std::size_t k, double wgt) {
        if (wgt == 0.0) return;
        const double a = mag(k);
        if (p == 0) mx = std::max(mx, a);
        else add(wgt * (p == 1 ? a : a * a));
    };
    if (s.n == 1) {
        for (int i = 0; i < s.m; ++i) visit(i, axis_weight(s, i, w.lo[0], w.hi[0]));
    } else {
        std::vector<double> wx(s.m), wy(s.m);
        for (int i = 0; i < s.m; ++i) {
            wx[i] = axis_weight(s, i, w.lo[0], w.hi[0]);
            wy[i] = axis_weight(s, i, w.lo[1], w.hi[1]);
        }
        for (int iy = 0; iy < s.m; ++iy) {
            if (wy[iy] == 0.0) continue;
            for (int ix = 0; ix < s.m; ++ix) visit(s.idx(ix, iy), wx[ix] * wy[iy]);
        }
    }
    if (p == 0) return mx;
    return p == 1 ? acc : std::sqrt(acc);
}
} // namespace detail

inline constexpr int p_inf = 0; // sentinel for the sup norm

inline double lp_norm(const ScalarField& f, int p, const Window& w) {
    return detail::lp_norm_impl(f.spec, w, p,
                                [&](std::size_t k) { return std::abs(f.values[k]); });
}
inline double lp_norm(const ScalarField& f, int p) {
    return lp_norm(f, p, f.spec.n == 1 ? Window::whole_line() : Window::whole_plane());
}
inline double lp_norm(const VectorField& v, int p, const Window& w) {
    if (v.spec.n == 1)
        return detail::lp_norm_impl(v.spec, w, p,
                                    [&](std::size_t k) { return std::abs(v.comp[0][k]); });
    return detail::lp_norm_impl(v.spec, w, p, [&](std::size_t k) {
        return std::sqrt(v.comp[0][k] * v.comp[0][k] + v.comp[1][k] * v.comp[1][k]);
    });
}
inline double lp_norm(const VectorField& v, int p) {
    return lp_norm(v, p, v.spec.n == 1 ? Window::whole_line() : Window::whole_plane());
}

namespace detail {
// 4th-order derivative along one axis; one-sided stencils on the outermost two nodes
template <class Get>
void diff4(int m, double h, Get g, std::vector<double>& out, std::size_t stride,
           std::size_t base) {
    static constexpr double c1[5] = {-25.0 / 12, 4.0, -3.0, 4.0 / 3, -0.25};
    for (int i = 0; i < m; ++i) {
        double d;
        if (i >= 2 && i <= m - 3) {
            d = (g(i - 2) - 8.0 * g(i - 1) + 8.0 * g(i + 1) - g(i + 2)) / 12.0;
        } else if (i < 2) {
            d = 0.0;
            for (int k = 0; k < 5; ++k) d += c1[k] * g(i + k);
        } else {
            d = 0.0;
            for (int k = 0; k < 5; ++k) d -= c1[k] * g(i - k);
        }
        out[base + i * stride] = d / h;
    }
}
} // namespace detail

inline VectorField local_gradient(const ScalarField& f) {
    const GridSpec& s = f.spec;
    VectorField g(s);
    const double h = s.h();
    if (s.n == 1) {
        detail::diff4(s.m, h, [&](int i) { return f.values[i]; }, g.comp[0], 1, 0);
    } else {
        for (int iy = 0; iy < s.m; ++iy)
            detail::diff4(s.m, h, [&](int i) { return f.values[s.idx(i, iy)]; },
                          g.comp[0], 1, s.idx(0, iy));
        for (int ix = 0; ix < s.m; ++ix)
            detail::diff4(s.m, h, [&](int i) { return f.values[s.idx(ix, i)]; },
                          g.comp[1], s.m, ix);
    }
    g.support_radius = f.support_radius ? std::optional<double>(*f.support_radius + 2 * h)
                                        : std::nullopt;
    return g;
}

inline double classical_variation(const ScalarField& f, const Window& w) {
    return lp_norm(local_gradient(f), 1, w);
}
inline double classical_variation(const IntervalSet& E, const Window& w) {
    if (w.n != 1) throw std::invalid_argument("classical_variation: window dimension mismatch");
    int c = 0;
    for (double e : E.finite_endpoints())
        if (w.contains(e)) ++c;
    return double(c);
}
inline double classical_variation(const PolySet& E, const Window& w) {
    if (w.n != 2) throw std::invalid_argument("classical_variation: window dimension mismatch");
    double s = 0.0;
    for (const auto& e : E.boundary_edges()) {
        const int ax = e.vertical ? 1 : 0;       // span axis
        const int px = e.vertical ? 0 : 1;       // position axis
        if (e.pos <= w.lo[px] || e.pos >= w.hi[px]) continue;
        s += std::max(0.0, std::min(e.b, w.hi[ax]) - std::max(e.a, w.lo[ax]));
    }
    return s;
}

} // namespace riesz
