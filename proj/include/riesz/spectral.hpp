#pragma once

#include <riesz/grid.hpp>
#include <riesz/kernels.hpp>

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

// Fourier-multiplier oracle on zero-padded grids. Independent of the
// quadrature path in kernels.hpp and the only implementation of the
// fractional Laplacian. Multipliers are global, so there is no windowed
// variant, and indicator inputs are out of scope (their transforms decay
// too slowly for the padded-torus truncation).
//
// The Riesz potential is deliberately NOT offered spectrally: its symbol
// |xi|^-sigma blows up at the zero mode and the inputs here are not
// mean-zero. It is cross-validated through the bounded gradient symbol
// instead (grad^a f = grad I_{1-a} f).

namespace riesz {

struct GradientSymbol {
    double alpha;  // i*xi*|xi|^(alpha-1) per component
};
struct DivergenceSymbol {
    double alpha;  // i*xi*|xi|^(alpha-1) contracted against a vector field
};
struct LaplacianSymbol {
    double s;  // |xi|^s; s = 0 degenerates to the identity (DC kept)
};

namespace spectral_detail {

// Plans are created once per (rank, padded size) against representative
// fftw_malloc'd buffers and executed on caller buffers through the
// new-array interface (same alignment class, both out-of-place). The map
// only grows and entries are immutable, so concurrent readers are safe;
// the mutex guards lookup/insert and the non-reentrant planner.
struct PlanEntry {
    fftw_plan fwd = nullptr, inv = nullptr;
    double* rbuf = nullptr;
    fftw_complex* cbuf = nullptr;

    PlanEntry(int rank, int n0) {
        const std::size_t nreal =
            rank == 1 ? std::size_t(n0) : std::size_t(n0) * n0;
        const std::size_t ncplx = rank == 1
                                      ? std::size_t(n0 / 2 + 1)
                                      : std::size_t(n0) * (n0 / 2 + 1);
        rbuf = fftw_alloc_real(nreal);
        cbuf = fftw_alloc_complex(ncplx);
        if (rank == 1) {
            fwd = fftw_plan_dft_r2c_1d(n0, rbuf, cbuf, FFTW_ESTIMATE);
            inv = fftw_plan_dft_c2r_1d(n0, cbuf, rbuf, FFTW_ESTIMATE);
        } else {
            fwd = fftw_plan_dft_r2c_2d(n0, n0, rbuf, cbuf, FFTW_ESTIMATE);
            inv = fftw_plan_dft_c2r_2d(n0, n0, cbuf, rbuf, FFTW_ESTIMATE);
        }
    }
    ~PlanEntry() {
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(inv);
        fftw_free(rbuf);
        fftw_free(cbuf);
    }
    PlanEntry(const PlanEntry&) = delete;
    PlanEntry& operator=(const PlanEntry&) = delete;
};

inline const PlanEntry& plans(int rank, int n0) {
    static std::mutex mtx;
    static std::map<std::pair<int, int>, std::unique_ptr<PlanEntry>> cache;
    std::scoped_lock lk(mtx);
    auto& slot = cache[{rank, n0}];
    if (!slot) slot = std::make_unique<PlanEntry>(rank, n0);
    return *slot;
}

struct RealBuf {
    double* p;
    explicit RealBuf(std::size_t n) : p(fftw_alloc_real(n)) {}
    ~RealBuf() { fftw_free(p); }
    RealBuf(const RealBuf&) = delete;
    RealBuf& operator=(const RealBuf&) = delete;
};
struct CplxBuf {
    fftw_complex* p;
    explicit CplxBuf(std::size_t n) : p(fftw_alloc_complex(n)) {}
    ~CplxBuf() { fftw_free(p); }
    CplxBuf(const CplxBuf&) = delete;
    CplxBuf& operator=(const CplxBuf&) = delete;
};

inline void check_pad(int pad_factor) {
    if (pad_factor < 2)
        throw std::invalid_argument("pad_factor must be at least 2");
}

// Declared support must leave half the box free so the zero padding can
// absorb the kernel tails. Fields without a declared radius (typically
// outputs of a previous multiplier application, which are never compactly
// supported) are accepted as-is; their padded-torus error is part of the
// caller's tolerance budget.
template <class Field>
void check_support(const Field& f) {
    if (f.support_radius && *f.support_radius > f.spec.L * 0.5 + 1e-12)
        throw std::invalid_argument("support too large relative to padding");
}

// sym(xi) for nonnegative xi; the sign carries through the odd symbols
// explicitly below.
inline double power_symbol(double xi, double expo) {
    return std::pow(xi, expo);  // pow(0,0)=1 keeps s=0 the identity
}

// One r2c/c2r round trip on the padded line: out = Re IFFT[ sym * FFT in ],
// restricted to the first m nodes. sym is supplied as separate real and
// imaginary lookups over the nonnegative frequency bins.
template <class SymRe, class SymIm>
std::vector<double> roundtrip_1d(const std::vector<double>& v, int m,
                                 double h, int pad, SymRe&& sre,
                                 SymIm&& sim) {
    const int N = pad * m;
    const auto& pl = plans(1, N);
    RealBuf rb{std::size_t(N)};
    CplxBuf cb{std::size_t(N / 2 + 1)};
    for (int i = 0; i < m; ++i) rb.p[i] = v[i];
    for (int i = m; i < N; ++i) rb.p[i] = 0.0;
    fftw_execute_dft_r2c(pl.fwd, rb.p, cb.p);
    const double dxi = 2.0 * pi / (N * h);
    for (int k = 0; k <= N / 2; ++k) {
        const double xi = k * dxi;
        const double a = sre(xi), b = sim(xi);
        const double re = cb.p[k][0], im = cb.p[k][1];
        cb.p[k][0] = a * re - b * im;
        cb.p[k][1] = a * im + b * re;
    }
    fftw_execute_dft_c2r(pl.inv, cb.p, rb.p);
    std::vector<double> out(std::size_t(m), 0.0);
    const double scale = 1.0 / N;
    for (int i = 0; i < m; ++i) out[i] = rb.p[i] * scale;
    return out;
}

// 2D analogue. Rows are y (slow index), columns x, matching GridSpec::idx.
// sym(kx, ky) is supplied componentwise over the half-spectrum.
template <class SymRe, class SymIm>
std::vector<double> roundtrip_2d(const std::vector<double>& v, int m,
                                 double h, int pad, SymRe&& sre,
                                 SymIm&& sim) {
    const int N = pad * m;
    const int nc = N / 2 + 1;
    const auto& pl = plans(2, N);
    RealBuf rb{std::size_t(N) * N};
    CplxBuf cb{std::size_t(N) * nc};
    std::fill(rb.p, rb.p + std::size_t(N) * N, 0.0);
    for (int iy = 0; iy < m; ++iy)
        for (int ix = 0; ix < m; ++ix)
            rb.p[std::size_t(iy) * N + ix] = v[std::size_t(iy) * m + ix];
    fftw_execute_dft_r2c(pl.fwd, rb.p, cb.p);
    const double dxi = 2.0 * pi / (N * h);
    for (int r = 0; r < N; ++r) {
        const double ky = dxi * (r <= N / 2 ? r : r - N);
        fftw_complex* row = cb.p + std::size_t(r) * nc;
        for (int c = 0; c < nc; ++c) {
            const double kx = dxi * c;
            const double a = sre(kx, ky), b = sim(kx, ky);
            const double re = row[c][0], im = row[c][1];
            row[c][0] = a * re - b * im;
            row[c][1] = a * im + b * re;
        }
    }
    fftw_execute_dft_c2r(pl.inv, cb.p, rb.p);
    std::vector<double> out(std::size_t(m) * m, 0.0);
    const double scale = 1.0 / (double(N) * N);
    for (int iy = 0; iy < m; ++iy)
        for (int ix = 0; ix < m; ++ix)
            out[std::size_t(iy) * m + ix] =
                rb.p[std::size_t(iy) * N + ix] * scale;
    return out;
}

inline void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("alpha must lie in (0,1)");
}

}  // namespace spectral_detail

inline VectorField apply_multiplier(const ScalarField& f, GradientSymbol sym,
                                    int pad_factor = 4) {
    spectral_detail::check_alpha(sym.alpha);
    spectral_detail::check_pad(pad_factor);
    spectral_detail::check_support(f);
    const GridSpec& s = f.spec;
    VectorField g(s);
    const double a = sym.alpha;
    if (s.n == 1) {
        // i*xi*|xi|^(alpha-1) = i*sign(xi)*|xi|^alpha; bins carry xi >= 0
        g.comp[0] = spectral_detail::roundtrip_1d(
            f.values, s.m, s.h(), pad_factor, [](double) { return 0.0; },
            [a](double xi) { return xi > 0.0 ? std::pow(xi, a) : 0.0; });
    } else {
        auto mag = [a](double kx, double ky) {
            const double r = std::hypot(kx, ky);
            return r > 0.0 ? std::pow(r, a - 1.0) : 0.0;
        };
        g.comp[0] = spectral_detail::roundtrip_2d(
            f.values, s.m, s.h(), pad_factor,
            [](double, double) { return 0.0; },
            [mag](double kx, double ky) { return kx * mag(kx, ky); });
        g.comp[1] = spectral_detail::roundtrip_2d(
            f.values, s.m, s.h(), pad_factor,
            [](double, double) { return 0.0; },
            [mag](double kx, double ky) { return ky * mag(kx, ky); });
    }
    return g;
}

inline ScalarField apply_multiplier(const VectorField& phi,
                                    DivergenceSymbol sym,
                                    int pad_factor = 4) {
    spectral_detail::check_alpha(sym.alpha);
    spectral_detail::check_pad(pad_factor);
    spectral_detail::check_support(phi);
    const GridSpec& s = phi.spec;
    ScalarField out(s);
    const double a = sym.alpha;
    if (s.n == 1) {
        out.values = spectral_detail::roundtrip_1d(
            phi.comp[0], s.m, s.h(), pad_factor, [](double) { return 0.0; },
            [a](double xi) { return xi > 0.0 ? std::pow(xi, a) : 0.0; });
    } else {
        auto mag = [a](double kx, double ky) {
            const double r = std::hypot(kx, ky);
            return r > 0.0 ? std::pow(r, a - 1.0) : 0.0;
        };
        out.values = spectral_detail::roundtrip_2d(
            phi.comp[0], s.m, s.h(), pad_factor,
            [](double, double) { return 0.0; },
            [mag](double kx, double ky) { return kx * mag(kx, ky); });
        auto vy = spectral_detail::roundtrip_2d(
            phi.comp[1], s.m, s.h(), pad_factor,
            [](double, double) { return 0.0; },
            [mag](double kx, double ky) { return ky * mag(kx, ky); });
        for (std::size_t i = 0; i < out.values.size(); ++i)
            out.values[i] += vy[i];
    }
    return out;
}

inline ScalarField apply_multiplier(const ScalarField& f, LaplacianSymbol sym,
                                    int pad_factor = 4) {
    if (sym.s < 0.0)
        throw std::invalid_argument("laplacian exponent must be nonnegative");
    spectral_detail::check_pad(pad_factor);
    spectral_detail::check_support(f);
    const GridSpec& s = f.spec;
    ScalarField out(s);
    const double e = sym.s;
    if (s.n == 1) {
        out.values = spectral_detail::roundtrip_1d(
            f.values, s.m, s.h(), pad_factor,
            [e](double xi) { return spectral_detail::power_symbol(xi, e); },
            [](double) { return 0.0; });
    } else {
        out.values = spectral_detail::roundtrip_2d(
            f.values, s.m, s.h(), pad_factor,
            [e](double kx, double ky) {
                return spectral_detail::power_symbol(std::hypot(kx, ky), e);
            },
            [](double, double) { return 0.0; });
    }
    return out;
}

struct IntertwineReport {
    double residual_l1;  // || grad^beta f - grad^alpha u ||_L1 over u's box
    double relative;     // residual / || grad^alpha u ||_L1
};

// Certifies grad^beta [ (-Delta)^((alpha-beta)/2) u ] = grad^alpha u by
// independent paths: f comes from the multiplier oracle, both gradients
// from the quadrature scheme. f is evaluated on a 4x enlarged box (same
// spacing) because it decays only algebraically; the residual is then
// measured on the original box.
inline IntertwineReport intertwine_check(const ScalarField& u, double alpha,
                                         double beta,
                                         const QuadParams& q = {}) {
    spectral_detail::check_alpha(alpha);
    if (!(beta > 0.0 && beta <= alpha))
        throw std::invalid_argument("need 0 < beta <= alpha");
    if (u.spec.n != 1)
        throw std::invalid_argument("intertwine check is one-dimensional");
    detail::require_support(u.support_radius, "intertwine_check");
    const GridSpec& s = u.spec;

    const GridSpec big(1, 4.0 * s.L, 4 * (s.m - 1) + 1);
    const int off = 3 * (s.m - 1) / 2;
    ScalarField ub(big);
    for (int i = 0; i < s.m; ++i) ub.values[off + i] = u.values[i];
    ub.support_radius = u.support_radius;

    ScalarField fb = apply_multiplier(ub, LaplacianSymbol{alpha - beta});
    fb.support_radius = big.L;  // not compact; quadrature sees the whole box
    VectorField gb = frac_gradient(fb, FracOrder(1, beta), q);
    VectorField ga = frac_gradient(u, FracOrder(1, alpha), q);

    detail::Kahan num, den;
    for (int i = 0; i < s.m; ++i) {
        num.add(std::fabs(gb.comp[0][off + i] - ga.comp[0][i]));
        den.add(std::fabs(ga.comp[0][i]));
    }
    IntertwineReport rep;
    rep.residual_l1 = num.result() * s.h();
    rep.relative = den.result() > 0.0 ? num.result() / den.result() : 0.0;
    return rep;
}

}  // namespace riesz
