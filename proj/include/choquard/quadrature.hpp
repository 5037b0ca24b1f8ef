#pragma once

// 1-D quadrature workhorses used across the library:
//  - adaptive Gauss-Kronrod 15(7) for smooth or piecewise-smooth integrands,
//  - tanh-sinh for integrable endpoint singularities,
//  - a dyadic semi-infinite driver for radial integrals over (0, inf).

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace choquard {

namespace qk {

// Kronrod 15-point nodes/weights on [-1,1] with the embedded 7-point Gauss rule.
inline constexpr double xgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double wgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
inline void rule15(const F& f, double a, double b, double& value, double& err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double resg = fc * wg[3];
    double resk = fc * wgk[7];
    for (int j = 0; j < 7; ++j) {
        const double x = h * xgk[j];
        const double fsum = f(c - x) + f(c + x);
        resk += wgk[j] * fsum;
        if (j % 2 == 1) resg += wg[j / 2] * fsum;
    }
    value = resk * h;
    err = std::abs((resk - resg) * h);
}

}  // namespace qk

/// Adaptive Gauss-Kronrod integration of f over [a, b].
template <class F>
inline double adaptive_gk(const F& f, double a, double b, double abs_tol = 1e-12,
                          double rel_tol = 1e-12, int max_depth = 48) {
    struct Seg {
        double a, b, value, err;
        int depth;
    };
    double v0, e0;
    qk::rule15(f, a, b, v0, e0);
    std::vector<Seg> stack{{a, b, v0, e0, 0}};
    double total = v0;
    double result = 0.0;
    const double span = std::abs(b - a);
    while (!stack.empty()) {
        Seg s = stack.back();
        stack.pop_back();
        const double tol_here =
            std::max(abs_tol, rel_tol * std::abs(total)) * std::abs(s.b - s.a) / span;
        if (s.err <= tol_here || s.depth >= max_depth) {
            result += s.value;
            continue;
        }
        const double m = 0.5 * (s.a + s.b);
        double vl, el, vr, er;
        qk::rule15(f, s.a, m, vl, el);
        qk::rule15(f, m, s.b, vr, er);
        total += (vl + vr) - s.value;
        stack.push_back({s.a, m, vl, el, s.depth + 1});
        stack.push_back({m, s.b, vr, er, s.depth + 1});
    }
    return result;
}

namespace detail {

template <class F>
inline double tanh_sinh_term(const F& f, double a, double b, double c, double d, double t) {
    const double pi_half = 1.5707963267948966;
    const double u = pi_half * std::sinh(t);
    const double w = pi_half * std::cosh(t) / std::pow(std::cosh(u), 2);
    if (!(w > 1e-300)) return 0.0;
    const double x = c + d * std::tanh(u);
    // Guard against rounding onto the endpoints where f may be singular. The
    // comparison must use the original endpoints: c + d can round past b.
    if (x <= a || x >= b) return 0.0;
    const double fx = f(x);
    if (!std::isfinite(fx)) return 0.0;
    return fx * w * d;
}

}  // namespace detail

/// tanh-sinh quadrature over [a, b]; tolerates integrable singularities at the
/// endpoints (never evaluates f exactly at a or b).
template <class F>
inline double tanh_sinh(const F& f, double a, double b, double tol = 1e-12) {
    const double c = 0.5 * (a + b);
    const double d = 0.5 * (b - a);
    const double tmax = 3.8;
    double h = 1.0;
    double prev = std::numeric_limits<double>::quiet_NaN();
    double value = 0.0;
    for (int level = 0; level <= 12; ++level) {
        if (level == 0) {
            for (double t = -tmax; t <= tmax + 1e-12; t += h)
                value += detail::tanh_sinh_term(f, a, b, c, d, t);
            value *= h;
        } else {
            double sum = 0.0;
            for (double t = -tmax + 0.5 * h; t <= tmax + 1e-12; t += h)
                sum += detail::tanh_sinh_term(f, a, b, c, d, t);
            value = 0.5 * value + 0.5 * h * sum;
        }
        if (level >= 2 && std::isfinite(prev)) {
            const double diff = std::abs(value - prev);
            if (diff <= tol * std::max(1.0, std::abs(value))) return value;
        }
        prev = value;
        h *= 0.5;
    }
    return value;
}

/// Integral of f over (0, inf): adaptive GK on [0,1], then dyadic blocks
/// [2^k, 2^{k+1}] until a block contributes below tol relative to the running
/// total. Intended for integrands with algebraic decay.
template <class F>
inline double integrate_zero_to_inf(const F& f, double abs_tol = 1e-12, double rel_tol = 1e-11) {
    double total = adaptive_gk(f, 0.0, 1.0, abs_tol, rel_tol);
    double lo = 1.0;
    for (int k = 0; k < 64; ++k) {
        const double hi = 2.0 * lo;
        const double part = adaptive_gk(f, lo, hi, abs_tol, rel_tol);
        total += part;
        if (std::abs(part) <= std::max(abs_tol, rel_tol * std::abs(total)) && k >= 8) break;
        lo = hi;
    }
    return total;
}

}  // namespace choquard
