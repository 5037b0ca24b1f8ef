#pragma once

// Energies, constraints, gradients, and the identity battery.
//
// Discrete inner product throughout: <f,g> = sum_j w_j f_j g_j. Gradients are
// taken with respect to this inner product, so the finite-difference identity
// (E(u+eps v) - E(u-eps v))/(2 eps) = <grad E, v> holds to rounding for the
// quadratic energy and to O(eps^2) for the interaction term.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "choquard/grid.hpp"
#include "choquard/params.hpp"
#include "choquard/potentials.hpp"
#include "choquard/quadrature.hpp"
#include "choquard/riesz.hpp"

namespace choquard {

/// The two-parameter extremal profile u(r) = C (lambda/(lambda^2+r^2))^{dim/2}.
struct HlsProfile {
    double C = 1.0;
    double lambda = 1.0;
};

inline double hls_value(const HlsProfile& h, int dim, double r) {
    return h.C * std::pow(h.lambda / (h.lambda * h.lambda + r * r), 0.5 * dim);
}

inline std::vector<double> hls_field(const HlsProfile& h, const RadialGrid& g) {
    std::vector<double> u(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) u[j] = hls_value(h, g.dim, g.r[j]);
    return u;
}

/// Q(u) = int |grad u|^2 + V |u|^2, with V given as node values.
inline double energy_Q(const RadialGrid& g, const std::vector<double>& Vvals,
                       const std::vector<double>& u) {
    if (Vvals.size() != g.size() || u.size() != g.size())
        throw std::invalid_argument("energy_Q: size mismatch");
    double s = kinetic_energy(g, u);
    for (std::size_t j = 0; j < g.size(); ++j) s += g.w[j] * Vvals[j] * u[j] * u[j];
    return s;
}

inline double energy_Q(const RadialGrid& g, const Potential& V, const std::vector<double>& u) {
    return energy_Q(g, eval_potential(V, g), u);
}

/// Scale-invariant quotient Q(u) / D(u)^{dim/(dim+alpha)}.
inline double critical_quotient(const RadialGrid& g, const std::vector<double>& Vvals,
                                const RieszOperator& op, const std::vector<double>& u) {
    const double d = constraint_D(op, u);
    if (!(d > 0.0)) throw std::invalid_argument("critical_quotient: D(u) must be positive");
    const double ex = static_cast<double>(op.params.dim) / (op.params.dim + op.params.alpha);
    return energy_Q(g, Vvals, u) / std::pow(d, ex);
}

/// Gradient of Q in the quadrature inner product:
/// grad_Q = 2 W^{-1} D^T W D u + 2 V u, with D the nodal derivative operator.
inline std::vector<double> grad_Q(const RadialGrid& g, const std::vector<double>& Vvals,
                                  const std::vector<double>& u) {
    const std::size_t n = g.size();
    if (Vvals.size() != n || u.size() != n) throw std::invalid_argument("grad_Q: size mismatch");
    const std::vector<double> du = radial_derivative(g, u);
    std::vector<double> out(n, 0.0);
    double c0, c1, c2;
    // Scatter D^T (W du): row k of D touches columns (k-1,k,k+1), one-sided rows
    // 0 and n-1 touch (0,1,2) and (n-1,n-2,n-3).
    {
        detail::d1_weights_left(g.r[0], g.r[1], g.r[2], c0, c1, c2);
        const double t = g.w[0] * du[0];
        out[0] += c0 * t;
        out[1] += c1 * t;
        out[2] += c2 * t;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
        detail::d1_weights(g.r[k - 1], g.r[k], g.r[k + 1], c0, c1, c2);
        const double t = g.w[k] * du[k];
        out[k - 1] += c0 * t;
        out[k] += c1 * t;
        out[k + 1] += c2 * t;
    }
    {
        detail::d1_weights_left(g.r[n - 1], g.r[n - 2], g.r[n - 3], c0, c1, c2);
        const double t = g.w[n - 1] * du[n - 1];
        out[n - 1] += c0 * t;
        out[n - 2] += c1 * t;
        out[n - 3] += c2 * t;
    }
    for (std::size_t j = 0; j < n; ++j) out[j] = 2.0 * out[j] / g.w[j] + 2.0 * Vvals[j] * u[j];
    return out;
}

/// Gradient of D: grad_D = 2p (conv |u|^p) sign(u) |u|^{p-1}; the |u|^{p-2}u
/// factor is extended by 0 where u = 0 (continuous since p > 1).
inline std::vector<double> grad_D(const RieszOperator& op, const std::vector<double>& u) {
    const std::size_t n = op.n;
    if (u.size() != n) throw std::invalid_argument("grad_D: size mismatch");
    const double p = op.params.p();
    std::vector<double> gpow(n);
    for (std::size_t j = 0; j < n; ++j) gpow[j] = std::pow(std::abs(u[j]), p);
    const std::vector<double> conv = riesz_apply(op, gpow);
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double m = (u[j] == 0.0) ? 0.0
                                       : std::copysign(std::pow(std::abs(u[j]), p - 1.0), u[j]);
        out[j] = 2.0 * p * conv[j] * m;
    }
    return out;
}

struct IdentityReport {
    double nehari_residual = 0.0;
    double pohozaev_residual = 0.0;
    double pohozaev_reduced_residual = 0.0;
    bool degenerate_tilt = false;  // radial tilt vanishes identically (constant V)
    // Ingredients, for reporting.
    double kinetic = 0.0;
    double potential_term = 0.0;
    double nonlocal = 0.0;
    double tilt_term = 0.0;
};

/// Residuals of the three solution identities, each |LHS-RHS|/(|LHS|+|RHS|+floor).
/// Intended for fields in the equation normalization (multiplier absorbed).
inline IdentityReport identity_report(const RadialGrid& g, const Potential& V,
                                      const RieszOperator& op, const std::vector<double>& u) {
    IdentityReport rep;
    const std::vector<double> Vvals = eval_potential(V, g);
    const std::vector<double> tilt = radial_tilt(V, g);
    rep.kinetic = kinetic_energy(g, u);
    for (std::size_t j = 0; j < g.size(); ++j) {
        rep.potential_term += g.w[j] * Vvals[j] * u[j] * u[j];
        rep.tilt_term += g.w[j] * tilt[j] * u[j] * u[j];
    }
    rep.nonlocal = constraint_D(op, u);
    const double scale = rep.kinetic + std::abs(rep.potential_term) + rep.nonlocal;
    const double floor = 1e-14 * std::max(1.0, scale);
    const int N = g.dim;

    const double neh_l = rep.kinetic + rep.potential_term;
    const double neh_r = rep.nonlocal;
    rep.nehari_residual = std::abs(neh_l - neh_r) / (std::abs(neh_l) + std::abs(neh_r) + floor);

    const double poh_l = 0.5 * (N - 2) * rep.kinetic + 0.5 * N * rep.potential_term +
                         0.5 * rep.tilt_term;
    const double poh_r = 0.5 * N * rep.nonlocal;
    rep.pohozaev_residual =
        std::abs(poh_l - poh_r) / (std::abs(poh_l) + std::abs(poh_r) + floor);

    const double red_l = rep.kinetic;
    const double red_r = 0.5 * rep.tilt_term;
    rep.pohozaev_reduced_residual =
        std::abs(red_l - red_r) / (std::abs(red_l) + std::abs(red_r) + floor);

    double tilt_mag = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) tilt_mag += g.w[j] * std::abs(tilt[j]) * u[j] * u[j];
    rep.degenerate_tilt = tilt_mag <= floor;
    return rep;
}

/// Functional behind the dilation sufficient condition, evaluated on the
/// D-normalized profile at dilation lambda:
///   lambda^2 int |grad u_lambda|^2 + lambda^2 int (V-1) |u_lambda|^2.
/// For dim >= 3 the kinetic part is folded into the sharp weighted-Hardy form
/// with constant dim^2(dim-2)/(4(dim+1)); for dim <= 2 the direct form is used.
inline double i_v_functional(const Potential& V, const ProblemParams& p, double lambda) {
    p.validate();
    if (!(lambda > 0.0)) throw std::invalid_argument("i_v_functional: lambda must be positive");
    const int N = p.dim;
    const double C = profile_unit_amplitude(N, p.alpha);
    const double C2 = C * C;
    const double area = sphere_area(N);
    if (N >= 3) {
        const double KH = thresholds(N).sufficient;
        auto f = [&](double rho) {
            const double pot = 1.0 - potential_value(V, N, lambda * rho);
            const double bump = std::pow(1.0 + rho * rho, -N);
            return (KH / (rho * rho) - lambda * lambda * pot) * C2 * area *
                   std::pow(rho, N - 1) * bump;
        };
        return integrate_zero_to_inf(f, 1e-13, 1e-11);
    }
    // Direct form: kinetic term of the unit-scale profile plus the tilted well.
    auto fk = [&](double rho) {
        // |u_1'|^2 r^{N-1} for u_1 = C (1+rho^2)^{-N/2}
        const double du = -N * rho * std::pow(1.0 + rho * rho, -0.5 * N - 1.0);
        return C2 * area * du * du * std::pow(rho, N - 1);
    };
    auto fv = [&](double rho) {
        const double pot = potential_value(V, N, lambda * rho) - 1.0;
        return lambda * lambda * pot * C2 * area * std::pow(1.0 + rho * rho, -N) *
               std::pow(rho, N - 1);
    };
    return integrate_zero_to_inf(fk, 1e-13, 1e-11) + integrate_zero_to_inf(fv, 1e-13, 1e-11);
}

struct IvScanResult {
    std::vector<double> lambdas;
    std::vector<double> values;
    double infimum = 0.0;
    double argmin = 0.0;
    bool negative = false;
};

inline IvScanResult i_v_scan(const Potential& V, const ProblemParams& p,
                             const std::vector<double>& lambda_grid) {
    if (lambda_grid.empty()) throw std::invalid_argument("i_v_scan: empty lambda grid");
    IvScanResult res;
    res.lambdas = lambda_grid;
    res.values.reserve(lambda_grid.size());
    for (double l : lambda_grid) res.values.push_back(i_v_functional(V, p, l));
    std::size_t k = 0;
    for (std::size_t i = 1; i < res.values.size(); ++i)
        if (res.values[i] < res.values[k]) k = i;
    res.infimum = res.values[k];
    res.argmin = res.lambdas[k];
    res.negative = res.infimum < 0.0;
    return res;
}

/// Threshold mass evaluated through quadrature at dilation lambda. The exact
/// value is lambda-independent; agreement across lambda probes the quadrature.
inline double c_infty_by_quadrature(const ProblemParams& p, double lambda) {
    p.validate();
    if (!(lambda > 0.0)) throw std::invalid_argument("c_infty_by_quadrature: lambda > 0 required");
    const int N = p.dim;
    const double area = sphere_area(N);
    auto f = [&](double r) {
        return area * std::pow(r, N - 1) *
               std::pow(lambda * lambda + r * r, -static_cast<double>(N));
    };
    const double J = integrate_zero_to_inf(f, 1e-14, 1e-12);
    const double Ap = profile_convolution_constant(N, p.alpha);
    const double s = static_cast<double>(N) + p.alpha;
    return std::pow(std::pow(lambda, N) * J, p.alpha / s) * std::pow(Ap, -N / s);
}

/// Largest Rayleigh value of int W phi^2 against int |grad phi|^2 over radial
/// piecewise-linear phi (constant below the first node, falling linearly to
/// zero at r_max), by power iteration on a tridiagonal pencil. Both forms are
/// integrated exactly, with the weight carried as q = W r^2 interpolated
/// linearly between nodes, so whenever q really is piecewise linear (any
/// c/r^2 tilt in particular) the value is the continuum quotient of a genuine
/// trial function and can never exceed the continuum sup. For other weights it
/// is a consistent second-order estimate, not a certificate.
inline double hardy_weighted_sup(const RadialGrid& g, const std::vector<double>& W, double tol,
                                 int max_iters = 400) {
    const std::size_t n = g.size();
    if (W.size() != n) throw std::invalid_argument("hardy_weighted_sup: size mismatch");
    const double area = sphere_area(g.dim);
    std::vector<double> q(n);
    double wmax = 0.0;
    std::size_t peak = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const double wj = std::max(W[j], 0.0);
        q[j] = wj * g.r[j] * g.r[j];
        if (wj > wmax) {
            wmax = wj;
            peak = j;
        }
    }
    if (wmax == 0.0) return 0.0;

    // Dirichlet form with exact r^{dim-1} moments per inter-node interval.
    auto moment = [&](double b, double a) {
        return area * (std::pow(a, g.dim) - std::pow(b, g.dim)) / g.dim;
    };
    Tridiag L;
    L.diag.assign(n, 0.0);
    L.lower.assign(n, 0.0);
    L.upper.assign(n, 0.0);
    Tridiag M = L;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double len = g.r[k + 1] - g.r[k];
        const double c = moment(g.r[k], g.r[k + 1]) / (len * len);
        L.diag[k] += c;
        L.diag[k + 1] += c;
        L.upper[k] -= c;
        L.lower[k + 1] -= c;
        // consistent mass of q(r) phi^2 dr with q and phi both linear
        M.diag[k] += area * len * (3.0 * q[k] + q[k + 1]) / 12.0;
        M.diag[k + 1] += area * len * (q[k] + 3.0 * q[k + 1]) / 12.0;
        M.upper[k] += area * len * (q[k] + q[k + 1]) / 12.0;
        M.lower[k + 1] += area * len * (q[k] + q[k + 1]) / 12.0;
    }
    const double tail = g.r_max - g.r[n - 1];
    L.diag[n - 1] += moment(g.r[n - 1], g.r_max) / (tail * tail);
    M.diag[n - 1] += area * q[n - 1] * tail / 3.0;  // q frozen, phi linear to 0
    M.diag[0] += area * q[0] * g.r[0];              // q frozen, phi constant below r_1

    auto quad_form = [n](const Tridiag& T, const std::vector<double>& x) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double row = T.diag[i] * x[i];
            if (i > 0) row += T.lower[i] * x[i - 1];
            if (i + 1 < n) row += T.upper[i] * x[i + 1];
            s += x[i] * row;
        }
        return s;
    };

    std::vector<double> phi(n, 0.0);
    phi[peak] = 1.0;
    double rayleigh = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        std::vector<double> rhs(n);
        for (std::size_t i = 0; i < n; ++i) {
            rhs[i] = M.diag[i] * phi[i];
            if (i > 0) rhs[i] += M.lower[i] * phi[i - 1];
            if (i + 1 < n) rhs[i] += M.upper[i] * phi[i + 1];
        }
        std::vector<double> z = solve_tridiag(L, rhs);
        const double nrm = std::sqrt(quad_form(L, z));
        if (!(nrm > 0.0)) return rayleigh;
        for (std::size_t j = 0; j < n; ++j) z[j] /= nrm;
        const double next = quad_form(M, z);  // denominator is 1 after normalization
        phi.swap(z);
        if (it > 2 && std::abs(next - rayleigh) <= tol * std::max(next, 1e-300)) {
            rayleigh = next;
            break;
        }
        rayleigh = next;
    }
    return rayleigh;
}

inline double hardy_weighted_sup(const RadialGrid& g, const Potential& V, double tol) {
    std::vector<double> W = radial_tilt(V, g);
    for (double& x : W) x *= 0.5;
    return hardy_weighted_sup(g, W, tol);
}

}  // namespace choquard
