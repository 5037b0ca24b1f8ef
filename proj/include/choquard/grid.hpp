#pragma once

// Radial grid on (0, R]: cell edges e_k = R (k/n)^grading, nodes at cell
// midpoints, weights equal to exact d-dimensional cell masses. Radial functions
// are plain std::vector<double> of node values.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "choquard/common.hpp"

namespace choquard {

struct RadialGrid {
    int dim = 3;
    double r_max = 0.0;
    double grading = 1.0;
    std::vector<double> r;      // node radii (cell midpoints), size n
    std::vector<double> w;      // cell masses |S^{d-1}| (e_k^d - e_{k-1}^d)/d
    std::vector<double> edges;  // cell edges, size n+1, edges[0] = 0

    std::size_t size() const { return r.size(); }
};

inline RadialGrid build_grid(int dim, double r_max, std::size_t n, double grading = 1.0) {
    if (dim < 1) throw std::invalid_argument("build_grid: dim must be >= 1");
    if (!(r_max > 0.0)) throw std::invalid_argument("build_grid: r_max must be positive");
    if (n < 4) throw std::invalid_argument("build_grid: need at least 4 cells");
    if (!(grading >= 1.0)) throw std::invalid_argument("build_grid: grading must be >= 1");

    RadialGrid g;
    g.dim = dim;
    g.r_max = r_max;
    g.grading = grading;
    g.edges.resize(n + 1);
    g.r.resize(n);
    g.w.resize(n);
    for (std::size_t k = 0; k <= n; ++k)
        g.edges[k] = r_max * std::pow(static_cast<double>(k) / static_cast<double>(n), grading);
    g.edges[0] = 0.0;
    g.edges[n] = r_max;

    const double area = sphere_area(dim);
    for (std::size_t j = 0; j < n; ++j) {
        g.r[j] = 0.5 * (g.edges[j] + g.edges[j + 1]);
        g.w[j] = area * (std::pow(g.edges[j + 1], dim) - std::pow(g.edges[j], dim)) /
                 static_cast<double>(dim);
    }
    return g;
}

/// Weighted sum: approximates the integral of u over R^dim (ball of radius R).
inline double integrate(const RadialGrid& g, const std::vector<double>& u) {
    double s = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) s += g.w[j] * u[j];
    return s;
}

inline double inner_product(const RadialGrid& g, const std::vector<double>& u,
                            const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) s += g.w[j] * u[j] * v[j];
    return s;
}

inline double norm_l2(const RadialGrid& g, const std::vector<double>& u) {
    return std::sqrt(inner_product(g, u, u));
}

namespace detail {

// Three-point finite difference weights for f'(x1) on nodes x0 < x1 < x2.
inline void d1_weights(double x0, double x1, double x2, double& c0, double& c1, double& c2) {
    const double h0 = x1 - x0;
    const double h1 = x2 - x1;
    c0 = -h1 / (h0 * (h0 + h1));
    c1 = (h1 - h0) / (h0 * h1);
    c2 = h0 / (h1 * (h0 + h1));
}

// Weights for f'(x0) (fully one-sided).
inline void d1_weights_left(double x0, double x1, double x2, double& c0, double& c1, double& c2) {
    const double h0 = x1 - x0;
    const double h1 = x2 - x1;
    c0 = -(2.0 * h0 + h1) / (h0 * (h0 + h1));
    c1 = (h0 + h1) / (h0 * h1);
    c2 = -h0 / (h1 * (h0 + h1));
}

// Weights for f''(x1) on x0 < x1 < x2 (second-order only on smooth meshes,
// first-order on strongly graded ones; adequate for the residual checks here).
inline void d2_weights(double x0, double x1, double x2, double& c0, double& c1, double& c2) {
    const double h0 = x1 - x0;
    const double h1 = x2 - x1;
    c0 = 2.0 / (h0 * (h0 + h1));
    c1 = -2.0 / (h0 * h1);
    c2 = 2.0 / (h1 * (h0 + h1));
}

}  // namespace detail

/// du/dr at every node: centered 3-point stencils inside, one-sided at the ends.
inline std::vector<double> radial_derivative(const RadialGrid& g, const std::vector<double>& u) {
    const std::size_t n = g.size();
    if (u.size() != n) throw std::invalid_argument("radial_derivative: size mismatch");
    std::vector<double> du(n);
    if (n < 3) throw std::invalid_argument("radial_derivative: need >= 3 nodes");
    double c0, c1, c2;
    detail::d1_weights_left(g.r[0], g.r[1], g.r[2], c0, c1, c2);
    du[0] = c0 * u[0] + c1 * u[1] + c2 * u[2];
    for (std::size_t j = 1; j + 1 < n; ++j) {
        detail::d1_weights(g.r[j - 1], g.r[j], g.r[j + 1], c0, c1, c2);
        du[j] = c0 * u[j - 1] + c1 * u[j] + c2 * u[j + 1];
    }
    detail::d1_weights_left(g.r[n - 1], g.r[n - 2], g.r[n - 3], c0, c1, c2);
    du[n - 1] = c0 * u[n - 1] + c1 * u[n - 2] + c2 * u[n - 3];
    return du;
}

/// Radial Laplacian applied with the sign flipped: returns -(u'' + (d-1)/r u').
/// Origin: even reflection (ghost node at -r[0] carrying u[0]).
/// Outer boundary: homogeneous Dirichlet ghost at r = 2*r_max - r[n-1].
inline std::vector<double> apply_neg_laplacian(const RadialGrid& g, const std::vector<double>& u) {
    const std::size_t n = g.size();
    if (u.size() != n) throw std::invalid_argument("apply_neg_laplacian: size mismatch");
    if (n < 3) throw std::invalid_argument("apply_neg_laplacian: need >= 3 nodes");
    std::vector<double> out(n);
    const double dm1 = static_cast<double>(g.dim - 1);
    double a0, a1, a2, b0, b1, b2;

    // Interior nodes.
    for (std::size_t j = 1; j + 1 < n; ++j) {
        detail::d2_weights(g.r[j - 1], g.r[j], g.r[j + 1], a0, a1, a2);
        detail::d1_weights(g.r[j - 1], g.r[j], g.r[j + 1], b0, b1, b2);
        const double upp = a0 * u[j - 1] + a1 * u[j] + a2 * u[j + 1];
        const double up = b0 * u[j - 1] + b1 * u[j] + b2 * u[j + 1];
        out[j] = -(upp + dm1 / g.r[j] * up);
    }

    // First node: ghost at -r[0] with value u[0] (even extension through 0).
    {
        const double xg = -g.r[0];
        detail::d2_weights(xg, g.r[0], g.r[1], a0, a1, a2);
        detail::d1_weights(xg, g.r[0], g.r[1], b0, b1, b2);
        const double upp = a0 * u[0] + a1 * u[0] + a2 * u[1];
        const double up = b0 * u[0] + b1 * u[0] + b2 * u[1];
        out[0] = -(upp + dm1 / g.r[0] * up);
    }

    // Last node: ghost at 2 r_max - r[n-1] with value 0.
    {
        const double xg = 2.0 * g.r_max - g.r[n - 1];
        detail::d2_weights(g.r[n - 2], g.r[n - 1], xg, a0, a1, a2);
        detail::d1_weights(g.r[n - 2], g.r[n - 1], xg, b0, b1, b2);
        const double upp = a0 * u[n - 2] + a1 * u[n - 1];
        const double up = b0 * u[n - 2] + b1 * u[n - 1];
        out[n - 1] = -(upp + dm1 / g.r[n - 1] * up);
    }
    return out;
}

/// Kinetic energy int |grad u|^2 evaluated from the nodal derivative.
inline double kinetic_energy(const RadialGrid& g, const std::vector<double>& u) {
    const std::vector<double> du = radial_derivative(g, u);
    double s = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) s += g.w[j] * du[j] * du[j];
    return s;
}

/// Symmetric tridiagonal system stored by diagonals; lower[i] couples (i, i-1).
struct Tridiag {
    std::vector<double> diag, lower, upper;
};

/// Thomas elimination (no pivoting; intended for SPD systems).
inline std::vector<double> solve_tridiag(const Tridiag& t, std::vector<double> rhs) {
    const std::size_t n = t.diag.size();
    if (rhs.size() != n) throw std::invalid_argument("solve_tridiag: size mismatch");
    std::vector<double> c(n, 0.0);
    double piv = t.diag[0];
    if (piv == 0.0) throw std::runtime_error("solve_tridiag: zero pivot");
    c[0] = (n > 1) ? t.upper[0] / piv : 0.0;
    rhs[0] /= piv;
    for (std::size_t i = 1; i < n; ++i) {
        piv = t.diag[i] - t.lower[i] * c[i - 1];
        if (piv == 0.0) throw std::runtime_error("solve_tridiag: zero pivot");
        if (i + 1 < n) c[i] = t.upper[i] / piv;
        rhs[i] = (rhs[i] - t.lower[i] * rhs[i - 1]) / piv;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
    return rhs;
}

/// Edge-flux discretization of the Dirichlet form: phi^T L phi approximates
/// int |grad phi|^2 with no-flux closure at the origin and a homogeneous
/// Dirichlet ghost beyond R_max. Symmetric positive definite.
inline Tridiag edge_stiffness(const RadialGrid& g) {
    const std::size_t n = g.size();
    const double area = sphere_area(g.dim);
    Tridiag L;
    L.diag.assign(n, 0.0);
    L.lower.assign(n, 0.0);
    L.upper.assign(n, 0.0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double a =
            area * std::pow(g.edges[k + 1], g.dim - 1) / (g.r[k + 1] - g.r[k]);
        L.diag[k] += a;
        L.diag[k + 1] += a;
        L.upper[k] = -a;
        L.lower[k + 1] = -a;
    }
    L.diag[n - 1] += area * std::pow(g.r_max, g.dim - 1) / (g.r_max - g.r[n - 1]);
    return L;
}

/// phi^T L phi for the edge stiffness (kinetic energy in the solver metric).
inline double stiffness_energy(const RadialGrid& g, const Tridiag& L,
                               const std::vector<double>& phi) {
    const std::size_t n = g.size();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = L.diag[i] * phi[i];
        if (i > 0) row += L.lower[i] * phi[i - 1];
        if (i + 1 < n) row += L.upper[i] * phi[i + 1];
        s += phi[i] * row;
    }
    return s;
}

/// Radius containing half of the mass int u^2 (linear interpolation in the
/// cumulative sum). Used to detect mass escaping toward the outer boundary.
inline double half_mass_radius(const RadialGrid& g, const std::vector<double>& u) {
    const std::size_t n = g.size();
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) total += g.w[j] * u[j] * u[j];
    if (!(total > 0.0)) return 0.0;
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double next = acc + g.w[j] * u[j] * u[j];
        if (next >= 0.5 * total) {
            const double frac = (0.5 * total - acc) / (next - acc);
            return g.edges[j] + frac * (g.edges[j + 1] - g.edges[j]);
        }
        acc = next;
    }
    return g.r_max;
}

}  // namespace choquard
