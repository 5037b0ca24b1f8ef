#pragma once

// Radial convolution operator: f |-> A |x|^{alpha-dim} * f, realized as a dense
// kernel matrix over the grid. The angular reduction gives a spherical-mean
// kernel m(r,s); cell-pair integration keeps the weak diagonal singularity
// under control and makes the induced bilinear form symmetric by construction.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "choquard/common.hpp"
#include "choquard/grid.hpp"
#include "choquard/params.hpp"
#include "choquard/quadrature.hpp"

namespace choquard {

/// Spherical mean of |x - y|^{alpha-dim} over the sphere |y| = s, at |x| = r.
/// Requires r != s; the coincident-sphere case is owned by kernel assembly.
inline double angular_kernel(const ProblemParams& p, double r, double s) {
    p.validate();
    if (r < 0.0 || s < 0.0) throw std::invalid_argument("angular_kernel: negative radius");
    if (r == s) throw std::invalid_argument("angular_kernel: r == s is the singular diagonal");
    const int N = p.dim;
    const double a = p.alpha;
    if (r == 0.0 || s == 0.0) return std::pow(std::max(r, s), a - N);
    if (N == 1) return 0.5 * (std::pow(std::abs(r - s), a - 1.0) + std::pow(r + s, a - 1.0));
    if (a == 2.0 && N >= 3) return std::pow(std::max(r, s), 2.0 - N);
    if (N == 3) {
        // One-dimensional reduction in t = cos(theta) integrates in closed form.
        if (a == 1.0) return std::log((r + s) / std::abs(r - s)) / (2.0 * r * s);
        return (std::pow(r + s, a - 1.0) - std::pow(std::abs(r - s), a - 1.0)) /
               (2.0 * r * s * (a - 1.0));
    }
    // Generic dimension: adaptive quadrature in theta. The squared chord is
    // written as (r-s)^2 + 4 r s sin^2(theta/2), which never cancels.
    const double cN = sphere_area(N - 1) / sphere_area(N);
    const double d2 = (r - s) * (r - s);
    const double rs4 = 4.0 * r * s;
    const double ex = 0.5 * (a - N);
    auto f = [&](double th) {
        const double sh = std::sin(0.5 * th);
        const double base = d2 + rs4 * sh * sh;
        return std::pow(base, ex) * std::pow(std::sin(th), N - 2);
    };
    return cN * adaptive_gk(f, 0.0, M_PI, 0.0, 1e-12);
}

struct RieszOperator {
    ProblemParams params;
    RadialGrid grid;
    double A = 0.0;                // kernel normalization constant
    std::size_t n = 0;
    std::vector<double> K;        // row-major; K[i*n+j] ~ A m(r_i, r_j) w_j

    double k(std::size_t i, std::size_t j) const { return K[i * n + j]; }
};

namespace detail {

// integral of m(r, s) s^{dim-1} |S^{dim-1}| ds over [sa, sb], r outside (sa, sb).
inline double cell_integral(const ProblemParams& p, double r, double sa, double sb) {
    const double area = sphere_area(p.dim);
    auto f = [&](double s) {
        return angular_kernel(p, r, s) * area * std::pow(s, p.dim - 1);
    };
    return adaptive_gk(f, sa, sb, 0.0, 1e-12);
}

// Same integral when r lies inside [sa, sb]: split at the singular point and
// use quadrature that never evaluates at s = r.
inline double cell_integral_self(const ProblemParams& p, double r, double sa, double sb) {
    const double area = sphere_area(p.dim);
    auto f = [&](double s) {
        return angular_kernel(p, r, s) * area * std::pow(s, p.dim - 1);
    };
    return tanh_sinh(f, sa, r, 1e-13) + tanh_sinh(f, r, sb, 1e-13);
}

// N = 3 only: the kernel entries come from the exact double integral of
// m(t, s) t^2 s^2 over a cell pair (piecewise-constant Galerkin). The mixed
// antiderivatives below are elementary; evaluating them at the four corners of
// the rectangle gives the integral. All were checked symbolically and against
// 30-digit quadrature. Each is written for the branch t <= s; the assembly
// only requests cell pairs with the source cell at or beyond the target cell.

// Mixed antiderivative of t s (t+s)^{a-1}.
inline double pair_plus_anti(double a, double t, double s) {
    const double u = t + s;
    if (u == 0.0) return 0.0;
    return -(std::pow(u, a + 3.0) / (a + 3.0) - s * std::pow(u, a + 2.0) +
             s * s * std::pow(u, a + 1.0)) /
           (a * (a + 1.0));
}

// Mixed antiderivative of t s (s-t)^{a-1} on t <= s.
inline double pair_minus_anti(double a, double t, double s) {
    const double v = s - t;
    if (v == 0.0) return 0.0;
    return -(std::pow(v, a + 3.0) / (a + 3.0) + t * std::pow(v, a + 2.0) +
             t * t * std::pow(v, a + 1.0)) /
           (a * (a + 1.0));
}

// Mixed antiderivative of t s log(t+s).
inline double pair_log_plus_anti(double t, double s) {
    const double u = t + s;
    if (u == 0.0) return 0.0;
    const double q = t * t - s * s;
    return -q * q / 8.0 * std::log(u) + t * t * t * t / 32.0 +
           s * t * (s * s + t * t) / 8.0 - 3.0 * s * s * t * t / 16.0;
}

// Mixed antiderivative of t s log(s-t) on t <= s.
inline double pair_log_minus_anti(double t, double s) {
    const double v = s - t;
    const double poly =
        -s * t * (s * s + t * t) / 8.0 - 3.0 * s * s * t * t / 16.0 + s * s * s * s / 32.0;
    if (v == 0.0) return poly;  // the log coefficient vanishes with v
    const double q = t * t - s * s;
    return -q * q / 8.0 * std::log(v) + poly;
}

// Exact integral of m(r, s) s^2 over [sa, sb] for a fixed first argument r
// outside the cell, from the continuous antiderivatives of the same families.
inline double line_integral_3(double alpha, double r, double sa, double sb) {
    if (alpha == 1.0) {
        auto F = [r](double s) {
            const double d = std::abs(s - r);
            const double lg = (d == 0.0) ? 0.0 : 0.5 * (s * s - r * r) * std::log((s + r) / d);
            return lg + r * s;
        };
        return (F(sb) - F(sa)) / (2.0 * r);
    }
    const double a = alpha;
    auto G = [&](double s) {
        const double plus = std::pow(s + r, a + 1.0) / (a + 1.0) - r * std::pow(s + r, a) / a;
        const double d = std::abs(s - r);
        const double sgn = (s >= r) ? 1.0 : -1.0;
        const double minus = std::pow(d, a + 1.0) / (a + 1.0) + sgn * r * std::pow(d, a) / a;
        return plus - minus;
    };
    return (G(sb) - G(sa)) / (2.0 * r * (a - 1.0));
}

// Exact integral of m(t, s) t^2 s^2 over [ta, tb] x [sa, sb], where either the
// source cell lies at or beyond the target cell (sa >= ta) or the two cells
// coincide (the diagonal square, integrated by splitting at t = s).
inline double pair_integral_3(double alpha, double ta, double tb, double sa, double sb) {
    const bool diagonal = (ta == sa && tb == sb);
    if (alpha == 1.0) {
        auto corner = [](double (*F)(double, double), double c, double d, double e, double f) {
            return F(d, f) - F(c, f) - F(d, e) + F(c, e);
        };
        const double plus = corner(&pair_log_plus_anti, ta, tb, sa, sb);
        double minus;
        if (diagonal) {
            const double H = tb - ta;
            minus = (H * H * H * H / 4.0 + ta * H * H * H + ta * ta * H * H) * std::log(H) -
                    7.0 * H * H * H * H / 16.0 - 1.5 * ta * H * H * H - 1.5 * ta * ta * H * H;
        } else {
            minus = corner(&pair_log_minus_anti, ta, tb, sa, sb);
        }
        return (plus - minus) / 2.0;
    }
    const double a = alpha;
    auto corner = [a](double (*F)(double, double, double), double c, double d, double e,
                      double f) { return F(a, d, f) - F(a, c, f) - F(a, d, e) + F(a, c, e); };
    const double plus = corner(&pair_plus_anti, ta, tb, sa, sb);
    double minus;
    if (diagonal) {
        const double H = tb - ta;
        minus = 2.0 *
                (std::pow(H, a + 3.0) / (a + 3.0) + ta * std::pow(H, a + 2.0) +
                 ta * ta * std::pow(H, a + 1.0)) /
                (a * (a + 1.0));
    } else {
        minus = corner(&pair_minus_anti, ta, tb, sa, sb);
    }
    return (plus - minus) / (2.0 * (a - 1.0));
}

// Same pair integral for well-separated cells. The corner rule above loses all
// its precision when a tiny cell pairs with a distant one (the four
// antiderivative values agree to many digits), so integrate the closed-form
// line integral over the smaller cell with Gauss-Legendre instead; the
// integrand is smooth once the cells do not touch.
inline double pair_integral_3_separated(double alpha, double ta, double tb, double sa,
                                        double sb) {
    static constexpr double x[4] = {-0.8611363115940526, -0.3399810435848563,
                                    0.3399810435848563, 0.8611363115940526};
    static constexpr double w[4] = {0.3478548451374538, 0.6521451548625461,
                                    0.6521451548625461, 0.3478548451374538};
    const double mid = 0.5 * (ta + tb), half = 0.5 * (tb - ta);
    double acc = 0.0;
    for (int q = 0; q < 4; ++q) {
        const double t = mid + half * x[q];
        acc += w[q] * t * t * line_integral_3(alpha, t, sa, sb);
    }
    return half * acc;
}

inline std::uint64_t double_bits(double x) {
    std::uint64_t u;
    std::memcpy(&u, &x, sizeof u);
    return u;
}

}  // namespace detail

inline constexpr std::uint32_t k_kernel_cache_version = 2;

/// Cache file name for a kernel, unique per (dim, alpha, R_max, n, grading).
inline std::string kernel_cache_name(const ProblemParams& p, const RadialGrid& g) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "riesz_v%u_N%d_a%016llx_R%016llx_n%zu_g%016llx.bin",
                  k_kernel_cache_version, p.dim,
                  static_cast<unsigned long long>(detail::double_bits(p.alpha)),
                  static_cast<unsigned long long>(detail::double_bits(g.r_max)), g.size(),
                  static_cast<unsigned long long>(detail::double_bits(g.grading)));
    return buf;
}

namespace detail {

struct KernelCacheHeader {
    char magic[8] = {'C', 'Q', 'K', 'R', 'N', 'L', '0', '0'};
    std::uint32_t version = k_kernel_cache_version;
    std::int32_t dim = 0;
    std::uint64_t n = 0;
    double alpha = 0, r_max = 0, grading = 0;
};

inline bool try_load_kernel(const std::string& path, const ProblemParams& p,
                            const RadialGrid& g, std::vector<double>& K) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    KernelCacheHeader h, want;
    want.dim = p.dim;
    want.n = g.size();
    want.alpha = p.alpha;
    want.r_max = g.r_max;
    want.grading = g.grading;
    in.read(reinterpret_cast<char*>(&h), sizeof h);
    if (!in) return false;
    if (std::memcmp(h.magic, want.magic, 8) != 0 || h.version != want.version ||
        h.dim != want.dim || h.n != want.n || double_bits(h.alpha) != double_bits(want.alpha) ||
        double_bits(h.r_max) != double_bits(want.r_max) ||
        double_bits(h.grading) != double_bits(want.grading))
        return false;
    K.resize(g.size() * g.size());
    in.read(reinterpret_cast<char*>(K.data()),
            static_cast<std::streamsize>(K.size() * sizeof(double)));
    return static_cast<bool>(in);
}

inline void store_kernel(const std::string& path, const ProblemParams& p, const RadialGrid& g,
                         const std::vector<double>& K) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) return;  // cache is best-effort
        KernelCacheHeader h;
        h.dim = p.dim;
        h.n = g.size();
        h.alpha = p.alpha;
        h.r_max = g.r_max;
        h.grading = g.grading;
        out.write(reinterpret_cast<const char*>(&h), sizeof h);
        out.write(reinterpret_cast<const char*>(K.data()),
                  static_cast<std::streamsize>(K.size() * sizeof(double)));
        if (!out) return;
    }
    std::rename(tmp.c_str(), path.c_str());
}

}  // namespace detail

/// Assembles the dense convolution kernel. In dimension 3 every entry is the
/// exact closed-form integral of the spherical-mean kernel over the cell pair
/// (piecewise-constant Galerkin), which is uniformly second order in the mesh
/// width and handles the kernel singularity at the diagonal and the origin
/// exactly. Other dimensions integrate the kernel over the target cell within
/// two cells of the diagonal (the diagonal itself with singular-endpoint
/// quadrature) and use the midpoint value farther out. Both paths are built
/// from the symmetric cell-pair form, so the weighted symmetry
/// K_ij w_i = K_ji w_j holds to rounding.
/// cache_dir nonempty enables a best-effort binary cache in that directory.
inline RieszOperator build_riesz_operator(const RadialGrid& g, const ProblemParams& p,
                                          const std::string& cache_dir = "",
                                          unsigned threads = 0) {
    p.validate();
    if (g.dim != p.dim) throw std::invalid_argument("build_riesz_operator: dimension mismatch");
    RieszOperator op;
    op.params = p;
    op.grid = g;
    op.A = riesz_normalization(p.dim, p.alpha);
    const std::size_t n = g.size();
    op.n = n;

    std::string cache_path;
    if (!cache_dir.empty()) {
        cache_path = cache_dir + "/" + kernel_cache_name(p, g);
        if (detail::try_load_kernel(cache_path, p, g, op.K)) return op;
    }

    op.K.assign(n * n, 0.0);
    std::vector<double>& K = op.K;
    const double A = op.A;

    if (p.dim == 3) {
        const double area = sphere_area(3);
        const double scale = A * area * area;
        parallel_for_chunks(n, threads, [&](std::size_t ib, std::size_t ie) {
            for (std::size_t i = ib; i < ie; ++i) {
                for (std::size_t j = i; j < n; ++j) {
                    const double D =
                        (j - i <= 2) ? detail::pair_integral_3(p.alpha, g.edges[i],
                                                               g.edges[i + 1], g.edges[j],
                                                               g.edges[j + 1])
                                     : detail::pair_integral_3_separated(
                                           p.alpha, g.edges[i], g.edges[i + 1], g.edges[j],
                                           g.edges[j + 1]);
                    const double B = scale * D;
                    K[i * n + j] = B / g.w[i];
                    K[j * n + i] = B / g.w[j];
                }
            }
        });
    } else {
        const std::size_t near = 2;  // sub-cell window in index space
        parallel_for_chunks(n, threads, [&](std::size_t ib, std::size_t ie) {
            for (std::size_t i = ib; i < ie; ++i) {
                for (std::size_t j = i; j < n; ++j) {
                    double B;
                    if (j == i) {
                        B = A * g.w[i] *
                            detail::cell_integral_self(p, g.r[i], g.edges[i], g.edges[i + 1]);
                    } else if (j - i <= near) {
                        const double Ii =
                            detail::cell_integral(p, g.r[i], g.edges[j], g.edges[j + 1]);
                        const double Ij =
                            detail::cell_integral(p, g.r[j], g.edges[i], g.edges[i + 1]);
                        B = 0.5 * A * (g.w[i] * Ii + g.w[j] * Ij);
                    } else {
                        B = A * angular_kernel(p, g.r[i], g.r[j]) * g.w[i] * g.w[j];
                    }
                    K[i * n + j] = B / g.w[i];
                    K[j * n + i] = B / g.w[j];
                }
            }
        });
    }

    if (!cache_path.empty()) detail::store_kernel(cache_path, p, g, op.K);
    return op;
}

/// (A |x|^{alpha-dim} * f) sampled at the nodes.
inline std::vector<double> riesz_apply(const RieszOperator& op, const std::vector<double>& f,
                                       unsigned threads = 1) {
    const std::size_t n = op.n;
    if (f.size() != n) throw std::invalid_argument("riesz_apply: size mismatch");
    std::vector<double> out(n, 0.0);
    parallel_for_chunks(n, threads, [&](std::size_t ib, std::size_t ie) {
        for (std::size_t i = ib; i < ie; ++i) {
            const double* row = op.K.data() + i * n;
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += row[j] * f[j];
            out[i] = acc;
        }
    });
    return out;
}

/// Interaction functional D(u) = integral (conv |u|^p) |u|^p, homogeneous of
/// degree 2p. Nonnegative since the kernel is nonnegative.
inline double constraint_D(const RieszOperator& op, const std::vector<double>& u) {
    const std::size_t n = op.n;
    if (u.size() != n) throw std::invalid_argument("constraint_D: size mismatch");
    if (!all_finite(u)) throw std::invalid_argument("constraint_D: non-finite field");
    const double p = op.params.p();
    std::vector<double> gpow(n);
    for (std::size_t j = 0; j < n; ++j) gpow[j] = std::pow(std::abs(u[j]), p);
    const std::vector<double> conv = riesz_apply(op, gpow);
    double d = 0.0;
    for (std::size_t j = 0; j < n; ++j) d += op.grid.w[j] * conv[j] * gpow[j];
    return d;
}

}  // namespace choquard
