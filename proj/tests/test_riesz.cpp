#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "choquard/functionals.hpp"
#include "choquard/riesz.hpp"
#include "support/oracle.hpp"
#include "support/pinned.hpp"

using namespace choquard;

TEST_CASE("spherical mean closed forms and pinned values", "[riesz]") {
    SECTION("point-mass center") {
        REQUIRE(angular_kernel({3, 2.0}, 1.7, 0.0) == Catch::Approx(std::pow(1.7, -1.0)));
        REQUIRE(angular_kernel({5, 1.5}, 0.0, 2.0) == Catch::Approx(std::pow(2.0, -3.5)));
    }
    SECTION("interior sphere of the Newtonian kernel") {
        REQUIRE(angular_kernel({3, 2.0}, 1.0, 0.5) == Catch::Approx(1.0).epsilon(1e-14));
        REQUIRE(angular_kernel({3, 2.0}, 0.5, 1.0) == Catch::Approx(1.0).epsilon(1e-14));
        REQUIRE(angular_kernel({4, 2.0}, 1.0, 0.5) == Catch::Approx(1.0).epsilon(1e-12));
        REQUIRE(angular_kernel({4, 2.0}, 1.0, 2.0) == Catch::Approx(0.25).epsilon(1e-12));
    }
    SECTION("pinned generic-dimension values") {
        REQUIRE(angular_kernel({2, 1.0}, 1.0, 0.5) ==
                Catch::Approx(pinned::m_2_1_1_05).epsilon(1e-10));
        REQUIRE(angular_kernel({2, 0.7}, 1.0, 2.0) ==
                Catch::Approx(pinned::m_2_07_1_2).epsilon(1e-10));
        REQUIRE(angular_kernel({5, 1.3}, 2.0, 2.5) ==
                Catch::Approx(pinned::m_5_13_2_25).epsilon(1e-10));
    }
    SECTION("pinned dim-3 near-diagonal value") {
        REQUIRE(angular_kernel({3, 0.5}, 1.0, 1.01) ==
                Catch::Approx(pinned::m_3_05_1_101).epsilon(1e-12));
    }
    SECTION("one-dimensional two-point mean") {
        const double r = 1.3, s = 0.4, a = 0.6;
        REQUIRE(angular_kernel({1, a}, r, s) ==
                Catch::Approx(0.5 * (std::pow(r - s, a - 1.0) + std::pow(r + s, a - 1.0))));
    }
    SECTION("symmetry in r and s") {
        for (auto [dim, a] : std::vector<std::pair<int, double>>{{2, 1.3}, {3, 0.5}, {5, 2.5}}) {
            const ProblemParams p{dim, a};
            REQUIRE(angular_kernel(p, 2.0, 0.7) ==
                    Catch::Approx(angular_kernel(p, 0.7, 2.0)).epsilon(1e-11));
        }
    }
    SECTION("coincident spheres rejected") {
        REQUIRE_THROWS(angular_kernel({3, 1.0}, 1.0, 1.0));
    }
}

TEST_CASE("kernel assembly invariants", "[riesz]") {
    const ProblemParams p{3, 1.0};
    const RadialGrid g = build_grid(3, 10.0, 64);
    const RieszOperator op = build_riesz_operator(g, p);

    SECTION("entries finite and nonnegative") {
        for (double k : op.K) {
            REQUIRE(std::isfinite(k));
            REQUIRE(k >= 0.0);
        }
    }
    SECTION("weighted symmetry") {
        double worst = 0.0;
        for (std::size_t i = 0; i < op.n; ++i)
            for (std::size_t j = 0; j < op.n; ++j) {
                const double a = op.k(i, j) * g.w[i];
                const double b = op.k(j, i) * g.w[j];
                worst = std::max(worst, std::abs(a - b) / (std::abs(a) + 1e-300));
            }
        REQUIRE(worst < 1e-10);
    }
    SECTION("zero maps to zero, scaling is exact") {
        const std::vector<double> z(op.n, 0.0);
        for (double v : riesz_apply(op, z)) REQUIRE(v == 0.0);
        std::mt19937 rng(3);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        std::vector<double> f(op.n);
        for (auto& x : f) x = U(rng);
        std::vector<double> f2(f);
        for (auto& x : f2) x *= 2.0;
        const auto a = riesz_apply(op, f);
        const auto b = riesz_apply(op, f2);
        for (std::size_t i = 0; i < op.n; ++i)
            REQUIRE(b[i] == Catch::Approx(2.0 * a[i]).epsilon(1e-14));
        for (double v : a) REQUIRE(v >= 0.0);
    }
    SECTION("bilinear form symmetry on random nonnegative fields") {
        std::mt19937 rng(5);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        std::vector<double> f(op.n), h(op.n);
        for (std::size_t i = 0; i < op.n; ++i) {
            f[i] = U(rng);
            h[i] = U(rng);
        }
        const auto cf = riesz_apply(op, f);
        const auto ch = riesz_apply(op, h);
        double a = 0.0, b = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < op.n; ++i) {
            a += g.w[i] * cf[i] * h[i];
            b += g.w[i] * ch[i] * f[i];
            scale += g.w[i] * std::abs(cf[i] * h[i]);
        }
        REQUIRE(std::abs(a - b) <= 1e-10 * scale);
    }
}

TEST_CASE("kernel against the ball indicator", "[riesz]") {
    // conv of the indicator of the ball of radius R, evaluated near 0:
    // value extrapolates to A |S^{d-1}| R^alpha / alpha.
    const ProblemParams p{3, 1.0};
    const double R = 1.0;
    const RadialGrid g = build_grid(3, R, 512);
    const RieszOperator op = build_riesz_operator(g, p);
    const std::vector<double> one(op.n, 1.0);
    const auto conv = riesz_apply(op, one);
    const double expect = op.A * sphere_area(3) * std::pow(R, p.alpha) / p.alpha;
    // linear extrapolation in r^2 from the two innermost nodes
    const double r0 = g.r[0], r1 = g.r[1];
    const double at0 =
        conv[0] + (conv[1] - conv[0]) * (0.0 - r0 * r0) / (r1 * r1 - r0 * r0);
    REQUIRE(at0 == Catch::Approx(expect).epsilon(1e-3));
}

TEST_CASE("interaction functional basics", "[riesz]") {
    const ProblemParams p{3, 2.0};
    const RadialGrid g = build_grid(3, 20.0, 512);
    const RieszOperator op = build_riesz_operator(g, p);

    SECTION("zero field") { REQUIRE(constraint_D(op, std::vector<double>(op.n, 0.0)) == 0.0); }
    SECTION("homogeneity degree 2p") {
        std::mt19937 rng(9);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        std::vector<double> u(op.n);
        for (auto& x : u) x = U(rng);
        std::vector<double> u2(u);
        for (auto& x : u2) x *= 2.0;
        const double d1 = constraint_D(op, u);
        const double d2 = constraint_D(op, u2);
        REQUIRE(d2 / d1 == Catch::Approx(std::pow(2.0, 2.0 * p.p())).epsilon(1e-12));
    }
    SECTION("profile value against brute-force double quadrature") {
        // D for u = (1+r^2)^{-3/2} equals Aprime * P (pinned).
        std::vector<double> u(op.n);
        for (std::size_t j = 0; j < op.n; ++j)
            u[j] = std::pow(1.0 + g.r[j] * g.r[j], -1.5);
        const double d = constraint_D(op, u);
        REQUIRE(d == Catch::Approx(pinned::D1_3_2).epsilon(2e-3));
    }
}

TEST_CASE("dilation covariance of the interaction functional", "[riesz]") {
    // u_l(r) = l^{dim/2} u(l r) on a correspondingly scaled grid leaves D fixed.
    const ProblemParams p{3, 1.0};
    const double l = 2.0;
    const RadialGrid g1 = build_grid(3, 24.0, 420);
    const RadialGrid g2 = build_grid(3, 24.0 / l, 420);
    const RieszOperator op1 = build_riesz_operator(g1, p);
    const RieszOperator op2 = build_riesz_operator(g2, p);
    std::vector<double> u1(g1.size()), u2(g2.size());
    for (std::size_t j = 0; j < g1.size(); ++j)
        u1[j] = std::pow(1.0 + g1.r[j] * g1.r[j], -1.5);
    for (std::size_t j = 0; j < g2.size(); ++j) {
        const double lr = l * g2.r[j];
        u2[j] = std::pow(l, 1.5) * std::pow(1.0 + lr * lr, -1.5);
    }
    REQUIRE(constraint_D(op1, u1) == Catch::Approx(constraint_D(op2, u2)).epsilon(2e-3));
}

TEST_CASE("profile convolution identity at moderate resolution", "[riesz]") {
    // conv (1+r^2)^{-(3+a)/2} = Aprime (1+r^2)^{-(3-a)/2}; sup-relative error
    // over [0, R/2] at n=700 should already be near the 1e-3 scale.
    const double R = 40.0;
    const RadialGrid g = build_grid(3, R, 700);
    struct Case {
        double alpha, ap;
    };
    for (const Case c : {Case{1.0, pinned::Ap_3_1}, Case{2.0, pinned::Ap_3_2}}) {
        const ProblemParams p{3, c.alpha};
        const RieszOperator op = build_riesz_operator(g, p);
        std::vector<double> f(g.size());
        for (std::size_t j = 0; j < g.size(); ++j)
            f[j] = std::pow(1.0 + g.r[j] * g.r[j], -0.5 * (3.0 + c.alpha));
        const auto conv = riesz_apply(op, f);
        double sup_err = 0.0, sup_ref = 0.0;
        for (std::size_t j = 0; j < g.size(); ++j) {
            if (g.r[j] > 0.5 * R) break;
            const double ref = c.ap * std::pow(1.0 + g.r[j] * g.r[j], -0.5 * (3.0 - c.alpha));
            sup_err = std::max(sup_err, std::abs(conv[j] - ref));
            sup_ref = std::max(sup_ref, std::abs(ref));
        }
        INFO("alpha = " << c.alpha);
        REQUIRE(sup_err / sup_ref < 3e-3);
    }
}

TEST_CASE("grid refinement improves the profile identity", "[riesz]") {
    const double R = 30.0;
    const ProblemParams p{3, 1.0};
    auto sup_rel = [&](std::size_t n) {
        const RadialGrid g = build_grid(3, R, n);
        const RieszOperator op = build_riesz_operator(g, p);
        std::vector<double> f(g.size());
        for (std::size_t j = 0; j < g.size(); ++j)
            f[j] = std::pow(1.0 + g.r[j] * g.r[j], -2.0);
        const auto conv = riesz_apply(op, f);
        double se = 0.0, sr = 0.0;
        for (std::size_t j = 0; j < g.size() && g.r[j] <= 0.5 * R; ++j) {
            const double ref = 0.5 * std::pow(1.0 + g.r[j] * g.r[j], -1.0);
            se = std::max(se, std::abs(conv[j] - ref));
            sr = std::max(sr, ref);
        }
        return se / sr;
    };
    const double e1 = sup_rel(200);
    const double e2 = sup_rel(400);
    const double e3 = sup_rel(800);
    REQUIRE(e2 < e1);
    REQUIRE(e3 < e2);
}

TEST_CASE("kernel cache round-trip", "[riesz]") {
    namespace fs = std::filesystem;
    const ProblemParams p{3, 0.5};
    const RadialGrid g = build_grid(3, 8.0, 48);
    const fs::path dir = fs::temp_directory_path() / "choquard_cache_test";
    fs::create_directories(dir);
    const RieszOperator fresh = build_riesz_operator(g, p, dir.string());
    REQUIRE(fs::exists(dir / kernel_cache_name(p, g)));
    const RieszOperator cached = build_riesz_operator(g, p, dir.string());
    REQUIRE(cached.K == fresh.K);  // bit-identical through the cache
    // different params produce a different cache key
    const ProblemParams p2{3, 1.5};
    REQUIRE(kernel_cache_name(p2, g) != kernel_cache_name(p, g));
    fs::remove_all(dir);
}
