#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "choquard/potentials.hpp"

using namespace choquard;

TEST_CASE("family point values", "[potentials]") {
    const RadialGrid g = build_grid(3, 20.0, 200);

    SECTION("constant") {
        const auto f = eval_potential(Potential::constant(1.0), g);
        for (double v : f) REQUIRE(v == 1.0);
    }
    SECTION("model well") {
        const Potential V = Potential::model(1.0);
        REQUIRE(potential_value(V, 3, 0.0) == Catch::Approx(0.0).margin(1e-15));
        REQUIRE(potential_value(V, 3, 1e6) == Catch::Approx(1.0).epsilon(1e-9));
        // 1 - V positive and decreasing
        double prev = 1.0 - potential_value(V, 3, 0.0);
        for (double r : {0.5, 1.0, 2.0, 5.0, 20.0}) {
            const double cur = 1.0 - potential_value(V, 3, r);
            REQUIRE(cur > 0.0);
            REQUIRE(cur < prev);
            prev = cur;
        }
    }
    SECTION("null family") {
        const Potential V = Potential::null_family(1.0);
        REQUIRE(potential_value(V, 3, 0.0) == Catch::Approx(-8.0).epsilon(1e-14));
        // larger than 1 for all large radii
        for (double r = 10.0; r <= 30.0; r += 2.5) REQUIRE(potential_value(V, 3, r) > 1.0);
    }
    SECTION("parameter validation") {
        REQUIRE_THROWS(Potential::model(0.0));
        REQUIRE_THROWS(Potential::model(-1.0));
        REQUIRE_THROWS(Potential::null_family(0.0));
    }
}

TEST_CASE("radial tilt", "[potentials]") {
    SECTION("constant tilt vanishes") {
        const RadialGrid g = build_grid(3, 10.0, 64);
        for (double t : radial_tilt(Potential::constant(2.5), g)) REQUIRE(t == 0.0);
    }
    SECTION("model closed form and finite-difference cross-check") {
        const Potential V = Potential::model(0.8);
        for (double r : {0.3, 1.0, 2.7, 9.0}) {
            const double q = 1.0 + r * r;
            REQUIRE(potential_tilt(V, 3, r) ==
                    Catch::Approx(2.0 * 0.8 * r * r / (q * q)).epsilon(1e-13));
            const double h = 1e-6 * std::max(1.0, r);
            const double fd =
                (potential_value(V, 3, r + h) - potential_value(V, 3, r - h)) / (2.0 * h);
            REQUIRE(potential_tilt(V, 3, r) == Catch::Approx(r * fd).epsilon(1e-7));
        }
        // sup of r^2 * tilt = 2 mu (attained in the limit r -> inf)
        double sup = 0.0;
        for (double r = 0.1; r < 400.0; r *= 1.07)
            sup = std::max(sup, r * r * potential_tilt(V, 3, r));
        REQUIRE(sup <= 2.0 * 0.8 + 1e-12);
        REQUIRE(sup > 2.0 * 0.8 * 0.99);
    }
    SECTION("null family tilt negative for large radii") {
        const Potential V = Potential::null_family(1.0);
        for (double r : {3.0, 10.0, 50.0}) REQUIRE(potential_tilt(V, 3, r) < 0.0);
        for (double r : {0.4, 1.2, 13.0}) {
            const double h = 1e-6 * std::max(1.0, r);
            const double fd =
                (potential_value(V, 3, r + h) - potential_value(V, 3, r - h)) / (2.0 * h);
            REQUIRE(potential_tilt(V, 3, r) == Catch::Approx(r * fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("tail coefficients", "[potentials]") {
    REQUIRE(tail_coefficient(Potential::model(0.37), 3).value == Catch::Approx(0.37));
    REQUIRE_FALSE(tail_coefficient(Potential::model(0.37), 3).estimate);
    REQUIRE(tail_coefficient(Potential::null_family(2.0), 3).value == Catch::Approx(-6.0));
    REQUIRE(tail_coefficient(Potential::null_family(1.0), 5).value == Catch::Approx(-10.0));
    REQUIRE(tail_coefficient(Potential::constant(1.0), 3).value == 0.0);
    REQUIRE(std::isinf(tail_coefficient(Potential::constant(0.5), 3).value));
    REQUIRE(tail_coefficient(Potential::constant(0.5), 3).value > 0.0);
    REQUIRE(tail_coefficient(Potential::constant(1.5), 3).value < 0.0);

    SECTION("tabulated estimate") {
        std::vector<double> rs, vs;
        for (double r = 0.5; r <= 80.0; r += 0.5) {
            rs.push_back(r);
            vs.push_back(1.0 - 0.42 / (1.0 + r * r));  // tail coefficient 0.42
        }
        const auto t = tail_coefficient(Potential::tabulated(rs, vs), 3);
        REQUIRE(t.estimate);
        REQUIRE(t.value == Catch::Approx(0.42).epsilon(2e-3));
    }
    SECTION("tabulated with too few tail samples") {
        std::vector<double> rs{0.1, 0.2, 50.0}, vs{1.0, 1.0, 1.0};
        REQUIRE_THROWS(tail_coefficient(Potential::tabulated(rs, vs), 3));
    }
}

TEST_CASE("threshold constants", "[potentials]") {
    const auto t3 = thresholds(3);
    REQUIRE(t3.sufficient == 0.5625);  // 9/16, exact in binary
    REQUIRE(t3.nonexist == 0.25);
    const auto t2 = thresholds(2);
    REQUIRE(t2.sufficient == 0.0);
    REQUIRE(t2.nonexist == 0.0);
    for (int N = 1; N <= 10; ++N) {
        const auto t = thresholds(N);
        REQUIRE(t.sufficient ==
                static_cast<double>(N) * N * std::max(N - 2.0, 0.0) / (4.0 * (N + 1)));
        REQUIRE(t.nonexist == (N - 2.0) * (N - 2.0) / 4.0);
        if (N >= 3) {
            // Ratio identity nonexist/sufficient = (N-2)(N+1)/N^2. Both sides
            // round a non-dyadic rational, so agreement is to one ulp.
            const double lhs = t.nonexist / t.sufficient;
            const double rhs = (N - 2.0) * (N + 1.0) / (static_cast<double>(N) * N);
            REQUIRE(std::abs(lhs - rhs) <=
                    std::nextafter(rhs, 2.0 * rhs) - rhs);
        }
    }
    // The N=3 instance is bitwise exact: 0.25 / 0.5625 rounds to fl(4/9).
    REQUIRE(t3.nonexist / t3.sufficient == 4.0 / 9.0);
}

TEST_CASE("monotone cubic interpolation", "[potentials]") {
    std::vector<double> xs, ys;
    for (double x = 0.0; x <= 10.0; x += 0.25) {
        xs.push_back(x);
        ys.push_back(1.0 - 0.9 / (1.0 + x * x));
    }
    const Pchip p = Pchip::fit(xs, ys);
    for (double q : {1.13, 3.33, 7.77, 9.9}) {
        const double exact = 1.0 - 0.9 / (1.0 + q * q);
        const double dexact = 1.8 * q / ((1.0 + q * q) * (1.0 + q * q));
        REQUIRE(p.value(q) == Catch::Approx(exact).margin(2e-4));
        REQUIRE(p.derivative(q) == Catch::Approx(dexact).margin(5e-3));
    }
    // First cell: the shape-preserving edge slope costs accuracy near the
    // flat minimum at x = 0 (matches reference implementations to 1e-12).
    REQUIRE(p.value(0.12) == Catch::Approx(1.0 - 0.9 / (1.0 + 0.12 * 0.12)).margin(6e-3));
    REQUIRE_THROWS(p.value(-0.1));
    REQUIRE_THROWS(p.value(10.1));
    REQUIRE_THROWS(Pchip::fit({1.0, 1.0, 2.0}, {0.0, 0.0, 0.0}));

    SECTION("monotone data stays monotone") {
        const Pchip q = Pchip::fit({0.0, 1.0, 2.0, 3.0}, {0.0, 0.1, 0.9, 1.0});
        double prev = q.value(0.0);
        for (double x = 0.05; x <= 3.0; x += 0.05) {
            const double cur = q.value(x);
            REQUIRE(cur >= prev - 1e-12);
            prev = cur;
        }
    }
}

TEST_CASE("tabulated potential on grid", "[potentials]") {
    std::vector<double> rs, vs;
    for (double r = 0.0; r <= 22.0; r += 0.1) {
        rs.push_back(r);
        vs.push_back(1.0 - 0.6 / (1.0 + r * r));
    }
    const Potential V = Potential::tabulated(rs, vs);
    const RadialGrid g = build_grid(3, 20.0, 300);
    const auto f = eval_potential(V, g);
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double exact = 1.0 - 0.6 / (1.0 + g.r[j] * g.r[j]);
        // Interpolation error concentrates in the first table cells.
        REQUIRE(f[j] == Catch::Approx(exact).margin(g.r[j] > 1.0 ? 5e-5 : 5e-4));
    }

    SECTION("grid outside the table errors") {
        const RadialGrid big = build_grid(3, 40.0, 100);
        REQUIRE_THROWS(eval_potential(V, big));
    }
}

TEST_CASE("potential csv loader", "[potentials]") {
    const char* path = "potential_tmp_test.csv";
    {
        std::ofstream out(path);
        out << "r,V\n";
        for (double r = 0.0; r <= 30.0; r += 0.2)
            out << r << "," << 1.0 - 0.5 / (1.0 + r * r) << "\n";
    }
    const Potential V = load_potential_csv(path);
    REQUIRE(potential_value(V, 3, 1.0) == Catch::Approx(0.75).margin(1e-6));
    std::remove(path);
    REQUIRE_THROWS(load_potential_csv("does_not_exist.csv"));
}
