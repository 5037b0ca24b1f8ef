#pragma once

// External potential families. All are bounded radial functions; the Null
// family is the one whose exact solution is a dilated reference profile.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "choquard/grid.hpp"

namespace choquard {

/// Monotone cubic (Fritsch-Carlson) interpolant through strictly increasing
/// abscissae. Provides value and first derivative; both are continuous.
struct Pchip {
    std::vector<double> x, y, d;  // nodes, values, nodal slopes

    static Pchip fit(std::vector<double> xs, std::vector<double> ys) {
        if (xs.size() != ys.size() || xs.size() < 2)
            throw std::invalid_argument("Pchip: need >= 2 matching samples");
        for (std::size_t i = 1; i < xs.size(); ++i)
            if (!(xs[i] > xs[i - 1]))
                throw std::invalid_argument("Pchip: abscissae must be strictly increasing");
        const std::size_t m = xs.size();
        std::vector<double> h(m - 1), delta(m - 1), d(m);
        for (std::size_t i = 0; i + 1 < m; ++i) {
            h[i] = xs[i + 1] - xs[i];
            delta[i] = (ys[i + 1] - ys[i]) / h[i];
        }
        if (m == 2) {
            d[0] = d[1] = delta[0];
        } else {
            for (std::size_t i = 1; i + 1 < m; ++i) {
                if (delta[i - 1] * delta[i] <= 0.0) {
                    d[i] = 0.0;
                } else {
                    const double w1 = 2.0 * h[i] + h[i - 1];
                    const double w2 = h[i] + 2.0 * h[i - 1];
                    d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
                }
            }
            d[0] = edge_slope(h[0], h[1], delta[0], delta[1]);
            d[m - 1] = edge_slope(h[m - 2], h[m - 3], delta[m - 2], delta[m - 3]);
        }
        Pchip p;
        p.x = std::move(xs);
        p.y = std::move(ys);
        p.d = std::move(d);
        return p;
    }

    double min_x() const { return x.front(); }
    double max_x() const { return x.back(); }

    double value(double q) const { return eval(q, false); }
    double derivative(double q) const { return eval(q, true); }

  private:
    static double edge_slope(double h0, double h1, double del0, double del1) {
        // Shape-preserving three-point end slope.
        double d0 = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
        if (d0 * del0 <= 0.0)
            d0 = 0.0;
        else if (del0 * del1 < 0.0 && std::abs(d0) > 3.0 * std::abs(del0))
            d0 = 3.0 * del0;
        return d0;
    }

    double eval(double q, bool want_derivative) const {
        if (q < x.front() || q > x.back())
            throw std::out_of_range("Pchip: query outside table range");
        const auto it = std::upper_bound(x.begin(), x.end(), q);
        std::size_t i = (it == x.begin()) ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
        if (i + 1 >= x.size()) i = x.size() - 2;
        const double h = x[i + 1] - x[i];
        const double t = (q - x[i]) / h;
        const double y0 = y[i], y1 = y[i + 1], d0 = d[i], d1 = d[i + 1];
        if (!want_derivative) {
            const double h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
            const double h10 = t * (1.0 - t) * (1.0 - t);
            const double h01 = t * t * (3.0 - 2.0 * t);
            const double h11 = t * t * (t - 1.0);
            return h00 * y0 + h * h10 * d0 + h01 * y1 + h * h11 * d1;
        }
        const double g00 = 6.0 * t * (t - 1.0) / h;
        const double g10 = (1.0 - t) * (1.0 - 3.0 * t);
        const double g01 = -g00;
        const double g11 = t * (3.0 * t - 2.0);
        return g00 * y0 + g10 * d0 + g01 * y1 + g11 * d1;
    }
};

struct Potential {
    enum class Family { Constant, Model, Null, Tabulated };

    Family family = Family::Constant;
    double c = 1.0;       // Constant: V(r) = c
    double mu = 0.0;      // Model:    V(r) = 1 - mu/(1+r^2)
    double lambda = 1.0;  // Null:     V(r) = 1 + dim (2r^2 - dim lambda^2)/(r^2+lambda^2)^2
    Pchip table;          // Tabulated

    static Potential constant(double c) {
        Potential v;
        v.family = Family::Constant;
        v.c = c;
        return v;
    }
    static Potential model(double mu) {
        if (!(mu > 0.0)) throw std::invalid_argument("Model potential requires mu > 0");
        Potential v;
        v.family = Family::Model;
        v.mu = mu;
        return v;
    }
    static Potential null_family(double lambda) {
        if (!(lambda > 0.0)) throw std::invalid_argument("Null potential requires lambda > 0");
        Potential v;
        v.family = Family::Null;
        v.lambda = lambda;
        return v;
    }
    static Potential tabulated(std::vector<double> r, std::vector<double> values) {
        Potential v;
        v.family = Family::Tabulated;
        v.table = Pchip::fit(std::move(r), std::move(values));
        for (double val : v.table.y)
            if (!std::isfinite(val))
                throw std::invalid_argument("tabulated potential has non-finite samples");
        return v;
    }
};

/// V(r). The Null family depends on the ambient dimension.
inline double potential_value(const Potential& V, int dim, double r) {
    switch (V.family) {
        case Potential::Family::Constant:
            return V.c;
        case Potential::Family::Model:
            return 1.0 - V.mu / (1.0 + r * r);
        case Potential::Family::Null: {
            const double l2 = V.lambda * V.lambda;
            const double q = r * r + l2;
            return 1.0 + dim * (2.0 * r * r - dim * l2) / (q * q);
        }
        case Potential::Family::Tabulated:
            return V.table.value(r);
    }
    throw std::logic_error("potential_value: unknown family");
}

/// r V'(r), the radial tilt entering the scaling identity.
inline double potential_tilt(const Potential& V, int dim, double r) {
    switch (V.family) {
        case Potential::Family::Constant:
            return 0.0;
        case Potential::Family::Model: {
            const double q = 1.0 + r * r;
            return 2.0 * V.mu * r * r / (q * q);
        }
        case Potential::Family::Null: {
            const double l2 = V.lambda * V.lambda;
            const double q = r * r + l2;
            return 4.0 * dim * r * r * ((dim + 1) * l2 - r * r) / (q * q * q);
        }
        case Potential::Family::Tabulated:
            return r * V.table.derivative(r);
    }
    throw std::logic_error("potential_tilt: unknown family");
}

inline std::vector<double> eval_potential(const Potential& V, const RadialGrid& g) {
    std::vector<double> out(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) out[j] = potential_value(V, g.dim, g.r[j]);
    if (!all_finite(out)) throw std::runtime_error("eval_potential: non-finite values on grid");
    return out;
}

inline std::vector<double> radial_tilt(const Potential& V, const RadialGrid& g) {
    std::vector<double> out(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) out[j] = potential_tilt(V, g.dim, g.r[j]);
    if (!all_finite(out)) throw std::runtime_error("radial_tilt: non-finite values on grid");
    return out;
}

/// Limit (or tail estimate) of (1 - V(r)) r^2 as r -> infinity.
struct TailCoefficient {
    double value = 0.0;
    bool estimate = false;  // true when read off finite tabulated data
};

inline TailCoefficient tail_coefficient(const Potential& V, int dim) {
    TailCoefficient t;
    switch (V.family) {
        case Potential::Family::Constant:
            if (V.c == 1.0)
                t.value = 0.0;
            else
                t.value = (V.c < 1.0) ? std::numeric_limits<double>::infinity()
                                      : -std::numeric_limits<double>::infinity();
            return t;
        case Potential::Family::Model:
            t.value = V.mu;
            return t;
        case Potential::Family::Null:
            t.value = -2.0 * dim;
            return t;
        case Potential::Family::Tabulated: {
            // Median of (1-V)r^2 over the last decade of samples.
            const auto& xs = V.table.x;
            const auto& ys = V.table.y;
            const double r_cut = xs.back() / 10.0;
            std::vector<double> vals;
            for (std::size_t i = 0; i < xs.size(); ++i)
                if (xs[i] >= r_cut) vals.push_back((1.0 - ys[i]) * xs[i] * xs[i]);
            if (vals.size() < 10)
                throw std::runtime_error("tail_coefficient: need >= 10 samples in the last decade");
            std::nth_element(vals.begin(), vals.begin() + vals.size() / 2, vals.end());
            t.value = vals[vals.size() / 2];
            t.estimate = true;
            return t;
        }
    }
    throw std::logic_error("tail_coefficient: unknown family");
}

/// The two dimensional constants bracketing the open existence interval:
/// sufficient = N^2 (N-2)_+ / (4(N+1)), nonexist = (N-2)^2 / 4.
/// Their exact ratio for N >= 3 is (N-2)(N+1)/N^2 = 1 - (N+2)/N^2.
struct Thresholds {
    double sufficient = 0.0;
    double nonexist = 0.0;
};

inline Thresholds thresholds(int dim) {
    if (dim < 1) throw std::invalid_argument("thresholds: dim must be >= 1");
    Thresholds t;
    const double np = static_cast<double>(std::max(dim - 2, 0));
    t.sufficient = static_cast<double>(dim) * dim * np / (4.0 * (dim + 1));
    t.nonexist = static_cast<double>(dim - 2) * (dim - 2) / 4.0;
    return t;
}

/// Two-column CSV (r, V). Header row optional; r strictly increasing.
inline Potential load_potential_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open potential file: " + path);
    std::vector<double> rs, vs;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::string cell1, cell2;
        std::istringstream ss(line);
        if (!std::getline(ss, cell1, ',') || !std::getline(ss, cell2)) {
            if (first) {
                first = false;
                continue;
            }
            throw std::runtime_error("malformed potential CSV line: " + line);
        }
        try {
            const double r = std::stod(cell1);
            const double v = std::stod(cell2);
            rs.push_back(r);
            vs.push_back(v);
        } catch (const std::exception&) {
            if (first) {
                first = false;
                continue;  // header row
            }
            throw std::runtime_error("malformed potential CSV line: " + line);
        }
        first = false;
    }
    return Potential::tabulated(std::move(rs), std::move(vs));
}

}  // namespace choquard
