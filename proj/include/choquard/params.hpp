#pragma once

#include <cmath>
#include <stdexcept>

namespace choquard {

/// Dimension and convolution-kernel order. The nonlinearity exponent is locked
/// to the lower-critical value p = alpha/dim + 1, so p in (1, 2).
struct ProblemParams {
    int dim = 3;
    double alpha = 1.0;

    double p() const { return alpha / dim + 1.0; }

    void validate() const {
        if (dim < 1) throw std::invalid_argument("dim must be >= 1");
        if (!(alpha > 0.0) || !(alpha < dim))
            throw std::invalid_argument("alpha must lie in (0, dim)");
    }
};

/// Normalization constant of the convolution kernel A |x|^{alpha-dim},
/// A = Gamma((dim-alpha)/2) / (2^alpha pi^{dim/2} Gamma(alpha/2)).
inline double riesz_normalization(int dim, double alpha) {
    const double num = std::tgamma(0.5 * (dim - alpha));
    const double den = std::pow(2.0, alpha) * std::pow(M_PI, 0.5 * dim) * std::tgamma(0.5 * alpha);
    return num / den;
}

/// Constant in the convolution identity for the reference profile:
/// conv((1+r^2)^{-(dim+alpha)/2}) = Aprime (1+r^2)^{-(dim-alpha)/2}.
inline double profile_convolution_constant(int dim, double alpha) {
    return std::tgamma(0.5 * (dim - alpha)) /
           (std::pow(2.0, alpha) * std::tgamma(0.5 * (dim + alpha)));
}

/// Squared L2 mass of (1+r^2)^{-dim/2} over R^dim:
/// P = pi^{dim/2} Gamma(dim/2) / Gamma(dim).
inline double profile_l2_mass(int dim) {
    return std::pow(M_PI, 0.5 * dim) * std::tgamma(0.5 * dim) / std::tgamma(static_cast<double>(dim));
}

/// Threshold mass c_inf = P^{alpha/(dim+alpha)} * Aprime^{-dim/(dim+alpha)}:
/// the infimum of the L2 mass over the unit level set of the interaction
/// functional, attained only in the limit of dilated reference profiles.
inline double c_infty_reference(int dim, double alpha) {
    const double P = profile_l2_mass(dim);
    const double Ap = profile_convolution_constant(dim, alpha);
    const double s = static_cast<double>(dim) + alpha;
    return std::pow(P, alpha / s) * std::pow(Ap, -dim / s);
}

/// Amplitude that puts the reference profile on the unit level set of the
/// interaction functional: C^{2p} = 1 / (Aprime * P).
inline double profile_unit_amplitude(int dim, double alpha) {
    const double p = alpha / dim + 1.0;
    const double Ap = profile_convolution_constant(dim, alpha);
    return std::pow(1.0 / (Ap * profile_l2_mass(dim)), 1.0 / (2.0 * p));
}

}  // namespace choquard
