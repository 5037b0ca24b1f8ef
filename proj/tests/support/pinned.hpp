#pragma once

// Reference values frozen from an independent high-precision (30-digit)
// arithmetic run, kept to full double precision. Tests compare library output
// against these rather than against the library's own formulas.

namespace pinned {

inline constexpr double pi_3_2 = 5.5683279968317078453;       // pi^{3/2}
inline constexpr double pi2_over_4 = 2.4674011002723396547;   // pi^2/4
inline constexpr double ball3 = 4.1887902047863909846;        // 4 pi / 3

// Kernel normalization A(dim, alpha).
inline constexpr double A_3_2 = 0.079577471545947667884;    // = 1/(4 pi)
inline constexpr double A_4_2 = 0.025330295910584442861;    // = 1/(4 pi^2)
inline constexpr double A_3_1 = 0.050660591821168885722;
inline constexpr double A_3_05 = 0.031746817967120484893;
inline constexpr double A_5_15 = 0.015157989020717463432;

// Spherical means m_alpha(r, s) at (dim, alpha, r, s).
inline constexpr double m_2_1_1_05 = 1.0731820071493643751;      // (2, 1.0, 1, 0.5)
inline constexpr double m_2_07_1_2 = 0.45812518528558003637;     // (2, 0.7, 1, 2)
inline constexpr double m_5_13_2_25 = 0.042921351846190416368;   // (5, 1.3, 2, 2.5)
inline constexpr double m_3_05_1_101 = 9.2026281031102987438;    // (3, 0.5, 1, 1.01)

// Profile convolution constants Aprime(dim, alpha):
// conv (1+r^2)^{-(dim+alpha)/2} = Aprime (1+r^2)^{-(dim-alpha)/2}.
inline constexpr double Ap_3_05 = 0.69736641336873443263;
inline constexpr double Ap_3_1 = 0.5;
inline constexpr double Ap_3_2 = 0.33333333333333333333;
inline constexpr double Ap_4_2 = 0.125;
inline constexpr double Ap_5_15 = 0.1274636793296333321;

// Squared L2 mass of (1+r^2)^{-dim/2}: P = pi^{dim/2} Gamma(dim/2)/Gamma(dim).
inline constexpr double P_3 = 2.4674011002723396547;   // = pi^2/4
inline constexpr double P_4 = 1.6449340668482264365;   // = pi^2/6

// Threshold mass c_inf(dim, alpha) = P^{alpha/(dim+alpha)} Aprime^{-dim/(dim+alpha)}.
inline constexpr double cinf_3_05 = 1.5495675501422967041;
inline constexpr double cinf_3_1 = 2.1078147305108118176;
inline constexpr double cinf_3_2 = 2.7743973083570633929;
inline constexpr double cinf_4_2 = 4.7218206773339389643;

// Interaction functional of the unit-amplitude profile at lambda = 1,
// D(C=1) = Aprime * P, and the amplitude normalizing D = 1.
inline constexpr double D1_3_1 = 1.2337005501361698274;
inline constexpr double D1_3_2 = 0.82246703342411321824;
inline constexpr double Cnorm_3_1 = 0.92426464477250381139;
inline constexpr double Cnorm2_3_1 = 0.85426513357644265705;  // Cnorm^2
inline constexpr double Cnorm_3_2 = 1.060387135298903244;
inline constexpr double Cnorm2_3_2 = 1.1244208767074145341;

// Kinetic energy of the D-normalized profile at dim=3: the unit-amplitude
// value is 27 pi^2/64; scaled by Cnorm2 for alpha = 1.
inline constexpr double kin1_unit_3 = 4.1637393567095731673;   // 27 pi^2 / 64
inline constexpr double K1_3_1 = 3.55693735773699494;

// Explicit solution of the Null-family equation, dim=3, alpha=2, lambda=1:
// amplitude Chat = Aprime^{-3/4} = 3^{3/4}, and its energies.
inline constexpr double null_amp_3_2 = 2.279507056954777642;
inline constexpr double null_kinetic_3_2 = 21.635424345885401536;
inline constexpr double null_mass_3_2 = 12.820992204969126836;

// Infimum over the lambda grid {2^-2 .. 2^8} of the dilation functional,
// Model potential, dim=3, alpha=1 normalization (5 significant digits).
inline constexpr double iv_inf_mu_040 = 1.0537;
inline constexpr double iv_inf_mu_051 = 0.36533;
inline constexpr double iv_inf_mu_062 = -0.32306;
inline constexpr double iv_inf_mu_070 = -0.82370;
inline constexpr double iv_inf_mu_100 = -2.7011;

}  // namespace pinned
