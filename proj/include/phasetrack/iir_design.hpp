#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include <Eigen/Dense>

#include "phasetrack/common.hpp"

namespace phasetrack::iir {

enum class BasisKind {
    Bessel,   ///< φ_k(z) = z / (z - p_k), poles from a matched-z Bessel prototype
    Origin,   ///< φ_k(z) = z^{-k}; recovers the FIR regression designs
    Laguerre  ///< φ_k(z) = z / (z - p)^{k+1}, one repeated real pole
};

/// Frequency scaling applied to the unit-delay reverse Bessel polynomial.
enum class BesselNorm {
    PhaseMidpoint, ///< roots scaled by a0^{-1/K}: high-frequency asymptote of a Butterworth at ω_c
    Magnitude3dB,  ///< |H(iω_c)|² = 1/2
    UnitDelay      ///< dc group delay of the analogue prototype equals 1/ω_c
};

struct BasisSet {
    BasisKind kind{BasisKind::Bessel};
    ComplexVec poles;         ///< one per basis function (repeated for Laguerre, zero for Origin)
    double cutoff{0.0};       ///< f_c in cycles/sample (Bessel only)
    double laguerre_pole{0.0};
    BesselNorm norm{BesselNorm::PhaseMidpoint};

    [[nodiscard]] std::size_t size() const noexcept { return poles.size(); }
    [[nodiscard]] double max_pole_radius() const noexcept;
};

/// Roots of the degree-K reverse Bessel polynomial (unit dc group delay).
[[nodiscard]] ComplexVec reverse_bessel_roots(int order);

/// Coefficients a_0..a_K (ascending powers of s) of the reverse Bessel polynomial.
[[nodiscard]] RealVec reverse_bessel_coefficients(int order);

/// Continuous-time prototype poles for a cut-off of omega_c rad/s under the given normalization.
[[nodiscard]] ComplexVec bessel_analog_poles(int order, double omega_c, BesselNorm norm);

[[nodiscard]] BasisSet bessel_poles(int order, double cutoff, BesselNorm norm = BesselNorm::PhaseMidpoint);
[[nodiscard]] BasisSet origin_basis(int order);
[[nodiscard]] BasisSet laguerre_basis(int order, double pole);

/// Number of samples retained by every truncated time-domain sum over the basis.
[[nodiscard]] std::size_t tail_horizon(const BasisSet& basis, int k0);

[[nodiscard]] ComplexVec basis_impulse(const BasisSet& basis, std::size_t index, std::size_t length);

/// S_{mn} = Σ g_m*[n] g_n[n] with g_k = h_HPF ⊛ φ_k.
[[nodiscard]] Eigen::MatrixXcd build_S(const BasisSet& basis, int k0);

/// Φ_{k1,k} = d^{k1}/dω^{k1} φ_k(e^{iω}) at ω = 0.
[[nodiscard]] Eigen::MatrixXcd dc_derivatives(const BasisSet& basis, int k1);

/// Desired dc derivatives d_{k1}(q) = (-iq)^{k1}.
[[nodiscard]] Eigen::VectorXcd desired_derivatives(double q, int k1);

struct ConstraintSystem {
    Eigen::MatrixXcd S;   ///< K_φ × K_φ Hermitian noise-gain matrix
    Eigen::MatrixXcd Phi; ///< K1 × K_φ dc-derivative matrix

    [[nodiscard]] int k1() const noexcept { return static_cast<int>(Phi.rows()); }
    [[nodiscard]] Eigen::VectorXcd d(double q) const { return desired_derivatives(q, k1()); }
};

[[nodiscard]] ConstraintSystem build_constraints(const BasisSet& basis, int k1, int k0);

/// Condition numbers above this make solve_weights and cng_polynomial throw.
inline constexpr double kMaxCondition = 1e12;

/// Hermitian condition number λ_max / λ_min (infinity when not positive definite).
[[nodiscard]] double hermitian_condition(const Eigen::MatrixXcd& m);

/// Weights minimising c†Sc subject to Φc = d(q).
[[nodiscard]] Eigen::VectorXcd solve_weights(const ConstraintSystem& sys, double q);

/// Real ascending coefficients of v_BPF(q) = d(q)† {Φ S⁻¹ Φ†}⁻¹ d(q), degree 2(K1 - 1).
[[nodiscard]] RealVec cng_polynomial(const ConstraintSystem& sys);

[[nodiscard]] double polyval(std::span<const double> ascending, double x) noexcept;
[[nodiscard]] RealVec polyder(std::span<const double> ascending);

/// Real roots (ascending) of a real polynomial, via companion-matrix eigenvalues
/// followed by Newton refinement. Roots with |Im| < 1e-8 (1 + |Re|) count as real.
[[nodiscard]] RealVec real_roots(std::span<const double> ascending);

enum class QPolicy { Optimal, MinCng, MinQ, Explicit };

struct QSelection {
    QPolicy policy{QPolicy::Optimal};
    double value{0.0}; ///< used by Explicit

    static QSelection explicit_delay(double q) { return {QPolicy::Explicit, q}; }
};

/// Picks the passband group delay from the stationary points of the CNG polynomial.
[[nodiscard]] double select_q(std::span<const double> cng_poly, int k1, QSelection selection);

struct IirDiagnostics {
    double cng{0.0};              ///< c†Sc under the design K0
    double imag_residue{0.0};     ///< max_j |Im b_j| / Σ_k |c_k N_k[j]| after recombination
    double impulse_imag_residue{0.0}; ///< max |Im h[m]| / max |h[m]| over the tail horizon
    double condition_S{0.0};
    double condition_Q{0.0};
    double constraint_residual{0.0}; ///< ‖Φc - d(q)‖
};

struct IirFilter {
    BasisSet basis;
    ComplexVec weights; ///< c
    RealVec b;          ///< b[0..K_φ-1]; b[K_φ] is identically zero
    RealVec a;          ///< a[0..K_φ], a[0] = 1
    double q{0.0};
    int k1{1};
    int k0{0};
    IirDiagnostics diagnostics;

    [[nodiscard]] std::size_t order() const noexcept { return a.size() - 1; }
};

/// Places Σ c_k φ_k(z) over the common denominator Π (z - p_k).
[[nodiscard]] IirFilter assemble_tf(const BasisSet& basis, std::span<const cplx> weights);

/// Full design: constraints, delay selection, weights, transfer function.
[[nodiscard]] IirFilter design_iir(const BasisSet& basis, int k1, int k0, QSelection selection = {});

/// h[m] = Σ c_k φ_k[m], complex before realness is enforced.
[[nodiscard]] ComplexVec weighted_basis_impulse(const BasisSet& basis, std::span<const cplx> weights, std::size_t length);

} // namespace phasetrack::iir
