#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "phasetrack/common.hpp"

namespace phasetrack::fir {

/// Non-recursive smoother/predictor obtained by whitened polynomial regression.
struct FirFilter {
    RealVec h;             ///< taps h[0..M-1], applied as y[n] = Σ h[m] x[n-m]
    std::size_t length{0}; ///< M
    int k1{1};             ///< number of dc flatness constraints
    int k0{0};             ///< differentiators assumed when whitening
    double q{0.0};         ///< passband group delay the design targets
    bool interpolating{false}; ///< K1 == M: no freedom left for noise-gain minimisation
};

/// Normal-equation factors of the whitened regression:
/// gram = Xᵀ W X (K1 × K1), projector = Xᵀ W (K1 × M), W = P⁻¹.
struct WhitenedGram {
    Eigen::MatrixXd gram;
    Eigen::MatrixXd projector;
};

/// M × K1 Vandermonde matrix with entries m^k (0⁰ = 1).
[[nodiscard]] Eigen::MatrixXd vandermonde(std::size_t length, int k1);

/// Synthesis row x(q) = [1, q, q², ...].
[[nodiscard]] Eigen::RowVectorXd synthesis_vector(double q, int k1);

[[nodiscard]] WhitenedGram fir_whitened_gram(std::size_t length, int k1, int k0);

/// h = x(q) {Xᵀ W X}⁻¹ Xᵀ W. Throws DesignError on rank deficiency.
[[nodiscard]] FirFilter design_fir(std::size_t length, int k1, int k0, double q);

/// Linear-phase delay (M - 1) / 2.
[[nodiscard]] inline double centre_delay(std::size_t length) noexcept {
    return 0.5 * static_cast<double>(length - 1);
}

} // namespace phasetrack::fir
