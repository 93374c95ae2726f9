#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "phasetrack/common.hpp"

namespace phasetrack::colouring {

/// Impulse response of K0 cascaded two-point differentiators [1, -1].
[[nodiscard]] RealVec hpf_impulse(int k0);

/// Unnormalized autocorrelation of hpf_impulse(k0) at lags 0..k0.
/// Entries are exact integers: (-1)^l C(2 K0, K0 + l).
[[nodiscard]] RealVec raw_autocorrelation(int k0);

/// Banded symmetric Toeplitz covariance of differentiated white noise,
/// normalized to unit variance on the diagonal.
struct ColouredNoiseCovariance {
    int k0{0};
    std::size_t dimension{0};
    RealVec lags;             ///< r[0..k0], r[0] = 1
    double raw_zero_lag{1.0}; ///< unnormalized r_raw[0] = C(2 K0, K0)

    [[nodiscard]] double operator()(std::size_t row, std::size_t col) const noexcept;
    [[nodiscard]] Eigen::MatrixXd dense() const;
};

[[nodiscard]] ColouredNoiseCovariance coloured_covariance(int k0, std::size_t dimension);

/// |H_HPF(e^{iω})|² = |1 - e^{-iω}|^{2 K0}.
[[nodiscard]] double noise_psd(int k0, double omega);

/// Full convolution of two real sequences.
[[nodiscard]] RealVec convolve(const RealVec& a, const RealVec& b);

} // namespace phasetrack::colouring
