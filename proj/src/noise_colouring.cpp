#include "phasetrack/noise_colouring.hpp"

#include <cmath>
#include <cstdint>

namespace phasetrack::colouring {

namespace {

void require_order(int k0) {
    if (k0 < 0) {
        throw std::invalid_argument("differentiator count must be non-negative");
    }
}

} // namespace

RealVec convolve(const RealVec& a, const RealVec& b) {
    if (a.empty() || b.empty()) {
        return {};
    }
    RealVec out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            out[i + j] += a[i] * b[j];
        }
    }
    return out;
}

RealVec hpf_impulse(int k0) {
    require_order(k0);
    // Alternating binomial row, built by repeated convolution with [1, -1].
    std::vector<std::int64_t> h{1};
    for (int k = 0; k < k0; ++k) {
        std::vector<std::int64_t> next(h.size() + 1, 0);
        for (std::size_t m = 0; m < h.size(); ++m) {
            next[m] += h[m];
            next[m + 1] -= h[m];
        }
        h = std::move(next);
    }
    return RealVec(h.begin(), h.end());
}

RealVec raw_autocorrelation(int k0) {
    const RealVec h = hpf_impulse(k0);
    RealVec r(static_cast<std::size_t>(k0) + 1, 0.0);
    for (std::size_t l = 0; l < r.size(); ++l) {
        double acc = 0.0;
        for (std::size_t m = l; m < h.size(); ++m) {
            acc += h[m] * h[m - l];
        }
        r[l] = acc;
    }
    return r;
}

double ColouredNoiseCovariance::operator()(std::size_t row, std::size_t col) const noexcept {
    const std::size_t lag = row > col ? row - col : col - row;
    return lag < lags.size() ? lags[lag] : 0.0;
}

Eigen::MatrixXd ColouredNoiseCovariance::dense() const {
    const auto n = static_cast<Eigen::Index>(dimension);
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            p(i, j) = (*this)(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        }
    }
    return p;
}

ColouredNoiseCovariance coloured_covariance(int k0, std::size_t dimension) {
    require_order(k0);
    if (dimension < 1) {
        throw std::invalid_argument("covariance dimension must be at least 1");
    }
    const RealVec raw = raw_autocorrelation(k0);
    ColouredNoiseCovariance cov;
    cov.k0 = k0;
    cov.dimension = dimension;
    cov.raw_zero_lag = raw[0];
    cov.lags.resize(raw.size());
    for (std::size_t l = 0; l < raw.size(); ++l) {
        cov.lags[l] = raw[l] / raw[0];
    }
    return cov;
}

double noise_psd(int k0, double omega) {
    require_order(k0);
    // |1 - e^{-iω}|² = 2 - 2 cos ω
    return std::pow(2.0 - 2.0 * std::cos(omega), k0);
}

} // namespace phasetrack::colouring
