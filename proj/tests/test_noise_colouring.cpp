#include <doctest.h>

#include <cmath>

#include "phasetrack/noise_colouring.hpp"

using namespace phasetrack;
using namespace phasetrack::colouring;

TEST_CASE("differentiator chain impulse") {
    CHECK(hpf_impulse(0) == RealVec{1.0});
    CHECK(hpf_impulse(2) == RealVec{1.0, -2.0, 1.0});
    CHECK(hpf_impulse(3) == RealVec{1.0, -3.0, 3.0, -1.0});
    CHECK(hpf_impulse(5) == RealVec{1.0, -5.0, 10.0, -10.0, 5.0, -1.0});
}

TEST_CASE("differentiator chain equals repeated convolution with [1, -1]") {
    RealVec h{1.0};
    for (int k0 = 0; k0 <= 10; ++k0) {
        CHECK(hpf_impulse(k0) == h);
        double sum = 0.0;
        for (double v : h) {
            sum += v;
        }
        CHECK(sum == (k0 == 0 ? 1.0 : 0.0));
        h = convolve(h, {1.0, -1.0});
    }
}

TEST_CASE("coloured covariance matrices") {
    SUBCASE("K0 = 0 is the identity") {
        const auto p = coloured_covariance(0, 4).dense();
        CHECK(p.isApprox(Eigen::MatrixXd::Identity(4, 4)));
    }
    SUBCASE("K0 = 1, M = 3") {
        Eigen::MatrixXd expected(3, 3);
        expected << 2, -1, 0, -1, 2, -1, 0, -1, 2;
        CHECK((coloured_covariance(1, 3).dense() - 0.5 * expected).cwiseAbs().maxCoeff() < 1e-15);
    }
    SUBCASE("K0 = 3, M = 5 first row") {
        const auto p = coloured_covariance(3, 5).dense();
        const double row[5] = {20, -15, 6, -1, 0};
        for (int j = 0; j < 5; ++j) {
            CHECK(p(0, j) == doctest::Approx(row[j] / 20.0).epsilon(1e-15));
        }
        CHECK(coloured_covariance(3, 5).raw_zero_lag == 20.0);
    }
}

TEST_CASE("covariance equals the normalized Gram of shifted differentiator responses") {
    for (int k0 = 0; k0 <= 5; ++k0) {
        const RealVec h = hpf_impulse(k0);
        for (std::size_t m : {1u, 2u, 7u, 16u, 64u}) {
            // Rows of a banded convolution matrix: noise sample i sees h at offsets i..i+K0.
            const std::size_t len = m + h.size() - 1;
            Eigen::MatrixXd conv = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(len));
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t j = 0; j < h.size(); ++j) {
                    conv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i + j)) = h[j];
                }
            }
            const Eigen::MatrixXd gram = conv * conv.transpose();
            const auto cov = coloured_covariance(k0, m);
            CHECK((cov.dense() - gram / gram(0, 0)).cwiseAbs().maxCoeff() < 1e-14);
            const Eigen::LLT<Eigen::MatrixXd> llt(cov.dense());
            CHECK(llt.info() == Eigen::Success);
        }
    }
}

TEST_CASE("noise PSD") {
    CHECK(noise_psd(1, 0.0) == 0.0);
    CHECK(noise_psd(1, kPi) == doctest::Approx(4.0));
    CHECK(noise_psd(0, 1.234) == 1.0);
    for (int k0 = 0; k0 <= 5; ++k0) {
        for (double w : {0.1, 0.7, 2.0, 3.1}) {
            CHECK(noise_psd(k0, w) == doctest::Approx(std::pow(noise_psd(1, w), k0)).epsilon(1e-12));
            const RealVec h = hpf_impulse(k0);
            cplx acc{};
            for (std::size_t m = 0; m < h.size(); ++m) {
                acc += h[m] * std::polar(1.0, -w * static_cast<double>(m));
            }
            CHECK(noise_psd(k0, w) == doctest::Approx(std::norm(acc)).epsilon(1e-12));
        }
    }
}

TEST_CASE("inverse DTFT of the PSD reproduces the normalized autocorrelation") {
    constexpr int grid = 4096;
    for (int k0 = 0; k0 <= 5; ++k0) {
        const auto cov = coloured_covariance(k0, static_cast<std::size_t>(k0) + 3);
        for (int lag = 0; lag <= k0 + 2; ++lag) {
            double acc = 0.0;
            for (int i = 0; i < grid; ++i) {
                const double w = kTwoPi * i / grid;
                acc += noise_psd(k0, w) * std::cos(w * lag);
            }
            const double r = acc / grid / cov.raw_zero_lag;
            CHECK(std::abs(r - cov(0, static_cast<std::size_t>(lag))) < 1e-9);
        }
    }
}
