#include "phasetrack/fir_design.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "phasetrack/noise_colouring.hpp"

namespace phasetrack::fir {

namespace {

// Monomials in u = (m - c) / s span the same space as m^k but keep the
// normal equations well conditioned for long windows.
struct ScaledAbscissa {
    double centre;
    double scale;

    double operator()(double m) const noexcept { return (m - centre) / scale; }
};

ScaledAbscissa abscissa_for(std::size_t length) {
    const double c = 0.5 * static_cast<double>(length - 1);
    return {c, std::max(c, 1.0)};
}

Eigen::MatrixXd scaled_vandermonde(std::size_t length, int k1, const ScaledAbscissa& u) {
    const auto rows = static_cast<Eigen::Index>(length);
    Eigen::MatrixXd x(rows, k1);
    for (Eigen::Index m = 0; m < rows; ++m) {
        double power = 1.0;
        for (int k = 0; k < k1; ++k) {
            x(m, k) = power;
            power *= u(static_cast<double>(m));
        }
    }
    return x;
}

void check_orders(std::size_t length, int k1, int k0) {
    if (k1 < 1) {
        throw DesignError("K1 must be at least 1");
    }
    if (k0 < 0) {
        throw DesignError("K0 must be non-negative");
    }
    if (static_cast<std::size_t>(k1) > length) {
        throw DesignError(fmt::format("K1 = {} exceeds the window length M = {}", k1, length));
    }
}

Eigen::LLT<Eigen::MatrixXd> covariance_factor(std::size_t length, int k0) {
    Eigen::LLT<Eigen::MatrixXd> chol(colouring::coloured_covariance(k0, length).dense());
    if (chol.info() != Eigen::Success) {
        throw DesignError("coloured-noise covariance is not positive definite");
    }
    return chol;
}

} // namespace

Eigen::MatrixXd vandermonde(std::size_t length, int k1) {
    const auto rows = static_cast<Eigen::Index>(length);
    Eigen::MatrixXd x(rows, k1);
    for (Eigen::Index m = 0; m < rows; ++m) {
        double power = 1.0;
        for (int k = 0; k < k1; ++k) {
            x(m, k) = power;
            power *= static_cast<double>(m);
        }
    }
    return x;
}

Eigen::RowVectorXd synthesis_vector(double q, int k1) {
    Eigen::RowVectorXd x(k1);
    double power = 1.0;
    for (int k = 0; k < k1; ++k) {
        x(k) = power;
        power *= q;
    }
    return x;
}

WhitenedGram fir_whitened_gram(std::size_t length, int k1, int k0) {
    check_orders(length, k1, k0);
    const Eigen::MatrixXd x = vandermonde(length, k1);
    // W X = P⁻¹ X via Cholesky; the covariance is symmetric positive definite.
    const Eigen::MatrixXd wx = covariance_factor(length, k0).solve(x);

    WhitenedGram out;
    out.projector = wx.transpose();
    out.gram = x.transpose() * wx;
    return out;
}

FirFilter design_fir(std::size_t length, int k1, int k0, double q) {
    if (!std::isfinite(q)) {
        throw DesignError("group delay q must be finite");
    }
    check_orders(length, k1, k0);
    const ScaledAbscissa u = abscissa_for(length);
    const Eigen::MatrixXd x = scaled_vandermonde(length, k1, u);
    const Eigen::MatrixXd wx = covariance_factor(length, k0).solve(x);
    Eigen::MatrixXd gram = x.transpose() * wx;
    gram = 0.5 * (gram + gram.transpose()).eval();

    const Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (lu.rank() < k1) {
        throw DesignError(fmt::format("normal equations are rank deficient (rank {} < K1 = {})", lu.rank(), k1));
    }
    const Eigen::RowVectorXd target = synthesis_vector(u(q), k1);
    const Eigen::RowVectorXd coeffs = lu.solve(target.transpose()).transpose();
    Eigen::RowVectorXd h = coeffs * wx.transpose();

    // W is badly conditioned for large K0, so the taps carry rounding that
    // shows up in the moments. One minimum-norm correction restores them.
    const Eigen::RowVectorXd residual = target - h * x;
    const Eigen::MatrixXd xtx = x.transpose() * x;
    h += xtx.llt().solve(residual.transpose()).transpose() * x.transpose();

    FirFilter f;
    f.h.assign(h.data(), h.data() + h.size());
    f.length = length;
    f.k1 = k1;
    f.k0 = k0;
    f.q = q;
    f.interpolating = static_cast<std::size_t>(k1) == length;
    return f;
}

} // namespace phasetrack::fir
