#include "phasetrack/iir_design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "phasetrack/noise_colouring.hpp"

namespace phasetrack::iir {

namespace {

constexpr double kTailTolerance = 1e-14;
constexpr std::size_t kHorizonCap = 1'000'000;
constexpr int kMaxBesselOrder = 8;

double factorial(int k) {
    double f = 1.0;
    for (int j = 2; j <= k; ++j) {
        f *= j;
    }
    return f;
}

// Descending coefficients of Π (z - r_j).
ComplexVec poly_from_roots(std::span<const cplx> roots) {
    ComplexVec poly{cplx(1.0)};
    for (const cplx& r : roots) {
        ComplexVec next(poly.size() + 1, cplx{});
        for (std::size_t i = 0; i < poly.size(); ++i) {
            next[i] += poly[i];
            next[i + 1] -= r * poly[i];
        }
        poly = std::move(next);
    }
    return poly;
}

template <typename T>
std::complex<T> horner(std::span<const double> ascending, std::complex<T> x) {
    std::complex<T> acc{};
    for (auto it = ascending.rbegin(); it != ascending.rend(); ++it) {
        acc = acc * x + static_cast<T>(*it);
    }
    return acc;
}

// Newton polish of a root of a real polynomial (ascending coefficients).
cplx polish_root(std::span<const double> ascending, const RealVec& derivative, cplx root) {
    using ld = long double;
    std::complex<ld> z(root.real(), root.imag());
    for (int it = 0; it < 50; ++it) {
        const auto f = horner<ld>(ascending, z);
        const auto df = horner<ld>(derivative, z);
        if (std::abs(df) == 0.0L) {
            break;
        }
        const auto step = f / df;
        z -= step;
        if (std::abs(step) <= 1e-18L * (1.0L + std::abs(z))) {
            break;
        }
    }
    return {static_cast<double>(z.real()), static_cast<double>(z.imag())};
}

ComplexVec companion_roots(std::span<const double> ascending) {
    std::size_t degree = ascending.size() - 1;
    while (degree > 0 && ascending[degree] == 0.0) {
        --degree;
    }
    if (degree == 0) {
        return {};
    }
    const double lead = ascending[degree];
    const auto n = static_cast<Eigen::Index>(degree);
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        companion(0, j) = -ascending[degree - 1 - static_cast<std::size_t>(j)] / lead;
    }
    for (Eigen::Index i = 1; i < n; ++i) {
        companion(i, i - 1) = 1.0;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    if (solver.info() != Eigen::Success) {
        throw DesignError("companion-matrix eigenvalue solver did not converge");
    }
    ComplexVec roots(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        roots[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
    }
    const RealVec derivative = polyder(ascending.first(degree + 1));
    for (auto& r : roots) {
        r = polish_root(ascending.first(degree + 1), derivative, r);
    }
    return roots;
}

// Rebuilds an exactly conjugate-closed root set: keeps upper-half-plane roots,
// mirrors them, and zeroes the imaginary part of real roots.
ComplexVec conjugate_closed(ComplexVec roots) {
    ComplexVec out;
    for (const cplx& r : roots) {
        if (std::abs(r.imag()) <= 1e-12 * (1.0 + std::abs(r))) {
            out.emplace_back(r.real(), 0.0);
        } else if (r.imag() > 0.0) {
            out.push_back(r);
            out.push_back(std::conj(r));
        }
    }
    if (out.size() != roots.size()) {
        throw DesignError("prototype roots are not closed under conjugation");
    }
    std::sort(out.begin(), out.end(), [](const cplx& x, const cplx& y) {
        return x.imag() != y.imag() ? x.imag() > y.imag() : x.real() < y.real();
    });
    return out;
}

double analog_magnitude_squared(const RealVec& coeffs, double omega) {
    cplx acc{};
    const cplx s(0.0, omega);
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
        acc = acc * s + *it;
    }
    return std::norm(coeffs.front() / acc);
}

void require_order(std::size_t k, int k1) {
    if (static_cast<int>(k) < k1) {
        throw DesignError(fmt::format("basis size K_phi = {} is smaller than the constraint count K1 = {}", k, k1));
    }
}

} // namespace

double BasisSet::max_pole_radius() const noexcept {
    double r = 0.0;
    for (const cplx& p : poles) {
        r = std::max(r, std::abs(p));
    }
    return r;
}

RealVec reverse_bessel_coefficients(int order) {
    if (order < 1) {
        throw DesignError("Bessel order must be at least 1");
    }
    RealVec a(static_cast<std::size_t>(order) + 1);
    for (int k = 0; k <= order; ++k) {
        a[static_cast<std::size_t>(k)] =
            factorial(2 * order - k) / (std::pow(2.0, order - k) * factorial(k) * factorial(order - k));
    }
    return a;
}

ComplexVec reverse_bessel_roots(int order) {
    const RealVec coeffs = reverse_bessel_coefficients(order);
    ComplexVec roots = companion_roots(coeffs);
    double worst = 0.0;
    for (const cplx& r : roots) {
        double scale = 0.0;
        for (std::size_t k = 0; k < coeffs.size(); ++k) {
            scale += coeffs[k] * std::pow(std::abs(r), static_cast<double>(k));
        }
        worst = std::max(worst, std::abs(horner<double>(coeffs, r)) / scale);
        if (r.real() >= 0.0) {
            throw DesignError("Bessel prototype root found in the right half-plane");
        }
    }
    if (worst > 1e-12) {
        throw DesignError(fmt::format("Bessel root finder did not converge (relative residual {:.3e})", worst));
    }
    return conjugate_closed(std::move(roots));
}

ComplexVec bessel_analog_poles(int order, double omega_c, BesselNorm norm) {
    ComplexVec roots = reverse_bessel_roots(order);
    const RealVec coeffs = reverse_bessel_coefficients(order);
    double scale = 1.0;
    switch (norm) {
    case BesselNorm::UnitDelay:
        break;
    case BesselNorm::PhaseMidpoint:
        scale = std::pow(coeffs.front(), -1.0 / order);
        break;
    case BesselNorm::Magnitude3dB: {
        // Bisection for the unit-delay prototype's 3 dB frequency.
        double lo = 0.0;
        double hi = 1.0;
        while (analog_magnitude_squared(coeffs, hi) > 0.5) {
            hi *= 2.0;
        }
        while (hi - lo > 1e-12 * hi) {
            const double mid = 0.5 * (lo + hi);
            (analog_magnitude_squared(coeffs, mid) > 0.5 ? lo : hi) = mid;
        }
        scale = 1.0 / (0.5 * (lo + hi));
        break;
    }
    }
    for (auto& r : roots) {
        r *= scale * omega_c;
    }
    return roots;
}

BasisSet bessel_poles(int order, double cutoff, BesselNorm norm) {
    if (order < 1 || order > kMaxBesselOrder) {
        throw DesignError(fmt::format("Bessel basis order must be in 1..{}, got {}", kMaxBesselOrder, order));
    }
    if (!(cutoff > 0.0 && cutoff < 0.5)) {
        throw DesignError(fmt::format("cut-off frequency must lie in (0, 0.5) cycles/sample, got {}", cutoff));
    }
    BasisSet basis;
    basis.kind = BasisKind::Bessel;
    basis.cutoff = cutoff;
    basis.norm = norm;
    for (const cplx& s : bessel_analog_poles(order, kTwoPi * cutoff, norm)) {
        basis.poles.push_back(std::exp(s));
    }
    return basis;
}

BasisSet origin_basis(int order) {
    if (order < 1) {
        throw DesignError("origin basis needs at least one function");
    }
    BasisSet basis;
    basis.kind = BasisKind::Origin;
    basis.poles.assign(static_cast<std::size_t>(order), cplx{});
    return basis;
}

BasisSet laguerre_basis(int order, double pole) {
    if (order < 1) {
        throw DesignError("Laguerre basis needs at least one function");
    }
    if (!(pole > 0.0 && pole < 1.0)) {
        throw DesignError(fmt::format("Laguerre pole must lie in (0, 1), got {}", pole));
    }
    BasisSet basis;
    basis.kind = BasisKind::Laguerre;
    basis.laguerre_pole = pole;
    basis.poles.assign(static_cast<std::size_t>(order), cplx(pole, 0.0));
    return basis;
}

std::size_t tail_horizon(const BasisSet& basis, int k0) {
    const std::size_t k = basis.size();
    const auto extra = static_cast<std::size_t>(std::max(k0, 0));
    const double r = basis.max_pole_radius();
    if (basis.kind == BasisKind::Origin || r == 0.0) {
        return k + extra;
    }
    std::size_t n = 0;
    if (basis.kind == BasisKind::Laguerre) {
        // Envelope C(n, K-1) r^{n-K+1} of the highest-index function, past its peak.
        const double log_r = std::log(r);
        const double peak = static_cast<double>(k - 1) / -log_r;
        double log_env = 0.0;
        for (n = k - 1; n < kHorizonCap; ++n) {
            const auto kk = static_cast<double>(k - 1);
            const auto nn = static_cast<double>(n);
            log_env = std::lgamma(nn + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(nn - kk + 1.0) + (nn - kk) * log_r;
            if (nn > peak && log_env < std::log(kTailTolerance)) {
                break;
            }
        }
    } else {
        n = static_cast<std::size_t>(std::ceil(std::log(kTailTolerance) / std::log(r)));
    }
    n = std::max(n + extra, k + extra);
    return std::min(n, kHorizonCap);
}

ComplexVec basis_impulse(const BasisSet& basis, std::size_t index, std::size_t length) {
    if (index >= basis.size()) {
        throw std::out_of_range("basis index out of range");
    }
    ComplexVec phi(length, cplx{});
    switch (basis.kind) {
    case BasisKind::Origin:
        if (index < length) {
            phi[index] = 1.0;
        }
        break;
    case BasisKind::Bessel: {
        const cplx p = basis.poles[index];
        cplx power(1.0);
        for (std::size_t m = 0; m < length; ++m) {
            phi[m] = power;
            power *= p;
        }
        break;
    }
    case BasisKind::Laguerre: {
        // C(m, k) p^{m-k} for m >= k.
        const double p = basis.laguerre_pole;
        if (index < length) {
            phi[index] = 1.0;
        }
        for (std::size_t m = index + 1; m < length; ++m) {
            phi[m] = phi[m - 1] * p * static_cast<double>(m) / static_cast<double>(m - index);
        }
        break;
    }
    }
    return phi;
}

Eigen::MatrixXcd build_S(const BasisSet& basis, int k0) {
    const RealVec hpf = colouring::hpf_impulse(k0);
    const std::size_t horizon = tail_horizon(basis, k0);
    const auto k = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(horizon), k);
    for (Eigen::Index col = 0; col < k; ++col) {
        const ComplexVec phi = basis_impulse(basis, static_cast<std::size_t>(col), horizon);
        for (std::size_t n = 0; n < horizon; ++n) {
            cplx acc{};
            for (std::size_t m = 0; m < hpf.size() && m <= n; ++m) {
                acc += hpf[m] * phi[n - m];
            }
            g(static_cast<Eigen::Index>(n), col) = acc;
        }
    }
    Eigen::MatrixXcd s = g.adjoint() * g;
    return 0.5 * (s + s.adjoint());
}

Eigen::MatrixXcd dc_derivatives(const BasisSet& basis, int k1) {
    if (k1 < 1) {
        throw DesignError("K1 must be at least 1");
    }
    const std::size_t horizon = tail_horizon(basis, 0);
    const auto k = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXcd phi_mat = Eigen::MatrixXcd::Zero(k1, k);
    for (Eigen::Index col = 0; col < k; ++col) {
        const ComplexVec phi = basis_impulse(basis, static_cast<std::size_t>(col), horizon);
        for (std::size_t m = 0; m < horizon; ++m) {
            const cplx factor(0.0, -static_cast<double>(m));
            cplx power(1.0);
            for (int row = 0; row < k1; ++row) {
                phi_mat(row, col) += phi[m] * power;
                power *= factor;
            }
        }
    }
    return phi_mat;
}

Eigen::VectorXcd desired_derivatives(double q, int k1) {
    Eigen::VectorXcd d(k1);
    const cplx factor(0.0, -q);
    cplx power(1.0);
    for (int k = 0; k < k1; ++k) {
        d(k) = power;
        power *= factor;
    }
    return d;
}

ConstraintSystem build_constraints(const BasisSet& basis, int k1, int k0) {
    require_order(basis.size(), k1);
    return {build_S(basis, k0), dc_derivatives(basis, k1)};
}

double hermitian_condition(const Eigen::MatrixXcd& m) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        return std::numeric_limits<double>::infinity();
    }
    const double lo = solver.eigenvalues().minCoeff();
    const double hi = solver.eigenvalues().maxCoeff();
    if (!(lo > 0.0)) {
        return std::numeric_limits<double>::infinity();
    }
    return hi / lo;
}

namespace {

struct ReducedSystem {
    Eigen::MatrixXcd s_inv_phi_h; // S⁻¹ Φ†
    Eigen::MatrixXcd gram;        // Φ S⁻¹ Φ†
    double condition_S{0.0};
    double condition_Q{0.0};
};

ReducedSystem reduce(const ConstraintSystem& sys) {
    require_order(static_cast<std::size_t>(sys.S.rows()), sys.k1());
    ReducedSystem out;
    out.condition_S = hermitian_condition(sys.S);
    if (out.condition_S > kMaxCondition) {
        throw DesignError(fmt::format(
            "noise-gain matrix S is ill conditioned (condition {:.3e}); rounding errors would dominate the weights",
            out.condition_S));
    }
    const Eigen::LLT<Eigen::MatrixXcd> chol(sys.S);
    if (chol.info() != Eigen::Success) {
        throw DesignError("noise-gain matrix S is not positive definite");
    }
    out.s_inv_phi_h = chol.solve(sys.Phi.adjoint());
    const Eigen::MatrixXcd gram = sys.Phi * out.s_inv_phi_h;
    out.gram = 0.5 * (gram + gram.adjoint());
    out.condition_Q = hermitian_condition(out.gram);
    if (out.condition_Q > kMaxCondition) {
        throw DesignError(fmt::format(
            "constraint Gram matrix Phi S^-1 Phi^H is ill conditioned (condition {:.3e})", out.condition_Q));
    }
    return out;
}

} // namespace

Eigen::VectorXcd solve_weights(const ConstraintSystem& sys, double q) {
    const ReducedSystem red = reduce(sys);
    const Eigen::VectorXcd multipliers = red.gram.llt().solve(sys.d(q));
    return red.s_inv_phi_h * multipliers;
}

RealVec cng_polynomial(const ConstraintSystem& sys) {
    const ReducedSystem red = reduce(sys);
    Eigen::MatrixXcd q_mat = red.gram.inverse();
    q_mat = 0.5 * (q_mat + q_mat.adjoint());

    const int k1 = sys.k1();
    ComplexVec coeffs(static_cast<std::size_t>(2 * k1 - 1), cplx{});
    // conj(d_j) Q_jk d_k = i^j (-i)^k Q_jk q^{j+k}
    const auto ipow = [](int n, bool negative) {
        static constexpr cplx cycle[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        const cplx v = cycle[n % 4];
        return negative ? std::conj(v) : v;
    };
    for (int j = 0; j < k1; ++j) {
        for (int k = 0; k < k1; ++k) {
            coeffs[static_cast<std::size_t>(j + k)] += ipow(j, false) * ipow(k, true) * q_mat(j, k);
        }
    }
    double scale = 0.0;
    double residue = 0.0;
    for (const cplx& c : coeffs) {
        scale = std::max(scale, std::abs(c));
        residue = std::max(residue, std::abs(c.imag()));
    }
    if (residue > 1e-10 * scale) {
        throw DesignError(fmt::format("CNG polynomial has a non-negligible imaginary residue ({:.3e})", residue / scale));
    }
    RealVec out(coeffs.size());
    std::transform(coeffs.begin(), coeffs.end(), out.begin(), [](const cplx& c) { return c.real(); });
    return out;
}

double polyval(std::span<const double> ascending, double x) noexcept {
    double acc = 0.0;
    for (auto it = ascending.rbegin(); it != ascending.rend(); ++it) {
        acc = acc * x + *it;
    }
    return acc;
}

RealVec polyder(std::span<const double> ascending) {
    if (ascending.size() <= 1) {
        return {0.0};
    }
    RealVec d(ascending.size() - 1);
    for (std::size_t k = 1; k < ascending.size(); ++k) {
        d[k - 1] = static_cast<double>(k) * ascending[k];
    }
    return d;
}

RealVec real_roots(std::span<const double> ascending) {
    RealVec out;
    if (ascending.empty()) {
        return out;
    }
    for (const cplx& r : companion_roots(ascending)) {
        if (std::abs(r.imag()) < 1e-8 * (1.0 + std::abs(r.real()))) {
            out.push_back(r.real());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

double select_q(std::span<const double> cng_poly, int k1, QSelection selection) {
    if (selection.policy == QPolicy::Explicit) {
        if (!std::isfinite(selection.value)) {
            throw DesignError("explicit group delay must be finite");
        }
        return selection.value;
    }
    if (k1 < 2) {
        throw DesignError("for K1 = 1 the CNG does not depend on q; only an explicit delay is meaningful");
    }
    const RealVec stationary = real_roots(polyder(cng_poly));
    const auto expected = static_cast<std::size_t>(2 * (k1 - 1) - 1);
    if (stationary.empty()) {
        throw DesignError(fmt::format("CNG derivative has no real roots (expected up to {})", expected));
    }
    switch (selection.policy) {
    case QPolicy::MinQ:
        return stationary.front();
    case QPolicy::MinCng:
        return *std::min_element(stationary.begin(), stationary.end(), [&](double x, double y) {
            return polyval(cng_poly, x) < polyval(cng_poly, y);
        });
    case QPolicy::Optimal:
    case QPolicy::Explicit:
        break;
    }
    if (k1 == 3) {
        if (stationary.size() != 3) {
            throw DesignError(fmt::format("expected three real stationary points for K1 = 3, found {}", stationary.size()));
        }
        return stationary[1];
    }
    // K1 = 2 has a single stationary point; beyond that the smallest delay is used.
    return stationary.front();
}

IirFilter assemble_tf(const BasisSet& basis, std::span<const cplx> weights) {
    const std::size_t k = basis.size();
    if (weights.size() != k) {
        throw DesignError("weight count does not match the basis size");
    }
    const ComplexVec denom = poly_from_roots(basis.poles);

    // Numerator in descending powers of z: Σ c_k N_k(z), N_k = φ_k(z) A(z).
    ComplexVec numer(k + 1, cplx{});
    RealVec magnitude(k + 1, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        ComplexVec term;
        switch (basis.kind) {
        case BasisKind::Bessel: {
            ComplexVec others;
            for (std::size_t j = 0; j < k; ++j) {
                if (j != i) {
                    others.push_back(basis.poles[j]);
                }
            }
            term = poly_from_roots(others);
            term.push_back(cplx{}); // × z
            break;
        }
        case BasisKind::Origin:
            term.assign(k + 1, cplx{});
            term[i] = 1.0; // z^{K-i}
            break;
        case BasisKind::Laguerre: {
            const ComplexVec repeated(k - 1 - i, cplx(basis.laguerre_pole, 0.0));
            term = poly_from_roots(repeated);
            term.resize(term.size() + 1, cplx{}); // × z
            term.insert(term.begin(), i, cplx{});  // pad to degree K
            break;
        }
        }
        for (std::size_t j = 0; j <= k; ++j) {
            numer[j] += weights[i] * term[j];
            magnitude[j] += std::abs(weights[i] * term[j]);
        }
    }

    IirFilter f;
    f.basis = basis;
    f.weights.assign(weights.begin(), weights.end());
    // Residues are measured against the size of the summed terms, so that
    // cancellation in b does not masquerade as a complex result.
    double residue = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        f.b.push_back(numer[j].real());
        if (magnitude[j] > 0.0) {
            residue = std::max(residue, std::abs(numer[j].imag()) / magnitude[j]);
        }
    }
    if (magnitude[k] > 0.0) {
        residue = std::max(residue, std::abs(numer[k]) / magnitude[k]);
    }
    double a_scale = 0.0;
    for (const cplx& c : denom) {
        a_scale = std::max(a_scale, std::abs(c));
    }
    for (const cplx& c : denom) {
        f.a.push_back(c.real());
        residue = std::max(residue, std::abs(c.imag()) / a_scale);
    }
    f.diagnostics.imag_residue = residue;
    if (f.diagnostics.imag_residue > 1e-8) {
        throw DesignError(fmt::format(
            "recombined transfer function has non-negligible imaginary components ({:.3e}); unsuitable basis set?",
            f.diagnostics.imag_residue));
    }
    return f;
}

ComplexVec weighted_basis_impulse(const BasisSet& basis, std::span<const cplx> weights, std::size_t length) {
    ComplexVec h(length, cplx{});
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const ComplexVec phi = basis_impulse(basis, i, length);
        for (std::size_t m = 0; m < length; ++m) {
            h[m] += weights[i] * phi[m];
        }
    }
    return h;
}

namespace {

// Moments μ_k(x) = Σ j^k x[j] of the realized b/a satisfy
// μ_k(b) = Σ_i C(k,i) μ_i(h) μ_{k-i}(a), so μ_i(h) = q^i fixes the target
// moments of b exactly from a. Rounding in the weights and in the
// recombination leaves b slightly off; the minimum-norm correction restores
// the dc constraints on the coefficients actually used.
void enforce_moments(RealVec& b, const RealVec& a, int k1, double q) {
    using LMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    using LVec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
    const auto rows = static_cast<Eigen::Index>(k1);
    const auto cols = static_cast<Eigen::Index>(b.size());
    if (cols < rows) {
        return;
    }
    auto moment = [](const RealVec& x, int k) {
        long double acc = 0.0L;
        for (std::size_t j = 0; j < x.size(); ++j) {
            acc += static_cast<long double>(x[j]) * std::pow(static_cast<long double>(j), k);
        }
        return acc;
    };
    LMat v(rows, cols);
    LVec r(rows);
    for (int k = 0; k < k1; ++k) {
        long double target = 0.0L;
        long double binom = 1.0L;
        for (int i = 0; i <= k; ++i) {
            target += binom * std::pow(static_cast<long double>(q), i) * moment(a, k - i);
            binom = binom * (k - i) / (i + 1);
        }
        r(k) = target - moment(b, k);
        for (Eigen::Index j = 0; j < cols; ++j) {
            v(k, j) = std::pow(static_cast<long double>(j), k);
        }
    }
    const LVec delta = v.transpose() * (v * v.transpose()).fullPivLu().solve(r);
    for (Eigen::Index j = 0; j < cols; ++j) {
        b[static_cast<std::size_t>(j)] = static_cast<double>(b[static_cast<std::size_t>(j)] + delta(j));
    }
}

} // namespace

IirFilter design_iir(const BasisSet& basis, int k1, int k0, QSelection selection) {
    if (k1 < 1) {
        throw DesignError("K1 must be at least 1");
    }
    const ConstraintSystem sys = build_constraints(basis, k1, k0);
    const bool free_delay = k1 == 1;
    double q = selection.value;
    if (!free_delay) {
        q = select_q(cng_polynomial(sys), k1, selection);
    } else if (selection.policy == QPolicy::Explicit) {
        q = select_q({}, k1, selection);
    }
    const ReducedSystem red = reduce(sys);
    const Eigen::VectorXcd c = solve_weights(sys, free_delay ? 0.0 : q);

    IirFilter f = assemble_tf(basis, std::span<const cplx>(c.data(), static_cast<std::size_t>(c.size())));
    f.k1 = k1;
    f.k0 = k0;
    if (free_delay) {
        // Only the unit-dc-gain constraint is imposed: report the realized delay.
        double sb = 0.0;
        double mb = 0.0;
        double sa = 0.0;
        double ma = 0.0;
        for (std::size_t j = 0; j < f.b.size(); ++j) {
            sb += f.b[j];
            mb += static_cast<double>(j) * f.b[j];
        }
        for (std::size_t j = 0; j < f.a.size(); ++j) {
            sa += f.a[j];
            ma += static_cast<double>(j) * f.a[j];
        }
        q = mb / sb - ma / sa;
    }
    f.q = q;
    enforce_moments(f.b, f.a, k1, q);
    f.diagnostics.cng = (c.adjoint() * sys.S * c)(0, 0).real();
    f.diagnostics.condition_S = red.condition_S;
    f.diagnostics.condition_Q = red.condition_Q;
    f.diagnostics.constraint_residual = (sys.Phi * c - sys.d(free_delay ? 0.0 : q)).norm();

    const ComplexVec h = weighted_basis_impulse(basis, f.weights, tail_horizon(basis, k0));
    double peak = 0.0;
    double imag = 0.0;
    for (const cplx& v : h) {
        peak = std::max(peak, std::abs(v.real()));
        imag = std::max(imag, std::abs(v.imag()));
    }
    f.diagnostics.impulse_imag_residue = peak > 0.0 ? imag / peak : imag;
    return f;
}

} // namespace phasetrack::iir
