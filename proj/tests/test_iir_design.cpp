#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "phasetrack/analysis.hpp"
#include "phasetrack/fir_design.hpp"
#include "phasetrack/iir_design.hpp"
#include "phasetrack/noise_colouring.hpp"

using namespace phasetrack;
using namespace phasetrack::iir;

namespace {

// Roots of Π(z - p) descending polynomial, evaluated directly.
cplx eval_desc(const RealVec& a, cplx z) {
    cplx acc{};
    for (double c : a) {
        acc = acc * z + c;
    }
    return acc;
}

// μ_k(h) of h = b/a from the finite moments of b and a:
// μ_k(b) = Σ_i C(k,i) μ_i(h) μ_{k-i}(a).
std::vector<long double> impulse_moments(const RealVec& b, const RealVec& a, int count) {
    auto mom = [](const RealVec& x, int k) {
        long double acc = 0.0L;
        for (std::size_t j = 0; j < x.size(); ++j) {
            acc += static_cast<long double>(x[j]) * std::pow(static_cast<long double>(j), k);
        }
        return acc;
    };
    std::vector<long double> mh(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        long double acc = mom(b, k);
        long double binom = 1.0L;
        for (int i = 0; i < k; ++i) {
            acc -= binom * mh[static_cast<std::size_t>(i)] * mom(a, k - i);
            binom = binom * (k - i) / (i + 1);
        }
        mh[static_cast<std::size_t>(k)] = acc / mom(a, 0);
    }
    return mh;
}

} // namespace

TEST_CASE("reverse Bessel polynomials") {
    CHECK(reverse_bessel_coefficients(1) == RealVec{1.0, 1.0});
    CHECK(reverse_bessel_coefficients(2) == RealVec{3.0, 3.0, 1.0});
    CHECK(reverse_bessel_coefficients(3) == RealVec{15.0, 15.0, 6.0, 1.0});
    CHECK(reverse_bessel_coefficients(4) == RealVec{105.0, 105.0, 45.0, 10.0, 1.0});
    for (int k = 1; k <= 8; ++k) {
        const auto roots = reverse_bessel_roots(k);
        CHECK(roots.size() == static_cast<std::size_t>(k));
        const RealVec c = reverse_bessel_coefficients(k);
        for (const cplx& r : roots) {
            CHECK(r.real() < 0.0);
            cplx acc{};
            for (auto it = c.rbegin(); it != c.rend(); ++it) {
                acc = acc * r + *it;
            }
            CHECK(std::abs(acc) < 1e-9 * c.front());
        }
    }
}

TEST_CASE("first-order Bessel basis: pole at the cut-off") {
    for (BesselNorm norm : {BesselNorm::PhaseMidpoint, BesselNorm::Magnitude3dB, BesselNorm::UnitDelay}) {
        const auto b = bessel_poles(1, 0.1, norm);
        REQUIRE(b.size() == 1);
        CHECK(std::abs(b.poles[0] - std::exp(-kTwoPi * 0.1)) < 1e-12);
    }
}

TEST_CASE("second-order Bessel basis, 3 dB convention") {
    // Oracle: quadratic formula for s^2 + 3s + 3, then bisection on |H(i W)|^2 = 1/2.
    const cplx disc = std::sqrt(cplx(9.0 - 12.0, 0.0));
    const cplx r1 = (-3.0 + disc) / 2.0;
    auto mag2 = [](double w) { return 9.0 / std::norm(cplx(3.0 - w * w, 3.0 * w)); };
    double lo = 0.0;
    double hi = 10.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (mag2(mid) > 0.5 ? lo : hi) = mid;
    }
    const double w3 = 0.5 * (lo + hi);
    const double wc = kTwoPi * 0.1;
    const cplx expected = std::exp(r1 / w3 * wc);

    const auto b = bessel_poles(2, 0.1, BesselNorm::Magnitude3dB);
    REQUIRE(b.size() == 2);
    const bool match = std::abs(b.poles[0] - expected) < 1e-10 || std::abs(b.poles[1] - expected) < 1e-10;
    CHECK(match);
    CHECK(std::abs(b.poles[0] - std::conj(b.poles[1])) < 1e-15);
}

TEST_CASE("phase-midpoint scaling equals a0^(-1/K) of the unit-delay prototype") {
    for (int k = 1; k <= 8; ++k) {
        const auto unit = bessel_analog_poles(k, 1.0, BesselNorm::UnitDelay);
        const auto mid = bessel_analog_poles(k, 1.0, BesselNorm::PhaseMidpoint);
        const double a0 = reverse_bessel_coefficients(k).front();
        double radius = 1.0;
        for (std::size_t i = 0; i < unit.size(); ++i) {
            CHECK(std::abs(mid[i] - unit[i] * std::pow(a0, -1.0 / k)) < 1e-12);
            radius *= std::abs(mid[i]);
        }
        // Unit dc gain and |H(iω)| ω^K -> Π|p| = 1: the Butterworth asymptote.
        CHECK(radius == doctest::Approx(1.0).epsilon(1e-12));
    }
    // Orders 1 and 2 are exactly -Kπ/4 at the cut-off.
    for (int k = 1; k <= 2; ++k) {
        cplx den(1.0);
        for (const cplx& p : bessel_analog_poles(k, 1.0, BesselNorm::PhaseMidpoint)) {
            den *= (cplx(0.0, 1.0) - p) / (-p);
        }
        CHECK(std::arg(1.0 / den) == doctest::Approx(-k * kPi / 4.0).epsilon(1e-12));
    }
}

TEST_CASE("Bessel pole sets are conjugate closed and stable") {
    for (int k = 1; k <= 8; ++k) {
        for (double fc : {0.005, 1.0 / 64.0, 0.1, 0.3}) {
            const auto b = bessel_poles(k, fc);
            int real_count = 0;
            for (const cplx& p : b.poles) {
                CHECK(std::abs(p) < 1.0);
                if (p.imag() == 0.0) {
                    ++real_count;
                    continue;
                }
                const bool has_conj = std::any_of(b.poles.begin(), b.poles.end(), [&](const cplx& o) { return o == std::conj(p); });
                CHECK(has_conj);
            }
            CHECK(real_count == k % 2);
        }
    }
}

TEST_CASE("Bessel preconditions") {
    CHECK_THROWS_AS((void)bessel_poles(0, 0.1), DesignError);
    CHECK_THROWS_AS((void)bessel_poles(9, 0.1), DesignError);
    CHECK_THROWS_AS((void)bessel_poles(3, 0.0), DesignError);
    CHECK_THROWS_AS((void)bessel_poles(3, 0.5), DesignError);
    CHECK_THROWS_AS((void)laguerre_basis(3, 1.0), DesignError);
}

TEST_CASE("basis impulse responses") {
    BasisSet geo;
    geo.poles = {cplx(0.5, 0.0), std::polar(0.9, 0.2)};
    const auto phi = basis_impulse(geo, 0, 4);
    CHECK(phi == ComplexVec{1.0, 0.5, 0.25, 0.125});
    CHECK(std::abs(basis_impulse(geo, 1, 3)[2] - std::polar(0.81, 0.4)) < 1e-15);

    const auto origin = origin_basis(4);
    CHECK(basis_impulse(origin, 2, 5) == ComplexVec{0.0, 0.0, 1.0, 0.0, 0.0});

    const auto lag = laguerre_basis(3, 0.6);
    const auto l2 = basis_impulse(lag, 2, 10);
    for (std::size_t m = 0; m < 10; ++m) {
        const double expected = m < 2 ? 0.0 : 0.5 * m * (m - 1.0) * std::pow(0.6, m - 2.0);
        CHECK(std::abs(l2[m] - expected) < 1e-13);
    }
}

TEST_CASE("S matrix closed forms") {
    SUBCASE("single real pole") {
        BasisSet b;
        b.poles = {cplx(0.7, 0.0)};
        CHECK(std::abs(build_S(b, 0)(0, 0) - 1.0 / (1.0 - 0.49)) < 1e-12);
    }
    SUBCASE("two real poles") {
        BasisSet b;
        b.poles = {cplx(0.7, 0.0), cplx(0.4, 0.0)};
        const auto s = build_S(b, 0);
        CHECK(std::abs(s(0, 1) - 1.0 / (1.0 - 0.28)) < 1e-12);
        CHECK(std::abs(s(1, 1) - 1.0 / (1.0 - 0.16)) < 1e-12);
    }
    SUBCASE("complex pair with K0 = 1 against a brute-force sum") {
        BasisSet b;
        b.poles = {std::polar(0.9, 0.3), std::polar(0.9, -0.3)};
        const auto s = build_S(b, 1);
        cplx acc{};
        cplx prev0{};
        cplx prev1{};
        for (int n = 0; n < 5000; ++n) {
            const cplx g0 = std::pow(b.poles[0], n) - prev0;
            const cplx g1 = std::pow(b.poles[1], n) - prev1;
            acc += std::conj(g0) * g1;
            prev0 = std::pow(b.poles[0], n);
            prev1 = std::pow(b.poles[1], n);
        }
        CHECK(std::abs(s(0, 1) - acc) < 1e-10);
        CHECK((s - s.adjoint()).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("origin basis gives the unnormalized coloured covariance") {
        for (int k0 = 0; k0 <= 3; ++k0) {
            const auto cov = colouring::coloured_covariance(k0, 10);
            const auto s = build_S(origin_basis(10), k0);
            CHECK((s.real() - cov.raw_zero_lag * cov.dense()).cwiseAbs().maxCoeff() < 1e-12);
            CHECK(s.imag().cwiseAbs().maxCoeff() == 0.0);
        }
    }
}

TEST_CASE("dc derivative matrix") {
    BasisSet b;
    b.poles = {cplx(0.5, 0.0)};
    const auto phi = dc_derivatives(b, 3);
    CHECK(std::abs(phi(0, 0) - 2.0) < 1e-12);
    CHECK(std::abs(phi(1, 0) - cplx(0.0, -2.0)) < 1e-12);
    // Central finite difference of φ(e^{iω}) = 1/(1 - p e^{-iω}).
    auto resp = [](double w) { return 1.0 / (1.0 - 0.5 * std::polar(1.0, -w)); };
    const double h = 1e-5;
    CHECK(std::abs(phi(1, 0) - (resp(h) - resp(-h)) / (2.0 * h)) < 1e-8);
    CHECK(std::abs(phi(2, 0) - (resp(h) - 2.0 * resp(0.0) + resp(-h)) / (h * h)) < 1e-4);

    const auto o = dc_derivatives(origin_basis(5), 3);
    for (int k1 = 0; k1 < 3; ++k1) {
        for (int k = 0; k < 5; ++k) {
            const cplx expected = k1 == 0 ? cplx(1.0) : std::pow(cplx(0.0, -static_cast<double>(k)), k1);
            CHECK(std::abs(o(k1, k) - expected) < 1e-12);
        }
    }
}

TEST_CASE("tail horizon") {
    CHECK(tail_horizon(origin_basis(8), 2) == 10);
    BasisSet b;
    b.poles = {cplx(0.5, 0.0)};
    CHECK(tail_horizon(b, 3) == static_cast<std::size_t>(std::ceil(std::log(1e-14) / std::log(0.5))) + 3);
    const auto lag = laguerre_basis(4, 0.8);
    const std::size_t n = tail_horizon(lag, 0);
    const auto phi = basis_impulse(lag, 3, n + 1);
    double peak = 0.0;
    for (const cplx& v : phi) {
        peak = std::max(peak, std::abs(v));
    }
    CHECK(std::abs(phi[n - 1]) < 1e-13 * std::max(1.0, peak));
}

TEST_CASE("solve_weights satisfies the constraints and minimizes c^H S c") {
    const auto basis = bessel_poles(5, 1.0 / 64.0);
    const auto sys = build_constraints(basis, 2, 3);
    const auto c = solve_weights(sys, 39.0);
    CHECK((sys.Phi * c - sys.d(39.0)).norm() < 1e-9 * sys.d(39.0).norm());
    // Any feasible perturbation increases the quadratic form.
    const Eigen::FullPivLU<Eigen::MatrixXcd> lu(sys.Phi);
    const Eigen::MatrixXcd null = lu.kernel();
    const double base = (c.adjoint() * sys.S * c)(0, 0).real();
    for (Eigen::Index j = 0; j < null.cols(); ++j) {
        const Eigen::VectorXcd cp = c + 1e-3 * null.col(j) / null.col(j).norm();
        CHECK((cp.adjoint() * sys.S * cp)(0, 0).real() >= base);
    }
}

TEST_CASE("square constraint system has the unique solution") {
    BasisSet b;
    b.poles = {cplx(0.3, 0.0), cplx(0.6, 0.0)};
    const auto sys = build_constraints(b, 2, 0);
    const auto c = solve_weights(sys, 2.0);
    const Eigen::VectorXcd direct = sys.Phi.fullPivLu().solve(sys.d(2.0));
    CHECK((c - direct).norm() < 1e-10);
}

TEST_CASE("CNG polynomial") {
    const auto basis = bessel_poles(5, 1.0 / 64.0);
    SUBCASE("K1 = 1 is constant") {
        const auto p = cng_polynomial(build_constraints(basis, 1, 3));
        CHECK(p.size() == 1);
    }
    SUBCASE("K1 = 2 opens upward and matches c^H S c") {
        const auto sys = build_constraints(basis, 2, 3);
        const auto p = cng_polynomial(sys);
        CHECK(p.size() == 3);
        CHECK(p[2] > 0.0);
        for (double q : {0.0, 20.0, 39.6, 80.0}) {
            const auto c = solve_weights(sys, q);
            const double direct = (c.adjoint() * sys.S * c)(0, 0).real();
            CHECK(polyval(p, q) == doctest::Approx(direct).epsilon(1e-9));
        }
    }
    SUBCASE("K1 = 3 has three real stationary points") {
        const auto sys = build_constraints(basis, 3, 3);
        const auto p = cng_polynomial(sys);
        CHECK(p.size() == 5);
        CHECK(real_roots(polyder(p)).size() == 3);
    }
}

TEST_CASE("polynomial helpers") {
    CHECK(polyval(RealVec{1.0, 2.0, 3.0}, 2.0) == 17.0);
    CHECK(polyder(RealVec{1.0, 2.0, 3.0}) == RealVec{2.0, 6.0});
    const auto r = real_roots(RealVec{-6.0, 11.0, -6.0, 1.0});
    REQUIRE(r.size() == 3);
    CHECK(r[0] == doctest::Approx(1.0));
    CHECK(r[1] == doctest::Approx(2.0));
    CHECK(r[2] == doctest::Approx(3.0));
    CHECK(real_roots(RealVec{1.0, 0.0, 1.0}).empty());
}

TEST_CASE("select_q policies") {
    // v'(q) roots at 1, 2, 3 for v(q) = (q-1)(q-2)(q-3) integrated.
    const RealVec v{0.0, -6.0, 5.5, -2.0, 0.25};
    CHECK(select_q(v, 3, {}) == doctest::Approx(2.0));
    CHECK(select_q(v, 3, {QPolicy::MinQ, 0.0}) == doctest::Approx(1.0));
    const double min_cng = select_q(v, 3, {QPolicy::MinCng, 0.0});
    CHECK((std::abs(min_cng - 1.0) < 1e-9 || std::abs(min_cng - 3.0) < 1e-9));
    CHECK(select_q(v, 3, QSelection::explicit_delay(-1.0)) == -1.0);
    CHECK(select_q(RealVec{4.0, -2.0, 0.5}, 2, {}) == doctest::Approx(2.0));
    CHECK_THROWS_AS((void)select_q(RealVec{1.0}, 1, {}), DesignError);
}

TEST_CASE("assemble_tf") {
    SUBCASE("first-order smoother") {
        BasisSet b;
        b.poles = {cplx(0.8, 0.0)};
        const ComplexVec c{cplx(0.2, 0.0)};
        const auto f = assemble_tf(b, c);
        CHECK(f.b.size() == 1);
        CHECK(f.b[0] == doctest::Approx(0.2));
        CHECK(f.a == RealVec{1.0, -0.8});
    }
    SUBCASE("complex weights on a real pole set are rejected") {
        BasisSet b;
        b.poles = {cplx(0.5, 0.0), cplx(0.6, 0.0)};
        const ComplexVec c{cplx(0.1, 0.3), cplx(0.2, 0.0)};
        CHECK_THROWS_AS((void)assemble_tf(b, c), DesignError);
    }
    SUBCASE("conjugate pair with conjugate weights is real") {
        BasisSet b;
        b.poles = {std::polar(0.9, 0.3), std::polar(0.9, -0.3)};
        const ComplexVec c{cplx(0.1, 0.2), cplx(0.1, -0.2)};
        const auto f = assemble_tf(b, c);
        CHECK(f.diagnostics.imag_residue < 1e-14);
    }
}

TEST_CASE("designed IIR filters: poles, dc gain, realness, stability") {
    for (int k1 = 1; k1 <= 3; ++k1) {
        for (int k0 = 0; k0 <= 3; ++k0) {
            for (double fc : {1.0 / 128.0, 1.0 / 64.0, 1.0 / 40.0}) {
                const auto basis = bessel_poles(5, fc);
                const auto f = design_iir(basis, k1, k0);
                for (const cplx& p : basis.poles) {
                    CHECK(std::abs(eval_desc(f.a, p)) < 1e-8);
                    CHECK(std::abs(p) < 1.0);
                }
                double sb = 0.0;
                double sa = 0.0;
                for (double v : f.b) {
                    sb += v;
                }
                for (double v : f.a) {
                    sa += v;
                }
                CHECK(sb / sa == doctest::Approx(1.0).epsilon(1e-7));
                for (double q : {f.q, -1.0}) {
                    const auto g = k1 == 1 ? f : design_iir(basis, k1, k0, QSelection::explicit_delay(q));
                    const auto mh = impulse_moments(g.b, g.a, k1);
                    for (int k = 0; k < k1; ++k) {
                        const double want = std::pow(g.q, k);
                        // Rounding b to double sets the floor: ~8e-7 for K1 = 3 predictors at f_c = 1/128.
                        CHECK(std::abs(static_cast<double>(mh[static_cast<std::size_t>(k)]) - want) <=
                              1e-6 * std::max(1.0, std::abs(want)));
                    }
                }
                // K0 = 3 at f_c = 1/128 has cond(S) ~ 1e11; rounding there reaches ~2e-7 of peak.
                CHECK(f.diagnostics.impulse_imag_residue < (f.diagnostics.condition_S < 1e10 ? 1e-8 : 1e-6));
                CHECK(f.diagnostics.imag_residue < 1e-8);
                if (k1 >= 2) {
                    CHECK(polyval(cng_polynomial(build_constraints(basis, k1, k0)), f.q) ==
                          doctest::Approx(f.diagnostics.cng).epsilon(1e-9));
                }
            }
        }
    }
}

TEST_CASE("design delay matches the published optimum") {
    const auto d2 = design_iir(bessel_poles(5, 1.0 / 64.0), 2, 3);
    CHECK(d2.q == doctest::Approx(39.626).epsilon(1e-4));
    CHECK(d2.diagnostics.cng == doctest::Approx(3.644e-9).epsilon(1e-3));
    const auto h2 = design_iir(bessel_poles(5, 1.0 / 64.0), 3, 3);
    CHECK(h2.q == doctest::Approx(39.626).epsilon(1e-4));
    CHECK(h2.diagnostics.cng == doctest::Approx(2.149e-7).epsilon(1e-3));
}

TEST_CASE("predictor design") {
    const auto basis = bessel_poles(5, 1.0 / 64.0);
    const auto est = design_iir(basis, 2, 3);
    const auto prd = design_iir(basis, 2, 3, QSelection::explicit_delay(-1.0));
    CHECK(prd.q == -1.0);
    CHECK(prd.a == est.a);
    CHECK(analysis::dc_group_delay(prd) == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("FIR limit of the origin basis") {
    for (std::size_t m : {8u, 16u}) {
        for (int k1 = 1; k1 <= 3; ++k1) {
            for (int k0 = 0; k0 <= 2; ++k0) {
                const double q = fir::centre_delay(m);
                const auto f = fir::design_fir(m, k1, k0, q);
                const auto g = design_iir(origin_basis(static_cast<int>(m)), k1, k0, QSelection::explicit_delay(q));
                REQUIRE(g.b.size() == m);
                for (std::size_t i = 0; i < m; ++i) {
                    CHECK(std::abs(g.b[i] - f.h[i]) < 1e-9);
                }
                if (k1 >= 2) {
                    const auto opt = design_iir(origin_basis(static_cast<int>(m)), k1, k0);
                    CHECK(opt.q == doctest::Approx(q).epsilon(1e-9));
                }
            }
        }
    }
}

TEST_CASE("Laguerre basis designs") {
    const auto f = design_iir(laguerre_basis(4, 0.9), 2, 1);
    CHECK(f.a.size() == 5);
    CHECK(analysis::dc_group_delay(f) == doctest::Approx(f.q).epsilon(1e-6));
}

TEST_CASE("condition and size limits") {
    CHECK_THROWS_AS((void)design_iir(bessel_poles(2, 0.1), 3, 0), DesignError);
    CHECK_THROWS_AS((void)design_iir(bessel_poles(8, 0.001), 2, 3), DesignError);
}
