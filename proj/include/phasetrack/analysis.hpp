#pragma once

#include <cstddef>
#include <map>
#include <ostream>
#include <span>
#include <variant>

#include "phasetrack/common.hpp"
#include "phasetrack/fir_design.hpp"
#include "phasetrack/iir_design.hpp"

namespace phasetrack::analysis {

using AnyFilter = std::variant<fir::FirFilter, iir::IirFilter>;

/// H(z) = Σ b_j z^{-j} / Σ a_j z^{-j}.
struct TransferFunction {
    RealVec b;
    RealVec a{1.0};
};

[[nodiscard]] TransferFunction transfer_function(const AnyFilter& filter);

[[nodiscard]] double design_delay(const AnyFilter& filter) noexcept;
[[nodiscard]] int design_k0(const AnyFilter& filter) noexcept;

/// Direct-form difference equation a[0] y[n] = Σ b_j x[n-j] - Σ_{j>0} a_j y[n-j].
[[nodiscard]] RealVec difference_equation(const RealVec& b, const RealVec& a, std::span<const double> x);

/// Samples over which sums involving this filter and k0 differentiators are
/// taken: M + k0 for FIR, the iir-design tail horizon for IIR.
[[nodiscard]] std::size_t response_length(const AnyFilter& filter, int k0);

[[nodiscard]] RealVec impulse_response(const AnyFilter& filter, std::size_t length);

[[nodiscard]] cplx freq_response(const AnyFilter& filter, double omega);
[[nodiscard]] ComplexVec freq_response(const AnyFilter& filter, std::span<const double> omegas);

/// -d arg H / dω at ω = 0 from the coefficient moments.
[[nodiscard]] double dc_group_delay(const AnyFilter& filter);

/// Σ (h ⊛ h_HPF)² with k0 differentiators; k0 = 0 gives v_LPF.
[[nodiscard]] double noise_gain(const AnyFilter& filter, int k0);

/// (1/2π) ∫ |H|² |1 - e^{-iω}|^{2 k0} dω by the trapezoid rule on a periodic grid.
[[nodiscard]] double noise_gain_spectral(const AnyFilter& filter, int k0, std::size_t grid = 1u << 16);

struct NoiseGains {
    double v_lpf{0.0};
    double v_bpf{0.0};
};

[[nodiscard]] NoiseGains noise_gains(const AnyFilter& filter, int k0_tilde);

/// ṽ / 10^{snr/10}.
[[nodiscard]] double expected_variance(double v_bpf, double snr_db) noexcept;

struct PhaseDeviation {
    RealVec f;   ///< cycles/sample over [0, 0.95 f_c]
    RealVec deg; ///< arg(H e^{iqω}) in degrees
    double max_abs{0.0};
};

[[nodiscard]] PhaseDeviation phase_linearity_deviation(const AnyFilter& filter, double q, double f_c,
                                                       std::size_t points = 256);

/// Nominal bandwidth: f_c for Bessel bases, 1/M otherwise.
[[nodiscard]] double nominal_cutoff(const AnyFilter& filter) noexcept;

struct ResponseReport {
    RealVec f;
    ComplexVec response;
    RealVec mag2;
    RealVec phase_deg;
    RealVec dev_deg; ///< NaN outside the passband sub-grid
    double q{0.0};
    double dc_group_delay{0.0};
    double v_lpf{0.0};
    std::map<int, double> v_bpf; ///< keyed by assumed differentiator count
    double max_deviation_deg{0.0};
    double f_c{0.0};
};

/// Full-band grid of `grid` + 1 points over [0, 0.5] merged with a
/// `passband_points` grid over [0, 0.95 f_c].
[[nodiscard]] ResponseReport make_report(const AnyFilter& filter, std::size_t grid = 1024,
                                         std::size_t passband_points = 256);

void write_report_csv(std::ostream& out, const ResponseReport& report);

} // namespace phasetrack::analysis
