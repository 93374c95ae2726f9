#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

#include "phasetrack/common.hpp"

namespace phasetrack::signal {

/// Polynomial-phase complex exponential A·exp(iθ(n)) with
/// θ(n) = Σ θ_k n^k / k!, degree at most three.
struct PhaseSignalSpec {
    RealVec theta{0.0};     ///< θ_0..θ_K (radians, radians/sample, ...)
    double amplitude{1.0};  ///< A > 0
    std::size_t length{1000};

    [[nodiscard]] int degree() const noexcept { return static_cast<int>(theta.size()) - 1; }

    /// Instantaneous phase at (possibly fractional) time t.
    [[nodiscard]] double phase(double t) const noexcept;

    /// d^order θ / dt^order at t; order 0 is the phase, order 1 the angular frequency.
    [[nodiscard]] double phase_derivative(double t, int order) const noexcept;

    [[nodiscard]] double frequency(double t) const noexcept { return phase_derivative(t, 1); }

    void validate() const;
};

enum class NoiseMode {
    ComplexGaussian, ///< Re, Im ~ N(0, σ²) independently
    ComplexUniform,  ///< Re, Im ~ U(-σ√3, σ√3) independently
    AngleGaussian    ///< real N(0, σ²/A²) added to θ(n); |x| stays A
};

struct NoiseSpec {
    NoiseMode mode{NoiseMode::ComplexGaussian};
    double variance{0.0}; ///< σ_ε², per real component
    std::uint64_t seed{0};
};

/// Instantaneous frequencies (cycles/sample) at n = 0, (N-1)/2, N-1.
struct FrequencyTriplet {
    double f0{0.0};
    double f1{0.0};
    double f2{0.0};
};

[[nodiscard]] PhaseSignalSpec triplet_to_spec(const FrequencyTriplet& triplet, std::size_t length);

[[nodiscard]] ComplexVec synthesize(const PhaseSignalSpec& spec, const NoiseSpec& noise);

/// Same as above but draws from a caller-owned generator (one per MC trial).
[[nodiscard]] ComplexVec synthesize(const PhaseSignalSpec& spec, NoiseMode mode, double variance, std::mt19937_64& rng);

/// Maps an angle into (-π, π].
[[nodiscard]] double wrap(double angle) noexcept;

/// arg{x[n] x*[n-1]} for n = 1..N-1 (output index 0 corresponds to n = 1).
/// Throws NumericError when a sample has zero magnitude.
[[nodiscard]] RealVec conjugate_product_angles(std::span<const cplx> x);

/// Signal-to-noise ratio A²/σ² in dB.
[[nodiscard]] double snr_db(double amplitude, double variance) noexcept;

/// σ² that yields the requested SNR for amplitude A.
[[nodiscard]] double noise_variance_for_snr(double amplitude, double snr_db) noexcept;

} // namespace phasetrack::signal
