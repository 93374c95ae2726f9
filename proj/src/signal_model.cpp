#include "phasetrack/signal_model.hpp"

#include <algorithm>
#include <cmath>

namespace phasetrack::signal {

namespace {

double factorial(int k) {
    double f = 1.0;
    for (int j = 2; j <= k; ++j) {
        f *= j;
    }
    return f;
}

} // namespace

double PhaseSignalSpec::phase(double t) const noexcept { return phase_derivative(t, 0); }

double PhaseSignalSpec::phase_derivative(double t, int order) const noexcept {
    double acc = 0.0;
    for (int k = static_cast<int>(theta.size()) - 1; k >= order; --k) {
        acc += theta[static_cast<std::size_t>(k)] * std::pow(t, k - order) / factorial(k - order);
    }
    return acc;
}

void PhaseSignalSpec::validate() const {
    if (theta.empty() || theta.size() > 4) {
        throw std::invalid_argument("phase polynomial must have 1..4 coefficients");
    }
    if (!(amplitude > 0.0) || !std::isfinite(amplitude)) {
        throw std::invalid_argument("amplitude must be positive and finite");
    }
    if (!std::all_of(theta.begin(), theta.end(), [](double v) { return std::isfinite(v); })) {
        throw std::invalid_argument("phase coefficients must be finite");
    }
}

PhaseSignalSpec triplet_to_spec(const FrequencyTriplet& triplet, std::size_t length) {
    if (length < 3) {
        throw std::invalid_argument("triplet_to_spec needs at least three samples");
    }
    // Quadratic frequency law f(t) = f0 + B u + C u², u = t / h, through
    // the abscissae t = 0, h, 2h with h = (N-1)/2.
    const double h = 0.5 * static_cast<double>(length - 1);
    const double curvature = 0.5 * (triplet.f2 - 2.0 * triplet.f1 + triplet.f0);
    const double slope = triplet.f1 - triplet.f0 - curvature;

    const double scale = std::max({std::abs(triplet.f0), std::abs(triplet.f1), std::abs(triplet.f2), 1e-300});
    const double tol = 1e-14 * scale;

    PhaseSignalSpec spec;
    spec.length = length;
    spec.amplitude = 1.0;
    spec.theta = {0.0, kTwoPi * triplet.f0};
    const bool linear = std::abs(curvature) <= tol;
    const bool constant = linear && std::abs(slope) <= tol;
    if (!constant) {
        spec.theta.push_back(kTwoPi * slope / h);
    }
    if (!linear) {
        // ω(t) = θ1 + θ2 t + θ3 t²/2, so θ3 = 2 · 2π · C / h².
        spec.theta.push_back(2.0 * kTwoPi * curvature / (h * h));
    }
    return spec;
}

ComplexVec synthesize(const PhaseSignalSpec& spec, const NoiseSpec& noise) {
    std::mt19937_64 rng(noise.seed);
    return synthesize(spec, noise.mode, noise.variance, rng);
}

ComplexVec synthesize(const PhaseSignalSpec& spec, NoiseMode mode, double variance, std::mt19937_64& rng) {
    spec.validate();
    if (!(variance >= 0.0)) {
        throw std::invalid_argument("noise variance must be non-negative");
    }
    const double sigma = std::sqrt(variance);
    ComplexVec x(spec.length);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(-std::sqrt(3.0), std::sqrt(3.0));

    for (std::size_t n = 0; n < spec.length; ++n) {
        const double theta = spec.phase(static_cast<double>(n));
        switch (mode) {
        case NoiseMode::ComplexGaussian: {
            const double re = gauss(rng);
            const double im = gauss(rng);
            x[n] = std::polar(spec.amplitude, theta) + sigma * cplx(re, im);
            break;
        }
        case NoiseMode::ComplexUniform: {
            const double re = uniform(rng);
            const double im = uniform(rng);
            x[n] = std::polar(spec.amplitude, theta) + sigma * cplx(re, im);
            break;
        }
        case NoiseMode::AngleGaussian: {
            const double eps = sigma / spec.amplitude * gauss(rng);
            x[n] = std::polar(spec.amplitude, theta + eps);
            break;
        }
        }
    }
    return x;
}

double wrap(double angle) noexcept {
    double r = std::remainder(angle, kTwoPi);
    if (r <= -kPi) {
        r += kTwoPi;
    } else if (r > kPi) {
        r -= kTwoPi;
    }
    return r;
}

RealVec conjugate_product_angles(std::span<const cplx> x) {
    if (x.size() < 2) {
        throw std::invalid_argument("conjugate_product_angles needs at least two samples");
    }
    RealVec out(x.size() - 1);
    for (std::size_t n = 1; n < x.size(); ++n) {
        if (x[n] == cplx{} || x[n - 1] == cplx{}) {
            throw NumericError("angle undefined for a zero-magnitude sample");
        }
        out[n - 1] = wrap(std::arg(x[n] * std::conj(x[n - 1])));
    }
    return out;
}

double snr_db(double amplitude, double variance) noexcept {
    return 10.0 * std::log10(amplitude * amplitude / variance);
}

double noise_variance_for_snr(double amplitude, double snr) noexcept {
    return amplitude * amplitude / std::pow(10.0, snr / 10.0);
}

} // namespace phasetrack::signal
