#include "phasetrack/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "phasetrack/noise_colouring.hpp"

namespace phasetrack::analysis {

namespace {

constexpr double kRadToDeg = 180.0 / kPi;

cplx polyval_z_inverse(const RealVec& c, cplx z_inv) noexcept {
    cplx acc{};
    for (auto it = c.rbegin(); it != c.rend(); ++it) {
        acc = acc * z_inv + *it;
    }
    return acc;
}

// Moment ratio Σ j c_j / Σ c_j.
double centroid(const RealVec& c) {
    double s = 0.0;
    double m = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) {
        s += c[j];
        m += static_cast<double>(j) * c[j];
    }
    return m / s;
}

double pairwise_sum(const double* x, std::size_t n) noexcept {
    if (n <= 16) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            acc += x[i];
        }
        return acc;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

} // namespace

TransferFunction transfer_function(const AnyFilter& filter) {
    if (const auto* f = std::get_if<fir::FirFilter>(&filter)) {
        return {f->h, {1.0}};
    }
    const auto& f = std::get<iir::IirFilter>(filter);
    return {f.b, f.a};
}

double design_delay(const AnyFilter& filter) noexcept {
    return std::visit([](const auto& f) { return f.q; }, filter);
}

int design_k0(const AnyFilter& filter) noexcept {
    return std::visit([](const auto& f) { return f.k0; }, filter);
}

RealVec difference_equation(const RealVec& b, const RealVec& a, std::span<const double> x) {
    if (a.empty() || a.front() == 0.0) {
        throw NumericError("difference equation needs a[0] != 0");
    }
    RealVec y(x.size(), 0.0);
    for (std::size_t n = 0; n < x.size(); ++n) {
        double acc = 0.0;
        for (std::size_t j = 0; j < b.size() && j <= n; ++j) {
            acc += b[j] * x[n - j];
        }
        for (std::size_t j = 1; j < a.size() && j <= n; ++j) {
            acc -= a[j] * y[n - j];
        }
        y[n] = acc / a.front();
    }
    return y;
}

std::size_t response_length(const AnyFilter& filter, int k0) {
    if (const auto* f = std::get_if<fir::FirFilter>(&filter)) {
        return f->h.size() + static_cast<std::size_t>(std::max(k0, 0));
    }
    return iir::tail_horizon(std::get<iir::IirFilter>(filter).basis, k0);
}

RealVec impulse_response(const AnyFilter& filter, std::size_t length) {
    const TransferFunction tf = transfer_function(filter);
    RealVec delta(length, 0.0);
    if (length > 0) {
        delta[0] = 1.0;
    }
    return difference_equation(tf.b, tf.a, delta);
}

cplx freq_response(const AnyFilter& filter, double omega) {
    const TransferFunction tf = transfer_function(filter);
    const cplx z_inv = std::polar(1.0, -omega);
    return polyval_z_inverse(tf.b, z_inv) / polyval_z_inverse(tf.a, z_inv);
}

ComplexVec freq_response(const AnyFilter& filter, std::span<const double> omegas) {
    const TransferFunction tf = transfer_function(filter);
    ComplexVec out(omegas.size());
    for (std::size_t i = 0; i < omegas.size(); ++i) {
        const cplx z_inv = std::polar(1.0, -omegas[i]);
        out[i] = polyval_z_inverse(tf.b, z_inv) / polyval_z_inverse(tf.a, z_inv);
    }
    return out;
}

double dc_group_delay(const AnyFilter& filter) {
    const TransferFunction tf = transfer_function(filter);
    return centroid(tf.b) - centroid(tf.a);
}

double noise_gain(const AnyFilter& filter, int k0) {
    const RealVec h = impulse_response(filter, response_length(filter, k0));
    const RealVec hpf = colouring::hpf_impulse(k0);
    RealVec sq(h.size(), 0.0);
    for (std::size_t n = 0; n < h.size(); ++n) {
        double acc = 0.0;
        for (std::size_t m = 0; m < hpf.size() && m <= n; ++m) {
            acc += hpf[m] * h[n - m];
        }
        sq[n] = acc * acc;
    }
    return pairwise_sum(sq.data(), sq.size());
}

double noise_gain_spectral(const AnyFilter& filter, int k0, std::size_t grid) {
    if (grid == 0) {
        throw std::invalid_argument("spectral grid must be nonempty");
    }
    const TransferFunction tf = transfer_function(filter);
    RealVec terms(grid);
    for (std::size_t i = 0; i < grid; ++i) {
        const double omega = -kPi + kTwoPi * static_cast<double>(i) / static_cast<double>(grid);
        const cplx z_inv = std::polar(1.0, -omega);
        const cplx h = polyval_z_inverse(tf.b, z_inv) / polyval_z_inverse(tf.a, z_inv);
        terms[i] = std::norm(h) * colouring::noise_psd(k0, omega);
    }
    return pairwise_sum(terms.data(), terms.size()) / static_cast<double>(grid);
}

NoiseGains noise_gains(const AnyFilter& filter, int k0_tilde) {
    return {noise_gain(filter, 0), noise_gain(filter, k0_tilde)};
}

double expected_variance(double v_bpf, double snr_db) noexcept { return v_bpf / std::pow(10.0, snr_db / 10.0); }

PhaseDeviation phase_linearity_deviation(const AnyFilter& filter, double q, double f_c, std::size_t points) {
    if (points < 2) {
        throw std::invalid_argument("phase deviation needs at least two grid points");
    }
    PhaseDeviation dev;
    dev.f.resize(points);
    dev.deg.resize(points);
    const double top = 0.95 * f_c;
    for (std::size_t i = 0; i < points; ++i) {
        const double f = top * static_cast<double>(i) / static_cast<double>(points - 1);
        const double omega = kTwoPi * f;
        dev.f[i] = f;
        dev.deg[i] = std::arg(freq_response(filter, omega) * std::polar(1.0, q * omega)) * kRadToDeg;
        dev.max_abs = std::max(dev.max_abs, std::abs(dev.deg[i]));
    }
    return dev;
}

double nominal_cutoff(const AnyFilter& filter) noexcept {
    if (const auto* f = std::get_if<iir::IirFilter>(&filter)) {
        if (f->basis.kind == iir::BasisKind::Bessel) {
            return f->basis.cutoff;
        }
        return 1.0 / static_cast<double>(f->basis.size());
    }
    return 1.0 / static_cast<double>(std::get<fir::FirFilter>(filter).h.size());
}

ResponseReport make_report(const AnyFilter& filter, std::size_t grid, std::size_t passband_points) {
    ResponseReport report;
    report.q = design_delay(filter);
    report.f_c = nominal_cutoff(filter);
    report.dc_group_delay = dc_group_delay(filter);
    report.v_lpf = noise_gain(filter, 0);
    for (int k0 = 0; k0 <= 3; ++k0) {
        report.v_bpf[k0] = noise_gain(filter, k0);
    }

    const PhaseDeviation dev = phase_linearity_deviation(filter, report.q, report.f_c, passband_points);
    report.max_deviation_deg = dev.max_abs;

    report.f = dev.f;
    report.dev_deg = dev.deg;
    const double top = dev.f.back();
    for (std::size_t i = 0; i <= grid; ++i) {
        const double f = 0.5 * static_cast<double>(i) / static_cast<double>(grid);
        if (f > top) {
            report.f.push_back(f);
            report.dev_deg.push_back(std::numeric_limits<double>::quiet_NaN());
        }
    }
    RealVec omegas(report.f.size());
    std::transform(report.f.begin(), report.f.end(), omegas.begin(), [](double f) { return kTwoPi * f; });
    report.response = freq_response(filter, omegas);
    for (const cplx& h : report.response) {
        report.mag2.push_back(std::norm(h));
        report.phase_deg.push_back(std::arg(h) * kRadToDeg);
    }
    return report;
}

void write_report_csv(std::ostream& out, const ResponseReport& report) {
    out << "f,re,im,mag2,phase_deg,dev_deg\n";
    for (std::size_t i = 0; i < report.f.size(); ++i) {
        const cplx h = report.response[i];
        out << fmt::format("{:.10g},{:.17g},{:.17g},{:.17g},{:.10g},", report.f[i], h.real(), h.imag(),
                           report.mag2[i], report.phase_deg[i]);
        if (std::isfinite(report.dev_deg[i])) {
            out << fmt::format("{:.10g}", report.dev_deg[i]);
        }
        out << '\n';
    }
}

} // namespace phasetrack::analysis
