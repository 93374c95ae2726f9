#include "phasetrack/realization.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "phasetrack/signal_model.hpp"

namespace phasetrack::realization {

namespace {

double dot(const double* x, const RealVec& c) noexcept {
    double acc = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) {
        acc += c[j] * x[j];
    }
    return acc;
}

void check_denominator(const RealVec& a) {
    if (a.size() < 2) {
        throw DesignError("state-space realization needs order >= 1");
    }
    if (a.front() != 1.0) {
        throw DesignError("denominator must be monic (a[0] = 1)");
    }
}

} // namespace

Eigen::MatrixXd LssSystem::transition() const {
    const auto k = static_cast<Eigen::Index>(order());
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index j = 0; j < k; ++j) {
        g(0, j) = -a[static_cast<std::size_t>(j) + 1];
    }
    for (Eigen::Index i = 1; i < k; ++i) {
        g(i, i - 1) = 1.0;
    }
    return g;
}

Eigen::VectorXd LssSystem::input() const {
    Eigen::VectorXd h = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(order()));
    h(0) = 1.0;
    return h;
}

LssSystem build_lss(const iir::IirFilter& est, const iir::IirFilter& prd) {
    if (est.a.size() != prd.a.size()) {
        throw DesignError("estimator and predictor have different orders");
    }
    for (std::size_t j = 0; j < est.a.size(); ++j) {
        if (std::abs(est.a[j] - prd.a[j]) > 1e-12 * (1.0 + std::abs(est.a[j]))) {
            throw DesignError(fmt::format("estimator and predictor denominators differ at a[{}]", j));
        }
    }
    check_denominator(est.a);
    return {est.a, est.b, prd.b};
}

LssSystem build_lss(const fir::FirFilter& est, const fir::FirFilter& prd) {
    if (est.h.size() != prd.h.size()) {
        throw DesignError("FIR estimator and predictor must have the same length");
    }
    RealVec a(est.h.size() + 1, 0.0);
    a[0] = 1.0;
    check_denominator(a);
    return {std::move(a), est.h, prd.h};
}

LssSystem build_lss(const RealVec& b, const RealVec& a) {
    check_denominator(a);
    if (b.size() > a.size() - 1) {
        throw DesignError("numerator longer than the state dimension");
    }
    RealVec c(a.size() - 1, 0.0);
    std::copy(b.begin(), b.end(), c.begin());
    return {a, c, c};
}

RealVec steady_state_vector(const LssSystem& sys) {
    const auto k = static_cast<Eigen::Index>(sys.order());
    const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(k, k) - sys.transition();
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    if (!lu.isInvertible()) {
        throw NumericError("I - G is singular: the system has a pole at z = 1");
    }
    const Eigen::VectorXd w = lu.solve(sys.input());
    return {w.data(), w.data() + w.size()};
}

RealVec steady_state_iterative(const LssSystem& sys, double tol, std::size_t max_iterations) {
    LssState state(sys);
    RealVec prev = state.state();
    for (std::size_t it = 0; it < max_iterations; ++it) {
        (void)state.step(1.0);
        RealVec now = state.state();
        double change = 0.0;
        double scale = 1.0;
        for (std::size_t j = 0; j < now.size(); ++j) {
            change = std::max(change, std::abs(now[j] - prev[j]));
            scale = std::max(scale, std::abs(now[j]));
        }
        if (!std::isfinite(change)) {
            break;
        }
        if (change < tol * scale) {
            return now;
        }
        prev = std::move(now);
    }
    throw NumericError("steady-state iteration did not converge");
}

LssState::LssState(const LssSystem& sys)
    : sys_(sys), k_(sys.order()), recursive_(std::any_of(sys.a.begin() + 1, sys.a.end(), [](double v) { return v != 0.0; })),
      ring_(2 * sys.order(), 0.0) {}

void LssState::set_state(const RealVec& w0, double scale) {
    for (std::size_t j = 0; j < k_; ++j) {
        const std::size_t slot = (head_ + j) % k_;
        ring_[slot] = ring_[slot + k_] = scale * w0[j];
    }
}

std::pair<double, double> LssState::step(double x) noexcept {
    // v[n] = x[n] - Σ a_j v[n-j]; the window at head_ holds v[n-1], ..., v[n-K].
    const double* window = ring_.data() + head_;
    double v = x;
    if (recursive_) {
        for (std::size_t j = 0; j < k_; ++j) {
            v -= sys_.a[j + 1] * window[j];
        }
    }
    head_ = head_ == 0 ? k_ - 1 : head_ - 1;
    ring_[head_] = v;
    ring_[head_ + k_] = v;
    const double* w = ring_.data() + head_;
    return {dot(w, sys_.c_est), dot(w, sys_.c_prd)};
}

RealVec LssState::state() const { return {ring_.begin() + static_cast<std::ptrdiff_t>(head_), ring_.begin() + static_cast<std::ptrdiff_t>(head_ + k_)}; }

TandemFilter::TandemFilter(LssSystem sys, UnwrapSource source)
    : sys_(std::move(sys)), source_(source), w0_(steady_state_vector(sys_)), state_(sys_) {}

void TandemFilter::init(double first_raw_angle) {
    if (!std::isfinite(first_raw_angle)) {
        throw NumericError("non-finite angle passed to tandem init");
    }
    state_ = LssState(sys_);
    state_.set_state(w0_, first_raw_angle);
    last_prediction_ = first_raw_angle;
    last_estimate_ = first_raw_angle;
    last_cycles_ = 0.0;
    corrections_ = 0;
    initialized_ = true;
}

TandemOutput TandemFilter::step(double raw_angle) {
    if (!initialized_) {
        throw std::logic_error("tandem filter stepped before init");
    }
    if (!std::isfinite(raw_angle)) {
        throw NumericError("non-finite angle passed to tandem step");
    }
    const double reference = source_ == UnwrapSource::Predictor ? last_prediction_ : last_estimate_;
    const double unwrapped = reference + signal::wrap(raw_angle - reference);
    const double cycles = std::round((unwrapped - raw_angle) / kTwoPi);
    if (cycles != last_cycles_) {
        ++corrections_;
        last_cycles_ = cycles;
    }
    const auto [est, prd] = state_.step(unwrapped);
    last_estimate_ = est;
    last_prediction_ = prd;
    return {est, prd, unwrapped};
}

TandemRun run_tandem(const LssSystem& sys, std::span<const double> raw, UnwrapSource source) {
    return run_tandem(TandemFilter(sys, source), raw);
}

TandemRun run_tandem(TandemFilter filter, std::span<const double> raw) {
    TandemRun run;
    if (raw.empty()) {
        return run;
    }
    filter.init(raw.front());
    run.estimates.reserve(raw.size());
    run.predictions.reserve(raw.size());
    run.unwrapped.reserve(raw.size());
    run.estimates.push_back(raw.front());
    run.predictions.push_back(raw.front());
    run.unwrapped.push_back(raw.front());
    for (std::size_t n = 1; n < raw.size(); ++n) {
        const TandemOutput out = filter.step(raw[n]);
        run.estimates.push_back(out.estimate);
        run.predictions.push_back(out.prediction);
        run.unwrapped.push_back(out.unwrapped);
    }
    run.unwrap_corrections = filter.unwrap_corrections();
    return run;
}

TandemRun run_fir_tandem(const fir::FirFilter& est, const fir::FirFilter& prd, std::span<const double> raw,
                         UnwrapSource source) {
    return run_tandem(build_lss(est, prd), raw, source);
}

} // namespace phasetrack::realization
