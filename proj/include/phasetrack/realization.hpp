#pragma once

#include <cstddef>
#include <span>
#include <utility>

#include <Eigen/Dense>

#include "phasetrack/common.hpp"
#include "phasetrack/fir_design.hpp"
#include "phasetrack/iir_design.hpp"

namespace phasetrack::realization {

/// Canonical (companion-form) state-space system shared by an estimator and
/// a predictor with a common denominator:
///   w[n] = G w[n-1] + H x[n],  y_est = C_est w[n],  y_prd = C_prd w[n].
struct LssSystem {
    RealVec a;     ///< a[0..K], a[0] = 1
    RealVec c_est; ///< K estimator numerator coefficients
    RealVec c_prd; ///< K predictor numerator coefficients

    [[nodiscard]] std::size_t order() const noexcept { return a.size() - 1; }

    /// G with -a[1..K] across the first row and an identity sub-diagonal.
    [[nodiscard]] Eigen::MatrixXd transition() const;
    /// H = e1.
    [[nodiscard]] Eigen::VectorXd input() const;
};

/// Throws DesignError when est and prd do not share a denominator.
[[nodiscard]] LssSystem build_lss(const iir::IirFilter& est, const iir::IirFilter& prd);

/// FIR pair as an LSS with a = [1, 0, ..., 0]: the state is the input delay line.
[[nodiscard]] LssSystem build_lss(const fir::FirFilter& est, const fir::FirFilter& prd);

/// Single filter b / a (predictor output duplicates the estimator).
[[nodiscard]] LssSystem build_lss(const RealVec& b, const RealVec& a);

/// w0 solving (I - G) w = H.
[[nodiscard]] RealVec steady_state_vector(const LssSystem& sys);

/// w0 by iterating w <- G w + H until the largest change is below tol times max(1, max|w|).
/// Throws NumericError when max_iterations is exhausted.
[[nodiscard]] RealVec steady_state_iterative(const LssSystem& sys, double tol = 1e-12,
                                             std::size_t max_iterations = 10'000'000);

/// Streaming state of one LSS. History is held in a ring buffer of length 2K
/// (every value written twice) so the current state is always contiguous.
class LssState {
public:
    explicit LssState(const LssSystem& sys);

    /// Sets w to a scaled copy of a steady-state vector.
    void set_state(const RealVec& w0, double scale);

    /// Advances one sample; returns C_est w and C_prd w.
    std::pair<double, double> step(double x) noexcept;

    [[nodiscard]] RealVec state() const;

private:
    LssSystem sys_;
    std::size_t k_;
    bool recursive_;
    std::size_t head_{0};
    RealVec ring_;
};

enum class UnwrapSource {
    Predictor, ///< innovation formed against the predictor's one-step lead
    Estimator  ///< ablation: innovation formed against the lagged estimate
};

struct TandemOutput {
    double estimate{0.0};   ///< ŷ[n], the value at n - q
    double prediction{0.0}; ///< x̂[n], predicted unwrapped input at n + 1
    double unwrapped{0.0};  ///< x̄[n]
};

/// Estimator/predictor pair with predictor-driven angle unwrapping.
class TandemFilter {
public:
    explicit TandemFilter(LssSystem sys, UnwrapSource source = UnwrapSource::Predictor);

    /// Steady-state initialisation: w = w0 x̃[0], x̂ = x̃[0].
    void init(double first_raw_angle);

    /// Unwraps raw against the last reference and advances both filters.
    /// Throws NumericError on non-finite input without touching the state.
    TandemOutput step(double raw_angle);

    [[nodiscard]] bool initialized() const noexcept { return initialized_; }
    [[nodiscard]] std::size_t unwrap_corrections() const noexcept { return corrections_; }
    [[nodiscard]] const LssSystem& system() const noexcept { return sys_; }
    [[nodiscard]] const RealVec& steady_state() const noexcept { return w0_; }

private:
    LssSystem sys_;
    UnwrapSource source_;
    RealVec w0_;
    LssState state_;
    double last_prediction_{0.0};
    double last_estimate_{0.0};
    double last_cycles_{0.0};
    std::size_t corrections_{0};
    bool initialized_{false};
};

struct TandemRun {
    RealVec estimates;
    RealVec predictions;
    RealVec unwrapped;
    std::size_t unwrap_corrections{0};
};

/// Runs a tandem over a whole raw-angle sequence; the first sample seeds init
/// and is also emitted as output 0.
[[nodiscard]] TandemRun run_tandem(const LssSystem& sys, std::span<const double> raw,
                                   UnwrapSource source = UnwrapSource::Predictor);

/// Same, starting from a prepared (possibly previously used) filter; init resets it.
[[nodiscard]] TandemRun run_tandem(TandemFilter filter, std::span<const double> raw);

[[nodiscard]] TandemRun run_fir_tandem(const fir::FirFilter& est, const fir::FirFilter& prd,
                                       std::span<const double> raw,
                                       UnwrapSource source = UnwrapSource::Predictor);

} // namespace phasetrack::realization
