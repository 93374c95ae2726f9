#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "phasetrack/analysis.hpp"
#include "phasetrack/realization.hpp"
#include "phasetrack/signal_model.hpp"

namespace phasetrack::mc {

/// α conjugate-product differentiators before the tandem, β backward
/// differences after it. K̃0 = α + β; 0 means phase is estimated.
struct SystemConfig {
    int alpha{0};
    int beta{0};

    [[nodiscard]] int k0_tilde() const noexcept { return alpha + beta; }
};

struct FilterPair {
    std::string id;
    analysis::AnyFilter estimator;
    analysis::AnyFilter predictor;
};

struct Scenario {
    std::string name;
    signal::FrequencyTriplet triplet;
    std::size_t length{1000};
    SystemConfig config;
    std::vector<FilterPair> filters;
    RealVec snr_db;
    std::size_t trials{1000};
    signal::NoiseMode noise{signal::NoiseMode::ComplexGaussian};
    double window_start{0.125};
    std::uint64_t seed{0};
    realization::UnwrapSource unwrap{realization::UnwrapSource::Predictor};

    void validate() const;
};

/// 0, step, ..., stop (inclusive, within rounding).
[[nodiscard]] RealVec snr_range(double start, double stop, double step);

struct TrialResult {
    RealVec squared_errors; ///< over the analysis window
    std::size_t unwrap_corrections{0}; ///< cycle slips against the noiseless input
    bool divergent{false};
};

/// Synthesised input for one trial; shared by every filter pair (common random numbers).
struct TrialInput {
    signal::PhaseSignalSpec truth;
    RealVec angles; ///< tandem input, index i corresponds to time n = i + α
    double offset{0.0}; ///< 2π multiple separating the first measured input from the truth
};

[[nodiscard]] TrialInput make_trial_input(const Scenario& scenario, double snr_db, std::uint64_t trial_seed);

[[nodiscard]] TrialResult run_trial(const Scenario& scenario, const FilterPair& pair, const TrialInput& input);

[[nodiscard]] TrialResult run_trial(const Scenario& scenario, const FilterPair& pair, double snr_db,
                                    std::uint64_t trial_seed);

/// Seed for (trial, snr index) derived from the master seed by splitmix64.
[[nodiscard]] std::uint64_t trial_seed(std::uint64_t master, std::size_t trial, std::size_t snr_index) noexcept;

struct ResultRow {
    std::string filter_id;
    double snr_db{0.0};
    double var_sim_db{0.0};
    double var_ana_db{0.0};
    std::size_t trials{0};
    std::size_t unwrap_corrections{0};
    std::size_t divergent_trials{0};
};

struct ScenarioResult {
    std::vector<ResultRow> rows; ///< filter-major, SNR ascending within a filter

    [[nodiscard]] std::vector<ResultRow> rows_for(const std::string& filter_id) const;
};

/// jobs = 0 uses the hardware concurrency.
[[nodiscard]] ScenarioResult run_scenario(const Scenario& scenario, unsigned jobs = 0);

/// Lowest SNR s such that var_sim - var_ana < margin for every SNR >= s.
/// +inf when the highest SNR already fails; -inf when the analytical
/// reference is undefined (zero or non-finite).
[[nodiscard]] std::map<std::string, double> threshold_estimate(const ScenarioResult& result, double margin_db = 3.0);

void write_result_csv(std::ostream& out, const ScenarioResult& result);
void write_threshold_csv(std::ostream& out, const std::map<std::string, double>& thresholds,
                         const std::vector<std::string>& order);

} // namespace phasetrack::mc
