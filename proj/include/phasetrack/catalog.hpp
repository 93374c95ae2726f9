#pragma once

#include <string>
#include <vector>

#include "phasetrack/filter_spec.hpp"
#include "phasetrack/mc_harness.hpp"
#include "phasetrack/signal_model.hpp"

namespace phasetrack::catalog {

struct TableRow {
    int table{0};
    spec::FilterSpec spec; ///< spec.id holds the row label, e.g. "D2"
};

/// Filter specs for every row of tables 1..5.
[[nodiscard]] std::vector<spec::FilterSpec> table(int number);
[[nodiscard]] std::vector<TableRow> all_rows();

/// Frequency triplets of signal types 1..3.
[[nodiscard]] signal::FrequencyTriplet signal_type(int type);

/// Configurations 1..3: pre-, aft- and nil-differentiator.
[[nodiscard]] mc::SystemConfig system_config(int config);

/// Table used for each signal type's main scenarios (1, 2, 5).
[[nodiscard]] int table_for_signal(int type);

/// Designed (estimator, predictor) pairs for a list of specs.
[[nodiscard]] std::vector<mc::FilterPair> filter_pairs(const std::vector<spec::FilterSpec>& specs);

/// Scenario of signal `type` under `config` with its table's filter bank and
/// the given sweep.
[[nodiscard]] mc::Scenario scenario(int type, int config, const RealVec& snr_db, std::size_t trials,
                                    std::uint64_t seed);

} // namespace phasetrack::catalog
