#include "phasetrack/catalog.hpp"

#include <fmt/format.h>

namespace phasetrack::catalog {

namespace {

using spec::FilterKind;
using spec::FilterSpec;

FilterSpec fir_row(std::string id, int k1, int k0) {
    FilterSpec s;
    s.id = std::move(id);
    s.kind = FilterKind::Fir;
    s.M = 64;
    s.K1 = k1;
    s.K0 = k0;
    s.q_policy = iir::QSelection{};
    return s;
}

FilterSpec iir_row(std::string id, int k1, int k0, double f_c) {
    FilterSpec s;
    s.id = std::move(id);
    s.kind = FilterKind::Iir;
    s.f_c = f_c;
    s.K1 = k1;
    s.K0 = k0;
    s.K_phi = 5;
    s.q_policy = iir::QSelection{};
    s.basis = iir::BasisKind::Bessel;
    return s;
}

std::string label(char row, int table) { return fmt::format("{}{}", row, table); }

} // namespace

std::vector<FilterSpec> table(int number) {
    std::vector<FilterSpec> out;
    switch (number) {
    case 1:
        for (int k1 = 1; k1 <= 2; ++k1) {
            for (int k0 = 0; k0 <= 3; ++k0) {
                out.push_back(fir_row(label(static_cast<char>('A' + 4 * (k1 - 1) + k0), 1), k1, k0));
            }
        }
        break;
    case 2:
        out.push_back(fir_row("A2", 2, 0));
        out.push_back(fir_row("B2", 2, 1));
        out.push_back(fir_row("C2", 2, 2));
        out.push_back(iir_row("D2", 2, 3, 1.0 / 64.0));
        out.push_back(fir_row("E2", 3, 0));
        out.push_back(fir_row("F2", 3, 1));
        out.push_back(fir_row("G2", 3, 2));
        out.push_back(iir_row("H2", 3, 3, 1.0 / 64.0));
        break;
    case 3:
        for (int i = 0; i < 7; ++i) {
            out.push_back(iir_row(label(static_cast<char>('A' + i), 3), 2, 3, (7.0 + i) / 640.0));
        }
        break;
    case 4:
        for (int i = 0; i < 7; ++i) {
            out.push_back(iir_row(label(static_cast<char>('A' + i), 4), 3, 3, (5.0 + i) / 640.0));
        }
        break;
    case 5:
        out.push_back(fir_row("A5", 1, 0));
        out.push_back(fir_row("B5", 3, 1));
        out.push_back(fir_row("C5", 3, 2));
        out.push_back(fir_row("D5", 3, 3));
        out.push_back(iir_row("E5", 3, 1, 1.0 / 51.02));
        out.push_back(iir_row("F5", 3, 2, 1.0 / 51.02));
        out.push_back(iir_row("G5", 3, 3, 1.0 / 59.30));
        break;
    default:
        throw std::invalid_argument(fmt::format("no table {}", number));
    }
    return out;
}

std::vector<TableRow> all_rows() {
    std::vector<TableRow> rows;
    for (int t = 1; t <= 5; ++t) {
        for (auto& s : table(t)) {
            rows.push_back({t, std::move(s)});
        }
    }
    return rows;
}

signal::FrequencyTriplet signal_type(int type) {
    switch (type) {
    case 1:
        return {0.01, 0.01, 0.01};
    case 2:
        return {0.0, 0.125, 0.25};
    case 3:
        return {0.0, 4.0, 16.0};
    default:
        throw std::invalid_argument(fmt::format("no signal type {}", type));
    }
}

mc::SystemConfig system_config(int config) {
    switch (config) {
    case 1:
        return {1, 0};
    case 2:
        return {0, 1};
    case 3:
        return {0, 0};
    default:
        throw std::invalid_argument(fmt::format("no system configuration {}", config));
    }
}

int table_for_signal(int type) {
    switch (type) {
    case 1:
        return 1;
    case 2:
        return 2;
    case 3:
        return 5;
    default:
        throw std::invalid_argument(fmt::format("no signal type {}", type));
    }
}

std::vector<mc::FilterPair> filter_pairs(const std::vector<FilterSpec>& specs) {
    std::vector<mc::FilterPair> out;
    for (const auto& s : specs) {
        out.push_back({s.id.value_or(""), spec::design(s), spec::design(spec::predictor_of(s))});
    }
    return out;
}

mc::Scenario scenario(int type, int config, const RealVec& snr_db, std::size_t trials, std::uint64_t seed) {
    mc::Scenario sc;
    sc.name = fmt::format("type{}-config{}", type, config);
    sc.triplet = signal_type(type);
    sc.config = system_config(config);
    sc.filters = filter_pairs(table(table_for_signal(type)));
    sc.snr_db = snr_db;
    sc.trials = trials;
    sc.seed = seed;
    return sc;
}

} // namespace phasetrack::catalog
