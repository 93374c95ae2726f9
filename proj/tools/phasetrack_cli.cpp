// phasetrack: design, analyze and simulate phase/frequency tracking filters.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "phasetrack/analysis.hpp"
#include "phasetrack/catalog.hpp"
#include "phasetrack/mc_harness.hpp"
#include "phasetrack/serialization.hpp"

namespace {

using namespace phasetrack;

constexpr int kExitNumeric = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path);
    if (!out) {
        throw UsageError(fmt::format("cannot write '{}'", out_path));
    }
    out << text;
}

RealVec parse_snr_range(const std::string& text) {
    double start = 0.0;
    double stop = 0.0;
    double step = 1.0;
    char c1 = 0;
    char c2 = 0;
    std::istringstream in(text);
    if (!(in >> start >> c1 >> stop) || c1 != ':') {
        throw UsageError(fmt::format("--snr-range expects start:stop[:step], got '{}'", text));
    }
    if (in >> c2) {
        if (c2 != ':' || !(in >> step)) {
            throw UsageError(fmt::format("--snr-range expects start:stop[:step], got '{}'", text));
        }
    }
    try {
        return mc::snr_range(start, stop, step);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

void require_file(const std::string& path) {
    if (!std::filesystem::exists(path)) {
        throw UsageError(fmt::format("file not found: '{}'", path));
    }
}

std::string tables_csv(const std::optional<int>& only) {
    std::string out = "id,table,kind,K1,K0,M,f_c,q,v_LPF,v_BPF,v1,v0,dc_group_delay\n";
    for (const auto& row : catalog::all_rows()) {
        if (only && *only != row.table) {
            continue;
        }
        const auto& s = row.spec;
        const analysis::AnyFilter f = spec::design(s);
        const bool fir = s.kind == spec::FilterKind::Fir;
        const double f_c = fir ? 1.0 / static_cast<double>(*s.M) : *s.f_c;
        out += fmt::format("{},{},{},{},{},{:.6g},{:.6g},{:.5f},{:.4e},{:.4e},{:.4e},{:.4e},{:.6f}\n", *s.id, row.table,
                           fir ? "FIR" : "IIR", s.K1, s.K0, fir ? static_cast<double>(*s.M) : 1.0 / f_c, f_c,
                           analysis::design_delay(f), analysis::noise_gain(f, 0), analysis::noise_gain(f, s.K0),
                           analysis::noise_gain(f, 1), analysis::noise_gain(f, 0), analysis::dc_group_delay(f));
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Phase and frequency tracking filters: design, analysis and Monte-Carlo simulation"};
    app.require_subcommand(1);

    std::string out_path;
    std::string input_path;

    auto* design = app.add_subcommand("design", "Design a filter from a FilterSpec JSON file");
    design->add_option("spec", input_path, "filter spec JSON")->required();
    design->add_option("--out", out_path, "output designed-filter JSON (default stdout)");

    auto* analyze = app.add_subcommand("analyze", "Frequency response and noise-gain report");
    analyze->add_option("filter", input_path, "filter spec or designed-filter JSON")->required();
    analyze->add_option("--out", out_path, "response CSV; a .json summary is written beside it");
    std::size_t grid = 1024;
    analyze->add_option("--grid", grid, "full-band grid intervals over [0, 0.5]")->check(CLI::PositiveNumber);

    auto* simulate = app.add_subcommand("simulate", "Run a Monte-Carlo scenario");
    simulate->add_option("scenario", input_path, "scenario JSON")->required();
    simulate->add_option("--out", out_path, "result CSV (default stdout)");
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<std::string> snr_text;
    unsigned jobs = 0;
    std::optional<double> threshold;
    simulate->add_option("--seed", seed, "master seed (overrides the scenario)");
    simulate->add_option("--trials", trials, "trials per SNR (overrides the scenario)")->check(CLI::PositiveNumber);
    simulate->add_option("--snr-range", snr_text, "start:stop[:step] in dB");
    simulate->add_option("--jobs", jobs, "worker threads (0 = all cores)");
    simulate->add_option("--threshold", threshold, "append threshold estimates for this margin in dB")
        ->expected(0, 1)
        ->default_str("3");

    auto* tables = app.add_subcommand("tables", "Regenerate filter diagnostics for the bundled tables");
    std::optional<int> table_number;
    tables->add_option("--table", table_number, "restrict to one table (1..5)")->check(CLI::Range(1, 5));
    tables->add_option("--out", out_path, "output CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        (void)app.exit(e);
        return kExitUsage;
    }

    try {
        if (design->parsed()) {
            require_file(input_path);
            const auto s = io::filter_spec_from_json(io::read_json(input_path));
            const io::DesignedFilter d{s, spec::design(s)};
            emit(io::designed_to_json(d).dump(2) + "\n", out_path);
        } else if (analyze->parsed()) {
            require_file(input_path);
            const io::DesignedFilter d = io::load_filter(input_path);
            const analysis::ResponseReport report = analysis::make_report(d.filter, grid);
            const std::string summary = io::report_summary(report).dump(2) + "\n";
            if (out_path.empty()) {
                std::cout << summary;
            } else {
                std::ostringstream csv;
                analysis::write_report_csv(csv, report);
                emit(csv.str(), out_path);
                emit(summary, std::filesystem::path(out_path).replace_extension(".json").string());
            }
        } else if (simulate->parsed()) {
            require_file(input_path);
            mc::Scenario sc = io::load_scenario(input_path);
            if (seed) {
                sc.seed = *seed;
            }
            if (trials) {
                sc.trials = *trials;
            }
            if (snr_text) {
                sc.snr_db = parse_snr_range(*snr_text);
            }
            const mc::ScenarioResult result = mc::run_scenario(sc, jobs);
            std::ostringstream csv;
            mc::write_result_csv(csv, result);
            if (simulate->count("--threshold") > 0) {
                std::vector<std::string> order;
                for (const auto& pair : sc.filters) {
                    order.push_back(pair.id);
                }
                csv << '\n';
                mc::write_threshold_csv(csv, mc::threshold_estimate(result, threshold.value_or(3.0)), order);
            }
            emit(csv.str(), out_path);
        } else if (tables->parsed()) {
            emit(tables_csv(table_number), out_path);
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const io::SchemaError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DesignError& e) {
        std::cerr << "design error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumeric;
    }
    return 0;
}
