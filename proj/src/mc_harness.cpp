#include "phasetrack/mc_harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include <fmt/format.h>

namespace phasetrack::mc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
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

realization::LssSystem lss_for(const FilterPair& pair) {
    const auto* fe = std::get_if<fir::FirFilter>(&pair.estimator);
    const auto* fp = std::get_if<fir::FirFilter>(&pair.predictor);
    if (fe && fp) {
        return realization::build_lss(*fe, *fp);
    }
    const auto* ie = std::get_if<iir::IirFilter>(&pair.estimator);
    const auto* ip = std::get_if<iir::IirFilter>(&pair.predictor);
    if (ie && ip) {
        return realization::build_lss(*ie, *ip);
    }
    throw DesignError(fmt::format("filter pair '{}' mixes FIR and IIR realizations", pair.id));
}

double to_db(double v) noexcept { return 10.0 * std::log10(v); }

} // namespace

void Scenario::validate() const {
    if (length < 3) {
        throw std::invalid_argument("scenario needs N >= 3");
    }
    if (trials < 1) {
        throw std::invalid_argument("scenario needs at least one trial");
    }
    if (config.alpha < 0 || config.alpha > 1 || config.beta < 0) {
        throw std::invalid_argument("alpha must be 0 or 1 and beta non-negative");
    }
    if (!(window_start >= 0.0 && window_start < 1.0)) {
        throw std::invalid_argument("analysis window start must lie in [0, 1)");
    }
    if (snr_db.empty()) {
        throw std::invalid_argument("SNR sweep is empty");
    }
    for (const auto& pair : filters) {
        (void)lss_for(pair);
    }
}

RealVec snr_range(double start, double stop, double step) {
    if (!(step > 0.0) || stop < start) {
        throw std::invalid_argument("SNR range needs step > 0 and stop >= start");
    }
    RealVec out;
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(start + step * static_cast<double>(i));
    }
    return out;
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t trial, std::size_t snr_index) noexcept {
    // Master seeds must not alias shifted trial ranges, so the master is mixed first.
    const std::uint64_t base = splitmix64(splitmix64(master) ^ static_cast<std::uint64_t>(trial));
    return splitmix64(base ^ splitmix64(static_cast<std::uint64_t>(snr_index) + 0x5bd1e995ULL));
}

TrialInput make_trial_input(const Scenario& scenario, double snr_db, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> phase0(0.0, kTwoPi);

    TrialInput input;
    input.truth = signal::triplet_to_spec(scenario.triplet, scenario.length);
    input.truth.theta[0] = phase0(rng);
    const double variance = std::isfinite(snr_db) ? signal::noise_variance_for_snr(1.0, snr_db) : 0.0;
    const ComplexVec x = signal::synthesize(input.truth, scenario.noise, variance, rng);

    double first = 0.0;
    if (scenario.config.alpha == 0) {
        input.angles.resize(x.size());
        std::transform(x.begin(), x.end(), input.angles.begin(), [](const cplx& v) { return signal::wrap(std::arg(v)); });
        first = input.truth.phase(0.0);
    } else {
        input.angles = signal::conjugate_product_angles(x);
        first = input.truth.phase(1.0) - input.truth.phase(0.0);
    }
    // The tracker's 2π branch is fixed by the first measured angle, so the
    // reference is shifted by the multiple of 2π nearest to that sample.
    input.offset = kTwoPi * std::round((first - input.angles.front()) / kTwoPi);
    return input;
}

namespace {

TrialResult score_trial(const Scenario& scenario, const FilterPair& pair, const TrialInput& input,
                        const realization::TandemFilter& prototype) {
    const auto run = realization::run_tandem(prototype, input.angles);

    RealVec out = run.estimates;
    const auto beta = static_cast<std::size_t>(scenario.config.beta);
    for (std::size_t pass = 0; pass < beta; ++pass) {
        for (std::size_t i = out.size(); i-- > pass + 1;) {
            out[i] -= out[i - 1];
        }
    }

    const auto alpha = static_cast<std::size_t>(scenario.config.alpha);
    const int order = scenario.config.k0_tilde();
    const double q_total = analysis::design_delay(pair.estimator) + 0.5 * static_cast<double>(order);
    const double offset = beta == 0 ? input.offset : 0.0;
    const auto last = static_cast<double>(scenario.length - 1);
    const auto n_start = static_cast<std::size_t>(std::ceil(scenario.window_start * last));

    TrialResult result;
    // Cycle slips: changes of the 2π branch of the unwrapped input relative
    // to the noiseless input.
    double branch = 0.0;
    for (std::size_t i = 0; i < run.unwrapped.size(); ++i) {
        const auto n = static_cast<double>(i + alpha);
        const double clean = alpha == 0 ? input.truth.phase(n) : input.truth.phase(n) - input.truth.phase(n - 1.0);
        const double k = std::round((run.unwrapped[i] - clean + input.offset) / kTwoPi);
        if (k != branch) {
            ++result.unwrap_corrections;
            branch = k;
        }
    }
    for (std::size_t n = std::max(n_start, alpha + beta); n < scenario.length; ++n) {
        const std::size_t i = n - alpha;
        const double truth = input.truth.phase_derivative(static_cast<double>(n) - q_total, order) - offset;
        const double err = out[i] - truth;
        if (!std::isfinite(err)) {
            result.divergent = true;
        }
        result.squared_errors.push_back(err * err);
    }
    return result;
}

} // namespace

TrialResult run_trial(const Scenario& scenario, const FilterPair& pair, const TrialInput& input) {
    return score_trial(scenario, pair, input, realization::TandemFilter(lss_for(pair), scenario.unwrap));
}

TrialResult run_trial(const Scenario& scenario, const FilterPair& pair, double snr_db, std::uint64_t seed) {
    return run_trial(scenario, pair, make_trial_input(scenario, snr_db, seed));
}

std::vector<ResultRow> ScenarioResult::rows_for(const std::string& filter_id) const {
    std::vector<ResultRow> out;
    std::copy_if(rows.begin(), rows.end(), std::back_inserter(out),
                 [&](const ResultRow& r) { return r.filter_id == filter_id; });
    return out;
}

ScenarioResult run_scenario(const Scenario& scenario, unsigned jobs) {
    scenario.validate();
    const std::size_t n_filters = scenario.filters.size();
    const std::size_t n_snr = scenario.snr_db.size();
    const std::size_t n_trials = scenario.trials;

    struct Cell {
        double sum{0.0};
        std::size_t count{0};
        std::size_t corrections{0};
        bool divergent{false};
    };
    // cells[(f * n_snr + s) * n_trials + t]
    std::vector<Cell> cells(n_filters * n_snr * n_trials);

    std::vector<realization::TandemFilter> prototypes;
    for (const auto& pair : scenario.filters) {
        prototypes.emplace_back(lss_for(pair), scenario.unwrap);
    }

    const std::size_t tasks = n_snr * n_trials;
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t task = next.fetch_add(1);
            if (task >= tasks) {
                return;
            }
            const std::size_t s = task / n_trials;
            const std::size_t t = task % n_trials;
            try {
                const TrialInput input =
                    make_trial_input(scenario, scenario.snr_db[s], trial_seed(scenario.seed, t, s));
                for (std::size_t f = 0; f < n_filters; ++f) {
                    const TrialResult r = score_trial(scenario, scenario.filters[f], input, prototypes[f]);
                    Cell& cell = cells[(f * n_snr + s) * n_trials + t];
                    cell.sum = pairwise_sum(r.squared_errors.data(), r.squared_errors.size());
                    cell.count = r.squared_errors.size();
                    cell.corrections = r.unwrap_corrections;
                    cell.divergent = r.divergent;
                }
            } catch (...) {
                const std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next.store(tasks);
                return;
            }
        }
    };

    unsigned workers = jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : jobs;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, tasks));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& th : pool) {
        th.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    ScenarioResult result;
    const int order = scenario.config.k0_tilde();
    RealVec sums(n_trials);
    for (std::size_t f = 0; f < n_filters; ++f) {
        const auto& pair = scenario.filters[f];
        const double v_bpf = analysis::noise_gain(pair.estimator, order);
        for (std::size_t s = 0; s < n_snr; ++s) {
            ResultRow row;
            row.filter_id = pair.id;
            row.snr_db = scenario.snr_db[s];
            row.trials = n_trials;
            std::size_t count = 0;
            for (std::size_t t = 0; t < n_trials; ++t) {
                const Cell& cell = cells[(f * n_snr + s) * n_trials + t];
                sums[t] = cell.sum;
                count += cell.count;
                row.unwrap_corrections += cell.corrections;
                row.divergent_trials += cell.divergent ? 1 : 0;
            }
            row.var_sim_db = to_db(pairwise_sum(sums.data(), sums.size()) / static_cast<double>(count));
            row.var_ana_db = to_db(analysis::expected_variance(v_bpf, row.snr_db));
            result.rows.push_back(row);
        }
    }
    return result;
}

std::map<std::string, double> threshold_estimate(const ScenarioResult& result, double margin_db) {
    std::map<std::string, std::vector<ResultRow>> grouped;
    for (const auto& row : result.rows) {
        grouped[row.filter_id].push_back(row);
    }
    std::map<std::string, double> out;
    for (auto& [id, rows] : grouped) {
        std::sort(rows.begin(), rows.end(), [](const ResultRow& x, const ResultRow& y) { return x.snr_db < y.snr_db; });
        const bool degenerate = std::any_of(rows.begin(), rows.end(), [](const ResultRow& r) {
            return !std::isfinite(r.var_ana_db) || !std::isfinite(r.snr_db);
        });
        if (degenerate) {
            out[id] = -std::numeric_limits<double>::infinity();
            continue;
        }
        double threshold = std::numeric_limits<double>::infinity();
        for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
            const double excess = it->var_sim_db - it->var_ana_db;
            if (!(excess < margin_db)) {
                break;
            }
            threshold = it->snr_db;
        }
        out[id] = threshold;
    }
    return out;
}

void write_result_csv(std::ostream& out, const ScenarioResult& result) {
    out << "filter_id,snr_db,var_sim_db,var_ana_db,trials,unwrap_corrections,divergent_trials\n";
    for (const auto& r : result.rows) {
        out << fmt::format("{},{:.6g},{:.6f},{:.6f},{},{},{}\n", r.filter_id, r.snr_db, r.var_sim_db, r.var_ana_db,
                           r.trials, r.unwrap_corrections, r.divergent_trials);
    }
}

void write_threshold_csv(std::ostream& out, const std::map<std::string, double>& thresholds,
                         const std::vector<std::string>& order) {
    out << "filter_id,threshold_db\n";
    for (const auto& id : order) {
        const auto it = thresholds.find(id);
        if (it != thresholds.end()) {
            out << fmt::format("{},{:.6g}\n", id, it->second);
        }
    }
}

} // namespace phasetrack::mc
