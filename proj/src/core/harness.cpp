// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "core/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <thread>

#include "core/error.hpp"

namespace somsync {

std::string sweep_variable_name(SweepVariable v) {
    switch (v) {
        case SweepVariable::ebn0_db: return "ebn0_db";
        case SweepVariable::doppler_hz: return "doppler_hz";
        case SweepVariable::n_blocks: return "n_blocks";
        case SweepVariable::n_taps: return "n_taps";
        case SweepVariable::pdp_error_alpha: return "pdp_error_alpha";
    }
    return "?";
}

double ebn0_to_sigma_n2(double ebn0_db, const SystemConfig& cfg, double profile_power,
                        double bits_per_symbol) {
    if (!(bits_per_symbol > 0.0)) raise(Errc::range_error, "bits_per_symbol must be > 0");
    const double es = cfg.sigma_x2 * profile_power * static_cast<double>(cfg.n_x) /
                      static_cast<double>(cfg.n_s());
    return es / (bits_per_symbol * std::pow(10.0, ebn0_db / 10.0));
}

ChannelProfile pdp_mismatch(const ChannelProfile& profile, double alpha_err, Rng& rng) {
    if (!(alpha_err >= 0.0) || alpha_err >= 1.0)
        raise(Errc::range_error, "pdp_error_alpha: must lie in [0, 1)");
    ChannelProfile perturbed = profile;
    for (auto& power : perturbed.pdp) {
        const bool up = rng.uniform() < 0.5;
        power *= up ? (1.0 + alpha_err) : (1.0 - alpha_err);
    }
    return perturbed;
}

SweepVariable sweep_for_experiment(const std::string& experiment) {
    if (experiment == "snr" || experiment == "mse" || experiment == "pmf")
        return SweepVariable::ebn0_db;
    if (experiment == "doppler") return SweepVariable::doppler_hz;
    if (experiment == "blocks") return SweepVariable::n_blocks;
    if (experiment == "taps") return SweepVariable::n_taps;
    if (experiment == "pdp") return SweepVariable::pdp_error_alpha;
    raise(Errc::invalid_argument,
          "unknown experiment '" + experiment + "' (snr|doppler|blocks|taps|pdp|pmf|mse)");
}

std::vector<double> default_grid(const std::string& experiment) {
    if (experiment == "snr" || experiment == "mse") return {-10, -5, 0, 5, 10, 15};
    if (experiment == "pmf") return {15};
    if (experiment == "doppler") return {0, 50, 150, 500, 1500};
    if (experiment == "blocks") return {2, 5, 10, 20, 40};
    if (experiment == "taps") return {2, 4, 6, 8, 10, 12};
    if (experiment == "pdp") return {0, 0.2, 0.4, 0.6, 0.8};
    raise(Errc::invalid_argument, "unknown experiment '" + experiment + "'");
}

PointContext make_point_context(const ExperimentSpec& spec, double sweep_value) {
    PointContext point;
    point.cfg = spec.cfg;
    point.channel_profile = spec.profile;
    point.signal_mode = spec.signal_mode;
    point.qam_order = spec.qam_order;
    point.variance_mode = spec.variance_mode;
    point.tm_window = spec.tm_window;
    point.estimators = spec.estimators;

    auto as_count = [](double value, const char* what) {
        if (!(value >= 1.0) || value != std::floor(value) || value > 1e9)
            raise(Errc::range_error, std::string(what) + ": grid values must be positive integers");
        return static_cast<std::uint32_t>(value);
    };

    double ebn0_db = spec.ebn0_db;
    switch (spec.sweep) {
        case SweepVariable::ebn0_db:
            ebn0_db = sweep_value;
            break;
        case SweepVariable::doppler_hz:
            point.channel_profile.doppler_hz = sweep_value;
            break;
        case SweepVariable::n_blocks:
            point.cfg.n_blocks = as_count(sweep_value, "n_blocks");
            break;
        case SweepVariable::n_taps: {
            // Only the tap count varies: rebuild the exponential profile with
            // the configured decay, renormalized to the base total power.
            const std::uint32_t n_h = as_count(sweep_value, "n_taps");
            point.cfg.n_h = n_h;
            auto shape = exponential_pdp(n_h, 1.0, spec.pdp_beta);
            double shape_sum = 0.0;
            for (double p : shape) shape_sum += p;
            const double target = spec.profile.total_power();
            for (auto& p : shape) p *= target / shape_sum;
            point.channel_profile.pdp = std::move(shape);
            break;
        }
        case SweepVariable::pdp_error_alpha:
            point.pdp_error_alpha = sweep_value;
            break;
    }

    if (spec.sweep == SweepVariable::ebn0_db || !spec.sigma_n2_explicit) {
        const double bits = std::log2(static_cast<double>(spec.qam_order));
        point.cfg.sigma_n2 =
            ebn0_to_sigma_n2(ebn0_db, point.cfg, point.channel_profile.total_power(), bits);
    }

    validate_config(point.cfg);
    validate_profile(point.channel_profile, point.cfg);
    if (point.pdp_error_alpha == 0.0)
        point.table.emplace(
            build_moment_table(point.cfg, point.channel_profile, point.variance_mode));
    return point;
}

PointContext make_single_point(const ExperimentSpec& spec) {
    ExperimentSpec single = spec;
    single.sweep = SweepVariable::doppler_hz; // re-applying f_D changes nothing
    return make_point_context(single, spec.profile.doppler_hz);
}

TrialOutcome run_trial(const PointContext& point, std::uint64_t trial_seed) {
    const SystemConfig& cfg = point.cfg;
    Rng rng(trial_seed);

    // Draw order is fixed: mismatch flips, offset, signal, taps, noise.
    std::optional<MomentTable> trial_table;
    const MomentTable* table = point.table ? &*point.table : nullptr;
    if (point.pdp_error_alpha > 0.0 || !table) {
        const ChannelProfile assumed =
            pdp_mismatch(point.channel_profile, point.pdp_error_alpha, rng);
        trial_table.emplace(build_moment_table(cfg, assumed, point.variance_mode));
        table = &*trial_table;
    }

    const std::int32_t d = static_cast<std::int32_t>(rng.uniform_int(cfg.d_min, cfg.d_max));

    // One spare block covers the samples a negative offset shifts into view.
    const std::uint32_t blocks_needed = cfg.n_blocks + 1;
    std::optional<ConstellationSpec> constellation;
    if (point.signal_mode == SignalMode::qam)
        constellation = make_qam_constellation(point.qam_order);

    std::vector<std::vector<std::complex<double>>> tx(cfg.m_t);
    for (std::uint32_t i = 0; i < cfg.m_t; ++i)
        tx[i] = generate_tx_stream(cfg, point.signal_mode,
                                   constellation ? &*constellation : nullptr, rng, i + 1,
                                   blocks_needed);

    const std::size_t span = tx.front().size();
    const TapProcess taps = draw_taps(point.channel_profile, cfg, rng, span);
    const auto noiseless = apply_channel(tx, taps, cfg);
    SampleStream stream = inject_offset(noiseless, TimingOffset{d}, cfg.sigma_n2, cfg, rng);
    stream.seed = trial_seed;

    TrialOutcome outcome;
    outcome.true_d = d;
    const auto start = std::chrono::steady_clock::now();
    for (EstimatorId id : point.estimators) {
        Estimate estimate;
        switch (id) {
            case EstimatorId::som: estimate = estimate_som(stream, cfg, *table); break;
            case EstimatorId::wsom: estimate = estimate_wsom(stream, cfg, *table); break;
            case EstimatorId::tm: estimate = estimate_tm(stream, cfg, point.tm_window); break;
        }
        outcome.estimates.push_back({id, estimate.d_hat, estimate.cost_min});
    }
    outcome.elapsed_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return outcome;
}

std::vector<EstimatorStats> aggregate(const std::vector<TrialOutcome>& outcomes,
                                      const std::vector<EstimatorId>& estimators,
                                      std::uint32_t pmf_support) {
    if (outcomes.empty()) raise(Errc::range_error, "aggregate: no outcomes");
    std::vector<EstimatorStats> stats;
    for (std::size_t e = 0; e < estimators.size(); ++e) {
        EstimatorStats s;
        s.id = estimators[e];
        s.trials = outcomes.size();
        s.pmf.assign(2 * static_cast<std::size_t>(pmf_support) + 2, 0.0);
        std::uint64_t locked = 0;
        double squared = 0.0;
        for (const auto& outcome : outcomes) {
            const auto& est = outcome.estimates.at(e);
            const std::int64_t err = static_cast<std::int64_t>(est.d_hat) - outcome.true_d;
            if (err == 0) ++locked;
            squared += static_cast<double>(err) * static_cast<double>(err);
            if (err >= -static_cast<std::int64_t>(pmf_support) &&
                err <= static_cast<std::int64_t>(pmf_support))
                s.pmf[static_cast<std::size_t>(err + pmf_support)] += 1.0;
            else
                s.pmf.back() += 1.0;
        }
        const double n = static_cast<double>(outcomes.size());
        s.lock_in = static_cast<double>(locked) / n;
        s.mse = squared / n;
        for (auto& p : s.pmf) p /= n;
        stats.push_back(std::move(s));
    }
    return stats;
}

namespace {

std::vector<TrialOutcome> run_point_trials(const PointContext& point, std::uint64_t master_seed,
                                           std::uint64_t point_index, std::uint32_t trials,
                                           std::uint32_t threads) {
    std::vector<TrialOutcome> outcomes(trials);
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, trials);

    if (threads <= 1) {
        for (std::uint32_t t = 0; t < trials; ++t)
            outcomes[t] = run_trial(point, derive_seed(master_seed, point_index, t));
        return outcomes;
    }

    std::atomic<std::uint32_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&]() {
        try {
            for (;;) {
                const std::uint32_t t = next.fetch_add(1);
                if (t >= trials) return;
                outcomes[t] = run_trial(point, derive_seed(master_seed, point_index, t));
            }
        } catch (...) {
            std::lock_guard<std::mutex> guard(failure_mutex);
            if (!failure) failure = std::current_exception();
            next.store(trials);
        }
    };
    std::vector<std::thread> pool;
    for (std::uint32_t w = 0; w < threads; ++w) pool.emplace_back(worker);
    for (auto& thread : pool) thread.join();
    if (failure) std::rethrow_exception(failure);
    return outcomes;
}

} // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec,
                                const std::function<void(const PointResult&)>& on_point) {
    if (spec.grid.empty()) raise(Errc::range_error, "experiment grid must be nonempty");
    if (spec.trials < 1) raise(Errc::range_error, "trials must be >= 1");
    if (spec.estimators.empty()) raise(Errc::range_error, "estimator set must be nonempty");

    ExperimentResult result;
    result.spec = spec;
    for (std::size_t p = 0; p < spec.grid.size(); ++p) {
        const auto start = std::chrono::steady_clock::now();
        const PointContext point = make_point_context(spec, spec.grid[p]);
        const auto outcomes =
            run_point_trials(point, spec.seed, p, spec.trials, spec.threads);

        PointResult point_result;
        point_result.sweep_value = spec.grid[p];
        point_result.sigma_n2 = point.cfg.sigma_n2;
        point_result.per_estimator = aggregate(outcomes, spec.estimators, spec.pmf_support);
        point_result.runtime_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (on_point) on_point(point_result);
        result.points.push_back(std::move(point_result));
    }
    return result;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    return run_experiment(spec, {});
}

namespace {

void append_number(std::string& out, double value) {
    char buffer[48];
    std::snprintf(buffer, sizeof(buffer), "%.12g", value);
    out += buffer;
}

} // namespace

std::string results_csv_string(const ExperimentResult& result) {
    const std::uint32_t support = result.spec.pmf_support;
    std::string out = "# somsync_results_v1\n";
    out += "experiment,estimator,sweep_var,sweep_value,trials,lock_in,mse";
    for (std::int64_t k = -static_cast<std::int64_t>(support);
         k <= static_cast<std::int64_t>(support); ++k)
        out += ",pmf_" + std::to_string(k);
    out += ",pmf_other\n";

    const std::string sweep_name = sweep_variable_name(result.spec.sweep);
    for (const auto& point : result.points) {
        for (const auto& stats : point.per_estimator) {
            out += result.spec.experiment;
            out += ',';
            out += estimator_name(stats.id);
            out += ',';
            out += sweep_name;
            out += ',';
            append_number(out, point.sweep_value);
            out += ',';
            out += std::to_string(stats.trials);
            out += ',';
            append_number(out, stats.lock_in);
            out += ',';
            append_number(out, stats.mse);
            for (double p : stats.pmf) {
                out += ',';
                append_number(out, p);
            }
            out += '\n';
        }
    }
    return out;
}

void write_results_csv(const ExperimentResult& result, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) raise(Errc::io_error, "cannot open for writing: " + path);
    const std::string csv = results_csv_string(result);
    const std::size_t written = std::fwrite(csv.data(), 1, csv.size(), f);
    std::fclose(f);
    if (written != csv.size()) raise(Errc::io_error, "short write: " + path);
}

} // namespace somsync
