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

#ifndef SOMSYNC_CORE_HARNESS_HPP
#define SOMSYNC_CORE_HARNESS_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "core/channel.hpp"
#include "core/estimators.hpp"
#include "core/moments.hpp"
#include "core/params.hpp"
#include "core/waveform.hpp"

namespace somsync {

enum class SweepVariable { ebn0_db, doppler_hz, n_blocks, n_taps, pdp_error_alpha };

std::string sweep_variable_name(SweepVariable v);

/// Everything needed to reproduce one experiment: base link configuration,
/// the swept variable and its grid, and the trial budget. Trial seeds derive
/// deterministically from (seed, point index, trial index).
struct ExperimentSpec {
    SystemConfig cfg;
    ChannelProfile profile;
    std::string experiment = "snr"; // snr|doppler|blocks|taps|pdp|pmf|mse
    SweepVariable sweep = SweepVariable::ebn0_db;
    std::vector<double> grid;
    std::uint32_t trials = 1000;
    std::vector<EstimatorId> estimators{EstimatorId::som, EstimatorId::wsom, EstimatorId::tm};
    std::uint64_t seed = 1;
    double ebn0_db = 15.0;   ///< base operating point for non-SNR sweeps
    bool sigma_n2_explicit = false; ///< honor cfg.sigma_n2 instead of ebn0_db
    SignalMode signal_mode = SignalMode::qam;
    std::uint32_t qam_order = 128;
    VarianceMode variance_mode = VarianceMode::oracle_corrected;
    std::uint32_t tm_window = 0; ///< 0 -> n_z
    std::uint32_t pmf_support = 10;
    double pdp_beta = 0.5;   ///< decay used when the taps sweep rebuilds the profile
    std::uint32_t threads = 0; ///< 0 -> hardware concurrency
};

struct TrialOutcome {
    std::int32_t true_d = 0;
    struct PerEstimator {
        EstimatorId id = EstimatorId::som;
        std::int32_t d_hat = 0;
        double cost_min = 0.0;
    };
    std::vector<PerEstimator> estimates;
    double elapsed_s = 0.0;
};

struct EstimatorStats {
    EstimatorId id = EstimatorId::som;
    std::uint64_t trials = 0;
    double lock_in = 0.0;
    double mse = 0.0;
    std::vector<double> pmf; ///< error buckets -support..support, then overflow
};

struct PointResult {
    double sweep_value = 0.0;
    double sigma_n2 = 0.0;
    std::vector<EstimatorStats> per_estimator;
    double runtime_s = 0.0;
};

struct ExperimentResult {
    ExperimentSpec spec;
    std::vector<PointResult> points;
};

/// One grid point fully materialized: link config with the point's noise
/// power, the channel-driving profile, and the prebuilt moment table (absent
/// for the PDP-mismatch sweep, where each trial perturbs its own table).
struct PointContext {
    SystemConfig cfg;
    ChannelProfile channel_profile;
    std::optional<MomentTable> table;
    double pdp_error_alpha = 0.0;
    SignalMode signal_mode = SignalMode::qam;
    std::uint32_t qam_order = 128;
    VarianceMode variance_mode = VarianceMode::oracle_corrected;
    std::uint32_t tm_window = 0;
    std::vector<EstimatorId> estimators;
};

PointContext make_point_context(const ExperimentSpec& spec, double sweep_value);

/// Context at the base operating point (no sweep applied): noise power from
/// ebn0_db unless the config pinned sigma_n2 explicitly.
PointContext make_single_point(const ExperimentSpec& spec);

TrialOutcome run_trial(const PointContext& point, std::uint64_t trial_seed);

std::vector<EstimatorStats> aggregate(const std::vector<TrialOutcome>& outcomes,
                                      const std::vector<EstimatorId>& estimators,
                                      std::uint32_t pmf_support);

ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Same, invoking on_point after each completed grid point so callers can
/// flush partial results if a later point fails.
ExperimentResult run_experiment(const ExperimentSpec& spec,
                                const std::function<void(const PointResult&)>& on_point);

/// Each tap power scaled by (1 +/- alpha_err) with equal probability. The
/// perturbed profile feeds the moment tables only; the channel keeps the truth.
ChannelProfile pdp_mismatch(const ChannelProfile& profile, double alpha_err, Rng& rng);

/// sigma_n^2 = sigma_x^2 * p_h * (n_x / n_s) / (bits_per_symbol * 10^(dB/10)).
double ebn0_to_sigma_n2(double ebn0_db, const SystemConfig& cfg, double profile_power,
                        double bits_per_symbol);

std::vector<double> default_grid(const std::string& experiment);
SweepVariable sweep_for_experiment(const std::string& experiment);

void write_results_csv(const ExperimentResult& result, const std::string& path);
std::string results_csv_string(const ExperimentResult& result);

} // namespace somsync

#endif
