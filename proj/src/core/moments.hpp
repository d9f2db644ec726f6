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

#ifndef SOMSYNC_CORE_MOMENTS_HPP
#define SOMSYNC_CORE_MOMENTS_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "core/channel.hpp"
#include "core/params.hpp"
#include "core/rng.hpp"

namespace somsync {

/// Two closed forms for the per-index variance of |y[k]|^2: the formula from
/// the original derivation (paper_formula, kept verbatim including its
/// pure-noise constant) and the independently validated form
/// (oracle_corrected, confirmed against the Monte Carlo oracle; the default).
enum class VarianceMode { paper_formula, oracle_corrected };

/// Delay range [lo, hi] contributing to sample index k within a block; empty
/// in the pure-noise tail of the block.
struct TapWindow {
    std::uint32_t lo = 0;
    std::uint32_t hi = 0;
    bool empty = true;
};

TapWindow tap_window(const SystemConfig& cfg, std::uint32_t k);

/// Per-period second-order moment profile M0[k] plus both weight tables.
/// Lookups extend periodically. Active weights carry a relative positivity
/// floor so zero-noise configurations stay usable for weighting.
class MomentTable {
public:
    MomentTable(SystemConfig cfg, std::vector<double> m0, std::vector<double> f_paper,
                double f_noise_paper, std::vector<double> f_oracle, double f_noise_oracle,
                VarianceMode mode);

    const SystemConfig& config() const { return cfg_; }
    VarianceMode variance_mode() const { return mode_; }
    std::uint32_t period() const { return cfg_.n_s(); }

    double m0_at(std::size_t k) const { return m0_[k % m0_.size()]; }
    const std::vector<double>& m0() const { return m0_; }
    const std::vector<double>& f_paper() const { return f_paper_; }
    const std::vector<double>& f_oracle() const { return f_oracle_; }
    double f_noise_paper() const { return f_noise_paper_; }
    double f_noise_oracle() const { return f_noise_oracle_; }

    /// Active-mode weight with the positivity floor applied; 0 only when the
    /// whole table is degenerate (all raw weights <= 0).
    double weight_at(std::size_t k) const { return active_weights_[k % active_weights_.size()]; }
    double noise_weight() const { return active_noise_weight_; }
    const std::vector<double>& active_weights() const { return active_weights_; }

private:
    SystemConfig cfg_;
    std::vector<double> m0_;
    std::vector<double> f_paper_;
    std::vector<double> f_oracle_;
    std::vector<double> active_weights_; // floored copy of the active mode
    double f_noise_paper_ = 0.0;
    double f_noise_oracle_ = 0.0;
    double active_noise_weight_ = 0.0;
    VarianceMode mode_ = VarianceMode::oracle_corrected;
};

/// M0[k] = sigma_s^2 * sum_{l in window(k)} pdp[l] + sigma_n^2 over one period.
std::vector<double> theoretical_som(const SystemConfig& cfg, const ChannelProfile& profile);

/// Per-index variance of |y[k]|^2 under the aligned hypothesis, plus the
/// weight for the noise-prefix term. Raw values; no positivity floor.
std::pair<std::vector<double>, double> som_variance(const SystemConfig& cfg,
                                                    const ChannelProfile& profile,
                                                    VarianceMode mode);

MomentTable build_moment_table(const SystemConfig& cfg, const ChannelProfile& profile,
                               VarianceMode mode);

/// Sample-mean moment estimates for hypothesis d over an observation window.
/// Entries with zero complete periods are recorded with count 0 and skipped
/// by the estimators.
struct SampleMoments {
    std::vector<double> m_hat;        ///< size n_s; valid where counts[k] > 0
    std::vector<std::uint32_t> counts; ///< complete periods averaged per k
    double m_hat_noise = 0.0;          ///< mean of the d noise-prefix samples (d > 0)
    std::uint64_t noise_count = 0;     ///< m_r * d for d > 0, else 0
};

/// Variant over precomputed energies e_j[t] = |y_j[t]|^2 (one row per antenna).
SampleMoments sample_som(const std::vector<std::vector<double>>& energies, std::int32_t d,
                         const SystemConfig& cfg);
SampleMoments sample_som(const SampleStream& stream, std::int32_t d, const SystemConfig& cfg);

/// In-place variant for tight hypothesis loops; out is resized as needed.
void sample_som_into(const std::vector<std::vector<double>>& energies, std::int32_t d,
                     const SystemConfig& cfg, SampleMoments& out);

std::vector<std::vector<double>> stream_energies(const SampleStream& stream);

/// Monte Carlo ground truth: per-index mean and unbiased variance of |y[k]|^2
/// over fresh signal/channel/noise draws, one full block per realization.
struct MomentStats {
    std::vector<double> mean;
    std::vector<double> variance;
    std::uint64_t trials = 0;
};

MomentStats empirical_moments(const SystemConfig& cfg, const ChannelProfile& profile,
                              std::uint64_t trials, std::uint64_t seed);

/// Single-index oracle; returns (mean, variance) of |y[k]|^2.
std::pair<double, double> variance_oracle(const SystemConfig& cfg, const ChannelProfile& profile,
                                          std::uint32_t k, std::uint64_t trials,
                                          std::uint64_t seed);

} // namespace somsync

#endif
