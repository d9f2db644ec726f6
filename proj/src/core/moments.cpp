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

#include "core/moments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "core/error.hpp"
#include "core/waveform.hpp"

namespace somsync {

namespace {

// Lighter than validate_config on purpose: the closed forms are well defined
// for zero powers (degenerate tables surface later as DegenerateWeight).
void check_moment_inputs(const SystemConfig& cfg, const ChannelProfile& profile) {
    if (cfg.n_x < 1 || cfg.n_z < 1 || cfg.n_h < 1 || cfg.m_t < 1 || cfg.m_r < 1)
        raise(Errc::range_error, "moment tables: all counts must be >= 1");
    if (!(cfg.sigma_x2 >= 0.0) || !(cfg.sigma_n2 >= 0.0))
        raise(Errc::range_error, "moment tables: powers must be >= 0");
    if (profile.pdp.size() != cfg.n_h)
        raise(Errc::dimension_mismatch, "moment tables: pdp size != n_h");
    for (double p : profile.pdp)
        if (!(p >= 0.0)) raise(Errc::range_error, "moment tables: tap powers must be >= 0");
}

} // namespace

TapWindow tap_window(const SystemConfig& cfg, std::uint32_t k) {
    // General support of the block-restarted causal convolution:
    // lo = max(0, k - n_x + 1), hi = min(k, n_h - 1), empty once lo > hi.
    TapWindow window;
    const std::int64_t lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(k) - cfg.n_x + 1);
    const std::int64_t hi = std::min<std::int64_t>(k, static_cast<std::int64_t>(cfg.n_h) - 1);
    if (lo <= hi) {
        window.lo = static_cast<std::uint32_t>(lo);
        window.hi = static_cast<std::uint32_t>(hi);
        window.empty = false;
    }
    return window;
}

std::vector<double> theoretical_som(const SystemConfig& cfg, const ChannelProfile& profile) {
    check_moment_inputs(cfg, profile);
    const std::uint32_t n_s = cfg.n_s();
    std::vector<double> m0(n_s, cfg.sigma_n2);
    for (std::uint32_t k = 0; k < n_s; ++k) {
        const TapWindow window = tap_window(cfg, k);
        if (window.empty) continue;
        double power = 0.0;
        for (std::uint32_t l = window.lo; l <= window.hi; ++l) power += profile.pdp[l];
        m0[k] += cfg.sigma_x2 * power;
    }
    return m0;
}

std::pair<std::vector<double>, double> som_variance(const SystemConfig& cfg,
                                                    const ChannelProfile& profile,
                                                    VarianceMode mode) {
    check_moment_inputs(cfg, profile);
    const std::uint32_t n_s = cfg.n_s();
    const double s2 = cfg.sigma_x2;
    const double s4 = s2 * s2;
    const double n2 = cfg.sigma_n2;
    const double n4 = n2 * n2;

    std::vector<double> f(n_s, 0.0);
    double f_noise = 0.0;
    for (std::uint32_t k = 0; k < n_s; ++k) {
        const TapWindow window = tap_window(cfg, k);
        if (window.empty) {
            // |w|^2 is exponential with mean sigma_n^2, so its variance is
            // sigma_n^4; the original derivation states 2 sigma_n^2 instead.
            f[k] = (mode == VarianceMode::oracle_corrected) ? n4 : 2.0 * n2;
            continue;
        }
        double sum2 = 0.0; // sum of tap powers
        double sum4 = 0.0; // sum of squared tap powers
        for (std::uint32_t l = window.lo; l <= window.hi; ++l) {
            sum2 += profile.pdp[l];
            sum4 += profile.pdp[l] * profile.pdp[l];
        }
        if (mode == VarianceMode::oracle_corrected) {
            // Var{|y|^2} = (2/m_t) s^4 sum4 + s^4 sum2^2 + 2 s^2 n^2 sum2 + n^4,
            // i.e. 3 s^4 sum4 + s^4 (sum2^2 - sum4) + ... for m_t = 1.
            f[k] = (2.0 / cfg.m_t) * s4 * sum4 + s4 * sum2 * sum2 + 2.0 * s2 * n2 * sum2 + n4;
        } else {
            const double cross = sum2 * sum2 - sum4; // sum over l != r
            f[k] = 3.25 * s4 * sum4 + 2.5 * s4 * cross + 2.0 * n2 * s2 * sum2 + n4 -
                   0.25 * s2 * sum2 * sum2;
        }
    }
    f_noise = (mode == VarianceMode::oracle_corrected) ? n4 : 2.0 * n2;
    return {std::move(f), f_noise};
}

MomentTable::MomentTable(SystemConfig cfg, std::vector<double> m0, std::vector<double> f_paper,
                         double f_noise_paper, std::vector<double> f_oracle,
                         double f_noise_oracle, VarianceMode mode)
    : cfg_(cfg),
      m0_(std::move(m0)),
      f_paper_(std::move(f_paper)),
      f_oracle_(std::move(f_oracle)),
      f_noise_paper_(f_noise_paper),
      f_noise_oracle_(f_noise_oracle),
      mode_(mode) {
    if (m0_.empty() || f_paper_.size() != m0_.size() || f_oracle_.size() != m0_.size())
        raise(Errc::dimension_mismatch, "moment table: profile vectors must share one period");
    const auto& active = (mode_ == VarianceMode::oracle_corrected) ? f_oracle_ : f_paper_;
    const double active_noise =
        (mode_ == VarianceMode::oracle_corrected) ? f_noise_oracle_ : f_noise_paper_;
    double max_weight = std::max(active_noise, 0.0);
    for (double w : active) max_weight = std::max(max_weight, w);
    const double floor = 1e-12 * max_weight;
    active_weights_.resize(active.size());
    for (std::size_t k = 0; k < active.size(); ++k)
        active_weights_[k] = std::max(active[k], floor);
    active_noise_weight_ = std::max(active_noise, floor);
}

MomentTable build_moment_table(const SystemConfig& cfg, const ChannelProfile& profile,
                               VarianceMode mode) {
    auto m0 = theoretical_som(cfg, profile);
    auto [f_paper, f_noise_paper] = som_variance(cfg, profile, VarianceMode::paper_formula);
    auto [f_oracle, f_noise_oracle] = som_variance(cfg, profile, VarianceMode::oracle_corrected);
    return MomentTable(cfg, std::move(m0), std::move(f_paper), f_noise_paper, std::move(f_oracle),
                       f_noise_oracle, mode);
}

std::vector<std::vector<double>> stream_energies(const SampleStream& stream) {
    std::vector<std::vector<double>> energies(stream.y.size());
    for (std::size_t j = 0; j < stream.y.size(); ++j) {
        energies[j].resize(stream.y[j].size());
        for (std::size_t t = 0; t < stream.y[j].size(); ++t)
            energies[j][t] = std::norm(stream.y[j][t]);
    }
    return energies;
}

void sample_som_into(const std::vector<std::vector<double>>& energies, std::int32_t d,
                     const SystemConfig& cfg, SampleMoments& out) {
    if (!cfg.offset_in_range(d)) {
        std::ostringstream oss;
        oss << "sample_som: d=" << d << " outside configured search set";
        raise(Errc::offset_range, oss.str());
    }
    if (energies.empty()) raise(Errc::dimension_mismatch, "sample_som: no antennas");
    const std::size_t length = energies.front().size();
    for (const auto& row : energies)
        if (row.size() != length)
            raise(Errc::dimension_mismatch, "sample_som: antenna lengths differ");

    const std::uint32_t n_s = cfg.n_s();
    const std::size_t m_r = energies.size();

    out.m_hat.resize(n_s);
    out.counts.resize(n_s);
    out.m_hat_noise = 0.0;
    out.noise_count = 0;

    const std::int64_t L = static_cast<std::int64_t>(length);
    const std::int64_t shift = d > 0 ? d : 0;
    // periods(k) = floor((L - k - shift + 1) / n_s) steps down by one as k
    // advances; track it incrementally instead of dividing per index.
    const std::int64_t numerator0 = L - shift + 1;
    std::int64_t periods = numerator0 / static_cast<std::int64_t>(n_s);
    double inv_terms = periods >= 1 ? 1.0 / (static_cast<double>(m_r) * static_cast<double>(periods))
                                    : 0.0;
    for (std::uint32_t k = 0; k < n_s; ++k) {
        if (numerator0 - k < periods * static_cast<std::int64_t>(n_s)) {
            --periods;
            inv_terms = periods >= 1
                            ? 1.0 / (static_cast<double>(m_r) * static_cast<double>(periods))
                            : 0.0;
        }
        if (periods < 1) {
            out.m_hat[k] = 0.0;
            out.counts[k] = 0;
            continue;
        }
        double acc = 0.0;
        for (const auto& row : energies) {
            std::size_t idx = static_cast<std::size_t>(k + shift);
            for (std::int64_t r = 0; r < periods; ++r, idx += n_s) acc += row[idx];
        }
        out.m_hat[k] = acc * inv_terms;
        out.counts[k] = static_cast<std::uint32_t>(periods);
    }

    if (d > 0) {
        double acc = 0.0;
        for (const auto& row : energies)
            for (std::int32_t r = 0; r < d; ++r) acc += row[static_cast<std::size_t>(r)];
        out.noise_count = static_cast<std::uint64_t>(m_r) * static_cast<std::uint64_t>(d);
        out.m_hat_noise = acc / static_cast<double>(out.noise_count);
    }
}

SampleMoments sample_som(const std::vector<std::vector<double>>& energies, std::int32_t d,
                         const SystemConfig& cfg) {
    SampleMoments moments;
    sample_som_into(energies, d, cfg, moments);
    return moments;
}

SampleMoments sample_som(const SampleStream& stream, std::int32_t d, const SystemConfig& cfg) {
    return sample_som(stream_energies(stream), d, cfg);
}

namespace {

// One fresh block through signal + block-held taps + noise; accumulates per-k
// energy sums. Single-time marginals are all the moment statistics need, so
// taps are drawn i.i.d. Gaussian regardless of the configured time model.
void accumulate_block(const SystemConfig& cfg, const ChannelProfile& profile, Rng& rng,
                      std::vector<std::complex<double>>& tap_draw,
                      std::vector<std::vector<std::complex<double>>>& tx,
                      std::vector<double>& sum, std::vector<double>& sum_sq) {
    const std::uint32_t n_s = cfg.n_s();
    const double per_antenna_power = cfg.sigma_x2 / static_cast<double>(cfg.m_t);

    for (std::uint32_t i = 0; i < cfg.m_t; ++i) {
        auto& s = tx[i];
        for (std::uint32_t k = 0; k < cfg.n_x; ++k) s[k] = rng.complex_gaussian(per_antenna_power);
        for (std::uint32_t k = cfg.n_x; k < n_s; ++k) s[k] = 0.0;
    }
    for (std::uint32_t i = 0; i < cfg.m_t; ++i)
        for (std::uint32_t l = 0; l < cfg.n_h; ++l)
            tap_draw[static_cast<std::size_t>(i) * cfg.n_h + l] = rng.complex_gaussian(profile.pdp[l]);

    for (std::uint32_t k = 0; k < n_s; ++k) {
        std::complex<double> v(0.0, 0.0);
        const std::uint32_t umax = std::min(k, cfg.n_h - 1);
        for (std::uint32_t i = 0; i < cfg.m_t; ++i) {
            const auto* h = tap_draw.data() + static_cast<std::size_t>(i) * cfg.n_h;
            for (std::uint32_t u = 0; u <= umax; ++u) v += h[u] * tx[i][k - u];
        }
        if (cfg.sigma_n2 > 0.0) v += rng.complex_gaussian(cfg.sigma_n2);
        const double e = std::norm(v);
        sum[k] += e;
        sum_sq[k] += e * e;
    }
}

} // namespace

MomentStats empirical_moments(const SystemConfig& cfg, const ChannelProfile& profile,
                              std::uint64_t trials, std::uint64_t seed) {
    check_moment_inputs(cfg, profile);
    if (trials < 2) raise(Errc::range_error, "empirical_moments: trials must be >= 2");

    const std::uint32_t n_s = cfg.n_s();
    std::vector<double> sum(n_s, 0.0), sum_sq(n_s, 0.0);
    std::vector<std::complex<double>> tap_draw(static_cast<std::size_t>(cfg.m_t) * cfg.n_h);
    std::vector<std::vector<std::complex<double>>> tx(cfg.m_t);
    for (auto& s : tx) s.resize(n_s);

    Rng rng(seed);
    for (std::uint64_t t = 0; t < trials; ++t)
        accumulate_block(cfg, profile, rng, tap_draw, tx, sum, sum_sq);

    MomentStats stats;
    stats.trials = trials;
    stats.mean.resize(n_s);
    stats.variance.resize(n_s);
    const double n = static_cast<double>(trials);
    for (std::uint32_t k = 0; k < n_s; ++k) {
        const double mean = sum[k] / n;
        stats.mean[k] = mean;
        stats.variance[k] = (sum_sq[k] - n * mean * mean) / (n - 1.0);
    }
    return stats;
}

std::pair<double, double> variance_oracle(const SystemConfig& cfg, const ChannelProfile& profile,
                                          std::uint32_t k, std::uint64_t trials,
                                          std::uint64_t seed) {
    check_moment_inputs(cfg, profile);
    if (k >= cfg.n_s()) raise(Errc::range_error, "variance_oracle: k outside one period");
    if (trials < 2) raise(Errc::range_error, "variance_oracle: trials must be >= 2");

    const TapWindow window = tap_window(cfg, k);
    const double per_antenna_power = cfg.sigma_x2 / static_cast<double>(cfg.m_t);

    Rng rng(seed);
    double sum = 0.0, sum_sq = 0.0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        std::complex<double> v(0.0, 0.0);
        if (!window.empty) {
            for (std::uint32_t i = 0; i < cfg.m_t; ++i) {
                for (std::uint32_t l = window.lo; l <= window.hi; ++l) {
                    const auto h = rng.complex_gaussian(profile.pdp[l]);
                    const auto s = rng.complex_gaussian(per_antenna_power);
                    v += h * s;
                }
            }
        }
        if (cfg.sigma_n2 > 0.0) v += rng.complex_gaussian(cfg.sigma_n2);
        const double e = std::norm(v);
        sum += e;
        sum_sq += e * e;
    }
    const double n = static_cast<double>(trials);
    const double mean = sum / n;
    const double variance = (sum_sq - n * mean * mean) / (n - 1.0);
    return {mean, variance};
}

} // namespace somsync
