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

#ifndef SOMSYNC_CORE_CHANNEL_HPP
#define SOMSYNC_CORE_CHANNEL_HPP

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "core/params.hpp"
#include "core/rng.hpp"

namespace somsync {

/// Time-varying taps h[k, l] for every (rx, tx) antenna pair. Storage is one
/// row per pair, laid out [time * n_h + delay].
struct TapProcess {
    std::vector<std::vector<std::complex<double>>> taps; // taps[j * m_t + i]
    std::uint32_t m_r = 1;
    std::uint32_t m_t = 1;
    std::uint32_t n_h = 1;
    std::size_t span = 0;

    const std::complex<double>* pair(std::uint32_t j, std::uint32_t i) const {
        return taps[static_cast<std::size_t>(j) * m_t + i].data();
    }
};

/// Observation window of L samples per receive antenna plus ground truth.
struct SampleStream {
    std::vector<std::vector<std::complex<double>>> y; // y[j][0..L-1]
    std::int32_t true_d = 0;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;

    std::size_t length() const { return y.empty() ? 0 : y.front().size(); }
    std::uint32_t antennas() const { return static_cast<std::uint32_t>(y.size()); }
};

/// Zero-mean circular Gaussian taps with per-delay power pdp[l]. jakes mode
/// synthesizes a stationary process with autocorrelation J0(2 pi f_D m / f_sa)
/// by a sum of sinusoids; block_static holds taps constant within each block
/// and redraws independently per block.
TapProcess draw_taps(const ChannelProfile& profile, const SystemConfig& cfg, Rng& rng,
                     std::size_t span);

/// Noiseless receive vectors v_j[k] = sum_i sum_u h_ji[k,u] s_i[k-u]; the
/// causal convolution restarts naturally at block boundaries because the zero
/// pad absorbs each block's tail (n_z >= n_h).
std::vector<std::vector<std::complex<double>>> apply_channel(
    const std::vector<std::vector<std::complex<double>>>& tx, const TapProcess& taps,
    const SystemConfig& cfg);

/// Adds i.i.d. circular complex Gaussian noise of variance sigma_n2 in place.
void add_noise(std::vector<std::vector<std::complex<double>>>& vectors, double sigma_n2, Rng& rng);

/// Builds the receiver's L-sample window for integer offset d. d > 0 prepends
/// d environment-noise samples; d <= 0 drops the first |d| channel samples.
/// Noise is added over the whole window afterwards.
SampleStream inject_offset(const std::vector<std::vector<std::complex<double>>>& noiseless,
                           TimingOffset offset, double sigma_n2, const SystemConfig& cfg,
                           Rng& rng);

/// Binary dump (little-endian doubles, interleaved re/im per antenna) used
/// for cross-implementation golden tests.
void save_stream(const SampleStream& stream, const std::string& path);
SampleStream load_stream(const std::string& path);

} // namespace somsync

#endif
