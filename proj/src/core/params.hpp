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

#ifndef SOMSYNC_CORE_PARAMS_HPP
#define SOMSYNC_CORE_PARAMS_HPP

#include <cstdint>
#include <vector>

namespace somsync {

enum class CorrelationModel { block_static, jakes };

/// Block, antenna and power parameters of the ZP-OFDM link. Immutable once
/// validated; every other module consumes it by const reference.
struct SystemConfig {
    std::uint32_t n_x = 128; ///< data samples per block
    std::uint32_t n_z = 12;  ///< zero-padded samples per block
    std::uint32_t n_h = 10;  ///< channel tap count
    std::uint32_t m_t = 1;   ///< transmit antennas
    std::uint32_t m_r = 1;   ///< receive antennas
    std::uint32_t n_blocks = 10; ///< blocks in the observation window (N)
    double sigma_x2 = 1.0;   ///< total transmit sample power, linear
    double sigma_n2 = 0.0;   ///< noise power per receive sample, linear
    std::int32_t d_min = -30; ///< inclusive lower edge of the offset search set D
    std::int32_t d_max = 30;  ///< inclusive upper edge of D

    std::uint32_t n_s() const { return n_x + n_z; }
    std::size_t observation_length() const {
        return static_cast<std::size_t>(n_blocks) * n_s();
    }
    std::size_t search_size() const {
        return static_cast<std::size_t>(d_max - d_min) + 1;
    }
    bool offset_in_range(std::int32_t d) const { return d >= d_min && d <= d_max; }
};

/// Power-delay profile plus the time-selectivity model of the fading process.
struct ChannelProfile {
    std::vector<double> pdp;      ///< per-delay tap powers, size n_h
    double doppler_hz = 150.0;    ///< maximum Doppler spread f_D
    double sample_rate_hz = 1e9;  ///< receiver sampling rate f_sa
    CorrelationModel correlation_model = CorrelationModel::jakes;

    double total_power() const;
};

/// Integer timing offset in samples; positive means the receiver opened early.
struct TimingOffset {
    std::int32_t d = 0;
};

/// Throws Error on any violated invariant; returns cfg unchanged otherwise.
const SystemConfig& validate_config(const SystemConfig& cfg);

/// Profile checks that need the block geometry (pdp size vs n_h).
const ChannelProfile& validate_profile(const ChannelProfile& profile, const SystemConfig& cfg);

/// pdp[l] = alpha * exp(-beta * l), l = 0..n_h-1. No renormalization.
std::vector<double> exponential_pdp(std::uint32_t n_h, double alpha, double beta);

} // namespace somsync

#endif
