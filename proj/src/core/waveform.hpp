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

#ifndef SOMSYNC_CORE_WAVEFORM_HPP
#define SOMSYNC_CORE_WAVEFORM_HPP

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "core/params.hpp"
#include "core/rng.hpp"

namespace somsync {

enum class SignalMode { qam, gaussian };

/// Unit-average-energy QAM alphabet. Square orders use the usual odd-integer
/// grid; orders 32 and 128 use the cross constellation (grid minus corners).
struct ConstellationSpec {
    std::uint32_t order = 128;
    double unit_power_scaling = 1.0;
    std::vector<std::complex<double>> points;
};

ConstellationSpec make_qam_constellation(std::uint32_t order);

/// One ZP-OFDM block: n_x modulated samples followed by n_z exact zeros.
struct OfdmBlock {
    std::vector<std::complex<double>> samples;
    std::uint32_t antenna_index = 1;
    std::uint64_t block_index = 0;
};

/// n_x data samples from the inverse DFT of unit-power QAM symbols, scaled so
/// that E{|s[k]|^2} = sigma_x2 / m_t, then the zero pad.
OfdmBlock generate_block_qam(const SystemConfig& cfg, const ConstellationSpec& constellation,
                             Rng& rng, std::uint32_t antenna, std::uint64_t block_index);

/// n_x i.i.d. circular complex Gaussian samples of variance sigma_x2 / m_t,
/// then the zero pad. Matches the QAM mode at the second-moment level.
OfdmBlock generate_block_gaussian(const SystemConfig& cfg, Rng& rng, std::uint32_t antenna,
                                  std::uint64_t block_index);

/// Concatenates n_blocks blocks for one antenna into a contiguous stream.
std::vector<std::complex<double>> generate_tx_stream(const SystemConfig& cfg, SignalMode mode,
                                                     const ConstellationSpec* constellation,
                                                     Rng& rng, std::uint32_t antenna,
                                                     std::uint32_t n_blocks);

namespace detail {

// Unitary (1/sqrt(n)) transforms; radix-2 when n is a power of two, otherwise
// a direct O(n^2) evaluation.
void inverse_dft(std::span<const std::complex<double>> in, std::span<std::complex<double>> out);
void forward_dft(std::span<const std::complex<double>> in, std::span<std::complex<double>> out);

} // namespace detail

} // namespace somsync

#endif
