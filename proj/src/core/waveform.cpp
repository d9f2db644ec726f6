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

#include "core/waveform.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "core/error.hpp"

namespace somsync {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 Cooley-Tukey, sign = +1 for the inverse kernel.
void fft_pow2(std::vector<std::complex<double>>& a, int sign) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(angle), std::sin(angle));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

void dft_direct(std::span<const std::complex<double>> in, std::span<std::complex<double>> out,
                int sign) {
    const std::size_t n = in.size();
    for (std::size_t t = 0; t < n; ++t) {
        std::complex<double> acc(0.0, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            const double angle =
                sign * 2.0 * std::numbers::pi * static_cast<double>(k * t % n) / static_cast<double>(n);
            acc += in[k] * std::complex<double>(std::cos(angle), std::sin(angle));
        }
        out[t] = acc;
    }
}

void transform(std::span<const std::complex<double>> in, std::span<std::complex<double>> out,
               int sign) {
    const std::size_t n = in.size();
    if (out.size() != n) raise(Errc::dimension_mismatch, "dft: buffer sizes differ");
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    if (is_power_of_two(n)) {
        std::vector<std::complex<double>> work(in.begin(), in.end());
        fft_pow2(work, sign);
        for (std::size_t i = 0; i < n; ++i) out[i] = work[i] * scale;
    } else {
        dft_direct(in, out, sign);
        for (auto& v : out) v *= scale;
    }
}

} // namespace

namespace detail {

void inverse_dft(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) {
    transform(in, out, +1);
}

void forward_dft(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) {
    transform(in, out, -1);
}

} // namespace detail

ConstellationSpec make_qam_constellation(std::uint32_t order) {
    std::vector<std::complex<double>> points;
    auto square_grid = [&](std::uint32_t side) {
        for (std::uint32_t iy = 0; iy < side; ++iy)
            for (std::uint32_t ix = 0; ix < side; ++ix)
                points.emplace_back(2.0 * ix + 1.0 - side, 2.0 * iy + 1.0 - side);
    };
    switch (order) {
        case 4: square_grid(2); break;
        case 16: square_grid(4); break;
        case 64: square_grid(8); break;
        case 256: square_grid(16); break;
        case 32:
        case 128: {
            // Cross constellation: odd-integer grid with the corner blocks removed.
            const std::uint32_t side = (order == 32) ? 6 : 12;
            const double corner = (order == 32) ? 1.0 : 2.0;
            const double edge = static_cast<double>(side) - 1.0;
            for (std::uint32_t iy = 0; iy < side; ++iy) {
                for (std::uint32_t ix = 0; ix < side; ++ix) {
                    const double re = 2.0 * ix + 1.0 - side;
                    const double im = 2.0 * iy + 1.0 - side;
                    if (std::abs(re) > edge - 2.0 * corner && std::abs(im) > edge - 2.0 * corner)
                        continue;
                    points.emplace_back(re, im);
                }
            }
            break;
        }
        default: {
            std::ostringstream oss;
            oss << "unsupported QAM order " << order
                << " (supported: 4, 16, 32, 64, 128, 256)";
            raise(Errc::unsupported_order, oss.str());
        }
    }

    double energy = 0.0;
    for (const auto& p : points) energy += std::norm(p);
    energy /= static_cast<double>(points.size());
    const double scaling = 1.0 / std::sqrt(energy);
    for (auto& p : points) p *= scaling;

    ConstellationSpec spec;
    spec.order = order;
    spec.unit_power_scaling = scaling;
    spec.points = std::move(points);
    return spec;
}

OfdmBlock generate_block_qam(const SystemConfig& cfg, const ConstellationSpec& constellation,
                             Rng& rng, std::uint32_t antenna, std::uint64_t block_index) {
    if (constellation.points.size() != constellation.order)
        raise(Errc::unsupported_order, "constellation not initialized");

    const std::uint32_t n_x = cfg.n_x;
    std::vector<std::complex<double>> symbols(n_x);
    for (auto& s : symbols) {
        const auto idx = static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(constellation.order) - 1));
        s = constellation.points[idx];
    }

    OfdmBlock block;
    block.antenna_index = antenna;
    block.block_index = block_index;
    block.samples.assign(cfg.n_s(), std::complex<double>(0.0, 0.0));

    std::span<std::complex<double>> data(block.samples.data(), n_x);
    detail::inverse_dft(symbols, data);

    const double amp = std::sqrt(cfg.sigma_x2 / static_cast<double>(cfg.m_t));
    for (std::uint32_t k = 0; k < n_x; ++k) block.samples[k] *= amp;
    return block;
}

OfdmBlock generate_block_gaussian(const SystemConfig& cfg, Rng& rng, std::uint32_t antenna,
                                  std::uint64_t block_index) {
    OfdmBlock block;
    block.antenna_index = antenna;
    block.block_index = block_index;
    block.samples.assign(cfg.n_s(), std::complex<double>(0.0, 0.0));
    const double variance = cfg.sigma_x2 / static_cast<double>(cfg.m_t);
    for (std::uint32_t k = 0; k < cfg.n_x; ++k) block.samples[k] = rng.complex_gaussian(variance);
    return block;
}

std::vector<std::complex<double>> generate_tx_stream(const SystemConfig& cfg, SignalMode mode,
                                                     const ConstellationSpec* constellation,
                                                     Rng& rng, std::uint32_t antenna,
                                                     std::uint32_t n_blocks) {
    std::vector<std::complex<double>> stream;
    stream.reserve(static_cast<std::size_t>(n_blocks) * cfg.n_s());
    for (std::uint32_t n = 0; n < n_blocks; ++n) {
        OfdmBlock block = (mode == SignalMode::qam)
                              ? generate_block_qam(cfg, *constellation, rng, antenna, n)
                              : generate_block_gaussian(cfg, rng, antenna, n);
        stream.insert(stream.end(), block.samples.begin(), block.samples.end());
    }
    return stream;
}

} // namespace somsync
