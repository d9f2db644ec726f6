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

#include "core/channel.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <numbers>
#include <sstream>

#include "core/error.hpp"

namespace somsync {

namespace {

constexpr std::uint32_t kJakesSinusoids = 64;

static_assert(std::endian::native == std::endian::little,
              "stream dump format is little-endian; byte swapping not implemented");

void synthesize_jakes_tap(std::vector<std::complex<double>>& column, double tap_power,
                          double omega_max, Rng& rng) {
    const double amp = std::sqrt(tap_power / static_cast<double>(kJakesSinusoids));
    for (std::uint32_t m = 0; m < kJakesSinusoids; ++m) {
        const double arrival = 2.0 * std::numbers::pi * rng.uniform();
        const double phase = 2.0 * std::numbers::pi * rng.uniform();
        const double omega = omega_max * std::cos(arrival);
        std::complex<double> phasor = std::polar(amp, phase);
        const std::complex<double> step = std::polar(1.0, omega);
        for (auto& h : column) {
            h += phasor;
            phasor *= step;
        }
    }
}

} // namespace

TapProcess draw_taps(const ChannelProfile& profile, const SystemConfig& cfg, Rng& rng,
                     std::size_t span) {
    validate_profile(profile, cfg);
    if (span == 0) raise(Errc::range_error, "draw_taps: span must be >= 1");

    TapProcess process;
    process.m_r = cfg.m_r;
    process.m_t = cfg.m_t;
    process.n_h = cfg.n_h;
    process.span = span;
    process.taps.resize(static_cast<std::size_t>(cfg.m_r) * cfg.m_t);

    const std::uint32_t n_s = cfg.n_s();
    std::vector<std::complex<double>> column(span);

    for (auto& row : process.taps) {
        row.assign(span * cfg.n_h, std::complex<double>(0.0, 0.0));
        for (std::uint32_t l = 0; l < cfg.n_h; ++l) {
            if (profile.correlation_model == CorrelationModel::jakes) {
                std::fill(column.begin(), column.end(), std::complex<double>(0.0, 0.0));
                const double omega_max =
                    2.0 * std::numbers::pi * profile.doppler_hz / profile.sample_rate_hz;
                synthesize_jakes_tap(column, profile.pdp[l], omega_max, rng);
                for (std::size_t k = 0; k < span; ++k) row[k * cfg.n_h + l] = column[k];
            } else {
                for (std::size_t k = 0; k < span; k += n_s) {
                    const std::complex<double> h = rng.complex_gaussian(profile.pdp[l]);
                    const std::size_t end = std::min(span, k + n_s);
                    for (std::size_t t = k; t < end; ++t) row[t * cfg.n_h + l] = h;
                }
            }
        }
    }
    return process;
}

std::vector<std::vector<std::complex<double>>> apply_channel(
    const std::vector<std::vector<std::complex<double>>>& tx, const TapProcess& taps,
    const SystemConfig& cfg) {
    if (tx.size() != cfg.m_t) raise(Errc::dimension_mismatch, "apply_channel: tx antenna count");
    if (taps.m_t != cfg.m_t || taps.m_r != cfg.m_r || taps.n_h != cfg.n_h)
        raise(Errc::dimension_mismatch, "apply_channel: tap process shape");
    const std::size_t span = tx.front().size();
    for (const auto& s : tx)
        if (s.size() != span) raise(Errc::dimension_mismatch, "apply_channel: tx lengths differ");
    if (taps.span < span) raise(Errc::dimension_mismatch, "apply_channel: tap span too short");

    std::vector<std::vector<std::complex<double>>> rx(cfg.m_r);
    const std::uint32_t n_h = cfg.n_h;
    for (std::uint32_t j = 0; j < cfg.m_r; ++j) {
        auto& out = rx[j];
        out.assign(span, std::complex<double>(0.0, 0.0));
        for (std::uint32_t i = 0; i < cfg.m_t; ++i) {
            const std::complex<double>* h = taps.pair(j, i);
            const std::complex<double>* s = tx[i].data();
            for (std::size_t k = 0; k < span; ++k) {
                const std::uint32_t umax = static_cast<std::uint32_t>(std::min<std::size_t>(k, n_h - 1));
                std::complex<double> acc(0.0, 0.0);
                const std::complex<double>* hk = h + k * n_h;
                for (std::uint32_t u = 0; u <= umax; ++u) acc += hk[u] * s[k - u];
                out[k] += acc;
            }
        }
    }
    return rx;
}

void add_noise(std::vector<std::vector<std::complex<double>>>& vectors, double sigma_n2, Rng& rng) {
    if (sigma_n2 < 0.0) raise(Errc::range_error, "sigma_n2: must be >= 0");
    if (sigma_n2 == 0.0) return;
    for (auto& v : vectors)
        for (auto& sample : v) sample += rng.complex_gaussian(sigma_n2);
}

SampleStream inject_offset(const std::vector<std::vector<std::complex<double>>>& noiseless,
                           TimingOffset offset, double sigma_n2, const SystemConfig& cfg,
                           Rng& rng) {
    const std::int32_t d = offset.d;
    if (!cfg.offset_in_range(d)) {
        std::ostringstream oss;
        oss << "inject_offset: d=" << d << " outside [" << cfg.d_min << ", " << cfg.d_max << "]";
        raise(Errc::offset_range, oss.str());
    }
    if (noiseless.size() != cfg.m_r)
        raise(Errc::dimension_mismatch, "inject_offset: antenna count");

    const std::size_t window = cfg.observation_length();
    const std::size_t skip = d <= 0 ? static_cast<std::size_t>(-static_cast<std::int64_t>(d)) : 0;
    const std::size_t prefix = d > 0 ? static_cast<std::size_t>(d) : 0;
    const std::size_t needed = window - prefix + skip;
    for (const auto& v : noiseless) {
        if (v.size() < needed) {
            std::ostringstream oss;
            oss << "inject_offset: need " << needed << " channel samples, got " << v.size();
            raise(Errc::dimension_mismatch, oss.str());
        }
    }

    SampleStream stream;
    stream.true_d = d;
    stream.y.resize(cfg.m_r);
    for (std::uint32_t j = 0; j < cfg.m_r; ++j) {
        auto& out = stream.y[j];
        out.assign(window, std::complex<double>(0.0, 0.0));
        const auto& src = noiseless[j];
        for (std::size_t t = prefix; t < window; ++t) out[t] = src[t - prefix + skip];
    }
    add_noise(stream.y, sigma_n2, rng);
    return stream;
}

namespace {

constexpr char kStreamMagic[8] = {'S', 'O', 'M', 'S', 'Y', 'N', 'C', '1'};

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

template <typename T>
void write_pod(std::FILE* f, const T& value) {
    if (std::fwrite(&value, sizeof(T), 1, f) != 1)
        raise(Errc::io_error, "stream dump: short write");
}

template <typename T>
void read_pod(std::FILE* f, T& value) {
    if (std::fread(&value, sizeof(T), 1, f) != 1)
        raise(Errc::io_error, "stream dump: short read");
}

} // namespace

void save_stream(const SampleStream& stream, const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) raise(Errc::io_error, "cannot open for writing: " + path);

    const std::uint64_t length = stream.length();
    std::fwrite(kStreamMagic, 1, sizeof(kStreamMagic), f.get());
    write_pod(f.get(), std::uint32_t{1}); // format version
    write_pod(f.get(), stream.antennas());
    write_pod(f.get(), length);
    write_pod(f.get(), stream.seed);
    write_pod(f.get(), stream.true_d);
    write_pod(f.get(), std::uint32_t{0}); // reserved

    std::vector<double> interleaved(2 * length);
    for (const auto& antenna : stream.y) {
        for (std::size_t t = 0; t < length; ++t) {
            interleaved[2 * t] = antenna[t].real();
            interleaved[2 * t + 1] = antenna[t].imag();
        }
        if (std::fwrite(interleaved.data(), sizeof(double), interleaved.size(), f.get()) !=
            interleaved.size())
            raise(Errc::io_error, "stream dump: short write");
    }
}

SampleStream load_stream(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) raise(Errc::io_error, "cannot open for reading: " + path);

    char magic[8];
    if (std::fread(magic, 1, sizeof(magic), f.get()) != sizeof(magic) ||
        std::memcmp(magic, kStreamMagic, sizeof(magic)) != 0)
        raise(Errc::parse_error, "stream dump: bad magic");

    std::uint32_t version = 0, antennas = 0, reserved = 0;
    std::uint64_t length = 0;
    SampleStream stream;
    read_pod(f.get(), version);
    if (version != 1) raise(Errc::parse_error, "stream dump: unsupported version");
    read_pod(f.get(), antennas);
    read_pod(f.get(), length);
    read_pod(f.get(), stream.seed);
    read_pod(f.get(), stream.true_d);
    read_pod(f.get(), reserved);
    if (antennas == 0 || length == 0) raise(Errc::parse_error, "stream dump: empty stream");

    stream.y.resize(antennas);
    std::vector<double> interleaved(2 * length);
    for (auto& antenna : stream.y) {
        if (std::fread(interleaved.data(), sizeof(double), interleaved.size(), f.get()) !=
            interleaved.size())
            raise(Errc::io_error, "stream dump: truncated data");
        antenna.resize(length);
        for (std::size_t t = 0; t < length; ++t)
            antenna[t] = {interleaved[2 * t], interleaved[2 * t + 1]};
    }
    return stream;
}

} // namespace somsync
