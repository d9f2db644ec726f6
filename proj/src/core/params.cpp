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

#include "core/params.hpp"

#include <cmath>
#include <sstream>

#include "core/error.hpp"

namespace somsync {

double ChannelProfile::total_power() const {
    double sum = 0.0;
    for (double p : pdp) sum += p;
    return sum;
}

const SystemConfig& validate_config(const SystemConfig& cfg) {
    auto fail = [](Errc code, const std::string& field, const std::string& what) {
        raise(code, field + ": " + what);
    };

    if (cfg.n_x < 1) fail(Errc::range_error, "n_x", "must be >= 1");
    if (cfg.n_z < 1) fail(Errc::range_error, "n_z", "must be >= 1");
    if (cfg.n_h < 1) fail(Errc::range_error, "n_h", "must be >= 1");
    if (cfg.m_t < 1) fail(Errc::range_error, "m_t", "must be >= 1");
    if (cfg.m_r < 1) fail(Errc::range_error, "m_r", "must be >= 1");
    if (cfg.n_blocks < 1) fail(Errc::range_error, "N", "must be >= 1");
    if (!(cfg.sigma_x2 > 0.0)) fail(Errc::range_error, "sigma_x2", "must be > 0");
    if (!(cfg.sigma_n2 >= 0.0)) fail(Errc::range_error, "sigma_n2", "must be >= 0");

    if (cfg.n_z < cfg.n_h) {
        std::ostringstream oss;
        oss << "zero padding must cover the channel taps (n_z=" << cfg.n_z
            << " < n_h=" << cfg.n_h << ")";
        fail(Errc::isi_violation, "n_z", oss.str());
    }

    const std::int32_t limit = static_cast<std::int32_t>(cfg.n_s()) - 1;
    if (cfg.d_min > cfg.d_max) fail(Errc::offset_range, "d_range", "lower edge exceeds upper edge");
    if (cfg.d_min < -limit || cfg.d_max > limit) {
        std::ostringstream oss;
        oss << "search set must lie within [-" << limit << ", " << limit << "], got ["
            << cfg.d_min << ", " << cfg.d_max << "]";
        fail(Errc::offset_range, "d_range", oss.str());
    }
    return cfg;
}

const ChannelProfile& validate_profile(const ChannelProfile& profile, const SystemConfig& cfg) {
    if (profile.pdp.size() != cfg.n_h) {
        std::ostringstream oss;
        oss << "pdp: expected " << cfg.n_h << " tap powers, got " << profile.pdp.size();
        raise(Errc::dimension_mismatch, oss.str());
    }
    for (std::size_t l = 0; l < profile.pdp.size(); ++l) {
        if (!(profile.pdp[l] >= 0.0)) {
            std::ostringstream oss;
            oss << "pdp[" << l << "]: tap power must be >= 0";
            raise(Errc::range_error, oss.str());
        }
    }
    if (!(profile.total_power() > 0.0)) raise(Errc::range_error, "pdp: total power must be > 0");
    if (!(profile.doppler_hz >= 0.0)) raise(Errc::range_error, "f_D: must be >= 0");
    if (!(profile.sample_rate_hz > 0.0)) raise(Errc::range_error, "f_sa: must be > 0");
    return profile;
}

std::vector<double> exponential_pdp(std::uint32_t n_h, double alpha, double beta) {
    if (n_h < 1) raise(Errc::range_error, "n_h: must be >= 1");
    if (!(alpha > 0.0)) raise(Errc::range_error, "alpha: must be > 0");
    if (!(beta >= 0.0)) raise(Errc::range_error, "beta: must be >= 0");
    std::vector<double> pdp(n_h);
    for (std::uint32_t l = 0; l < n_h; ++l) pdp[l] = alpha * std::exp(-beta * l);
    return pdp;
}

} // namespace somsync
