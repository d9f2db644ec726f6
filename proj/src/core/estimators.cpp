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

#include "core/estimators.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "core/error.hpp"

namespace somsync {

std::string estimator_name(EstimatorId id) {
    switch (id) {
        case EstimatorId::som: return "som";
        case EstimatorId::wsom: return "wsom";
        case EstimatorId::tm: return "tm";
    }
    return "?";
}

EstimatorId estimator_from_name(const std::string& name) {
    if (name == "som") return EstimatorId::som;
    if (name == "wsom") return EstimatorId::wsom;
    if (name == "tm") return EstimatorId::tm;
    raise(Errc::invalid_argument, "unknown estimator '" + name + "' (som|wsom|tm)");
}

namespace {

bool better(const HypothesisCost& a, const HypothesisCost& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    if (std::abs(a.d) != std::abs(b.d)) return std::abs(a.d) < std::abs(b.d);
    return a.d < b.d;
}

Estimate finalize(EstimatorId id, std::vector<HypothesisCost> curve) {
    Estimate estimate;
    estimate.id = id;
    estimate.curve = std::move(curve);
    const HypothesisCost* best = &estimate.curve.front();
    for (const auto& h : estimate.curve)
        if (better(h, *best)) best = &h;
    estimate.d_hat = best->d;
    estimate.cost_min = best->cost;
    return estimate;
}

Estimate run_moment_search(const SampleStream& stream, const SystemConfig& cfg,
                           const MomentTable& table, bool weighted) {
    validate_config(cfg);
    if (stream.antennas() != cfg.m_r)
        raise(Errc::dimension_mismatch, "estimate: stream antenna count != m_r");
    if (table.period() != cfg.n_s())
        raise(Errc::dimension_mismatch, "estimate: moment table built for a different n_s");
    if (weighted && table.noise_weight() <= 0.0)
        raise(Errc::degenerate_weight, "estimate_wsom: all variance weights are zero");

    const auto energies = stream_energies(stream);
    const std::uint32_t n_s = cfg.n_s();
    const double sigma_n2 = cfg.sigma_n2;
    const std::vector<double>& m0 = table.m0();
    const std::vector<double>& weights = table.active_weights();

    std::vector<HypothesisCost> curve;
    curve.reserve(cfg.search_size());

    SampleMoments sm; // reused across hypotheses
    for (std::int32_t d = cfg.d_min; d <= cfg.d_max; ++d) {
        sample_som_into(energies, d, cfg, sm);
        HypothesisCost h;
        h.d = d;

        const std::uint32_t abs_d = static_cast<std::uint32_t>(d < 0 ? -d : d);

        // d <= 0 hypotheses compare against the profile advanced by |d|, the
        // index wrapped into the period; for d > 0 the reference is k itself.
        std::size_t ref = d <= 0 ? abs_d % n_s : 0;
        for (std::uint32_t k = 0; k < n_s; ++k) {
            if (sm.counts[k] != 0) {
                const double gap = std::abs(sm.m_hat[k] - m0[ref]);
                h.signal_cost += weighted ? gap / weights[ref] : gap;
                ++h.terms;
            }
            if (++ref == n_s) ref = 0;
        }
        // The noise prefix is one statistic: it enters the objective once per
        // hypothesis, not once per index.
        if (d > 0) {
            const double noise_gap = std::abs(sm.m_hat_noise - sigma_n2);
            h.noise_cost = weighted ? noise_gap / table.noise_weight() : noise_gap;
        }
        if (h.terms == 0) {
            std::ostringstream oss;
            oss << "estimate: hypothesis d=" << d << " has no complete periods for any index (L="
                << stream.length() << ", n_s=" << n_s << ")";
            raise(Errc::empty_window, oss.str());
        }
        h.cost = h.signal_cost + h.noise_cost;
        curve.push_back(h);
    }
    return finalize(weighted ? EstimatorId::wsom : EstimatorId::som, std::move(curve));
}

} // namespace

Estimate estimate_som(const SampleStream& stream, const SystemConfig& cfg,
                      const MomentTable& table) {
    return run_moment_search(stream, cfg, table, false);
}

Estimate estimate_wsom(const SampleStream& stream, const SystemConfig& cfg,
                       const MomentTable& table) {
    return run_moment_search(stream, cfg, table, true);
}

Estimate estimate_tm(const SampleStream& stream, const SystemConfig& cfg, std::uint32_t window) {
    validate_config(cfg);
    if (stream.antennas() != cfg.m_r)
        raise(Errc::dimension_mismatch, "estimate_tm: stream antenna count != m_r");
    if (window == 0) window = cfg.n_z;
    const std::size_t length = stream.length();
    if (2ull * window > length) {
        std::ostringstream oss;
        oss << "estimate_tm: window " << window << " too long for " << length << " samples";
        raise(Errc::window_too_long, oss.str());
    }

    const auto energies = stream_energies(stream);
    const std::uint32_t n_s = cfg.n_s();

    // Combined energy across antennas, then the two adjacent sliding windows
    // folded over all periods for every phase in [0, n_s).
    std::vector<double> energy(length, 0.0);
    for (const auto& row : energies)
        for (std::size_t t = 0; t < length; ++t) energy[t] += row[t];

    double total = 0.0;
    for (double e : energy) total += e;
    const double tiny = 1e-12 * (total / static_cast<double>(length)) * window + 1e-300;

    std::vector<double> ratio(n_s, 0.0);
    for (std::uint32_t phase = 0; phase < n_s; ++phase) {
        double lead = 0.0, trail = 0.0;
        for (std::size_t base = 0;; base += n_s) {
            const std::int64_t start = static_cast<std::int64_t>(base) + phase - window;
            const std::int64_t stop = static_cast<std::int64_t>(base) + phase + window; // exclusive
            if (stop > static_cast<std::int64_t>(length)) break;
            if (start < 0) continue;
            for (std::int64_t t = start; t < start + window; ++t) lead += energy[t];
            for (std::int64_t t = start + window; t < stop; ++t) trail += energy[t];
        }
        ratio[phase] = (trail + tiny) / (lead + tiny);
    }

    std::vector<HypothesisCost> curve;
    curve.reserve(cfg.search_size());
    for (std::int32_t d = cfg.d_min; d <= cfg.d_max; ++d) {
        // Under hypothesis d the data-to-gap transition sits at phase
        // (d + n_x) mod n_s.
        std::int64_t phase = (static_cast<std::int64_t>(d) + cfg.n_x) % n_s;
        if (phase < 0) phase += n_s;
        HypothesisCost h;
        h.d = d;
        h.signal_cost = ratio[static_cast<std::size_t>(phase)];
        h.cost = h.signal_cost;
        h.terms = 1;
        curve.push_back(h);
    }
    return finalize(EstimatorId::tm, std::move(curve));
}

} // namespace somsync
