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

#ifndef SOMSYNC_CORE_ESTIMATORS_HPP
#define SOMSYNC_CORE_ESTIMATORS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "core/channel.hpp"
#include "core/moments.hpp"
#include "core/params.hpp"

namespace somsync {

enum class EstimatorId { som, wsom, tm };

std::string estimator_name(EstimatorId id);
EstimatorId estimator_from_name(const std::string& name);

/// Objective value for one candidate offset, split into the residual sum over
/// sample indices and the noise-prefix contribution (d > 0 only).
struct HypothesisCost {
    std::int32_t d = 0;
    double signal_cost = 0.0;
    double noise_cost = 0.0;
    double cost = 0.0;
    std::uint32_t terms = 0; ///< sample indices with at least one complete period
};

struct Estimate {
    EstimatorId id = EstimatorId::som;
    std::int32_t d_hat = 0;
    double cost_min = 0.0;
    std::vector<HypothesisCost> curve; ///< one entry per d in D, ascending d
};

/// Moment-matching search with unit weights: for each d in D, sums the
/// absolute gaps between sample moments and the periodic M0 profile (plus the
/// noise-prefix gap once per included index when d > 0) and returns the
/// minimizer. Ties go to the smaller |d|, then the smaller d.
Estimate estimate_som(const SampleStream& stream, const SystemConfig& cfg,
                      const MomentTable& table);

/// Same search with every gap divided by the matching variance weight.
Estimate estimate_wsom(const SampleStream& stream, const SystemConfig& cfg,
                       const MomentTable& table);

/// Sliding-window energy-jump baseline: for each candidate offset, the cost is
/// the trailing/leading window energy ratio at the phase where the data-to-gap
/// transition would sit, accumulated over all periods and antennas.
/// window = 0 selects the default length n_z.
Estimate estimate_tm(const SampleStream& stream, const SystemConfig& cfg, std::uint32_t window);

} // namespace somsync

#endif
