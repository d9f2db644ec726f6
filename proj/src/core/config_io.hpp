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

#ifndef SOMSYNC_CORE_CONFIG_IO_HPP
#define SOMSYNC_CORE_CONFIG_IO_HPP

#include <cstdint>
#include <string>

#include <json.hpp>

#include "core/harness.hpp"

namespace somsync {

/// Built-in defaults: 128/12 blocks, 10 exponential taps (alpha = 1/2.5244,
/// beta = 0.5), Jakes fading at 150 Hz / 1 GHz, N = 10, D = [-30, 30],
/// E_b/N0 = 15 dB, 128-QAM.
nlohmann::json default_config_json();

/// Strict parse: unknown keys are rejected, derived keys (n_s, L) are checked
/// for consistency when present, and all invariants are validated.
ExperimentSpec materialize(const nlohmann::json& doc);

/// Shape-only check (object with known keys); invariants are left to
/// materialize so overrides can repair a loaded file before validation.
void check_schema(const nlohmann::json& doc);

nlohmann::json load_config_file(const std::string& path);
nlohmann::json parse_config_text(const std::string& text);

/// Applies one "key=value" override; the value is parsed as JSON when
/// possible, else taken as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Key-sorted single-line dump used for hashing and the manifest.
std::string canonical_json(const nlohmann::json& doc);
std::uint64_t config_hash(const nlohmann::json& doc);

std::string manifest_json(const ExperimentSpec& spec, const nlohmann::json& config_doc);

} // namespace somsync

#endif
