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

#include "core/config_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "core/error.hpp"

namespace somsync {

using nlohmann::json;

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        // SystemConfig
        "n_x", "n_z", "n_s", "n_h", "m_t", "m_r", "N", "L", "sigma_x2", "sigma_n2", "d_range",
        // ChannelProfile
        "pdp", "f_D", "f_sa", "correlation_model",
        // harness / estimation settings
        "experiment", "grid", "trials", "estimators", "seed", "ebn0_db", "signal_mode",
        "qam_order", "variance_mode", "tm_window", "pmf_support", "threads"};
    return keys;
}

[[noreturn]] void bad(const std::string& field, const std::string& what) {
    raise(Errc::parse_error, field + ": " + what);
}

std::uint32_t get_count(const json& doc, const std::string& key, std::uint32_t fallback) {
    if (!doc.contains(key)) return fallback;
    const auto& v = doc.at(key);
    if (!v.is_number_integer() && !v.is_number_unsigned()) bad(key, "expected an integer");
    const auto raw = v.get<std::int64_t>();
    if (raw < 0 || raw > 0xffffffffll) bad(key, "out of range");
    return static_cast<std::uint32_t>(raw);
}

double get_number(const json& doc, const std::string& key, double fallback) {
    if (!doc.contains(key)) return fallback;
    const auto& v = doc.at(key);
    if (!v.is_number()) bad(key, "expected a number");
    return v.get<double>();
}

} // namespace

json default_config_json() {
    json doc;
    doc["n_x"] = 128;
    doc["n_z"] = 12;
    doc["n_h"] = 10;
    doc["m_t"] = 1;
    doc["m_r"] = 1;
    doc["N"] = 10;
    doc["sigma_x2"] = 1.0;
    doc["d_range"] = json::array({-30, 30});
    doc["pdp"] = {{"alpha", 1.0 / 2.5244}, {"beta", 0.5}};
    doc["f_D"] = 150.0;
    doc["f_sa"] = 1e9;
    doc["correlation_model"] = "jakes";
    doc["ebn0_db"] = 15.0;
    doc["qam_order"] = 128;
    doc["signal_mode"] = "qam";
    doc["variance_mode"] = "oracle_corrected";
    doc["experiment"] = "snr";
    doc["trials"] = 1000;
    doc["estimators"] = json::array({"som", "wsom", "tm"});
    doc["seed"] = 1;
    return doc;
}

void check_schema(const json& doc) {
    if (!doc.is_object()) raise(Errc::parse_error, "config: expected a JSON object");
    for (const auto& item : doc.items()) {
        if (!known_keys().count(item.key())) bad(item.key(), "unknown key");
    }
}

ExperimentSpec materialize(const json& doc) {
    check_schema(doc);

    ExperimentSpec spec;
    SystemConfig& cfg = spec.cfg;
    cfg.n_x = get_count(doc, "n_x", cfg.n_x);
    cfg.n_z = get_count(doc, "n_z", cfg.n_z);
    cfg.n_h = get_count(doc, "n_h", cfg.n_h);
    cfg.m_t = get_count(doc, "m_t", cfg.m_t);
    cfg.m_r = get_count(doc, "m_r", cfg.m_r);
    cfg.n_blocks = get_count(doc, "N", cfg.n_blocks);

    if (doc.contains("n_s") && get_count(doc, "n_s", 0) != cfg.n_s())
        bad("n_s", "inconsistent with n_x + n_z");
    if (doc.contains("L") &&
        static_cast<std::size_t>(doc.at("L").get<std::uint64_t>()) != cfg.observation_length())
        bad("L", "inconsistent with N * n_s");

    cfg.sigma_x2 = get_number(doc, "sigma_x2", cfg.sigma_x2);
    if (doc.contains("sigma_n2")) {
        if (doc.contains("ebn0_db"))
            bad("sigma_n2", "give either sigma_n2 or ebn0_db, not both");
        cfg.sigma_n2 = get_number(doc, "sigma_n2", 0.0);
        spec.sigma_n2_explicit = true;
    }
    if (doc.contains("d_range")) {
        const auto& range = doc.at("d_range");
        if (!range.is_array() || range.size() != 2) bad("d_range", "expected [lo, hi]");
        cfg.d_min = range.at(0).get<std::int32_t>();
        cfg.d_max = range.at(1).get<std::int32_t>();
    }

    ChannelProfile& profile = spec.profile;
    if (doc.contains("pdp")) {
        const auto& pdp = doc.at("pdp");
        if (pdp.is_array()) {
            profile.pdp = pdp.get<std::vector<double>>();
        } else if (pdp.is_object()) {
            for (const auto& item : pdp.items())
                if (item.key() != "alpha" && item.key() != "beta")
                    bad("pdp." + item.key(), "unknown key (alpha, beta)");
            const double alpha = get_number(pdp, "alpha", 1.0 / 2.5244);
            const double beta = get_number(pdp, "beta", 0.5);
            profile.pdp = exponential_pdp(cfg.n_h, alpha, beta);
            spec.pdp_beta = beta;
        } else {
            bad("pdp", "expected an array of tap powers or {alpha, beta}");
        }
    } else {
        profile.pdp = exponential_pdp(cfg.n_h, 1.0 / 2.5244, 0.5);
    }
    profile.doppler_hz = get_number(doc, "f_D", profile.doppler_hz);
    profile.sample_rate_hz = get_number(doc, "f_sa", profile.sample_rate_hz);
    if (doc.contains("correlation_model")) {
        const auto name = doc.at("correlation_model").get<std::string>();
        if (name == "jakes")
            profile.correlation_model = CorrelationModel::jakes;
        else if (name == "block_static")
            profile.correlation_model = CorrelationModel::block_static;
        else
            bad("correlation_model", "expected 'jakes' or 'block_static'");
    }

    spec.ebn0_db = get_number(doc, "ebn0_db", spec.ebn0_db);
    spec.qam_order = get_count(doc, "qam_order", spec.qam_order);
    if (doc.contains("signal_mode")) {
        const auto name = doc.at("signal_mode").get<std::string>();
        if (name == "qam")
            spec.signal_mode = SignalMode::qam;
        else if (name == "gaussian")
            spec.signal_mode = SignalMode::gaussian;
        else
            bad("signal_mode", "expected 'qam' or 'gaussian'");
    }
    if (doc.contains("variance_mode")) {
        const auto name = doc.at("variance_mode").get<std::string>();
        if (name == "oracle_corrected")
            spec.variance_mode = VarianceMode::oracle_corrected;
        else if (name == "paper_formula")
            spec.variance_mode = VarianceMode::paper_formula;
        else
            bad("variance_mode", "expected 'oracle_corrected' or 'paper_formula'");
    }
    spec.tm_window = get_count(doc, "tm_window", spec.tm_window);
    spec.pmf_support = get_count(doc, "pmf_support", spec.pmf_support);
    spec.threads = get_count(doc, "threads", spec.threads);

    if (doc.contains("experiment")) spec.experiment = doc.at("experiment").get<std::string>();
    spec.sweep = sweep_for_experiment(spec.experiment);
    if (doc.contains("grid")) {
        if (!doc.at("grid").is_array() || doc.at("grid").empty())
            bad("grid", "expected a nonempty array of numbers");
        spec.grid = doc.at("grid").get<std::vector<double>>();
    } else {
        spec.grid = default_grid(spec.experiment);
    }
    spec.trials = get_count(doc, "trials", spec.trials);
    if (doc.contains("estimators")) {
        spec.estimators.clear();
        for (const auto& name : doc.at("estimators"))
            spec.estimators.push_back(estimator_from_name(name.get<std::string>()));
        if (spec.estimators.empty()) bad("estimators", "must name at least one estimator");
    }
    if (doc.contains("seed")) spec.seed = doc.at("seed").get<std::uint64_t>();

    validate_config(cfg);
    validate_profile(profile, cfg);
    return spec;
}

json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::io_error, "cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

json parse_config_text(const std::string& text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) raise(Errc::parse_error, "config: invalid JSON");
    return doc;
}

void apply_override(json& doc, const std::string& assignment) {
    const auto pos = assignment.find('=');
    if (pos == std::string::npos || pos == 0)
        raise(Errc::invalid_argument, "override must look like key=value: " + assignment);
    const std::string key = assignment.substr(0, pos);
    const std::string value = assignment.substr(pos + 1);
    if (!known_keys().count(key)) raise(Errc::parse_error, key + ": unknown key");
    json parsed = json::parse(value, nullptr, false);
    if (parsed.is_discarded()) parsed = value; // bare strings stay strings
    doc[key] = parsed;
}

std::string canonical_json(const json& doc) {
    return doc.dump(); // nlohmann objects iterate key-sorted
}

std::uint64_t config_hash(const json& doc) {
    // FNV-1a over the canonical dump.
    const std::string text = canonical_json(doc);
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string manifest_json(const ExperimentSpec& spec, const json& config_doc) {
    json manifest;
    manifest["schema"] = "somsync_manifest_v1";
    manifest["experiment"] = spec.experiment;
    manifest["sweep_var"] = sweep_variable_name(spec.sweep);
    manifest["grid"] = spec.grid;
    manifest["trials"] = spec.trials;
    manifest["seed"] = spec.seed;
    json estimators = json::array();
    for (EstimatorId id : spec.estimators) estimators.push_back(estimator_name(id));
    manifest["estimators"] = estimators;
    manifest["config"] = config_doc;
    manifest["config_hash"] = config_hash(config_doc);
#ifdef SOMSYNC_BUILD_ID
    manifest["build"] = SOMSYNC_BUILD_ID;
#else
    manifest["build"] = "unknown";
#endif
    return manifest.dump(2) + "\n";
}

} // namespace somsync
