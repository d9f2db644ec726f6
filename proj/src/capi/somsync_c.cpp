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

#include "somsync/somsync.h"

#include <cstdio>
#include <cstring>
#include <string>

#include "core/config_io.hpp"
#include "core/error.hpp"
#include "core/estimators.hpp"
#include "core/harness.hpp"
#include "core/moments.hpp"

namespace {

using namespace somsync;

thread_local std::string g_last_error = "ok";

somsync_status to_status(Errc code) { return static_cast<somsync_status>(static_cast<int>(code)); }

template <typename Fn>
somsync_status guarded(Fn&& fn) {
    try {
        fn();
        return SOMSYNC_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return to_status(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return SOMSYNC_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return SOMSYNC_ERR_INTERNAL;
    }
}

somsync_status require(bool ok, const char* what) {
    if (ok) return SOMSYNC_OK;
    g_last_error = what;
    return SOMSYNC_ERR_INVALID_ARGUMENT;
}

} // namespace

struct somsync_config {
    nlohmann::json doc;
    // Materialized lazily on every use so overrides never go stale.
    ExperimentSpec materialized() const { return materialize(doc); }
    PointContext point() const { return make_single_point(materialized()); }
};

struct somsync_table {
    MomentTable table;
    SystemConfig cfg;
    ChannelProfile profile;
};

struct somsync_stream {
    SampleStream stream;
};

extern "C" {

const char* somsync_version(void) {
#ifdef SOMSYNC_VERSION
    return SOMSYNC_VERSION;
#else
    return "0.0.0";
#endif
}

const char* somsync_last_error(void) { return g_last_error.c_str(); }

somsync_status somsync_config_create(somsync_config** out) {
    if (auto s = require(out != nullptr, "out must not be NULL")) return s;
    return guarded([&] { *out = new somsync_config{default_config_json()}; });
}

somsync_status somsync_config_load(const char* path, somsync_config** out) {
    if (auto s = require(path && out, "path/out must not be NULL")) return s;
    return guarded([&] {
        nlohmann::json doc = load_config_file(path);
        check_schema(doc); // invariants wait until overrides have been applied
        nlohmann::json merged = default_config_json();
        merged.update(doc);
        if (doc.contains("sigma_n2") && !doc.contains("ebn0_db")) merged.erase("ebn0_db");
        *out = new somsync_config{std::move(merged)};
    });
}

somsync_status somsync_config_parse(const char* json_text, somsync_config** out) {
    if (auto s = require(json_text && out, "json_text/out must not be NULL")) return s;
    return guarded([&] {
        nlohmann::json doc = parse_config_text(json_text);
        check_schema(doc);
        nlohmann::json merged = default_config_json();
        merged.update(doc);
        if (doc.contains("sigma_n2") && !doc.contains("ebn0_db")) merged.erase("ebn0_db");
        *out = new somsync_config{std::move(merged)};
    });
}

somsync_status somsync_config_set(somsync_config* config, const char* assignment) {
    if (auto s = require(config && assignment, "config/assignment must not be NULL")) return s;
    return guarded([&] {
        apply_override(config->doc, assignment);
        const std::string key(assignment, std::strcspn(assignment, "="));
        if (key == "sigma_n2") config->doc.erase("ebn0_db");
        if (key == "ebn0_db") config->doc.erase("sigma_n2");
    });
}

somsync_status somsync_config_validate(const somsync_config* config) {
    if (auto s = require(config != nullptr, "config must not be NULL")) return s;
    return guarded([&] { config->materialized(); });
}

somsync_status somsync_config_get_int(const somsync_config* config, const char* key,
                                      int64_t* out) {
    if (auto s = require(config && key && out, "arguments must not be NULL")) return s;
    return guarded([&] {
        const ExperimentSpec spec = config->materialized();
        const SystemConfig& cfg = spec.cfg;
        const std::string k(key);
        if (k == "n_x") *out = cfg.n_x;
        else if (k == "n_z") *out = cfg.n_z;
        else if (k == "n_s") *out = cfg.n_s();
        else if (k == "n_h") *out = cfg.n_h;
        else if (k == "m_t") *out = cfg.m_t;
        else if (k == "m_r") *out = cfg.m_r;
        else if (k == "N") *out = cfg.n_blocks;
        else if (k == "L") *out = static_cast<int64_t>(cfg.observation_length());
        else if (k == "d_min") *out = cfg.d_min;
        else if (k == "d_max") *out = cfg.d_max;
        else raise(Errc::invalid_argument, "unknown integer key '" + k + "'");
    });
}

somsync_status somsync_config_get_double(const somsync_config* config, const char* key,
                                         double* out) {
    if (auto s = require(config && key && out, "arguments must not be NULL")) return s;
    return guarded([&] {
        const ExperimentSpec spec = config->materialized();
        const std::string k(key);
        if (k == "sigma_x2") *out = spec.cfg.sigma_x2;
        else if (k == "sigma_n2") *out = make_single_point(spec).cfg.sigma_n2;
        else if (k == "f_D") *out = spec.profile.doppler_hz;
        else if (k == "f_sa") *out = spec.profile.sample_rate_hz;
        else if (k == "ebn0_db") *out = spec.ebn0_db;
        else if (k == "p_h") *out = spec.profile.total_power();
        else raise(Errc::invalid_argument, "unknown double key '" + k + "'");
    });
}

somsync_status somsync_config_dump(const somsync_config* config, char** out) {
    if (auto s = require(config && out, "config/out must not be NULL")) return s;
    return guarded([&] {
        const std::string text = canonical_json(config->doc);
        char* buffer = new char[text.size() + 1];
        std::memcpy(buffer, text.c_str(), text.size() + 1);
        *out = buffer;
    });
}

void somsync_config_destroy(somsync_config* config) { delete config; }

void somsync_string_free(char* text) { delete[] text; }

somsync_status somsync_table_create(const somsync_config* config, int variance_mode,
                                    somsync_table** out) {
    if (auto s = require(config && out, "config/out must not be NULL")) return s;
    if (auto s = require(variance_mode == SOMSYNC_VARIANCE_PAPER_FORMULA ||
                             variance_mode == SOMSYNC_VARIANCE_ORACLE_CORRECTED,
                         "variance_mode out of range"))
        return s;
    return guarded([&] {
        const PointContext point = config->point();
        const VarianceMode mode = variance_mode == SOMSYNC_VARIANCE_PAPER_FORMULA
                                      ? VarianceMode::paper_formula
                                      : VarianceMode::oracle_corrected;
        *out = new somsync_table{build_moment_table(point.cfg, point.channel_profile, mode),
                                 point.cfg, point.channel_profile};
    });
}

somsync_status somsync_table_period(const somsync_table* table, uint32_t* n_s) {
    if (auto s = require(table && n_s, "table/n_s must not be NULL")) return s;
    *n_s = table->table.period();
    return SOMSYNC_OK;
}

somsync_status somsync_table_values(const somsync_table* table, double* m0, double* f_paper,
                                    double* f_oracle, double* f_noise_paper,
                                    double* f_noise_oracle) {
    if (auto s = require(table != nullptr, "table must not be NULL")) return s;
    const auto n_s = table->table.period();
    if (m0) std::memcpy(m0, table->table.m0().data(), n_s * sizeof(double));
    if (f_paper) std::memcpy(f_paper, table->table.f_paper().data(), n_s * sizeof(double));
    if (f_oracle) std::memcpy(f_oracle, table->table.f_oracle().data(), n_s * sizeof(double));
    if (f_noise_paper) *f_noise_paper = table->table.f_noise_paper();
    if (f_noise_oracle) *f_noise_oracle = table->table.f_noise_oracle();
    return SOMSYNC_OK;
}

somsync_status somsync_table_export_csv(const somsync_table* table, const char* path,
                                        uint64_t empirical_trials, uint64_t seed) {
    if (auto s = require(table && path, "table/path must not be NULL")) return s;
    return guarded([&] {
        MomentStats stats;
        if (empirical_trials > 0)
            stats = empirical_moments(table->cfg, table->profile, empirical_trials, seed);

        std::FILE* f = std::fopen(path, "wb");
        if (!f) raise(Errc::io_error, std::string("cannot open for writing: ") + path);
        std::fprintf(f, "# somsync_moments_v1\n");
        std::fprintf(f, "k,m0,f_paper,f_oracle%s\n", empirical_trials > 0 ? ",emp_m0,emp_var" : "");
        const auto& t = table->table;
        for (std::uint32_t k = 0; k < t.period(); ++k) {
            std::fprintf(f, "%u,%.12g,%.12g,%.12g", k, t.m0()[k], t.f_paper()[k], t.f_oracle()[k]);
            if (empirical_trials > 0)
                std::fprintf(f, ",%.12g,%.12g", stats.mean[k], stats.variance[k]);
            std::fputc('\n', f);
        }
        std::fclose(f);
    });
}

void somsync_table_destroy(somsync_table* table) { delete table; }

somsync_status somsync_stream_simulate(const somsync_config* config, int32_t true_d, uint64_t seed,
                                       somsync_stream** out) {
    if (auto s = require(config && out, "config/out must not be NULL")) return s;
    return guarded([&] {
        const PointContext point = config->point();
        const SystemConfig& cfg = point.cfg;
        if (!cfg.offset_in_range(true_d))
            raise(Errc::offset_range, "true_d outside the configured search set");

        Rng rng(seed);
        std::optional<ConstellationSpec> constellation;
        if (point.signal_mode == SignalMode::qam)
            constellation = make_qam_constellation(point.qam_order);
        std::vector<std::vector<std::complex<double>>> tx(cfg.m_t);
        for (std::uint32_t i = 0; i < cfg.m_t; ++i)
            tx[i] = generate_tx_stream(cfg, point.signal_mode,
                                       constellation ? &*constellation : nullptr, rng, i + 1,
                                       cfg.n_blocks + 1);
        const TapProcess taps = draw_taps(point.channel_profile, cfg, rng, tx.front().size());
        const auto noiseless = apply_channel(tx, taps, cfg);
        SampleStream stream = inject_offset(noiseless, TimingOffset{true_d}, cfg.sigma_n2, cfg, rng);
        stream.seed = seed;
        stream.config_hash = config_hash(config->doc);
        *out = new somsync_stream{std::move(stream)};
    });
}

somsync_status somsync_stream_save(const somsync_stream* stream, const char* path) {
    if (auto s = require(stream && path, "stream/path must not be NULL")) return s;
    return guarded([&] { save_stream(stream->stream, path); });
}

somsync_status somsync_stream_load(const char* path, somsync_stream** out) {
    if (auto s = require(path && out, "path/out must not be NULL")) return s;
    return guarded([&] { *out = new somsync_stream{load_stream(path)}; });
}

somsync_status somsync_stream_info(const somsync_stream* stream, uint64_t* length,
                                   uint32_t* antennas, int32_t* true_d, uint64_t* seed) {
    if (auto s = require(stream != nullptr, "stream must not be NULL")) return s;
    if (length) *length = stream->stream.length();
    if (antennas) *antennas = stream->stream.antennas();
    if (true_d) *true_d = stream->stream.true_d;
    if (seed) *seed = stream->stream.seed;
    return SOMSYNC_OK;
}

somsync_status somsync_stream_samples(const somsync_stream* stream, uint32_t antenna,
                                      double* interleaved) {
    if (auto s = require(stream && interleaved, "stream/interleaved must not be NULL")) return s;
    if (auto s = require(antenna < stream->stream.antennas(), "antenna index out of range"))
        return s;
    const auto& y = stream->stream.y[antenna];
    for (std::size_t t = 0; t < y.size(); ++t) {
        interleaved[2 * t] = y[t].real();
        interleaved[2 * t + 1] = y[t].imag();
    }
    return SOMSYNC_OK;
}

void somsync_stream_destroy(somsync_stream* stream) { delete stream; }

somsync_status somsync_estimate(const somsync_stream* stream, const somsync_config* config,
                                const somsync_table* table, int estimator, int32_t* d_hat,
                                double* cost_min, int32_t* curve_d, double* curve_cost,
                                size_t curve_capacity, size_t* curve_len) {
    if (auto s = require(stream && config && d_hat, "stream/config/d_hat must not be NULL"))
        return s;
    return guarded([&] {
        const PointContext point = config->point();
        Estimate estimate;
        switch (estimator) {
            case SOMSYNC_ESTIMATOR_SOM:
            case SOMSYNC_ESTIMATOR_WSOM: {
                if (!table) raise(Errc::invalid_argument, "moment table required for som/wsom");
                estimate = estimator == SOMSYNC_ESTIMATOR_SOM
                               ? estimate_som(stream->stream, point.cfg, table->table)
                               : estimate_wsom(stream->stream, point.cfg, table->table);
                break;
            }
            case SOMSYNC_ESTIMATOR_TM:
                estimate = estimate_tm(stream->stream, point.cfg, point.tm_window);
                break;
            default:
                raise(Errc::invalid_argument, "estimator out of range");
        }
        *d_hat = estimate.d_hat;
        if (cost_min) *cost_min = estimate.cost_min;
        if (curve_len) *curve_len = estimate.curve.size();
        if (curve_d || curve_cost) {
            if (curve_capacity < estimate.curve.size())
                raise(Errc::range_error, "curve buffer too small");
            for (std::size_t i = 0; i < estimate.curve.size(); ++i) {
                if (curve_d) curve_d[i] = estimate.curve[i].d;
                if (curve_cost) curve_cost[i] = estimate.curve[i].cost;
            }
        }
    });
}

somsync_status somsync_oracle(const somsync_config* config, uint32_t k, uint64_t trials,
                              uint64_t seed, double* mean, double* variance) {
    if (auto s = require(config && mean && variance, "config/mean/variance must not be NULL"))
        return s;
    return guarded([&] {
        const PointContext point = config->point();
        const auto [m, v] = variance_oracle(point.cfg, point.channel_profile, k, trials, seed);
        *mean = m;
        *variance = v;
    });
}

somsync_status somsync_experiment_run(const somsync_config* config, const char* csv_path,
                                      const char* manifest_path, uint32_t threads) {
    if (auto s = require(config && csv_path, "config/csv_path must not be NULL")) return s;
    return guarded([&] {
        ExperimentSpec spec = config->materialized();
        if (threads > 0) spec.threads = threads;

        auto write_text = [](const char* path, const std::string& text) {
            std::FILE* f = std::fopen(path, "wb");
            if (!f) raise(Errc::io_error, std::string("cannot open for writing: ") + path);
            const std::size_t written = std::fwrite(text.data(), 1, text.size(), f);
            std::fclose(f);
            if (written != text.size()) raise(Errc::io_error, std::string("short write: ") + path);
        };

        // Completed grid points are kept so a mid-run failure still leaves a
        // usable, clearly marked CSV behind.
        ExperimentResult partial;
        partial.spec = spec;
        try {
            const ExperimentResult result = run_experiment(
                spec, [&](const PointResult& point) { partial.points.push_back(point); });
            write_text(csv_path, results_csv_string(result));
        } catch (const std::exception& e) {
            std::string csv = results_csv_string(partial);
            csv += std::string("# aborted: ") + e.what() + "\n";
            write_text(csv_path, csv);
            throw;
        }
        if (manifest_path) write_text(manifest_path, manifest_json(spec, config->doc));
    });
}

} // extern "C"
