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

// somsync command line front end. Talks to the shared library exclusively
// through the C API in somsync/somsync.h.
//
// Exit codes: 0 ok, 1 runtime failure, 2 configuration error.

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "somsync/somsync.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct ConfigDeleter {
    void operator()(somsync_config* c) const { somsync_config_destroy(c); }
};
struct TableDeleter {
    void operator()(somsync_table* t) const { somsync_table_destroy(t); }
};
struct StreamDeleter {
    void operator()(somsync_stream* s) const { somsync_stream_destroy(s); }
};
using ConfigPtr = std::unique_ptr<somsync_config, ConfigDeleter>;
using TablePtr = std::unique_ptr<somsync_table, TableDeleter>;
using StreamPtr = std::unique_ptr<somsync_stream, StreamDeleter>;

bool is_config_status(somsync_status status) {
    switch (status) {
        case SOMSYNC_ERR_RANGE:
        case SOMSYNC_ERR_ISI_VIOLATION:
        case SOMSYNC_ERR_OFFSET_RANGE:
        case SOMSYNC_ERR_PARSE:
        case SOMSYNC_ERR_INVALID_ARGUMENT:
            return true;
        default:
            return false;
    }
}

int fail(somsync_status status) {
    std::fprintf(stderr, "somsync: %s\n", somsync_last_error());
    return is_config_status(status) ? kExitConfig : kExitRuntime;
}

#define CHECK(call)                                      \
    do {                                                 \
        const somsync_status status_ = (call);           \
        if (status_ != SOMSYNC_OK) return fail(status_); \
    } while (0)

struct CommonOptions {
    std::string config_path;
    std::string out_path;
    std::uint64_t seed = 1;
    bool seed_given = false;
    unsigned threads = 0;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* app, CommonOptions& opts) {
    app->add_option("--config", opts.config_path, "JSON config file (defaults used when omitted)");
    app->add_option("--out", opts.out_path, "output path");
    app->add_option("--seed", opts.seed, "master seed")->each([&](const std::string&) {
        opts.seed_given = true;
    });
    app->add_option("--threads", opts.threads, "worker thread cap (0 = all cores)");
    app->add_option("--set", opts.overrides, "config override key=value (repeatable)")
        ->take_all();
}

int load_config(const CommonOptions& opts, ConfigPtr& config) {
    somsync_config* raw = nullptr;
    const somsync_status status = opts.config_path.empty()
                                      ? somsync_config_create(&raw)
                                      : somsync_config_load(opts.config_path.c_str(), &raw);
    if (status != SOMSYNC_OK) return fail(status);
    config.reset(raw);
    for (const auto& assignment : opts.overrides) {
        const somsync_status s = somsync_config_set(config.get(), assignment.c_str());
        if (s != SOMSYNC_OK) return fail(s);
    }
    if (opts.seed_given) {
        const std::string assignment = "seed=" + std::to_string(opts.seed);
        const somsync_status s = somsync_config_set(config.get(), assignment.c_str());
        if (s != SOMSYNC_OK) return fail(s);
    }
    const somsync_status valid = somsync_config_validate(config.get());
    if (valid != SOMSYNC_OK) return fail(valid);
    return kExitOk;
}

int cmd_moments(const CommonOptions& opts, std::uint64_t empirical_trials) {
    ConfigPtr config;
    if (int rc = load_config(opts, config)) return rc;

    somsync_table* table = nullptr;
    CHECK(somsync_table_create(config.get(), SOMSYNC_VARIANCE_ORACLE_CORRECTED, &table));
    TablePtr guard(table);

    const std::string out = opts.out_path.empty() ? "moments.csv" : opts.out_path;
    CHECK(somsync_table_export_csv(table, out.c_str(), empirical_trials, opts.seed));
    std::printf("wrote %s\n", out.c_str());
    return kExitOk;
}

int cmd_estimate(const CommonOptions& opts, const std::string& in_path,
                 const std::string& dump_path, std::int32_t true_d, bool d_given,
                 const std::vector<std::string>& estimators, bool print_curve) {
    ConfigPtr config;
    if (int rc = load_config(opts, config)) return rc;

    StreamPtr stream;
    if (!in_path.empty()) {
        somsync_stream* raw = nullptr;
        CHECK(somsync_stream_load(in_path.c_str(), &raw));
        stream.reset(raw);
    } else {
        std::int32_t d = true_d;
        if (!d_given) {
            // No offset requested: draw one uniformly the way the harness does.
            std::int64_t d_min = 0, d_max = 0;
            CHECK(somsync_config_get_int(config.get(), "d_min", &d_min));
            CHECK(somsync_config_get_int(config.get(), "d_max", &d_max));
            d = static_cast<std::int32_t>(d_min +
                                          static_cast<std::int64_t>(opts.seed %
                                                                    static_cast<std::uint64_t>(
                                                                        d_max - d_min + 1)));
        }
        somsync_stream* raw = nullptr;
        CHECK(somsync_stream_simulate(config.get(), d, opts.seed, &raw));
        stream.reset(raw);
    }
    if (!dump_path.empty()) CHECK(somsync_stream_save(stream.get(), dump_path.c_str()));

    somsync_table* table = nullptr;
    CHECK(somsync_table_create(config.get(), SOMSYNC_VARIANCE_ORACLE_CORRECTED, &table));
    TablePtr table_guard(table);

    std::int32_t stream_d = 0;
    CHECK(somsync_stream_info(stream.get(), nullptr, nullptr, &stream_d, nullptr));

    std::FILE* out = stdout;
    if (!opts.out_path.empty()) {
        out = std::fopen(opts.out_path.c_str(), "wb");
        if (!out) {
            std::fprintf(stderr, "somsync: cannot open %s\n", opts.out_path.c_str());
            return kExitRuntime;
        }
    }
    std::fprintf(out, "# somsync_estimate_v1\n");
    std::fprintf(out, "estimator,true_d,d_hat,cost_min\n");

    std::int64_t d_min = 0, d_max = 0;
    CHECK(somsync_config_get_int(config.get(), "d_min", &d_min));
    CHECK(somsync_config_get_int(config.get(), "d_max", &d_max));
    const std::size_t curve_size = static_cast<std::size_t>(d_max - d_min + 1);
    std::vector<std::int32_t> curve_d(curve_size);
    std::vector<double> curve_cost(curve_size);

    for (const auto& name : estimators) {
        int estimator = SOMSYNC_ESTIMATOR_SOM;
        if (name == "som") estimator = SOMSYNC_ESTIMATOR_SOM;
        else if (name == "wsom") estimator = SOMSYNC_ESTIMATOR_WSOM;
        else if (name == "tm") estimator = SOMSYNC_ESTIMATOR_TM;
        else {
            std::fprintf(stderr, "somsync: unknown estimator '%s' (som|wsom|tm)\n", name.c_str());
            if (out != stdout) std::fclose(out);
            return kExitConfig;
        }
        std::int32_t d_hat = 0;
        double cost_min = 0.0;
        std::size_t curve_len = 0;
        const somsync_status status = somsync_estimate(
            stream.get(), config.get(), table, estimator, &d_hat, &cost_min, curve_d.data(),
            curve_cost.data(), curve_size, &curve_len);
        if (status != SOMSYNC_OK) {
            if (out != stdout) std::fclose(out);
            return fail(status);
        }
        std::fprintf(out, "%s,%d,%d,%.12g\n", name.c_str(), stream_d, d_hat, cost_min);
        if (print_curve) {
            for (std::size_t i = 0; i < curve_len; ++i)
                std::fprintf(out, "curve,%s,%d,%.12g\n", name.c_str(), curve_d[i], curve_cost[i]);
        }
    }
    if (out != stdout) std::fclose(out);
    return kExitOk;
}

int cmd_experiment(const CommonOptions& opts, const std::string& experiment) {
    ConfigPtr config;
    if (int rc = load_config(opts, config)) return rc;
    if (!experiment.empty()) {
        const std::string assignment = "experiment=" + experiment;
        CHECK(somsync_config_set(config.get(), assignment.c_str()));
    }

    char* dumped = nullptr;
    CHECK(somsync_config_dump(config.get(), &dumped));
    std::string experiment_name = "experiment";
    {
        // cheap extraction to name default outputs after the experiment
        const std::string doc(dumped);
        const auto pos = doc.find("\"experiment\":\"");
        if (pos != std::string::npos) {
            const auto start = pos + 14;
            const auto end = doc.find('"', start);
            experiment_name = doc.substr(start, end - start);
        }
        somsync_string_free(dumped);
    }

    const std::string csv = opts.out_path.empty() ? experiment_name + ".csv" : opts.out_path;
    const std::string manifest = csv + ".manifest.json";
    CHECK(somsync_experiment_run(config.get(), csv.c_str(), manifest.c_str(), opts.threads));
    std::printf("wrote %s and %s\n", csv.c_str(), manifest.c_str());
    return kExitOk;
}

int cmd_oracle(const CommonOptions& opts, std::uint32_t k, std::uint64_t trials) {
    ConfigPtr config;
    if (int rc = load_config(opts, config)) return rc;
    if (trials < 10000) {
        std::fprintf(stderr, "somsync: oracle needs --trials >= 10000\n");
        return kExitConfig;
    }

    somsync_table* table = nullptr;
    CHECK(somsync_table_create(config.get(), SOMSYNC_VARIANCE_ORACLE_CORRECTED, &table));
    TablePtr guard(table);

    std::uint32_t n_s = 0;
    CHECK(somsync_table_period(table, &n_s));
    if (k >= n_s) {
        std::fprintf(stderr, "somsync: k=%u outside one period (n_s=%u)\n", k, n_s);
        return kExitConfig;
    }

    std::vector<double> m0(n_s), f_paper(n_s), f_oracle(n_s);
    double f_noise_paper = 0.0, f_noise_oracle = 0.0;
    CHECK(somsync_table_values(table, m0.data(), f_paper.data(), f_oracle.data(), &f_noise_paper,
                               &f_noise_oracle));

    double mean = 0.0, variance = 0.0;
    CHECK(somsync_oracle(config.get(), k, trials, opts.seed, &mean, &variance));

    auto deviation = [](double reference, double value) {
        if (reference == 0.0) return value == 0.0 ? 0.0 : 1.0;
        return (value - reference) / reference;
    };
    std::printf("k = %u (trials = %" PRIu64 ", seed = %" PRIu64 ")\n", k, trials, opts.seed);
    std::printf("  M0[k]            analytic %.6g | empirical %.6g | rel dev %+.3g%%\n", m0[k],
                mean, 100.0 * deviation(m0[k], mean));
    std::printf("  Var{|y[k]|^2}    empirical %.6g\n", variance);
    std::printf("  oracle_corrected analytic  %.6g | rel dev vs empirical %+.3g%%\n", f_oracle[k],
                100.0 * deviation(variance, f_oracle[k]));
    std::printf("  paper_formula    analytic  %.6g | rel dev vs empirical %+.3g%%\n", f_paper[k],
                100.0 * deviation(variance, f_paper[k]));
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ZP-OFDM timing-offset estimation toolkit (moment-based)"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(somsync_version()));

    CommonOptions moments_opts;
    std::uint64_t empirical_trials = 0;
    auto* moments = app.add_subcommand("moments", "emit the moment/weight tables as CSV");
    add_common(moments, moments_opts);
    moments->add_option("--empirical", empirical_trials,
                        "also run a Monte Carlo pass with this many realizations");

    CommonOptions estimate_opts;
    std::string in_path, dump_path;
    std::int32_t true_d = 0;
    bool d_given = false;
    bool print_curve = false;
    std::vector<std::string> estimator_names{"som", "wsom", "tm"};
    auto* estimate = app.add_subcommand("estimate", "single-shot estimation on one stream");
    add_common(estimate, estimate_opts);
    estimate->add_option("--in", in_path, "load a stream dump instead of simulating");
    estimate->add_option("--dump", dump_path, "save the (simulated) stream to this path");
    estimate->add_option("--d", true_d, "true integer offset for simulation")
        ->each([&](const std::string&) { d_given = true; });
    estimate->add_option("--estimators", estimator_names, "subset of som,wsom,tm")->delimiter(',');
    estimate->add_flag("--curve", print_curve, "also print the per-candidate cost curve");

    CommonOptions experiment_opts;
    std::string experiment_name;
    auto* experiment = app.add_subcommand("experiment", "run a Monte Carlo sweep, write CSV");
    add_common(experiment, experiment_opts);
    experiment->add_option("--experiment", experiment_name,
                           "snr|doppler|blocks|taps|pdp|pmf|mse (overrides config)");

    CommonOptions oracle_opts;
    std::uint32_t oracle_k = 0;
    std::uint64_t oracle_trials = 1000000;
    auto* oracle = app.add_subcommand("oracle", "Monte Carlo check of the moment/variance tables");
    add_common(oracle, oracle_opts);
    oracle->add_option("--k", oracle_k, "sample index within one period")->required();
    oracle->add_option("--trials", oracle_trials, "Monte Carlo realizations (>= 10^4)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (moments->parsed()) return cmd_moments(moments_opts, empirical_trials);
        if (estimate->parsed())
            return cmd_estimate(estimate_opts, in_path, dump_path, true_d, d_given,
                                estimator_names, print_curve);
        if (experiment->parsed()) return cmd_experiment(experiment_opts, experiment_name);
        if (oracle->parsed()) return cmd_oracle(oracle_opts, oracle_k, oracle_trials);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "somsync: %s\n", e.what());
        return kExitRuntime;
    }
    return kExitOk;
}
