#include <cmath>
#include <complex>

#include <doctest.h>

#include "core/channel.hpp"
#include "core/error.hpp"
#include "core/moments.hpp"
#include "core/waveform.hpp"

using namespace somsync;

namespace {

SystemConfig paper_cfg(double sigma_n2 = 0.1) {
    SystemConfig cfg;
    cfg.n_x = 128;
    cfg.n_z = 12;
    cfg.n_h = 10;
    cfg.sigma_x2 = 1.0;
    cfg.sigma_n2 = sigma_n2;
    return cfg;
}

ChannelProfile paper_profile() {
    ChannelProfile profile;
    profile.pdp = exponential_pdp(10, 1.0 / 2.5244, 0.5);
    profile.correlation_model = CorrelationModel::block_static;
    return profile;
}

SystemConfig single_tap_cfg(double sigma_n2) {
    SystemConfig cfg = paper_cfg(sigma_n2);
    cfg.n_h = 1;
    return cfg;
}

ChannelProfile single_tap_profile() {
    ChannelProfile profile;
    profile.pdp = {1.0};
    profile.correlation_model = CorrelationModel::block_static;
    return profile;
}

} // namespace

TEST_CASE("tap windows follow the block-convolution support") {
    const SystemConfig cfg = paper_cfg();
    // ramp-up
    auto w = tap_window(cfg, 0);
    CHECK(!w.empty);
    CHECK(w.lo == 0);
    CHECK(w.hi == 0);
    w = tap_window(cfg, 5);
    CHECK(w.hi == 5);
    // flat region
    w = tap_window(cfg, cfg.n_h - 1);
    CHECK(w.lo == 0);
    CHECK(w.hi == cfg.n_h - 1);
    w = tap_window(cfg, cfg.n_x - 1);
    CHECK(w.lo == 0);
    CHECK(w.hi == cfg.n_h - 1);
    // ramp-down
    w = tap_window(cfg, cfg.n_x);
    CHECK(w.lo == 1);
    CHECK(w.hi == cfg.n_h - 1);
    // pure noise
    w = tap_window(cfg, cfg.n_x + cfg.n_h - 1);
    CHECK(w.empty);
    w = tap_window(cfg, cfg.n_s() - 1);
    CHECK(w.empty);
}

TEST_CASE("theoretical som values") {
    const SystemConfig cfg = paper_cfg(0.1);
    const ChannelProfile profile = paper_profile();
    const auto m0 = theoretical_som(cfg, profile);
    REQUIRE(m0.size() == 140);

    const double p_h = profile.total_power();
    // flat region carries the whole profile
    for (std::uint32_t k = cfg.n_h - 1; k < cfg.n_x; ++k)
        CHECK(m0[k] == doctest::Approx(cfg.sigma_x2 * p_h + 0.1).epsilon(1e-12));
    CHECK(m0[64] == doctest::Approx(1.1).epsilon(1e-4)); // p_h = 1 within 1e-4

    // ramp-up uses only tap 0
    CHECK(m0[0] == doctest::Approx(cfg.sigma_x2 * profile.pdp[0] + 0.1).epsilon(1e-12));

    // pure-noise region is exactly sigma_n2
    for (std::uint32_t k = cfg.n_x + cfg.n_h - 1; k < cfg.n_s(); ++k) CHECK(m0[k] == 0.1);

    // every index is at least sigma_n2
    for (double v : m0) CHECK(v >= 0.1);
}

TEST_CASE("theoretical som is invariant to the transmit antenna count") {
    SystemConfig cfg = paper_cfg(0.05);
    const ChannelProfile profile = paper_profile();
    cfg.m_t = 1;
    const auto m0_siso = theoretical_som(cfg, profile);
    cfg.m_t = 4;
    const auto m0_mimo = theoretical_som(cfg, profile);
    CHECK(m0_siso == m0_mimo);
}

TEST_CASE("periodic lookup wraps") {
    const SystemConfig cfg = paper_cfg();
    const auto table = build_moment_table(cfg, paper_profile(), VarianceMode::oracle_corrected);
    for (std::uint32_t k = 0; k < cfg.n_s(); ++k) {
        CHECK(table.m0_at(k + cfg.n_s()) == table.m0_at(k));
        CHECK(table.m0_at(k + 7ull * cfg.n_s()) == table.m0_at(k));
        CHECK(table.weight_at(k + cfg.n_s()) == table.weight_at(k));
    }
}

TEST_CASE("som variance closed forms") {
    SUBCASE("noise region variance is sigma_n^4 in corrected mode") {
        const SystemConfig cfg = paper_cfg(1.0);
        auto [f, f_noise] = som_variance(cfg, paper_profile(), VarianceMode::oracle_corrected);
        CHECK(f[cfg.n_x + cfg.n_h - 1] == doctest::Approx(1.0));
        CHECK(f.back() == doctest::Approx(1.0));
        CHECK(f_noise == doctest::Approx(1.0));
    }
    SUBCASE("published form keeps its 2 sigma_n^2 noise constant") {
        const SystemConfig cfg = paper_cfg(0.25);
        auto [f, f_noise] = som_variance(cfg, paper_profile(), VarianceMode::paper_formula);
        CHECK(f.back() == doctest::Approx(0.5));
        CHECK(f_noise == doctest::Approx(0.5));
    }
    SUBCASE("single tap, flat region, no noise: variance 3 sigma_s^4") {
        const SystemConfig cfg = single_tap_cfg(0.0);
        auto [f, f_noise] = som_variance(cfg, single_tap_profile(), VarianceMode::oracle_corrected);
        CHECK(f[10] == doctest::Approx(3.0));
        CHECK(f_noise == 0.0);
        // the published form agrees for a single tap (cross terms vanish)
        auto [fp, fp_noise] = som_variance(cfg, single_tap_profile(), VarianceMode::paper_formula);
        CHECK(fp[10] == doctest::Approx(3.0));
    }
    SUBCASE("degenerate zero powers give zero variance everywhere") {
        SystemConfig cfg = single_tap_cfg(0.0);
        cfg.sigma_x2 = 0.0;
        auto [f, f_noise] = som_variance(cfg, single_tap_profile(), VarianceMode::oracle_corrected);
        for (double v : f) CHECK(v == 0.0);
        CHECK(f_noise == 0.0);
    }
}

TEST_CASE("variance oracle confirms the corrected closed form") {
    const SystemConfig cfg = paper_cfg(0.1);
    const ChannelProfile profile = paper_profile();
    auto [f, f_noise] = som_variance(cfg, profile, VarianceMode::oracle_corrected);
    const auto m0 = theoretical_som(cfg, profile);

    SUBCASE("noise-only index") {
        const auto [mean, variance] = variance_oracle(cfg, profile, cfg.n_s() - 1, 200000, 51);
        CHECK(mean == doctest::Approx(0.1).epsilon(0.01));
        CHECK(variance == doctest::Approx(0.01).epsilon(0.02));
    }
    SUBCASE("flat-region index") {
        const auto [mean, variance] = variance_oracle(cfg, profile, 64, 400000, 52);
        CHECK(mean == doctest::Approx(m0[64]).epsilon(0.01));
        CHECK(variance == doctest::Approx(f[64]).epsilon(0.03));
    }
    SUBCASE("ramp index k = 0") {
        const auto [mean, variance] = variance_oracle(cfg, profile, 0, 400000, 53);
        CHECK(mean == doctest::Approx(m0[0]).epsilon(0.01));
        CHECK(variance == doctest::Approx(f[0]).epsilon(0.03));
    }
    SUBCASE("single tap no noise: empirical variance 3") {
        const SystemConfig one = single_tap_cfg(0.0);
        const auto [mean, variance] = variance_oracle(one, single_tap_profile(), 20, 400000, 54);
        CHECK(mean == doctest::Approx(1.0).epsilon(0.01));
        CHECK(variance == doctest::Approx(3.0).epsilon(0.03));
    }
}

TEST_CASE("variance oracle confirms the m_t-aware corrected form") {
    SystemConfig cfg = paper_cfg(0.05);
    cfg.m_t = 4;
    cfg.n_h = 3;
    ChannelProfile profile;
    profile.pdp = {0.5, 0.3, 0.2};
    profile.correlation_model = CorrelationModel::block_static;

    auto [f, f_noise] = som_variance(cfg, profile, VarianceMode::oracle_corrected);
    const auto [mean, variance] = variance_oracle(cfg, profile, 16, 400000, 55);
    CHECK(variance == doctest::Approx(f[16]).epsilon(0.03));

    // the SISO closed form would be wrong here
    SystemConfig siso = cfg;
    siso.m_t = 1;
    auto [f_siso, unused] = som_variance(siso, profile, VarianceMode::oracle_corrected);
    CHECK(std::abs(variance - f_siso[16]) / f_siso[16] > 0.05);
}

TEST_CASE("batch empirical moments agree with the tables") {
    const SystemConfig cfg = paper_cfg(0.02);
    const ChannelProfile profile = paper_profile();
    const auto m0 = theoretical_som(cfg, profile);
    auto [f, f_noise] = som_variance(cfg, profile, VarianceMode::oracle_corrected);

    const MomentStats stats = empirical_moments(cfg, profile, 60000, 56);
    REQUIRE(stats.mean.size() == cfg.n_s());
    for (std::uint32_t k = 0; k < cfg.n_s(); ++k) {
        CHECK(stats.mean[k] == doctest::Approx(m0[k]).epsilon(0.03));
        CHECK(stats.variance[k] == doctest::Approx(f[k]).epsilon(0.08));
    }
}

TEST_CASE("mimo sample moments average over receive antennas") {
    SystemConfig cfg = paper_cfg(0.0);
    cfg.m_r = 2;
    cfg.n_blocks = 3;
    SampleStream stream;
    stream.y.assign(2, std::vector<std::complex<double>>(cfg.observation_length()));
    // antenna energies 1 and 9: the average must be 5 at every index
    std::fill(stream.y[0].begin(), stream.y[0].end(), std::complex<double>(1.0, 0.0));
    std::fill(stream.y[1].begin(), stream.y[1].end(), std::complex<double>(3.0, 0.0));
    const auto sm = sample_som(stream, 0, cfg);
    for (std::uint32_t k = 0; k < cfg.n_s(); ++k) {
        if (sm.counts[k] == 0) continue;
        CHECK(sm.m_hat[k] == doctest::Approx(5.0));
    }
    const auto sm_pos = sample_som(stream, 2, cfg);
    CHECK(sm_pos.noise_count == 4); // m_r * d
    CHECK(sm_pos.m_hat_noise == doctest::Approx(5.0));
}

TEST_CASE("sample moments: window counts and basic values") {
    SystemConfig cfg = paper_cfg(0.0);
    cfg.n_blocks = 10;

    SUBCASE("constant-modulus stream gives c^2 everywhere") {
        SampleStream stream;
        stream.y.assign(1, std::vector<std::complex<double>>(cfg.observation_length(),
                                                             std::complex<double>(3.0, 4.0)));
        const auto sm = sample_som(stream, 0, cfg);
        for (std::uint32_t k = 0; k < cfg.n_s(); ++k) {
            CHECK(sm.m_hat[k] == doctest::Approx(25.0));
            CHECK(sm.counts[k] >= 1);
        }
    }
    SUBCASE("window count at k = 0, d = 0 is N") {
        SampleStream stream;
        stream.y.assign(1, std::vector<std::complex<double>>(cfg.observation_length(), 1.0));
        const auto sm = sample_som(stream, 0, cfg);
        CHECK(sm.counts[0] == 10); // floor((1400 - 0 + 1) / 140)
        CHECK(sm.counts[cfg.n_s() - 1] == 9);
        CHECK(sm.noise_count == 0);
    }
    SUBCASE("d > 0 shifts the windows and measures the prefix") {
        SampleStream stream;
        stream.y.assign(1, std::vector<std::complex<double>>(cfg.observation_length(), 0.0));
        for (int t = 0; t < 5; ++t) stream.y[0][t] = std::complex<double>(2.0, 0.0);
        const auto sm = sample_som(stream, 5, cfg);
        CHECK(sm.noise_count == 5);
        CHECK(sm.m_hat_noise == doctest::Approx(4.0));
        CHECK(sm.counts[0] == 9); // floor((1400 - 0 - 5 + 1) / 140)
        CHECK(sm.m_hat[0] == doctest::Approx(0.0));
    }
    SUBCASE("N = 1 leaves late indices empty") {
        cfg.n_blocks = 1;
        SampleStream stream;
        stream.y.assign(1, std::vector<std::complex<double>>(cfg.observation_length(), 1.0));
        const auto sm = sample_som(stream, 0, cfg);
        CHECK(sm.counts[0] == 1);
        CHECK(sm.counts[cfg.n_s() - 1] == 0); // no complete period
    }
}

TEST_CASE("sample moments are scale equivariant") {
    SystemConfig cfg = paper_cfg(0.01);
    cfg.n_blocks = 4;
    ChannelProfile profile = paper_profile();
    Rng rng(57);
    const auto tx = generate_tx_stream(cfg, SignalMode::gaussian, nullptr, rng, 1, 5);
    const auto rx = apply_channel({tx}, draw_taps(profile, cfg, rng, tx.size()), cfg);
    auto stream = inject_offset(rx, TimingOffset{4}, cfg.sigma_n2, cfg, rng);

    const auto base = sample_som(stream, 4, cfg);
    const double c = 2.5;
    for (auto& antenna : stream.y)
        for (auto& s : antenna) s *= c;
    const auto scaled = sample_som(stream, 4, cfg);
    for (std::uint32_t k = 0; k < cfg.n_s(); ++k) {
        if (base.counts[k] == 0) continue;
        CHECK(scaled.m_hat[k] == doctest::Approx(c * c * base.m_hat[k]).epsilon(1e-12));
    }
    CHECK(scaled.m_hat_noise == doctest::Approx(c * c * base.m_hat_noise).epsilon(1e-12));
}

TEST_CASE("noiseless single-tap sample moments converge to the table") {
    SystemConfig cfg = single_tap_cfg(0.0);
    cfg.n_blocks = 400;
    const ChannelProfile profile = single_tap_profile();
    const auto m0 = theoretical_som(cfg, profile);

    Rng rng(58);
    const auto tx =
        generate_tx_stream(cfg, SignalMode::gaussian, nullptr, rng, 1, cfg.n_blocks + 1);
    const auto rx = apply_channel({tx}, draw_taps(profile, cfg, rng, tx.size()), cfg);
    const auto stream = inject_offset(rx, TimingOffset{0}, 0.0, cfg, rng);
    const auto sm = sample_som(stream, 0, cfg);
    for (std::uint32_t k = 0; k < cfg.n_s(); ++k) {
        if (m0[k] == 0.0)
            CHECK(sm.m_hat[k] == 0.0);
        else
            CHECK(sm.m_hat[k] == doctest::Approx(m0[k]).epsilon(0.25));
    }
}

TEST_CASE("weight floor keeps zero-noise tables usable") {
    const SystemConfig cfg = single_tap_cfg(0.0);
    const auto table = build_moment_table(cfg, single_tap_profile(), VarianceMode::oracle_corrected);
    // raw noise-region weight is zero, the active weight is floored positive
    CHECK(table.f_oracle().back() == 0.0);
    CHECK(table.weight_at(cfg.n_s() - 1) > 0.0);
    CHECK(table.noise_weight() > 0.0);
}
