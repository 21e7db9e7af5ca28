#include <doctest.h>

#include "wdc/error.hpp"
#include "wdc/event_generator.hpp"

#include <algorithm>
#include <cmath>
#include <set>

using namespace wdc;

namespace {

PassTrack pass_of(double duration, double altitude = 800e3, double min_slant = 1454e3)
{
    PassProfile p;
    p.altitude = altitude;
    p.min_slant = min_slant;
    p.duration = duration;
    p.sample_step = 1e-3;
    return generate_pass(p, PhysicalConstants{});
}

SimulationConfig ideal_config(double mu = 2.2e-3)
{
    SimulationConfig c;
    c.mu = mu;
    c.seed = 77;
    return c;
}

} // namespace

TEST_CASE("multi-photon fraction")
{
    CHECK(multi_photon_fraction(0.0) == 0.0);
    // 40-digit reference: 1 - e^-mu - mu e^-mu at mu = 2.2e-3.
    CHECK(multi_photon_fraction(2.2e-3) == doctest::Approx(2.416453593149576e-6).epsilon(1e-12));
    const double mu = 2.2e-3;
    CHECK(std::abs(multi_photon_fraction(mu) / (mu * mu / 2) - 1.0) < 3e-3);
    CHECK_THROWS_AS(multi_photon_fraction(-1e-3), std::domain_error);
}

TEST_CASE("per-cycle seeds")
{
    CHECK(cycle_seed(1, 5) == cycle_seed(1, 5));
    std::set<std::uint64_t> seen;
    for (std::int64_t c = -1; c < 5000; ++c)
        seen.insert(cycle_seed(123, c));
    CHECK(seen.size() == 5001);
    CHECK(cycle_seed(1, 5) != cycle_seed(2, 5));
}

TEST_CASE("configuration validation")
{
    SimulationConfig c;
    c.mu = 0.2;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = SimulationConfig{};
    c.eta_opt = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = SimulationConfig{};
    c.tagger_resolution = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = SimulationConfig{};
    c.imperfections.eta_minus = 0.9;
    CHECK(c.channel_efficiency(Detector::minus) == doctest::Approx(0.09));
    CHECK(c.channel_efficiency(Detector::plus) == doctest::Approx(0.10));
}

TEST_CASE("no light and no background gives no records")
{
    const PassTrack pass = pass_of(20.0);
    const auto schedules = build_schedules(pass, ProtocolParams{}, 1);
    SimulationConfig c = ideal_config(0.0);
    c.background_rate = 0.0;
    const SimulationOutput out = simulate_pass(pass, schedules, c, PhysicalConstants{});
    CHECK(out.records.empty());
    CHECK(out.truth.empty());
    CHECK(out.accepted_pulses > 0);
}

TEST_CASE("schedules outside the pass are rejected")
{
    const PassTrack pass = pass_of(5.0);
    auto schedules = build_schedules(pass, ProtocolParams{}, 1);
    schedules.push_back(build_cycle(0.01, 50.0, 500, ProtocolParams{}));
    CHECK_THROWS_AS(simulate_pass(pass, schedules, ideal_config(), PhysicalConstants{}), DataError);
}

TEST_CASE("simulation is deterministic and thread-count independent")
{
    const PassTrack pass = pass_of(30.0);
    const auto schedules = build_schedules(pass, ProtocolParams{}, 5);
    SimulationConfig c = ideal_config(0.02);
    c.background_rate = 500.0;
    c.threads = 1;
    const SimulationOutput a = simulate_pass(pass, schedules, c, PhysicalConstants{});
    c.threads = 4;
    const SimulationOutput b = simulate_pass(pass, schedules, c, PhysicalConstants{});
    REQUIRE(a.records.size() > 1000);
    CHECK(a.records == b.records);
    c.seed = 78;
    const SimulationOutput other = simulate_pass(pass, schedules, c, PhysicalConstants{});
    CHECK(other.records != a.records);
}

TEST_CASE("record stream invariants")
{
    const PassTrack pass = pass_of(30.0);
    const auto schedules = build_schedules(pass, ProtocolParams{}, 9);
    SimulationConfig c = ideal_config(0.02);
    c.background_rate = 2000.0;
    c.imperfections.visibility = 0.4;
    c.imperfections.whichpath_purity = 0.9;
    const SimulationOutput out = simulate_pass(pass, schedules, c, PhysicalConstants{});
    REQUIRE(out.records.size() == out.truth.size());
    REQUIRE(std::is_sorted(out.records.begin(), out.records.end()));

    std::size_t background = 0;
    for (std::size_t i = 0; i < out.records.size(); ++i) {
        const TimeTagRecord& r = out.records[i];
        const CycleSchedule& s = schedules[std::size_t(r.cycle)];
        REQUIRE(s.cycle_index == r.cycle);
        const double t = double(r.tag) * c.tagger_resolution;
        // Quantization can push a tag at most half a tick past the window.
        CHECK(t >= s.rx_window.begin - c.tagger_resolution);
        CHECK(t <= s.rx_window.end + c.tagger_resolution);
        const TruthEntry& e = out.truth[i];
        if (e.background) {
            ++background;
            CHECK_FALSE(e.slot.has_value());
            CHECK(std::isnan(e.phi));
            continue;
        }
        REQUIRE(e.slot.has_value());
        CHECK(s.tau_window.contains(e.t_ref));
        CHECK(r.bit == governing_bit(e.t_ref, s).bit);
        if (r.bit == 0)
            CHECK(*e.slot == Slot::central);
    }
    CHECK(background > 0);
}

TEST_CASE("signal yield follows Poisson thinning")
{
    const PassTrack pass = pass_of(60.0);
    ProtocolParams params;
    params.force_bit = 1; // lateral slots split evenly between channels at any phase
    const auto schedules = build_schedules(pass, params, 2);
    SimulationConfig c = ideal_config(0.01);
    c.eta_det_minus = 0.05;
    const SimulationOutput out = simulate_pass(pass, schedules, c, PhysicalConstants{});

    double plus = 0.0, minus = 0.0;
    for (const TimeTagRecord& r : out.records)
        (r.channel == Detector::plus ? plus : minus) += 1.0;
    const double n = double(out.accepted_pulses) * c.mu * c.eta_opt;
    const double expect_plus = n * 0.5 * c.eta_det_plus;
    const double expect_minus = n * 0.5 * c.eta_det_minus;
    CHECK(std::abs(plus + minus - (expect_plus + expect_minus)) <
          4.0 * std::sqrt(expect_plus + expect_minus));
    CHECK(std::abs(minus / (plus + minus) - 1.0 / 3.0) < 0.02);
}

TEST_CASE("central-peak timing spread matches the detector jitter")
{
    const PassTrack pass = pass_of(40.0);
    ProtocolParams params;
    params.force_bit = 0;
    const auto schedules = build_schedules(pass, params, 4);
    SimulationConfig c = ideal_config(0.03);
    const SimulationOutput out = simulate_pass(pass, schedules, c, PhysicalConstants{});

    double sum = 0.0, sum2 = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < out.records.size(); ++i) {
        const TruthEntry& e = out.truth[i];
        if (e.background)
            continue;
        REQUIRE(*e.slot == Slot::central);
        const double d = double(out.records[i].tag) * c.tagger_resolution - e.t_ref;
        sum += d;
        sum2 += d * d;
        ++n;
    }
    REQUIRE(n >= 10000);
    const double mean = sum / double(n);
    const double sd = std::sqrt(sum2 / double(n) - mean * mean);
    CHECK(std::abs(mean) < 5.0 * 0.5e-9 / std::sqrt(double(n)));
    CHECK(std::abs(sd / c.jitter_rms - 1.0) < 0.10);
}

TEST_CASE("b = 0 central and b = 1 lateral counts balance at equal exposure")
{
    const PassTrack pass = pass_of(120.0);
    const auto schedules = build_schedules(pass, ProtocolParams{}, 31);
    SimulationConfig c = ideal_config(0.01);
    const PhysicalConstants k;
    const SimulationOutput out = simulate_pass(pass, schedules, c, k);

    double exposure[2] = {0.0, 0.0};
    for (const CycleSchedule& s : schedules) {
        exposure[s.b1] += double(pulses_arriving_in(s, {s.tau_window.begin, s.t_b2}, pass, c.pulse_rate).count());
        exposure[s.b2] += double(pulses_arriving_in(s, {s.t_b2, s.tau_window.end}, pass, c.pulse_rate).count());
    }
    double central0 = 0.0, lateral1 = 0.0;
    for (std::size_t i = 0; i < out.records.size(); ++i) {
        const TruthEntry& e = out.truth[i];
        if (out.records[i].bit == 0 && *e.slot == Slot::central)
            central0 += 1.0;
        if (out.records[i].bit == 1 && *e.slot != Slot::central)
            lateral1 += 1.0;
    }
    const double scale = exposure[0] / exposure[1];
    const double z = (central0 - lateral1 * scale) / std::sqrt(central0 + lateral1 * scale * scale);
    CHECK(std::abs(z) < 4.0);
}
