#include <doctest.h>

#include "wdc/error.hpp"
#include "wdc/orbit_kinematics.hpp"

#include <cmath>
#include <random>

using namespace wdc;

namespace {

// Reference values computed with 40-digit arithmetic (mpmath).
constexpr double kPhi1000 = 82.625'973'278'570'938;        // v_r = +1000 m/s
constexpr double kPhiMinus1000 = -82.626'524'501'569'951;  // v_r = -1000 m/s
constexpr double kRtt1500km = 0.010'006'922'855'944'561;
constexpr double kRtt1264km = 0.008'432'500'326'609'283'8;
constexpr double kV66713ns = 999.999'376'879'778'51;       // dT' - dT = 667.13 ns
constexpr double kStarletteDuration = 290.386'044'100'185'11; // 1454 -> 1771 km arc

PassTrack linear_range_pass(double d0, double v, double step, std::size_t n)
{
    std::vector<PassSample> s(n);
    for (std::size_t i = 0; i < n; ++i) {
        s[i].t = double(i) * step;
        s[i].slant = d0 + v * s[i].t;
        s[i].v_r = v;
        s[i].beta = v / kSpeedOfLight;
        s[i].rtt = 2.0 * s[i].slant / kSpeedOfLight;
    }
    return PassTrack(std::move(s));
}

} // namespace

TEST_CASE("kinematic phase against the extended-precision reference")
{
    const PhysicalConstants k;
    CHECK(kinematic_phase(0.0, k) == 0.0);
    CHECK(kinematic_phase(1000.0 / kSpeedOfLight, k) == doctest::Approx(kPhi1000).epsilon(1e-13));
    CHECK(kinematic_phase(-1000.0 / kSpeedOfLight, k) ==
          doctest::Approx(kPhiMinus1000).epsilon(1e-13));
    CHECK(k.phase_scale() == doctest::Approx(12385363.124899189).epsilon(1e-14));
    CHECK_THROWS_AS(kinematic_phase(1.0, k), std::domain_error);
    CHECK_THROWS_AS(kinematic_phase(-1.5, k), std::domain_error);
}

TEST_CASE("kinematic phase carries the sign of beta and is monotone")
{
    const PhysicalConstants k;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1e-4, 1e-4);
    for (int i = 0; i < 10000; ++i) {
        const double a = u(rng);
        const double b = u(rng);
        if (a == 0.0)
            continue;
        CHECK((kinematic_phase(a, k) > 0.0) == (a > 0.0));
        if (a < b)
            CHECK(kinematic_phase(a, k) < kinematic_phase(b, k));
    }
}

TEST_CASE("round-trip time")
{
    const PhysicalConstants k;
    CHECK(round_trip_time(1500e3, k) == doctest::Approx(kRtt1500km).epsilon(1e-15));
    CHECK(round_trip_time(1264e3, k) == doctest::Approx(kRtt1264km).epsilon(1e-15));
    CHECK(round_trip_time(1e-9, k) < 1e-17);
    CHECK_THROWS_AS(round_trip_time(0.0, k), std::domain_error);
}

TEST_CASE("Doppler velocity from SLR spacings")
{
    const PhysicalConstants k;
    CHECK(doppler_velocity({0.0, 0.1, 0.1}, k) == 0.0);
    CHECK(doppler_velocity({0.0, 0.1, 0.1 + 667.13e-9}, k) == doctest::Approx(kV66713ns).epsilon(1e-9));
    CHECK(slr_received_spacing(1000.0, 0.1, k) - 0.1 ==
          doctest::Approx(667.130415703839e-9).epsilon(1e-7));
}

TEST_CASE("Doppler forward and inverse maps compose to the identity")
{
    const PhysicalConstants k;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-7000.0, 7000.0);
    for (int i = 0; i < 20000; ++i) {
        const double v = i == 0 ? 0.0 : (i == 1 ? 7000.0 : (i == 2 ? -7000.0 : u(rng)));
        const double rx = slr_received_spacing(v, 0.1, k);
        const double back = doppler_velocity({0.0, 0.1, rx}, k);
        REQUIRE(std::abs(back - v) < 1e-6);
        // Below ~100 m/s the spacing difference loses digits to cancellation.
        if (std::abs(v) >= 100.0)
            REQUIRE(std::abs(back - v) / std::abs(v) < 1e-9);
    }
}

TEST_CASE("generated pass geometry")
{
    const PhysicalConstants k;
    PassProfile p;
    p.altitude = 800e3;
    p.min_slant = 1454e3;
    p.duration = pass_duration_for_slant(p.altitude, p.min_slant, 1771e3);
    CHECK(p.duration == doctest::Approx(kStarletteDuration).epsilon(1e-9));
    p.sample_step = p.duration / 4000.0;
    const PassTrack track = generate_pass(p, k);
    REQUIRE(track.size() == 4001);

    SUBCASE("closest approach is symmetric")
    {
        const PassSample& mid = track.samples()[2000];
        CHECK(mid.slant == doctest::Approx(1454e3).epsilon(1e-12));
        CHECK(std::abs(mid.v_r) < 1e-6);
        CHECK(track.samples().front().slant == doctest::Approx(1771e3).epsilon(1e-9));
        CHECK(track.samples().back().slant == doctest::Approx(1771e3).epsilon(1e-9));
    }
    SUBCASE("slant stays within the configured arc")
    {
        for (const PassSample& s : track.samples()) {
            CHECK(s.slant >= 1454e3 * (1 - 1e-12));
            CHECK(s.slant <= 1771e3 * (1 + 1e-9));
        }
    }
    SUBCASE("stored phase and rtt follow from the stored velocity and slant")
    {
        for (const PassSample& s : track.samples()) {
            CHECK(s.beta == s.v_r / k.c);
            const double phi = kinematic_phase(s.beta, k);
            CHECK(std::abs(s.phi - phi) <= 1e-12 * std::max(1.0, std::abs(phi)));
            CHECK(s.rtt == doctest::Approx(2.0 * s.slant / k.c).epsilon(1e-15));
        }
    }
    SUBCASE("radial velocity matches the slant finite difference")
    {
        const auto s = track.samples();
        double vmax = 0.0;
        for (const PassSample& x : s)
            vmax = std::max(vmax, std::abs(x.v_r));
        CHECK(vmax == doctest::Approx(3968.2486999044).epsilon(1e-6));
        for (std::size_t i = 1; i + 1 < s.size(); ++i) {
            const double fd = (s[i + 1].slant - s[i - 1].slant) / (s[i + 1].t - s[i - 1].t);
            CHECK(std::abs(fd - s[i].v_r) < 1e-6 * vmax);
        }
    }
    SUBCASE("receding at the end, approaching at the start")
    {
        CHECK(track.samples().front().v_r < 0.0);
        CHECK(track.samples().back().v_r > 0.0);
    }
}

TEST_CASE("pass profile validation")
{
    const PhysicalConstants k;
    PassProfile p;
    p.min_slant = p.altitude - 1.0;
    CHECK_THROWS_AS(generate_pass(p, k), ConfigError);
    p = PassProfile{};
    p.sample_step = 0.0;
    CHECK_THROWS_AS(generate_pass(p, k), ConfigError);
    CHECK_THROWS_AS(pass_duration_for_slant(800e3, 1454e3, 1400e3), ConfigError);
}

TEST_CASE("pass track lookups")
{
    const PassTrack track = linear_range_pass(1500e3, 2000.0, 0.01, 101);
    CHECK(track.covers(0.0));
    CHECK(track.covers(1.0));
    CHECK_FALSE(track.covers(1.0001));
    CHECK_THROWS_AS(track.rtt_at(-0.001), std::out_of_range);
    CHECK_THROWS_AS(track.rtt_at(1.5), std::out_of_range);

    // Mid-sample epochs hit the linear interpolant exactly.
    const auto s = track.samples();
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const double t = 0.5 * (s[i].t + s[i + 1].t);
        const double frac = (t - s[i].t) / (s[i + 1].t - s[i].t);
        CHECK(track.rtt_at(t) == s[i].rtt + (s[i + 1].rtt - s[i].rtt) * frac);
    }

    std::vector<PassSample> bad(3);
    bad[0].t = 0.0;
    bad[1].t = 1.0;
    bad[2].t = 1.0;
    CHECK_THROWS(PassTrack(bad));
}

TEST_CASE("constant range gives a constant time of flight")
{
    const PassTrack track = linear_range_pass(1500e3, 0.0, 0.01, 11);
    const double first = track.rtt_at(0.0);
    for (int i = 1; i < 1000; ++i) {
        const double t = i * 1e-4;
        CHECK(track.rtt_at(t) == first);
        CHECK(std::abs(predicted_arrival(t, track) - t - first) < 1e-17);
    }
}

TEST_CASE("pulse arrival spacing follows the Doppler dilation")
{
    // Exact light-time solution for range d0 + v t, in extended precision:
    // bounce at t_r = (t_tx + d0/c) / (1 - beta), return at t_r + d(t_r)/c.
    const double d0 = 1500e3;
    for (double v : {-7000.0, -3968.0, -500.0, 500.0, 3968.0, 7000.0}) {
        const PassTrack track = linear_range_pass(d0, v, 0.001, 11);
        auto exact = [&](long double t_tx) {
            const long double c = kSpeedOfLight;
            const long double beta = v / c;
            const long double t_r = (t_tx + d0 / c) / (1.0L - beta);
            return t_r + (d0 + v * t_r) / c;
        };
        for (int k = 0; k < 100; ++k) {
            const double t0 = 1e-3 + k * 10e-9;
            const double t1 = t0 + 10e-9;
            const double model = predicted_arrival(t1, track) - predicted_arrival(t0, track);
            const long double oracle = exact(t1) - exact(t0);
            CHECK(std::abs(double(oracle) - model) < 1e-15);
            if (v > 0.0)
                CHECK(model > 10e-9);
        }
        const long double beta = v / (long double)kSpeedOfLight;
        const long double dilation = 10e-9L * (1 + beta) / (1 - beta);
        CHECK(std::abs(double(exact(1e-3L + 10e-9L) - exact(1e-3L) - dilation)) < 1e-18);
    }
}

TEST_CASE("SLR velocity reconstruction")
{
    const PhysicalConstants k;
    PassProfile p;
    p.duration = 60.0;
    p.sample_step = 0.01;
    const PassTrack track = generate_pass(p, k);

    const auto clean = simulate_slr(track, k, 0.1, 0.0, 1);
    REQUIRE(clean.size() == 601);
    const SlrVelocityTrack slr(clean, k);
    for (const SlrObservation& o : clean)
        CHECK(std::abs(slr.velocity_at(o.t) - track.velocity_at(o.t)) < 1e-6);
    CHECK_THROWS_AS(slr.velocity_at(61.0), std::out_of_range);

    const auto a = simulate_slr(track, k, 0.1, 20e-12, 99);
    const auto b = simulate_slr(track, k, 0.1, 20e-12, 99);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(a[i].delta_t_rx == b[i].delta_t_rx);

    std::vector<SlrObservation> unordered = clean;
    std::swap(unordered[3], unordered[4]);
    CHECK_THROWS_AS(SlrVelocityTrack(unordered, k), DataError);
}
