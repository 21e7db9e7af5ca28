#include <doctest.h>

#include "wdc/config.hpp"
#include "wdc/error.hpp"
#include "wdc/io.hpp"

#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

using namespace wdc;
using nlohmann::json;

namespace {

std::string message_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const std::exception& ex) {
        return ex.what();
    }
    return {};
}

} // namespace

TEST_CASE("reals survive a text round trip")
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 10000; ++i) {
        const double v = i == 0 ? std::numeric_limits<double>::denorm_min() : u(rng) * std::pow(10.0, i % 30 - 15);
        CHECK(std::strtod(io::format_real(v).c_str(), nullptr) == v);
    }
}

TEST_CASE("time tags round trip")
{
    std::vector<TimeTagRecord> records;
    std::mt19937_64 rng(2);
    for (int i = 0; i < 1000; ++i)
        records.push_back({rng() >> 20, (rng() & 1) ? Detector::minus : Detector::plus,
                           std::int64_t(rng() % 3000), std::uint8_t(rng() & 1)});
    std::stringstream ss;
    io::write_timetags(ss, records);
    CHECK(io::read_timetags(ss) == records);

    std::stringstream empty;
    io::write_timetags(empty, {});
    CHECK(empty.str() == "tag,channel,cycle,bit\n");
    CHECK(io::read_timetags(empty).empty());
}

TEST_CASE("malformed time tags name the offending line")
{
    std::istringstream truncated("tag,channel,cycle,bit\n100,+,0,1\n200,-,0\n");
    const std::string m = message_of([&] { io::read_timetags(truncated, "tags.csv"); });
    CHECK(m.find("tags.csv:3") != std::string::npos);
    CHECK(m.find("expected 4 fields") != std::string::npos);

    std::istringstream bad_channel("tag,channel,cycle,bit\n100,x,0,1\n");
    CHECK_THROWS_WITH_AS(io::read_timetags(bad_channel, "t"), doctest::Contains("t:2"), DataError);
    std::istringstream bad_bit("tag,channel,cycle,bit\n100,+,0,2\n");
    CHECK_THROWS_AS(io::read_timetags(bad_bit), DataError);
    std::istringstream bad_number("tag,channel,cycle,bit\n1e5,+,0,1\n");
    CHECK_THROWS_AS(io::read_timetags(bad_number), DataError);
    std::istringstream no_header("");
    CHECK_THROWS_WITH_AS(io::read_timetags(no_header, "t"), doctest::Contains("missing header"), DataError);
    std::istringstream wrong_header("a,b,c,d\n");
    CHECK_THROWS_AS(io::read_timetags(wrong_header), DataError);
}

TEST_CASE("truth sidecar round trip")
{
    std::vector<TruthEntry> truth(3);
    truth[0] = {Slot::early, 1.25, 12.5, false};
    truth[1] = {std::nullopt, std::nan(""), std::nan(""), true};
    truth[2] = {Slot::central, -0.1, 99.000000001, false};
    std::stringstream ss;
    io::write_truth(ss, truth);
    const auto back = io::read_truth(ss);
    REQUIRE(back.size() == 3);
    CHECK(*back[0].slot == Slot::early);
    CHECK(back[0].phi == 1.25);
    CHECK(back[0].t_ref == 12.5);
    CHECK(back[1].background);
    CHECK_FALSE(back[1].slot.has_value());
    CHECK(std::isnan(back[1].phi));
    CHECK(back[2].t_ref == 99.000000001);

    std::istringstream broken("{\"slot\": \"central\"\nnot json\n");
    CHECK_THROWS_AS(io::read_truth(broken), DataError);
}

TEST_CASE("track and SLR round trip exactly")
{
    const PhysicalConstants k;
    PassProfile p;
    p.duration = 30.0;
    p.sample_step = 0.01;
    const PassTrack track = generate_pass(p, k);
    std::stringstream ss;
    io::write_track(ss, track);
    const PassTrack back = io::read_track(ss);
    REQUIRE(back.size() == track.size());
    for (std::size_t i = 0; i < track.size(); ++i) {
        const PassSample& a = track.samples()[i];
        const PassSample& b = back.samples()[i];
        CHECK(a.t == b.t);
        CHECK(a.slant == b.slant);
        CHECK(a.v_r == b.v_r);
        CHECK(a.rtt == b.rtt);
        CHECK(a.phi == b.phi);
    }

    const auto slr = simulate_slr(track, k, 0.1, 20e-12, 3);
    std::stringstream s2;
    io::write_slr(s2, slr);
    const auto slr_back = io::read_slr(s2);
    REQUIRE(slr_back.size() == slr.size());
    for (std::size_t i = 0; i < slr.size(); ++i)
        CHECK(slr_back[i].delta_t_rx == slr[i].delta_t_rx);

    std::istringstream unsorted("t,slant,v_r,beta,rtt,phi\n1,1,0,0,1,0\n0,1,0,0,1,0\n");
    CHECK_THROWS_AS(io::read_track(unsorted, "track.csv"), DataError);
}

TEST_CASE("report JSON")
{
    AnalysisReport r;
    r.records = 10;
    json j = io::report_to_json(r);
    CHECK(j["v_exp"].is_null());
    CHECK(j["p_wp"].is_null());
    CHECK(j["z"].is_null());
    CHECK_FALSE(j.contains("truth"));

    r.has_visibility = true;
    r.has_which_path = true;
    r.visibility.v_exp = 0.41;
    r.visibility.sigma_v = 0.04;
    r.which_path.p_wp = 0.95;
    r.z = 9.0;
    r.truth = TruthComparison{};
    j = io::report_to_json(r);
    CHECK(j["v_exp"].get<double>() == 0.41);
    CHECK(j["sigma_v"].get<double>() == 0.04);
    CHECK(j["p_wp"].get<double>() == 0.95);
    CHECK(j["z"].get<double>() == 9.0);
    CHECK(j.contains("truth"));
    CHECK(j.contains("count_balance"));
    CHECK(j["records"]["total"].get<std::size_t>() == 10);
}

TEST_CASE("bundled scenarios parse")
{
    for (const char* name : {"starlette.json", "beacon-c.json", "adversarial.json"}) {
        CAPTURE(name);
        const RunConfig c = load_config(std::filesystem::path(WDC_SCENARIO_DIR) / name);
        CHECK(c.seed.has_value());
        CHECK(c.sim.seed == *c.seed);
        CHECK(c.pass.duration > 100.0);
        // Round trip through the serializer.
        const RunConfig again = parse_config(to_json(c));
        CHECK(again.pass.duration == c.pass.duration);
        CHECK(again.sim.mu == c.sim.mu);
        CHECK(again.protocol.cycle_stride == c.protocol.cycle_stride);
        CHECK(again.protocol.force_bit == c.protocol.force_bit);
    }
    const RunConfig s = load_config(std::filesystem::path(WDC_SCENARIO_DIR) / "starlette.json");
    CHECK(s.pass.duration == doctest::Approx(290.386044100185).epsilon(1e-9));
    CHECK(s.sim.imperfections.visibility == 0.40);
}

TEST_CASE("configuration errors")
{
    CHECK(parse_config(json::object()).scenario == "unnamed");
    CHECK_FALSE(parse_config(json::object()).seed.has_value());

    CHECK_THROWS_WITH_AS(parse_config(json{{"simulation", {{"mew", 0.1}}}}),
                         doctest::Contains("simulation.mew"), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"simulation", {{"mu", "high"}}}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"simulation", {{"mu", 0.5}}}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"pass", {{"max_slant_m", 1.7e6}, {"duration_s", 10.0}}}}),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"protocol", {{"force_bit", 2}}}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"analysis", {{"bin_width_s", 100e-12}}}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"pass", 3}}), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}
