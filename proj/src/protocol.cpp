#include "wdc/protocol.hpp"

#include "wdc/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace wdc {

void ProtocolParams::validate() const
{
    if (!(slr_period > 0.0))
        throw ConfigError("SLR period must be positive");
    if (!(t_trans > 0.0))
        throw ConfigError("shutter transition time must be positive");
    if (!(t_shwp >= 0.0))
        throw ConfigError("sHWP settling time must be non-negative");
    if (cycle_stride < 1)
        throw ConfigError("cycle stride must be at least 1");
    if (!(rtt_scale > 0.0))
        throw ConfigError("rtt scale must be positive");
    if (force_bit && *force_bit > 1)
        throw ConfigError("forced bit must be 0 or 1");
}

Window CycleSchedule::first_segment() const
{
    return {std::max(tau_window.begin, t_b1 + t_shwp), std::min(tau_window.end, t_b2)};
}

Window CycleSchedule::second_segment() const
{
    return {std::max(tau_window.begin, t_b2 + t_shwp), tau_window.end};
}

CycleSchedule build_cycle(double rtt, double t_slr, std::int64_t cycle_index,
                          const ProtocolParams& params, std::uint8_t b1, std::uint8_t b2)
{
    params.validate();
    const double half = 0.5 * params.slr_period;
    if (!(rtt > params.t_trans + 2.0 * params.t_shwp) || !(rtt < half))
        throw ConfigError("round-trip time " + std::to_string(rtt) +
                          " s outside the workable regime of the cycle");
    if (b1 > 1 || b2 > 1)
        throw std::invalid_argument("choice bits must be 0 or 1");

    CycleSchedule s;
    s.cycle_index = cycle_index;
    s.t_slr = t_slr;
    s.rtt = rtt;
    s.tx_window = {t_slr, t_slr + half};
    s.rx_window = {t_slr + half, t_slr + params.slr_period};
    s.t_trans = params.t_trans;
    s.t_b1 = t_slr + half;
    s.t_b2 = s.t_b1 + 0.5 * rtt;
    const double begin = s.t_b1 + 0.5 * params.t_trans;
    s.tau_window = {begin, begin + (rtt - params.t_trans)};
    s.b1 = b1;
    s.b2 = b2;
    s.t_shwp = params.t_shwp;
    return s;
}

std::vector<std::uint8_t> qrng_bits(std::uint64_t seed, std::size_t n)
{
    std::vector<std::uint8_t> bits(n);
    std::mt19937_64 rng(seed);
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i % 64 == 0)
            word = rng();
        bits[i] = static_cast<std::uint8_t>((word >> (i % 64)) & 1u);
    }
    return bits;
}

std::vector<CycleSchedule> build_schedules(const PassTrack& pass, const ProtocolParams& params,
                                           std::uint64_t seed)
{
    params.validate();
    std::vector<CycleSchedule> out;
    if (pass.size() < 2)
        return out;
    const auto total = static_cast<std::int64_t>(
        std::floor((pass.end() - pass.start()) / params.slr_period + 1e-9));
    if (total <= 0)
        return out;
    const std::vector<std::uint8_t> bits = qrng_bits(seed, 2 * std::size_t(total));
    for (std::int64_t k = 0; k < total; k += params.cycle_stride) {
        const double t_slr = pass.start() + double(k) * params.slr_period;
        const double rtt = pass.rtt_at(t_slr + 0.5 * params.slr_period) * params.rtt_scale;
        std::uint8_t b1 = bits[2 * std::size_t(k)];
        std::uint8_t b2 = bits[2 * std::size_t(k) + 1];
        if (params.force_bit)
            b1 = b2 = *params.force_bit;
        CycleSchedule c = build_cycle(rtt, t_slr, k, params, b1, b2);
        if (!pass.covers(c.rx_window.end))
            break;
        out.push_back(c);
    }
    return out;
}

std::string_view to_string(IntervalType t)
{
    switch (t) {
    case IntervalType::spacelike: return "spacelike";
    case IntervalType::timelike: return "timelike";
    case IntervalType::lightlike: return "lightlike";
    }
    return "?";
}

IntervalType interval_classify(const SpacetimeEvent& e1, const SpacetimeEvent& e2, double c)
{
    const double ct = c * (e2.t - e1.t);
    const double dx = e2.x - e1.x;
    const double time2 = ct * ct;
    const double space2 = dx * dx;
    const double scale = std::max(time2, space2);
    const double s = time2 - space2;
    if (scale == 0.0 || std::abs(s) <= 1e-12 * scale)
        return IntervalType::lightlike;
    return s < 0.0 ? IntervalType::spacelike : IntervalType::timelike;
}

double spacelike_margin(const SpacetimeEvent& e1, const SpacetimeEvent& e2, double c)
{
    return std::abs(e2.x - e1.x) - c * std::abs(e2.t - e1.t);
}

BitAssignment governing_bit(double t_det, const CycleSchedule& s)
{
    if (!s.rx_window.contains(t_det))
        throw std::out_of_range("detection epoch outside the RX window of cycle " +
                                std::to_string(s.cycle_index));
    BitAssignment a;
    a.in_tau = s.tau_window.contains(t_det);
    if (t_det < s.t_b1 + s.t_shwp) {
        a.segment = Segment::settling;
        a.bit = s.b1;
    } else if (t_det < s.t_b2) {
        a.segment = Segment::first;
        a.bit = s.b1;
    } else if (t_det < s.t_b2 + s.t_shwp) {
        a.segment = Segment::settling;
        a.bit = s.b2;
    } else {
        a.segment = Segment::second;
        a.bit = s.b2;
    }
    return a;
}

CausalityReport verify_delayed_choice(std::span<const CycleSchedule> schedules,
                                      const PassTrack& pass, const PhysicalConstants& constants)
{
    // Margin varies smoothly along a window; sampling both ends plus interior
    // points catches the extremes.
    constexpr int kSamplesPerWindow = 17;

    CausalityReport report;
    report.min_margin_m = std::numeric_limits<double>::infinity();
    for (const CycleSchedule& s : schedules) {
        CycleCausality cycle;
        cycle.cycle_index = s.cycle_index;
        cycle.slant = pass.slant_at(s.t_b1);
        cycle.min_margin_m = std::numeric_limits<double>::infinity();

        const struct {
            ChoiceWhich which;
            Window window;
            double t_choice;
        } groups[] = {{ChoiceWhich::first, s.first_segment(), s.t_b1},
                      {ChoiceWhich::second, s.second_segment(), s.t_b2}};

        for (const auto& g : groups) {
            if (g.window.empty())
                continue;
            ++report.groups_checked;
            const SpacetimeEvent choice{g.t_choice, 0.0};
            std::optional<CausalityViolation> worst;
            double latest_reflection = -std::numeric_limits<double>::infinity();
            for (int i = 0; i < kSamplesPerWindow; ++i) {
                const double t_det =
                    g.window.begin + g.window.length() * double(i) / (kSamplesPerWindow - 1);
                const double t_ref = t_det - 0.5 * s.rtt;
                if (!pass.covers(t_ref))
                    throw DataError("reflection epoch of cycle " + std::to_string(s.cycle_index) +
                                    " outside the pass track");
                latest_reflection = std::max(latest_reflection, t_ref);
                const SpacetimeEvent reflection{t_ref, pass.slant_at(t_ref)};
                const double margin = spacelike_margin(choice, reflection, constants.c);
                cycle.min_margin_m = std::min(cycle.min_margin_m, margin);
                const IntervalType kind = interval_classify(choice, reflection, constants.c);
                if (kind != IntervalType::spacelike && (!worst || margin < worst->margin_m))
                    worst = CausalityViolation{s.cycle_index, g.which, t_det, t_ref, margin, kind};
            }
            if (worst)
                report.violations.push_back(*worst);
            // The last photon of the first group reflects exactly at t_b1; allow rounding.
            const bool before = latest_reflection <= g.t_choice + 1e-9;
            if (before)
                ++report.groups_reflected_before_choice;
            if (g.which == ChoiceWhich::first)
                cycle.reflected_before_first = before;
            else
                cycle.reflected_before_second = before;
        }
        report.min_margin_m = std::min(report.min_margin_m, cycle.min_margin_m);
        report.cycles.push_back(cycle);
    }
    if (report.cycles.empty())
        report.min_margin_m = 0.0;
    return report;
}

void to_json(nlohmann::json& j, const CausalityReport& report)
{
    using nlohmann::json;
    constexpr std::size_t kMaxListedViolations = 1000;

    json cycles = json::array();
    for (const CycleCausality& c : report.cycles) {
        cycles.push_back({{"cycle", c.cycle_index},
                          {"slant_km", c.slant / 1e3},
                          {"margin_km", c.min_margin_m / 1e3},
                          {"reflected_before_first", c.reflected_before_first},
                          {"reflected_before_second", c.reflected_before_second}});
    }
    json violations = json::array();
    for (std::size_t i = 0; i < report.violations.size() && i < kMaxListedViolations; ++i) {
        const CausalityViolation& v = report.violations[i];
        violations.push_back({{"cycle", v.cycle_index},
                              {"choice", v.which == ChoiceWhich::first ? "first" : "second"},
                              {"detection_epoch_s", v.detection_epoch},
                              {"reflection_epoch_s", v.reflection_epoch},
                              {"margin_km", v.margin_m / 1e3},
                              {"interval", std::string(to_string(v.interval))}});
    }
    j = json{{"ok", report.ok()},
             {"cycles_checked", report.cycles.size()},
             {"min_margin_km", report.min_margin_m / 1e3},
             {"violation_count", report.violations.size()},
             {"violations", violations},
             {"groups",
              {{"checked", report.groups_checked},
               {"reflected_before_choice", report.groups_reflected_before_choice},
               {"property_holds", report.group_property_holds()}}},
             {"cycles", cycles}};
}

PulseRange pulses_arriving_in(const CycleSchedule& schedule, const Window& window,
                              const PassTrack& pass, double pulse_rate)
{
    PulseRange r;
    r.t_first = schedule.tx_window.begin;
    r.period = 1.0 / pulse_rate;
    const auto n_tx = static_cast<std::int64_t>(std::floor(schedule.tx_window.length() * pulse_rate));
    if (n_tx <= 0 || window.empty())
        return r;
    auto arrival = [&](std::int64_t k) { return predicted_arrival(r.transmit_epoch(k), pass); };

    // Arrival epochs increase monotonically with pulse index.
    std::int64_t lo = 0, hi = n_tx;
    while (lo < hi) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (arrival(mid) < window.begin)
            lo = mid + 1;
        else
            hi = mid;
    }
    r.lo = lo;
    lo = 0;
    hi = n_tx;
    while (lo < hi) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (arrival(mid) <= window.end)
            lo = mid + 1;
        else
            hi = mid;
    }
    r.hi = lo - 1;
    return r;
}

} // namespace wdc
