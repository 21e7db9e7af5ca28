#pragma once

// The 100 ms SLR cycle: shutter windows, the acceptance window
// tau = rtt - t_trans, the two delayed choices, and the causality check
// between each choice and the satellite reflections it governs.

#include "wdc/orbit_kinematics.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace wdc {

struct Window {
    double begin = 0.0;
    double end = 0.0;

    double length() const { return end - begin; }
    bool contains(double t) const { return t >= begin && t <= end; }
    bool empty() const { return !(end > begin); }
};

struct ProtocolParams {
    double slr_period = 0.1;  // s, one cycle between SLR pulses
    double t_trans = 5e-3;    // s, shutter transition
    double t_shwp = 500e-6;   // s, sHWP settling after each choice
    int cycle_stride = 1;     // run the protocol on every Nth SLR cycle
    double rtt_scale = 1.0;   // schedule rtt multiplier (adversarial testing only)
    std::optional<std::uint8_t> force_bit; // replace QRNG output (calibration runs)

    void validate() const;
};

struct CycleSchedule {
    std::int64_t cycle_index = 0;
    double t_slr = 0.0;
    double rtt = 0.0;
    Window tx_window;
    Window rx_window;
    double t_trans = 0.0;
    Window tau_window;
    double t_b1 = 0.0;
    double t_b2 = 0.0;
    std::uint8_t b1 = 0;
    std::uint8_t b2 = 0;
    double t_shwp = 0.0;

    double tau() const { return rtt - t_trans; }
    /// Detections governed by b1 / b2 that fall inside tau, settling removed.
    Window first_segment() const;
    Window second_segment() const;
};

/// Throws ConfigError unless t_trans + 2 t_shwp < rtt < half the SLR period.
CycleSchedule build_cycle(double rtt, double t_slr, std::int64_t cycle_index,
                          const ProtocolParams& params, std::uint8_t b1 = 0, std::uint8_t b2 = 0);

/// Simulated QRNG: deterministic in `seed`, unbiased.
std::vector<std::uint8_t> qrng_bits(std::uint64_t seed, std::size_t n);

/// One schedule per active cycle that fits inside the pass. The schedule rtt
/// is the pass rtt at the first choice epoch, times params.rtt_scale.
std::vector<CycleSchedule> build_schedules(const PassTrack& pass, const ProtocolParams& params,
                                           std::uint64_t seed);

enum class IntervalType { spacelike, timelike, lightlike };
std::string_view to_string(IntervalType t);

struct SpacetimeEvent {
    double t = 0.0; // s
    double x = 0.0; // m, radial distance from the detectors
};

/// Sign of c^2 dt^2 - dx^2; |value| within 1e-12 of the larger term is lightlike.
IntervalType interval_classify(const SpacetimeEvent& e1, const SpacetimeEvent& e2, double c);
/// |dx| - c|dt|, positive when spacelike.
double spacelike_margin(const SpacetimeEvent& e1, const SpacetimeEvent& e2, double c);

enum class Segment { first, second, settling };

struct BitAssignment {
    Segment segment = Segment::settling;
    std::uint8_t bit = 0;  ///< sHWP setting in force (the tagger's recorded bit)
    bool in_tau = false;   ///< inside the acceptance window
    bool accepted() const { return in_tau && segment != Segment::settling; }
};

/// Throws std::out_of_range if t_det lies outside the RX window.
BitAssignment governing_bit(double t_det, const CycleSchedule& schedule);

enum class ChoiceWhich { first, second };

struct ChoiceRecord {
    std::int64_t cycle_index = 0;
    ChoiceWhich which = ChoiceWhich::first;
    double epoch = 0.0;
    std::uint8_t bit = 0;
};

struct CausalityViolation {
    std::int64_t cycle_index = 0;
    ChoiceWhich which = ChoiceWhich::first;
    double detection_epoch = 0.0;
    double reflection_epoch = 0.0;
    double margin_m = 0.0;
    IntervalType interval = IntervalType::timelike;
};

struct CycleCausality {
    std::int64_t cycle_index = 0;
    double slant = 0.0;          ///< at the first choice, m
    double min_margin_m = 0.0;   ///< worst spacelike slack over both groups
    bool reflected_before_first = true;
    bool reflected_before_second = true;
};

struct CausalityReport {
    std::vector<CycleCausality> cycles;
    std::vector<CausalityViolation> violations;
    double min_margin_m = 0.0;
    std::size_t groups_checked = 0;
    std::size_t groups_reflected_before_choice = 0;

    bool ok() const { return !cycles.empty() && violations.empty(); }
    bool group_property_holds() const { return groups_checked == groups_reflected_before_choice; }
};

/// Choice events sit at x = 0 (co-located with the detectors). For every
/// accepted detection the reflection event (t_det - rtt/2, slant) must be
/// spacelike separated from its governing choice.
CausalityReport verify_delayed_choice(std::span<const CycleSchedule> schedules,
                                      const PassTrack& pass, const PhysicalConstants& constants);

void to_json(nlohmann::json& j, const CausalityReport& report);

/// Pulses of one cycle's TX train whose predicted arrival falls in `window`.
struct PulseRange {
    double t_first = 0.0;     ///< transmit epoch of pulse index 0 (cycle start)
    double period = 0.0;
    std::int64_t lo = 0;      ///< first accepted index
    std::int64_t hi = -1;     ///< last accepted index (inclusive)

    std::int64_t count() const { return hi >= lo ? hi - lo + 1 : 0; }
    double transmit_epoch(std::int64_t k) const { return t_first + double(k) * period; }
};

PulseRange pulses_arriving_in(const CycleSchedule& schedule, const Window& window,
                              const PassTrack& pass, double pulse_rate);

} // namespace wdc
