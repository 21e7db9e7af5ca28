#pragma once

// Monte Carlo time-tag generation for a full pass.

#include "wdc/orbit_kinematics.hpp"
#include "wdc/photonics.hpp"
#include "wdc/protocol.hpp"

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace wdc {

struct SimulationConfig {
    double pulse_rate = 1e8;        // Hz
    double mu = 2.2e-3;             // mean photons per pulse at the primary mirror
    double eta_opt = 0.13;          // receiving-path optical efficiency
    double eta_det_plus = 0.10;
    double eta_det_minus = 0.10;
    double jitter_rms = 0.5e-9;     // s
    double tagger_resolution = 81e-12; // s
    double background_rate = 0.0;   // counts/s per detector while the RX shutter is open
    double slr_timing_noise = 0.0;  // s rms on each received SLR spacing
    std::uint64_t seed = 0;
    ImperfectionModel imperfections;
    unsigned threads = 0;           // 0: hardware concurrency

    void validate() const;
    /// Absolute efficiency of a channel: eta_det times the relative factor.
    double channel_efficiency(Detector d) const;
};

struct TimeTagRecord {
    std::uint64_t tag = 0;  ///< units of the tagger resolution
    Detector channel = Detector::plus;
    std::int64_t cycle = 0;
    std::uint8_t bit = 0;

    auto operator<=>(const TimeTagRecord&) const = default;
};

struct TruthEntry {
    std::optional<Slot> slot; ///< empty for background
    double phi = 0.0;         ///< kinematic phase at reflection (NaN for background)
    double t_ref = 0.0;       ///< expected arrival of the central slot (NaN for background)
    bool background = false;
};

struct SimulationOutput {
    std::vector<TimeTagRecord> records;  ///< sorted
    std::vector<TruthEntry> truth;       ///< parallel to records
    std::int64_t accepted_pulses = 0;    ///< pulses whose arrival falls inside tau
};

/// Per-cycle RNG seed: splitmix64 of (seed, cycle).
std::uint64_t cycle_seed(std::uint64_t seed, std::int64_t cycle);

/// Generates detections for every scheduled cycle. Cycles are processed in
/// parallel with independent sub-seeds and merged in cycle order, so the
/// output does not depend on the thread count.
SimulationOutput simulate_pass(const PassTrack& pass, std::span<const CycleSchedule> schedules,
                               const SimulationConfig& config, const PhysicalConstants& constants);

/// P(n >= 2) for a Poisson photon number: 1 - e^-mu - mu e^-mu (about mu^2/2).
double multi_photon_fraction(double mu);

} // namespace wdc
