#pragma once

// Satellite pass kinematics: slant range, radial velocity, round-trip time and
// the kinematic phase the moving retroreflector imprints between time-bins.
//
// Sign convention: positive radial velocity means the satellite recedes from
// the station (received pulse spacing is stretched).

#include <cstdint>
#include <span>
#include <vector>

namespace wdc {

inline constexpr double kSpeedOfLight = 299'792'458.0; // m/s, exact
inline constexpr double kEarthRadius = 6'371'000.0;    // m, mean
inline constexpr double kEarthGM = 3.986004418e14;     // m^3/s^2

struct PhysicalConstants {
    double c = kSpeedOfLight;
    double wavelength = 532e-9;    // m
    double mzi_unbalance = 3.498e-9; // s, time-bin separation

    void validate() const;
    /// 2*pi*c*dt/lambda; the phase is (2 beta/(1+beta)) times this.
    double phase_scale() const;
};

struct PassProfile {
    double altitude = 800e3;  // m
    double min_slant = 1454e3; // m, closest approach
    double duration = 290.2;  // s
    double sample_step = 1e-3; // s

    void validate() const;
};

struct PassSample {
    double t = 0.0;     // s since pass start
    double slant = 0.0; // m
    double v_r = 0.0;   // m/s, positive receding
    double beta = 0.0;  // v_r / c
    double rtt = 0.0;   // s
    double phi = 0.0;   // rad
};

struct SlrObservation {
    double t = 0.0;             // epoch the spacing refers to, s
    double delta_t_tx = 0.1;    // transmitted SLR pulse spacing, s
    double delta_t_rx = 0.1;    // received SLR pulse spacing, s
};

/// Uniformly sampled pass. Immutable once built; lookups interpolate linearly.
class PassTrack {
public:
    PassTrack() = default;
    /// Samples must be sorted by epoch and (approximately) uniformly spaced.
    explicit PassTrack(std::vector<PassSample> samples);

    std::span<const PassSample> samples() const { return samples_; }
    bool empty() const { return samples_.empty(); }
    std::size_t size() const { return samples_.size(); }
    double start() const;
    double end() const;
    double step() const { return step_; }
    bool covers(double t) const;

    /// Linear interpolation; throws std::out_of_range outside [start, end].
    double rtt_at(double t) const;
    double slant_at(double t) const;
    double velocity_at(double t) const;
    double beta_at(double t) const;

private:
    struct Bracket {
        std::size_t lo;
        double frac;
    };
    Bracket bracket(double t) const;
    template <class Field>
    double interpolate(double t, Field field) const;

    std::vector<PassSample> samples_;
    double step_ = 0.0;
};

/// Planar flyby over a non-rotating Earth: circular orbit at `altitude`, the
/// station offset from the orbital plane so the closest approach (at mid-pass)
/// equals `min_slant`. Throws ConfigError if the geometry is unsatisfiable.
PassTrack generate_pass(const PassProfile& profile, const PhysicalConstants& constants);

/// Pass duration whose end points sit at `max_slant` (symmetric about closest approach).
double pass_duration_for_slant(double altitude, double min_slant, double max_slant);

double kinematic_phase(double beta, const PhysicalConstants& constants);
double round_trip_time(double slant, const PhysicalConstants& constants);

/// v_r = c (dT' - dT) / (dT' + dT)
double doppler_velocity(const SlrObservation& obs, const PhysicalConstants& constants);
/// Forward map of doppler_velocity: dT' = dT (1 + beta) / (1 - beta).
double slr_received_spacing(double v_r, double delta_t_tx, const PhysicalConstants& constants);

/// Expected arrival of a pulse transmitted at t_tx: t_tx + rtt(t_tx).
double predicted_arrival(double t_tx, const PassTrack& pass);

/// 10 Hz SLR spacing measurements along the pass, with Gaussian timing noise
/// (rms, seconds) on each received spacing.
std::vector<SlrObservation> simulate_slr(const PassTrack& pass, const PhysicalConstants& constants,
                                         double slr_period, double timing_noise_rms,
                                         std::uint64_t seed);

/// Radial-velocity track reconstructed from SLR spacings.
class SlrVelocityTrack {
public:
    SlrVelocityTrack(std::span<const SlrObservation> observations,
                     const PhysicalConstants& constants);
    /// Velocity taken directly from a pass (noiseless ranging).
    static SlrVelocityTrack from_pass(const PassTrack& pass);

    bool covers(double t) const;
    /// Linearly interpolated v_r; throws std::out_of_range if uncovered.
    double velocity_at(double t) const;
    std::span<const double> epochs() const { return epochs_; }

private:
    SlrVelocityTrack() = default;
    std::vector<double> epochs_;
    std::vector<double> velocity_;
};

} // namespace wdc
