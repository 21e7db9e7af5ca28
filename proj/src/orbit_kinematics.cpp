#include "wdc/orbit_kinematics.hpp"

#include "wdc/error.hpp"
#include "wdc/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace wdc {

void PhysicalConstants::validate() const
{
    if (!(c > 0.0))
        throw ConfigError("speed of light must be positive");
    if (!(wavelength > 0.0))
        throw ConfigError("wavelength must be positive");
    if (!(mzi_unbalance > 0.0))
        throw ConfigError("MZI unbalance must be positive");
}

double PhysicalConstants::phase_scale() const
{
    return 2.0 * std::numbers::pi * c * mzi_unbalance / wavelength;
}

void PassProfile::validate() const
{
    if (!(altitude > 0.0))
        throw ConfigError("altitude must be positive");
    if (!(min_slant >= altitude))
        throw ConfigError("closest-approach slant range cannot be below the orbit altitude");
    if (!(min_slant <= 2.0 * kEarthRadius + altitude))
        throw ConfigError("closest-approach slant range exceeds the orbit diameter");
    if (!(duration > 0.0))
        throw ConfigError("pass duration must be positive");
    if (!(sample_step > 0.0))
        throw ConfigError("sample step must be positive");
}

PassTrack::PassTrack(std::vector<PassSample> samples) : samples_(std::move(samples))
{
    if (samples_.size() < 2) {
        step_ = 0.0;
        return;
    }
    for (std::size_t i = 1; i < samples_.size(); ++i) {
        if (!(samples_[i].t > samples_[i - 1].t))
            throw DataError("pass samples must be strictly increasing in time (sample " +
                            std::to_string(i) + ")");
    }
    step_ = (samples_.back().t - samples_.front().t) / double(samples_.size() - 1);
}

double PassTrack::start() const
{
    return samples_.empty() ? 0.0 : samples_.front().t;
}

double PassTrack::end() const
{
    return samples_.empty() ? 0.0 : samples_.back().t;
}

bool PassTrack::covers(double t) const
{
    return samples_.size() >= 2 && t >= start() && t <= end();
}

PassTrack::Bracket PassTrack::bracket(double t) const
{
    if (!covers(t))
        throw std::out_of_range("epoch " + std::to_string(t) + " s outside pass span");
    const std::size_t last = samples_.size() - 2;
    auto lo = static_cast<std::size_t>(
        std::clamp(std::floor((t - start()) / step_), 0.0, double(last)));
    // The nominal step is a good guess; correct for any non-uniformity.
    while (lo > 0 && samples_[lo].t > t)
        --lo;
    while (lo < last && samples_[lo + 1].t <= t)
        ++lo;
    const double t0 = samples_[lo].t;
    const double t1 = samples_[lo + 1].t;
    return {lo, (t - t0) / (t1 - t0)};
}

template <class Field>
double PassTrack::interpolate(double t, Field field) const
{
    const Bracket b = bracket(t);
    const double y0 = field(samples_[b.lo]);
    const double y1 = field(samples_[b.lo + 1]);
    return y0 + (y1 - y0) * b.frac;
}

double PassTrack::rtt_at(double t) const
{
    return interpolate(t, [](const PassSample& s) { return s.rtt; });
}

double PassTrack::slant_at(double t) const
{
    return interpolate(t, [](const PassSample& s) { return s.slant; });
}

double PassTrack::velocity_at(double t) const
{
    return interpolate(t, [](const PassSample& s) { return s.v_r; });
}

double PassTrack::beta_at(double t) const
{
    return interpolate(t, [](const PassSample& s) { return s.beta; });
}

namespace {

struct FlybyGeometry {
    double orbit_radius;
    double cos_offset; // cosine of the station's angular offset from the orbital plane
    double angular_rate;
    double min_slant;

    explicit FlybyGeometry(double altitude, double min_slant_)
        : orbit_radius(kEarthRadius + altitude),
          cos_offset((orbit_radius * orbit_radius + kEarthRadius * kEarthRadius -
                      min_slant_ * min_slant_) /
                     (2.0 * orbit_radius * kEarthRadius)),
          angular_rate(std::sqrt(kEarthGM / (orbit_radius * orbit_radius * orbit_radius))),
          min_slant(min_slant_)
    {
    }

    // slant^2 = d_min^2 + 4 r R cos(a) sin^2(theta/2)
    double slant(double theta) const
    {
        const double s = std::sin(0.5 * theta);
        return std::sqrt(min_slant * min_slant +
                         4.0 * orbit_radius * kEarthRadius * cos_offset * s * s);
    }

    double radial_velocity(double theta, double slant_range) const
    {
        return orbit_radius * kEarthRadius * cos_offset * std::sin(theta) * angular_rate /
               slant_range;
    }
};

} // namespace

PassTrack generate_pass(const PassProfile& profile, const PhysicalConstants& constants)
{
    profile.validate();
    constants.validate();

    const FlybyGeometry geo(profile.altitude, profile.min_slant);
    const auto n = static_cast<std::size_t>(std::floor(profile.duration / profile.sample_step + 1e-9)) + 1;
    const double t_mid = 0.5 * profile.duration;

    std::vector<PassSample> samples(n);
    std::vector<double> slant(n), beta(n), rtt(n), phi(n);
    for (std::size_t k = 0; k < n; ++k) {
        PassSample& s = samples[k];
        s.t = double(k) * profile.sample_step;
        const double theta = geo.angular_rate * (s.t - t_mid);
        s.slant = geo.slant(theta);
        s.v_r = geo.radial_velocity(theta, s.slant);
        s.beta = s.v_r / constants.c;
        slant[k] = s.slant;
        beta[k] = s.beta;
    }
    kernels::round_trip_time(slant, constants.c, rtt);
    kernels::kinematic_phase(beta, constants.phase_scale(), phi);
    for (std::size_t k = 0; k < n; ++k) {
        if (!(std::abs(samples[k].beta) < 1e-4))
            throw ConfigError("radial velocity outside the low-Earth-orbit regime");
        samples[k].rtt = rtt[k];
        samples[k].phi = phi[k];
    }
    return PassTrack(std::move(samples));
}

double pass_duration_for_slant(double altitude, double min_slant, double max_slant)
{
    if (!(max_slant >= min_slant))
        throw ConfigError("max slant must not be below min slant");
    const FlybyGeometry geo(altitude, min_slant);
    const double k = 4.0 * geo.orbit_radius * kEarthRadius * geo.cos_offset;
    const double s2 = (max_slant * max_slant - min_slant * min_slant) / k;
    if (!(s2 <= 1.0))
        throw ConfigError("max slant unreachable on this orbit");
    const double theta = 2.0 * std::asin(std::sqrt(s2));
    return 2.0 * theta / geo.angular_rate;
}

double kinematic_phase(double beta, const PhysicalConstants& constants)
{
    if (!(std::abs(beta) < 1.0))
        throw std::domain_error("|beta| must be below 1");
    double out = 0.0;
    kernels::scalar::kinematic_phase({&beta, 1}, constants.phase_scale(), {&out, 1});
    return out;
}

double round_trip_time(double slant, const PhysicalConstants& constants)
{
    if (!(slant > 0.0))
        throw std::domain_error("slant range must be positive");
    return 2.0 * slant / constants.c;
}

double doppler_velocity(const SlrObservation& obs, const PhysicalConstants& constants)
{
    if (!(obs.delta_t_rx + obs.delta_t_tx > 0.0))
        throw std::domain_error("SLR spacings must sum to a positive value");
    return constants.c * (obs.delta_t_rx - obs.delta_t_tx) / (obs.delta_t_rx + obs.delta_t_tx);
}

double slr_received_spacing(double v_r, double delta_t_tx, const PhysicalConstants& constants)
{
    const double beta = v_r / constants.c;
    return delta_t_tx * (1.0 + beta) / (1.0 - beta);
}

double predicted_arrival(double t_tx, const PassTrack& pass)
{
    return t_tx + pass.rtt_at(t_tx);
}

std::vector<SlrObservation> simulate_slr(const PassTrack& pass, const PhysicalConstants& constants,
                                         double slr_period, double timing_noise_rms,
                                         std::uint64_t seed)
{
    if (!(slr_period > 0.0))
        throw ConfigError("SLR period must be positive");
    if (!(timing_noise_rms >= 0.0))
        throw ConfigError("SLR timing noise must be non-negative");
    std::vector<SlrObservation> out;
    if (pass.size() < 2)
        return out;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    const auto count = static_cast<std::size_t>(std::floor((pass.end() - pass.start()) / slr_period + 1e-9)) + 1;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        SlrObservation obs;
        obs.t = pass.start() + double(k) * slr_period;
        obs.delta_t_tx = slr_period;
        obs.delta_t_rx = slr_received_spacing(pass.velocity_at(obs.t), slr_period, constants);
        if (timing_noise_rms > 0.0)
            obs.delta_t_rx += timing_noise_rms * noise(rng);
        out.push_back(obs);
    }
    return out;
}

SlrVelocityTrack::SlrVelocityTrack(std::span<const SlrObservation> observations,
                                   const PhysicalConstants& constants)
{
    const std::size_t n = observations.size();
    epochs_.resize(n);
    velocity_.resize(n);
    std::vector<double> tx(n), rx(n);
    for (std::size_t i = 0; i < n; ++i) {
        epochs_[i] = observations[i].t;
        tx[i] = observations[i].delta_t_tx;
        rx[i] = observations[i].delta_t_rx;
        if (!(tx[i] + rx[i] > 0.0))
            throw DataError("SLR observation " + std::to_string(i) + " has non-positive spacings");
        if (i > 0 && !(epochs_[i] > epochs_[i - 1]))
            throw DataError("SLR observations must be strictly increasing in time");
    }
    kernels::doppler_velocity(tx, rx, constants.c, velocity_);
}

SlrVelocityTrack SlrVelocityTrack::from_pass(const PassTrack& pass)
{
    SlrVelocityTrack track;
    for (const PassSample& s : pass.samples()) {
        track.epochs_.push_back(s.t);
        track.velocity_.push_back(s.v_r);
    }
    return track;
}

bool SlrVelocityTrack::covers(double t) const
{
    return epochs_.size() >= 2 && t >= epochs_.front() && t <= epochs_.back();
}

double SlrVelocityTrack::velocity_at(double t) const
{
    if (!covers(t))
        throw std::out_of_range("epoch " + std::to_string(t) + " s not covered by the SLR track");
    auto it = std::upper_bound(epochs_.begin(), epochs_.end(), t);
    std::size_t hi = std::min<std::size_t>(std::size_t(it - epochs_.begin()), epochs_.size() - 1);
    const std::size_t lo = hi - 1;
    const double frac = (t - epochs_[lo]) / (epochs_[hi] - epochs_[lo]);
    return velocity_[lo] + (velocity_[hi] - velocity_[lo]) * frac;
}

} // namespace wdc
