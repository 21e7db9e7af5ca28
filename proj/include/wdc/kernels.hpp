#pragma once

// Batched arithmetic kernels used on the hot paths (pass generation, delta
// computation, visibility normal equations).
//
// Every kernel has a scalar reference in wdc::kernels::scalar. On x86-64 an
// AVX2 variant lives in wdc::kernels::avx2 and is selected at runtime when the
// CPU supports it. Elementwise kernels are bit-identical across variants;
// reductions agree to rounding (different summation order).
//
// Set WDC_FORCE_SCALAR=1 in the environment to pin the scalar path.

#include <span>
#include <string_view>

namespace wdc::kernels {

enum class Isa { scalar, avx2 };

struct WeightedMoments {
    double sum_wyc = 0.0; ///< sum of w*y*c
    double sum_wcc = 0.0; ///< sum of w*c*c
};

namespace scalar {
void kinematic_phase(std::span<const double> beta, double phase_scale, std::span<double> out);
void doppler_velocity(std::span<const double> spacing_tx, std::span<const double> spacing_rx,
                      double c, std::span<double> out);
void round_trip_time(std::span<const double> slant, double c, std::span<double> out);
void time_differences(std::span<const double> ticks, double resolution,
                      std::span<const double> reference, std::span<double> out);
WeightedMoments weighted_moments(std::span<const double> w, std::span<const double> y,
                                 std::span<const double> c);
double sum_squares(std::span<const double> x);
} // namespace scalar

#if defined(WDC_HAVE_AVX2)
namespace avx2 {
void kinematic_phase(std::span<const double> beta, double phase_scale, std::span<double> out);
void doppler_velocity(std::span<const double> spacing_tx, std::span<const double> spacing_rx,
                      double c, std::span<double> out);
void round_trip_time(std::span<const double> slant, double c, std::span<double> out);
void time_differences(std::span<const double> ticks, double resolution,
                      std::span<const double> reference, std::span<double> out);
WeightedMoments weighted_moments(std::span<const double> w, std::span<const double> y,
                                 std::span<const double> c);
double sum_squares(std::span<const double> x);
} // namespace avx2
#endif

/// Best variant supported by both the build and the running CPU.
Isa active_isa();
std::string_view isa_name(Isa isa);
bool isa_available(Isa isa);

// Dispatched entry points. Spans must have matching lengths (checked).

/// out[i] = 2*beta[i]/(1+beta[i]) * phase_scale
void kinematic_phase(std::span<const double> beta, double phase_scale, std::span<double> out);
/// out[i] = c*(rx[i]-tx[i])/(rx[i]+tx[i])
void doppler_velocity(std::span<const double> spacing_tx, std::span<const double> spacing_rx,
                      double c, std::span<double> out);
/// out[i] = 2*slant[i]/c
void round_trip_time(std::span<const double> slant, double c, std::span<double> out);
/// out[i] = ticks[i]*resolution - reference[i]
void time_differences(std::span<const double> ticks, double resolution,
                      std::span<const double> reference, std::span<double> out);
WeightedMoments weighted_moments(std::span<const double> w, std::span<const double> y,
                                 std::span<const double> c);
double sum_squares(std::span<const double> x);

} // namespace wdc::kernels
