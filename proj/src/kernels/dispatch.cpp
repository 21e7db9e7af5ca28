#include "wdc/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace wdc::kernels {

namespace {

bool cpu_has_avx2()
{
#if defined(WDC_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

bool scalar_forced()
{
    const char* env = std::getenv("WDC_FORCE_SCALAR");
    return env != nullptr && std::string(env) != "0" && std::string(env) != "";
}

Isa detect()
{
    if (!scalar_forced() && cpu_has_avx2())
        return Isa::avx2;
    return Isa::scalar;
}

void require_same(std::size_t a, std::size_t b)
{
    if (a != b)
        throw std::invalid_argument("kernel span lengths differ");
}

} // namespace

Isa active_isa()
{
    static const Isa isa = detect();
    return isa;
}

std::string_view isa_name(Isa isa)
{
    switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    }
    return "unknown";
}

bool isa_available(Isa isa)
{
    return isa == Isa::scalar || cpu_has_avx2();
}

void kinematic_phase(std::span<const double> beta, double phase_scale, std::span<double> out)
{
    require_same(beta.size(), out.size());
#if defined(WDC_HAVE_AVX2)
    if (active_isa() == Isa::avx2)
        return avx2::kinematic_phase(beta, phase_scale, out);
#endif
    scalar::kinematic_phase(beta, phase_scale, out);
}

void doppler_velocity(std::span<const double> spacing_tx, std::span<const double> spacing_rx,
                      double c, std::span<double> out)
{
    require_same(spacing_tx.size(), spacing_rx.size());
    require_same(spacing_tx.size(), out.size());
#if defined(WDC_HAVE_AVX2)
    if (active_isa() == Isa::avx2)
        return avx2::doppler_velocity(spacing_tx, spacing_rx, c, out);
#endif
    scalar::doppler_velocity(spacing_tx, spacing_rx, c, out);
}

void round_trip_time(std::span<const double> slant, double c, std::span<double> out)
{
    require_same(slant.size(), out.size());
#if defined(WDC_HAVE_AVX2)
    if (active_isa() == Isa::avx2)
        return avx2::round_trip_time(slant, c, out);
#endif
    scalar::round_trip_time(slant, c, out);
}

void time_differences(std::span<const double> ticks, double resolution,
                      std::span<const double> reference, std::span<double> out)
{
    require_same(ticks.size(), reference.size());
    require_same(ticks.size(), out.size());
#if defined(WDC_HAVE_AVX2)
    if (active_isa() == Isa::avx2)
        return avx2::time_differences(ticks, resolution, reference, out);
#endif
    scalar::time_differences(ticks, resolution, reference, out);
}

WeightedMoments weighted_moments(std::span<const double> w, std::span<const double> y,
                                 std::span<const double> c)
{
    require_same(w.size(), y.size());
    require_same(w.size(), c.size());
#if defined(WDC_HAVE_AVX2)
    if (active_isa() == Isa::avx2)
        return avx2::weighted_moments(w, y, c);
#endif
    return scalar::weighted_moments(w, y, c);
}

double sum_squares(std::span<const double> x)
{
#if defined(WDC_HAVE_AVX2)
    if (active_isa() == Isa::avx2)
        return avx2::sum_squares(x);
#endif
    return scalar::sum_squares(x);
}

} // namespace wdc::kernels
