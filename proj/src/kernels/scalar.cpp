#include "wdc/kernels.hpp"

#include <cstddef>

namespace wdc::kernels::scalar {

void kinematic_phase(std::span<const double> beta, double phase_scale, std::span<double> out)
{
    for (std::size_t i = 0; i < beta.size(); ++i) {
        const double num = 2.0 * beta[i];
        const double den = 1.0 + beta[i];
        out[i] = (num / den) * phase_scale;
    }
}

void doppler_velocity(std::span<const double> spacing_tx, std::span<const double> spacing_rx,
                      double c, std::span<double> out)
{
    for (std::size_t i = 0; i < spacing_tx.size(); ++i) {
        const double diff = spacing_rx[i] - spacing_tx[i];
        const double sum = spacing_rx[i] + spacing_tx[i];
        out[i] = (c * diff) / sum;
    }
}

void round_trip_time(std::span<const double> slant, double c, std::span<double> out)
{
    for (std::size_t i = 0; i < slant.size(); ++i)
        out[i] = (2.0 * slant[i]) / c;
}

void time_differences(std::span<const double> ticks, double resolution,
                      std::span<const double> reference, std::span<double> out)
{
    for (std::size_t i = 0; i < ticks.size(); ++i)
        out[i] = ticks[i] * resolution - reference[i];
}

WeightedMoments weighted_moments(std::span<const double> w, std::span<const double> y,
                                 std::span<const double> c)
{
    WeightedMoments m;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double wc = w[i] * c[i];
        m.sum_wyc += wc * y[i];
        m.sum_wcc += wc * c[i];
    }
    return m;
}

double sum_squares(std::span<const double> x)
{
    double s = 0.0;
    for (double v : x)
        s += v * v;
    return s;
}

} // namespace wdc::kernels::scalar
