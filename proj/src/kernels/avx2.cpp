// AVX2 variants. This translation unit is compiled with -mavx2 -mfma; callers
// must go through the dispatcher, which checks CPU support first.

#include "wdc/kernels.hpp"

#include <immintrin.h>

#include <cstddef>

namespace wdc::kernels::avx2 {

namespace {

constexpr std::size_t kLanes = 4;

double horizontal_sum(__m256d v)
{
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d pair = _mm_add_pd(lo, hi);
    const __m128d swapped = _mm_unpackhi_pd(pair, pair);
    return _mm_cvtsd_f64(_mm_add_sd(pair, swapped));
}

} // namespace

void kinematic_phase(std::span<const double> beta, double phase_scale, std::span<double> out)
{
    const std::size_t n = beta.size();
    const __m256d two = _mm256_set1_pd(2.0);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d scale = _mm256_set1_pd(phase_scale);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d b = _mm256_loadu_pd(beta.data() + i);
        const __m256d num = _mm256_mul_pd(two, b);
        const __m256d den = _mm256_add_pd(one, b);
        _mm256_storeu_pd(out.data() + i, _mm256_mul_pd(_mm256_div_pd(num, den), scale));
    }
    scalar::kinematic_phase(beta.subspan(i), phase_scale, out.subspan(i));
}

void doppler_velocity(std::span<const double> spacing_tx, std::span<const double> spacing_rx,
                      double c, std::span<double> out)
{
    const std::size_t n = spacing_tx.size();
    const __m256d vc = _mm256_set1_pd(c);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d tx = _mm256_loadu_pd(spacing_tx.data() + i);
        const __m256d rx = _mm256_loadu_pd(spacing_rx.data() + i);
        const __m256d diff = _mm256_sub_pd(rx, tx);
        const __m256d sum = _mm256_add_pd(rx, tx);
        _mm256_storeu_pd(out.data() + i, _mm256_div_pd(_mm256_mul_pd(vc, diff), sum));
    }
    scalar::doppler_velocity(spacing_tx.subspan(i), spacing_rx.subspan(i), c, out.subspan(i));
}

void round_trip_time(std::span<const double> slant, double c, std::span<double> out)
{
    const std::size_t n = slant.size();
    const __m256d two = _mm256_set1_pd(2.0);
    const __m256d vc = _mm256_set1_pd(c);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d s = _mm256_loadu_pd(slant.data() + i);
        _mm256_storeu_pd(out.data() + i, _mm256_div_pd(_mm256_mul_pd(two, s), vc));
    }
    scalar::round_trip_time(slant.subspan(i), c, out.subspan(i));
}

void time_differences(std::span<const double> ticks, double resolution,
                      std::span<const double> reference, std::span<double> out)
{
    const std::size_t n = ticks.size();
    const __m256d res = _mm256_set1_pd(resolution);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d t = _mm256_mul_pd(_mm256_loadu_pd(ticks.data() + i), res);
        const __m256d r = _mm256_loadu_pd(reference.data() + i);
        _mm256_storeu_pd(out.data() + i, _mm256_sub_pd(t, r));
    }
    scalar::time_differences(ticks.subspan(i), resolution, reference.subspan(i), out.subspan(i));
}

WeightedMoments weighted_moments(std::span<const double> w, std::span<const double> y,
                                 std::span<const double> c)
{
    const std::size_t n = w.size();
    __m256d acc_wyc = _mm256_setzero_pd();
    __m256d acc_wcc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d vw = _mm256_loadu_pd(w.data() + i);
        const __m256d vy = _mm256_loadu_pd(y.data() + i);
        const __m256d vc = _mm256_loadu_pd(c.data() + i);
        const __m256d wc = _mm256_mul_pd(vw, vc);
        acc_wyc = _mm256_fmadd_pd(wc, vy, acc_wyc);
        acc_wcc = _mm256_fmadd_pd(wc, vc, acc_wcc);
    }
    WeightedMoments m{horizontal_sum(acc_wyc), horizontal_sum(acc_wcc)};
    const WeightedMoments tail = scalar::weighted_moments(w.subspan(i), y.subspan(i), c.subspan(i));
    m.sum_wyc += tail.sum_wyc;
    m.sum_wcc += tail.sum_wcc;
    return m;
}

double sum_squares(std::span<const double> x)
{
    const std::size_t n = x.size();
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d v = _mm256_loadu_pd(x.data() + i);
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    return horizontal_sum(acc) + scalar::sum_squares(x.subspan(i));
}

} // namespace wdc::kernels::avx2
