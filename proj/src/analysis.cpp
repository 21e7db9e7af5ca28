#include "wdc/analysis.hpp"

#include "wdc/error.hpp"
#include "wdc/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <unordered_map>

namespace wdc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kNs = 1e9;

std::size_t channel_index(Detector d)
{
    return static_cast<std::size_t>(d);
}

} // namespace

// ---------------------------------------------------------------------------
// Histograms

DeltaHistogram DeltaHistogram::empty_like(double bin_width, double half_range)
{
    if (!(bin_width > 0.0))
        throw std::invalid_argument("bin width must be positive");
    DeltaHistogram h;
    h.bin_width = bin_width;
    const auto per_side = static_cast<std::size_t>(std::ceil(half_range / bin_width - 1e-9));
    h.lo = -double(per_side) * bin_width;
    h.counts.assign(2 * per_side, 0.0);
    return h;
}

double DeltaHistogram::total() const
{
    return std::accumulate(counts.begin(), counts.end(), 0.0);
}

void DeltaHistogram::add(double delta)
{
    const double pos = (delta - lo) / bin_width;
    if (!(pos >= 0.0) || pos >= double(counts.size()))
        return;
    counts[static_cast<std::size_t>(pos)] += 1.0;
}

DeltaHistogram& DeltaHistogram::operator+=(const DeltaHistogram& other)
{
    if (other.counts.size() != counts.size() || other.bin_width != bin_width || other.lo != lo)
        throw std::invalid_argument("histogram binning differs");
    for (std::size_t i = 0; i < counts.size(); ++i)
        counts[i] += other.counts[i];
    if (channel != other.channel)
        channel.reset();
    if (bit != other.bit)
        bit.reset();
    return *this;
}

fit::BinnedData DeltaHistogram::in_ns() const
{
    return {lo * kNs, bin_width * kNs, counts};
}

DeltaHistogram build_histogram(std::span<const double> deltas, std::optional<std::uint8_t> bit,
                               std::optional<Detector> channel, double bin_width,
                               double mzi_unbalance)
{
    DeltaHistogram h = DeltaHistogram::empty_like(bin_width, 2.0 * mzi_unbalance);
    h.bit = bit;
    h.channel = channel;
    for (double d : deltas)
        h.add(d);
    return h;
}

// ---------------------------------------------------------------------------
// Delta computation

std::vector<DeltaEntry> compute_delta(std::span<const TimeTagRecord> records,
                                      const PassTrack& pass,
                                      std::span<const CycleSchedule> schedules,
                                      double pulse_rate, double tagger_resolution)
{
    std::unordered_map<std::int64_t, std::size_t> by_cycle;
    for (std::size_t i = 0; i < schedules.size(); ++i)
        by_cycle.emplace(schedules[i].cycle_index, i);
    std::vector<std::optional<PulseRange>> ranges(schedules.size());

    std::vector<DeltaEntry> out(records.size());
    std::vector<double> ticks, refs;
    std::vector<std::size_t> matched;
    ticks.reserve(records.size());
    refs.reserve(records.size());
    matched.reserve(records.size());

    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto it = by_cycle.find(records[i].cycle);
        if (it == by_cycle.end())
            continue;
        const CycleSchedule& s = schedules[it->second];
        auto& range = ranges[it->second];
        if (!range)
            range = pulses_arriving_in(s, s.tau_window, pass, pulse_rate);
        if (range->count() == 0)
            continue;

        const double t_meas = double(records[i].tag) * tagger_resolution;
        auto clamp_to_pass = [&](double t) { return std::clamp(t, pass.start(), pass.end()); };
        double t_tx = t_meas - pass.rtt_at(clamp_to_pass(s.t_b1));
        t_tx = t_meas - pass.rtt_at(clamp_to_pass(t_tx));
        const auto guess = std::clamp<std::int64_t>(
            std::llround((t_tx - range->t_first) / range->period), range->lo, range->hi);

        double best = std::numeric_limits<double>::infinity();
        std::int64_t best_k = guess;
        for (std::int64_t k = std::max(range->lo, guess - 1); k <= std::min(range->hi, guess + 1); ++k) {
            const double d = std::abs(t_meas - predicted_arrival(range->transmit_epoch(k), pass));
            if (d < best) {
                best = d;
                best_k = k;
            }
        }
        if (!(best <= 0.5 * range->period))
            continue;
        DeltaEntry& e = out[i];
        e.matched = true;
        e.t_tx = range->transmit_epoch(best_k);
        e.t_ref = predicted_arrival(e.t_tx, pass);
        ticks.push_back(double(records[i].tag));
        refs.push_back(e.t_ref);
        matched.push_back(i);
    }

    std::vector<double> deltas(ticks.size());
    kernels::time_differences(ticks, tagger_resolution, refs, deltas);
    for (std::size_t m = 0; m < matched.size(); ++m)
        out[matched[m]].delta = deltas[m];
    return out;
}

// ---------------------------------------------------------------------------
// Phase binning

double phase_of_record(double reflection_epoch, const SlrVelocityTrack& slr,
                       const PhysicalConstants& constants, int phase_bins)
{
    const double beta = slr.velocity_at(reflection_epoch) / constants.c;
    const double phi = kinematic_phase(beta, constants);
    const double lower = -std::numbers::pi / phase_bins;
    double wrapped = std::fmod(phi - lower, kTwoPi);
    if (wrapped < 0.0)
        wrapped += kTwoPi;
    if (wrapped >= kTwoPi)
        wrapped = 0.0;
    return wrapped + lower;
}

int phase_bin_index(double wrapped_phase, int phase_bins)
{
    const double width = kTwoPi / phase_bins;
    const int j = static_cast<int>(std::floor((wrapped_phase + 0.5 * width) / width));
    return ((j % phase_bins) + phase_bins) % phase_bins;
}

double phase_bin_center(int j, int phase_bins)
{
    return kTwoPi * double(j) / phase_bins;
}

// ---------------------------------------------------------------------------
// Count extraction

CountExtraction extract_counts(const DeltaHistogram& plus, const DeltaHistogram& minus,
                               std::uint8_t bit, const ExtractionParams& params)
{
    if (bit > 1)
        throw std::invalid_argument("bit must be 0 or 1");
    DeltaHistogram summed = plus;
    summed += minus;
    const double total = summed.total();
    if (total < params.min_counts)
        throw FitError("histogram too sparse for a peak fit (" + std::to_string(total) + " counts)");

    const fit::BinnedData data = summed.in_ns();
    std::vector<double> guess;
    if (bit == 0) {
        const auto peak = std::max_element(data.counts.begin(), data.counts.end());
        guess.push_back(data.center(std::size_t(peak - data.counts.begin())));
    } else {
        guess = {-params.mzi_unbalance * kNs, params.mzi_unbalance * kNs};
    }
    const double gate = params.gate_half_width * kNs;

    CountExtraction out;
    out.shape = fit::fit_gaussian_peaks(data, guess, params.sigma_guess * kNs, gate);

    const fit::GaussianPeaksFit fp =
        fit::fit_peak_amplitudes(plus.in_ns(), out.shape.centers, out.shape.sigma, gate);
    const fit::GaussianPeaksFit fm =
        fit::fit_peak_amplitudes(minus.in_ns(), out.shape.centers, out.shape.sigma, gate);
    auto combined_error = [](const fit::GaussianPeaksFit& f) {
        double v = 0.0;
        for (double e : f.area_errors)
            v += e * e;
        return std::sqrt(v);
    };
    out.raw_plus = fp.total_area();
    out.raw_minus = fm.total_area();
    out.raw_plus_error = combined_error(fp);
    out.raw_minus_error = combined_error(fm);

    const double mean_eta = 0.5 * (params.eta_plus + params.eta_minus);
    out.n_plus = out.raw_plus * mean_eta / params.eta_plus;
    out.n_minus = out.raw_minus * mean_eta / params.eta_minus;
    return out;
}

Frequencies relative_frequencies(double n_plus, double n_minus)
{
    n_plus = std::max(n_plus, 0.0);
    n_minus = std::max(n_minus, 0.0);
    const double total = n_plus + n_minus;
    if (!(total > 0.0))
        throw std::domain_error("relative frequencies need a positive total count");
    Frequencies f;
    f.f_plus = n_plus / total;
    f.f_minus = n_minus / total;
    f.sigma = std::sqrt(f.f_plus * f.f_minus / total);
    f.degenerate = n_plus == 0.0 || n_minus == 0.0;
    return f;
}

// ---------------------------------------------------------------------------
// Visibility

VisibilityFit fit_visibility(std::span<const PhaseBinStats> bins)
{
    std::vector<double> w, y, c;
    std::vector<const PhaseBinStats*> used;
    for (const PhaseBinStats& b : bins) {
        if (!b.valid || !(b.sigma_f > 0.0))
            continue;
        w.push_back(1.0 / (b.sigma_f * b.sigma_f));
        y.push_back(2.0 * b.f_plus - 1.0);
        c.push_back(std::cos(b.phi_center));
        used.push_back(&b);
    }
    if (used.size() < 3)
        throw FitError("visibility fit needs at least 3 populated phase bins");

    const kernels::WeightedMoments m = kernels::weighted_moments(w, y, c);
    if (!(m.sum_wcc > 0.0))
        throw FitError("visibility fit has no weight");

    VisibilityFit fit;
    fit.v_exp = std::clamp(m.sum_wyc / m.sum_wcc, -1.0, 1.0);
    // y = 2f - 1 has sigma 2 sigma_f, so the curvature is sum(w c^2)/4.
    fit.sigma_v = std::sqrt(4.0 / m.sum_wcc);

    for (std::size_t i = 0; i < used.size(); ++i) {
        const PhaseBinStats& b = *used[i];
        const double model_plus = 0.5 * (1.0 + fit.v_exp * c[i]);
        const double r = b.f_plus - model_plus;
        fit.residuals.push_back(r);
        fit.residuals.push_back(-r);
        fit.sigmas.push_back(b.sigma_f);
        fit.sigmas.push_back(b.sigma_f);
        fit.bins.push_back(b.j);
        fit.bins.push_back(b.j);
        fit.chi2 += r * r * w[i];
    }
    fit.dof = int(used.size()) - 1;
    fit.sigma_r = std::sqrt(kernels::sum_squares(fit.residuals) / double(fit.residuals.size()));
    fit.sigma_v_scatter = fit.dof > 0 ? fit.sigma_v * std::sqrt(fit.chi2 / fit.dof) : fit.sigma_v;
    return fit;
}

ResidualStats residual_stats(std::span<const double> residuals, double mean_sigma)
{
    ResidualStats s;
    s.mean_sigma = mean_sigma;
    if (residuals.empty())
        return s;
    s.sigma_r = std::sqrt(kernels::sum_squares(residuals) / double(residuals.size()));
    const auto inside = std::count_if(residuals.begin(), residuals.end(),
                                      [&](double r) { return std::abs(r) <= 1.5 * mean_sigma; });
    s.coverage = double(inside) / double(residuals.size());
    return s;
}

ResidualStats residual_stats(const VisibilityFit& fit)
{
    double mean_sigma = 0.0;
    if (!fit.sigmas.empty())
        mean_sigma = std::accumulate(fit.sigmas.begin(), fit.sigmas.end(), 0.0) /
                     double(fit.sigmas.size());
    return residual_stats(fit.residuals, mean_sigma);
}

// ---------------------------------------------------------------------------
// Which-path and the classical bound

WhichPathStats which_path_probability(const DeltaHistogram& b1, const ExtractionParams& params)
{
    if (b1.total() < params.min_counts)
        throw FitError("which-path histogram too sparse for a peak fit");
    const fit::BinnedData data = b1.in_ns();
    const double dt = params.mzi_unbalance * kNs;
    const double guess[] = {-dt, 0.0, dt};
    const fit::GaussianPeaksFit f = fit::fit_gaussian_peaks(
        data, guess, params.sigma_guess * kNs, params.gate_half_width * kNs);

    // Area inside +/-4 sigma of each center.
    const double window = std::erf(4.0 / std::numbers::sqrt2);
    WhichPathStats s;
    s.n_early = std::max(f.areas[0], 0.0) * window;
    s.n_central = std::max(f.areas[1], 0.0) * window;
    s.n_late = std::max(f.areas[2], 0.0) * window;
    const double total = s.n_early + s.n_central + s.n_late;
    if (!(total > 0.0))
        throw FitError("which-path fit found no peak area");
    s.p_wp = (s.n_early + s.n_late) / total;
    // Propagate the fitted area covariance; the central area's uncertainty
    // dominates when p_wp is close to 1.
    const double t2 = total * total / (window * window);
    Eigen::Vector3d grad(s.n_central / window, -(s.n_early + s.n_late) / window, s.n_central / window);
    grad /= t2;
    s.sigma_p = std::sqrt(std::max(grad.dot(f.area_covariance * grad), 0.0));
    s.separation = (f.centers[2] - f.centers[0]) / kNs;
    s.separation_error = std::hypot(f.center_errors[0], f.center_errors[2]) / kNs;
    s.peak_sigma = f.sigma / kNs;
    s.peak_sigma_error = f.sigma_error / kNs;
    return s;
}

double classical_bound_significance(double v_exp, double sigma_v, double p_wp)
{
    if (!(sigma_v > 0.0))
        throw std::domain_error("visibility error must be positive");
    return (v_exp - (1.0 - p_wp)) / sigma_v;
}

// ---------------------------------------------------------------------------
// Calibrations

UnbalanceEstimate unbalance_from_fit(const fit::EmgPairFit& fit)
{
    UnbalanceEstimate u;
    u.fit = fit;
    u.delta_t = std::abs(fit.locations[1] - fit.locations[0]);
    const double var = fit.location_errors[0] * fit.location_errors[0] +
                       fit.location_errors[1] * fit.location_errors[1] -
                       2.0 * fit.location_covariance;
    u.sigma = std::sqrt(std::max(var, 0.0));
    return u;
}

UnbalanceEstimate estimate_unbalance(const fit::BinnedData& calibration, double sigma_guess,
                                     double tau_guess)
{
    const auto& counts = calibration.counts;
    if (counts.empty())
        throw DataError("empty calibration histogram");
    const auto first = std::size_t(std::max_element(counts.begin(), counts.end()) - counts.begin());
    const double x1 = calibration.center(first);
    const double exclusion = 5.0 * (sigma_guess + tau_guess);

    std::optional<std::size_t> second;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (std::abs(calibration.center(i) - x1) <= exclusion)
            continue;
        if (!second || counts[i] > counts[*second])
            second = i;
    }
    // A second peak must stand clearly above the floor.
    if (!second || counts[*second] < 0.1 * counts[first])
        throw DataError("calibration histogram does not show two resolvable peaks");
    double x2 = calibration.center(*second);
    double a = std::min(x1, x2), b = std::max(x1, x2);
    // The mode of an EMG sits right of its location by about the tail length.
    const fit::EmgPairFit fit =
        fit::fit_emg_pair(calibration, {a - 0.5 * tau_guess, b - 0.5 * tau_guess}, sigma_guess, tau_guess);
    return unbalance_from_fit(fit);
}

double estimate_mu(double detection_rate, double accepted_pulse_rate, double eta_opt,
                   double eta_det)
{
    if (!(accepted_pulse_rate > 0.0) || !(eta_opt > 0.0) || !(eta_det > 0.0))
        throw std::domain_error("mu estimate needs positive pulse rate and efficiencies");
    if (detection_rate < 0.0)
        throw std::domain_error("detection rate must be non-negative");
    return detection_rate / (accepted_pulse_rate * eta_opt * eta_det);
}

// ---------------------------------------------------------------------------
// Pipeline

namespace {

PhaseBinStats bin_stats(int j, int phase_bins, const CountExtraction& c)
{
    PhaseBinStats s;
    s.j = j;
    s.phi_center = phase_bin_center(j, phase_bins);
    s.n_plus = c.n_plus;
    s.n_minus = c.n_minus;
    const Frequencies f = relative_frequencies(c.n_plus, c.n_minus);
    s.f_plus = f.f_plus;
    s.f_minus = f.f_minus;
    s.sigma_f = f.sigma;
    s.valid = !f.degenerate;
    return s;
}

} // namespace

AnalysisReport analyze(const AnalysisInputs& in)
{
    if (in.pass == nullptr || in.slr == nullptr)
        throw std::invalid_argument("analysis needs a pass track and an SLR track");
    const PassTrack& pass = *in.pass;
    const int nb = in.params.phase_bins;
    if (nb < 3)
        throw ConfigError("need at least 3 phase bins");
    const double res = in.sim.tagger_resolution;
    if (!(in.params.bin_width > 0.0))
        throw ConfigError("histogram bin width must be positive");
    const double ratio = in.params.bin_width / res;
    if (std::abs(ratio - std::round(ratio)) > 1e-6 || std::round(ratio) < 1.0)
        throw ConfigError("histogram bin width must be a positive multiple of the tagger resolution");

    AnalysisReport report;
    report.records = in.records.size();

    std::unordered_map<std::int64_t, std::size_t> by_cycle;
    for (std::size_t i = 0; i < in.schedules.size(); ++i)
        by_cycle.emplace(in.schedules[i].cycle_index, i);

    const std::vector<DeltaEntry> deltas =
        compute_delta(in.records, pass, in.schedules, in.sim.pulse_rate, res);

    const DeltaHistogram blank =
        DeltaHistogram::empty_like(in.params.bin_width, 2.0 * in.constants.mzi_unbalance);
    // [bit][phase bin][channel]
    std::vector<std::vector<std::array<DeltaHistogram, 2>>> binned(
        2, std::vector<std::array<DeltaHistogram, 2>>(std::size_t(nb), {blank, blank}));
    report.b0 = {blank, blank};
    report.b1 = {blank, blank};
    for (std::uint8_t b : {0, 1})
        for (Detector d : {Detector::plus, Detector::minus}) {
            auto& h = (b == 0 ? report.b0 : report.b1)[channel_index(d)];
            h.bit = b;
            h.channel = d;
        }

    // Bit seen in each (cycle, segment) according to the tagger; -1 if no record.
    std::vector<std::array<int, 2>> segment_bit(in.schedules.size(), {-1, -1});

    for (std::size_t i = 0; i < in.records.size(); ++i) {
        const TimeTagRecord& r = in.records[i];
        const auto it = by_cycle.find(r.cycle);
        if (it == by_cycle.end()) {
            ++report.discarded;
            continue;
        }
        const CycleSchedule& s = in.schedules[it->second];
        const double t_meas = double(r.tag) * res;
        if (!s.rx_window.contains(t_meas)) {
            ++report.discarded;
            continue;
        }
        const BitAssignment assign = governing_bit(t_meas, s);
        if (!assign.accepted()) {
            ++report.discarded;
            continue;
        }
        segment_bit[it->second][assign.segment == Segment::first ? 0 : 1] = r.bit;
        const DeltaEntry& e = deltas[i];
        if (!e.matched) {
            ++report.unmatched;
            continue;
        }
        const double reflection = e.t_tx + 0.5 * pass.rtt_at(e.t_tx);
        if (!in.slr->covers(reflection)) {
            ++report.discarded;
            continue;
        }
        AnalyzedRecord a;
        a.index = i;
        a.bit = r.bit;
        a.channel = r.channel;
        a.delta = e.delta;
        a.reflection_epoch = reflection;
        a.phi = phase_of_record(reflection, *in.slr, in.constants, nb);
        a.phase_bin = phase_bin_index(a.phi, nb);
        report.per_record.push_back(a);

        const std::size_t ch = channel_index(r.channel);
        binned[r.bit][std::size_t(a.phase_bin)][ch].add(a.delta);
        (r.bit == 0 ? report.b0 : report.b1)[ch].add(a.delta);
    }
    report.analyzed = report.per_record.size();

    ExtractionParams ep;
    ep.mzi_unbalance = in.constants.mzi_unbalance;
    ep.sigma_guess = in.sim.jitter_rms > 0.0 ? in.sim.jitter_rms : 0.5e-9;
    ep.gate_half_width = 0.5 / in.sim.pulse_rate;
    ep.eta_plus = in.sim.channel_efficiency(Detector::plus);
    ep.eta_minus = in.sim.channel_efficiency(Detector::minus);

    for (std::uint8_t b : {0, 1}) {
        auto& out = b == 0 ? report.interference_bins : report.whichpath_bins;
        for (int j = 0; j < nb; ++j) {
            const auto& hist = binned[b][std::size_t(j)];
            try {
                out.push_back(bin_stats(j, nb, extract_counts(hist[0], hist[1], b, ep)));
            } catch (const std::exception& ex) {
                PhaseBinStats s;
                s.j = j;
                s.phi_center = phase_bin_center(j, nb);
                out.push_back(s);
                report.warnings.push_back("b=" + std::to_string(b) + " phase bin " +
                                          std::to_string(j) + ": " + ex.what());
            }
        }
    }

    try {
        report.visibility = fit_visibility(report.interference_bins);
        report.residuals = residual_stats(report.visibility);
        report.has_visibility = true;
    } catch (const std::exception& ex) {
        report.warnings.push_back(std::string("visibility fit: ") + ex.what());
    }

    for (const PhaseBinStats& s : report.whichpath_bins) {
        if (!s.valid)
            continue;
        const double z = (s.f_plus - 0.5) / s.sigma_f;
        report.whichpath_chi2 += z * z;
        ++report.whichpath_dof;
    }

    bool have_b0 = false, have_b1 = false;
    try {
        const CountExtraction central = extract_counts(report.b0[0], report.b0[1], 0, ep);
        report.central_counts_b0 = central.raw_plus + central.raw_minus;
        have_b0 = true;
    } catch (const std::exception& ex) {
        report.warnings.push_back(std::string("b=0 central peak: ") + ex.what());
    }
    try {
        DeltaHistogram summed = report.b1[0];
        summed += report.b1[1];
        report.which_path = which_path_probability(summed, ep);
        report.lateral_counts_b1 = report.which_path.n_early + report.which_path.n_late;
        report.has_which_path = have_b1 = true;
    } catch (const std::exception& ex) {
        report.warnings.push_back(std::string("which-path fit: ") + ex.what());
    }
    if (report.has_visibility && have_b1)
        report.z = classical_bound_significance(report.visibility.v_exp, report.visibility.sigma_v,
                                                report.which_path.p_wp);

    // Mean photon number from the signal rate over the analyzed segments.
    for (std::size_t c = 0; c < in.schedules.size(); ++c) {
        const CycleSchedule& s = in.schedules[c];
        for (int half = 0; half < 2; ++half) {
            const Window w = half == 0 ? s.first_segment() : s.second_segment();
            if (w.empty())
                continue;
            const double n = double(pulses_arriving_in(s, w, pass, in.sim.pulse_rate).count());
            report.accepted_pulses += n;
            report.accepted_time += w.length();
            // Segments without any record carry no bit; leave them out of both.
            const int bit = segment_bit[c][std::size_t(half)];
            if (bit >= 0)
                (bit == 0 ? report.exposure_b0 : report.exposure_b1) += n;
        }
    }
    // The two bit settings see different numbers of pulses; compare at equal exposure.
    if (have_b0 && have_b1 && report.exposure_b0 > 0.0 && report.exposure_b1 > 0.0) {
        const double scale = report.exposure_b0 / report.exposure_b1;
        const double lateral = report.lateral_counts_b1 * scale;
        report.balance_z = (report.central_counts_b0 - lateral) /
                           std::sqrt(report.central_counts_b0 + lateral * scale);
    }
    report.signal_counts = report.central_counts_b0 + report.which_path.n_early +
                           report.which_path.n_central + report.which_path.n_late;
    if (report.accepted_time > 0.0 && report.accepted_pulses > 0.0) {
        const double eta_det = 0.5 * (ep.eta_plus + ep.eta_minus);
        report.mu_estimate = estimate_mu(report.signal_counts / report.accepted_time,
                                         report.accepted_pulses / report.accepted_time,
                                         in.sim.eta_opt, eta_det);
    }
    return report;
}

void compare_with_truth(AnalysisReport& report, std::span<const TruthEntry> truth,
                        const SimulationConfig& sim)
{
    if (truth.size() != report.records)
        throw DataError("truth sidecar has " + std::to_string(truth.size()) + " entries for " +
                        std::to_string(report.records) + " records");
    TruthComparison t;
    double sum_sq = 0.0;
    std::size_t lateral = 0, b1_signal = 0;
    for (const AnalyzedRecord& a : report.per_record) {
        const TruthEntry& e = truth[a.index];
        if (e.background) {
            ++t.background;
            continue;
        }
        ++t.signal;
        const double d = std::remainder(a.phi - e.phi, kTwoPi);
        sum_sq += d * d;
        t.phi_max_error = std::max(t.phi_max_error, std::abs(d));
        if (a.bit == 1) {
            ++b1_signal;
            if (e.slot && *e.slot != Slot::central)
                ++lateral;
        }
    }
    if (t.signal > 0)
        t.phi_rms_error = std::sqrt(sum_sq / double(t.signal));
    if (b1_signal > 0)
        t.p_wp_truth = double(lateral) / double(b1_signal);
    t.delta_p_wp = report.which_path.p_wp - t.p_wp_truth;
    t.v_configured = sim.imperfections.visibility;
    t.delta_v = report.visibility.v_exp - t.v_configured;
    report.truth = t;
}

} // namespace wdc
