#pragma once

// Time-tag analysis: delta histograms split by bit and phase interval,
// Gaussian-fit count extraction, relative frequencies, the visibility fit,
// which-path probability, the classical-particle bound, and calibrations.

#include "wdc/event_generator.hpp"
#include "wdc/fitting.hpp"
#include "wdc/orbit_kinematics.hpp"
#include "wdc/protocol.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wdc {

/// Histogram of delta = t_meas - t_ref in seconds, symmetric about zero.
struct DeltaHistogram {
    double bin_width = 0.0;
    double lo = 0.0;
    std::vector<double> counts;
    std::optional<std::uint8_t> bit;
    std::optional<Detector> channel;

    /// Bins cover [-half_range, half_range], rounded out to whole bins.
    static DeltaHistogram empty_like(double bin_width, double half_range);

    std::size_t size() const { return counts.size(); }
    double center(std::size_t i) const { return lo + bin_width * (double(i) + 0.5); }
    double total() const;
    void add(double delta);
    DeltaHistogram& operator+=(const DeltaHistogram& other);
    /// Same histogram with x in nanoseconds, for the fitters.
    fit::BinnedData in_ns() const;
};

/// Fixed-width binning over [-2 dt, +2 dt].
DeltaHistogram build_histogram(std::span<const double> deltas, std::optional<std::uint8_t> bit,
                               std::optional<Detector> channel, double bin_width,
                               double mzi_unbalance);

struct DeltaEntry {
    bool matched = false;
    double delta = 0.0;       ///< s
    double t_tx = 0.0;        ///< transmit epoch of the matched pulse
    double t_ref = 0.0;       ///< its predicted arrival
};

/// Matches each record to the nearest predicted pulse arrival of its cycle
/// (within half a pulse period) and returns delta. Records outside any
/// scheduled cycle or the gate are flagged unmatched.
std::vector<DeltaEntry> compute_delta(std::span<const TimeTagRecord> records,
                                      const PassTrack& pass,
                                      std::span<const CycleSchedule> schedules,
                                      double pulse_rate, double tagger_resolution);

/// Kinematic phase from the SLR-estimated velocity at the reflection epoch,
/// wrapped into [-pi/n, 2pi - pi/n) so interval 0 straddles zero.
double phase_of_record(double reflection_epoch, const SlrVelocityTrack& slr,
                       const PhysicalConstants& constants, int phase_bins = 10);
/// Index j of the interval [(2j-1)pi/n, (2j+1)pi/n) holding a wrapped phase.
int phase_bin_index(double wrapped_phase, int phase_bins = 10);
double phase_bin_center(int j, int phase_bins = 10);

struct ExtractionParams {
    double mzi_unbalance = 3.498e-9;
    double sigma_guess = 0.5e-9;     ///< detector jitter
    double gate_half_width = 5e-9;   ///< half the pulse period
    double eta_plus = 1.0;           ///< channel efficiencies (only ratios matter)
    double eta_minus = 1.0;
    double min_counts = 50.0;
};

struct CountExtraction {
    double n_plus = 0.0;        ///< background removed, efficiency renormalized
    double n_minus = 0.0;
    double raw_plus = 0.0;      ///< fitted Gaussian area before renormalization
    double raw_minus = 0.0;
    double raw_plus_error = 0.0;
    double raw_minus_error = 0.0;
    fit::GaussianPeaksFit shape; ///< fit of the channel-summed histogram (ns)
};

/// b = 0: one Gaussian at the argmax; b = 1: two Gaussians at -dt and +dt.
/// Shape (centers, common sigma) comes from the channel-summed histogram;
/// each channel's areas and background from a linear fit at that shape.
/// Throws FitError if the summed histogram has fewer than min_counts.
CountExtraction extract_counts(const DeltaHistogram& plus, const DeltaHistogram& minus,
                               std::uint8_t bit, const ExtractionParams& params);

struct Frequencies {
    double f_plus = 0.0;
    double f_minus = 0.0;
    double sigma = 0.0;
    bool degenerate = false; ///< one channel empty
};

/// f = N/(N+ + N-), sigma = sqrt(f+ f- / (N+ + N-)). Negative inputs clamp to 0.
Frequencies relative_frequencies(double n_plus, double n_minus);

struct PhaseBinStats {
    int j = 0;
    double phi_center = 0.0;
    double n_plus = 0.0;
    double n_minus = 0.0;
    double f_plus = 0.0;
    double f_minus = 0.0;
    double sigma_f = 0.0;
    bool valid = false;
};

struct VisibilityFit {
    double v_exp = 0.0;
    double sigma_v = 0.0;          ///< from the normal-equation curvature
    double sigma_v_scatter = 0.0;  ///< curvature error scaled by sqrt(chi2/dof)
    std::vector<double> residuals; ///< f_obs - f_model, (+,-) per fitted bin
    std::vector<double> sigmas;    ///< matching Poisson errors
    std::vector<int> bins;         ///< phase bin of each residual
    double sigma_r = 0.0;          ///< rms of residuals
    double chi2 = 0.0;
    int dof = 0;
};

/// Weighted least squares of f+ = (1 + V cos phi_j)/2 with V the only free
/// parameter, phi_j the interval centers, weights 1/sigma_j^2.
VisibilityFit fit_visibility(std::span<const PhaseBinStats> bins);

struct ResidualStats {
    double sigma_r = 0.0;
    double coverage = 0.0; ///< fraction with |r| <= 1.5 * mean sigma
    double mean_sigma = 0.0;
};

ResidualStats residual_stats(std::span<const double> residuals, double mean_sigma);
ResidualStats residual_stats(const VisibilityFit& fit);

struct WhichPathStats {
    double p_wp = 0.0;
    double sigma_p = 0.0;
    double n_early = 0.0;
    double n_central = 0.0;
    double n_late = 0.0;
    double separation = 0.0;       ///< late - early center, s
    double separation_error = 0.0;
    double peak_sigma = 0.0;       ///< s
    double peak_sigma_error = 0.0;
};

/// Three-Gaussian fit (early, central, late) of a b = 1 histogram; areas
/// integrated within +/-4 sigma of each fitted center.
WhichPathStats which_path_probability(const DeltaHistogram& b1, const ExtractionParams& params);

/// (v - (1 - p_wp)) / sigma_v. Throws std::domain_error if sigma_v <= 0.
double classical_bound_significance(double v_exp, double sigma_v, double p_wp);

struct UnbalanceEstimate {
    double delta_t = 0.0; ///< same units as the histogram
    double sigma = 0.0;
    fit::EmgPairFit fit;
};

UnbalanceEstimate unbalance_from_fit(const fit::EmgPairFit& fit);
/// Locates the two strongest separated peaks, fits an EMG pair, returns the
/// location difference. Throws DataError if a second peak cannot be found.
UnbalanceEstimate estimate_unbalance(const fit::BinnedData& calibration, double sigma_guess,
                                     double tau_guess);

/// mu = detection_rate / (accepted_pulse_rate * eta_opt * eta_det).
double estimate_mu(double detection_rate, double accepted_pulse_rate, double eta_opt,
                   double eta_det);

struct AnalysisParams {
    double bin_width = 162e-12; ///< multiple of the tagger resolution
    int phase_bins = 10;
};

struct AnalyzedRecord {
    std::size_t index = 0; ///< into the input record list
    std::uint8_t bit = 0;
    Detector channel = Detector::plus;
    double delta = 0.0;
    double phi = 0.0;
    int phase_bin = 0;
    double reflection_epoch = 0.0;
};

struct TruthComparison {
    std::size_t signal = 0;
    std::size_t background = 0;
    double phi_rms_error = 0.0;
    double phi_max_error = 0.0;
    double p_wp_truth = 0.0;
    double delta_p_wp = 0.0;
    double v_configured = 0.0;
    double delta_v = 0.0;
};

struct AnalysisReport {
    std::size_t records = 0;
    std::size_t analyzed = 0;
    std::size_t unmatched = 0;
    std::size_t discarded = 0; ///< settling, outside tau, or outside any cycle

    std::vector<PhaseBinStats> interference_bins;
    std::vector<PhaseBinStats> whichpath_bins;
    VisibilityFit visibility;
    ResidualStats residuals;
    WhichPathStats which_path;
    double z = 0.0;
    bool has_visibility = false;
    bool has_which_path = false;

    double whichpath_chi2 = 0.0;
    int whichpath_dof = 0;

    double central_counts_b0 = 0.0;
    double lateral_counts_b1 = 0.0;
    double exposure_b0 = 0.0; ///< accepted pulses per recorded bit setting
    double exposure_b1 = 0.0;
    double balance_z = 0.0;   ///< lateral counts rescaled to the b = 0 exposure

    double signal_counts = 0.0;
    double accepted_pulses = 0.0;
    double accepted_time = 0.0;
    double mu_estimate = 0.0;

    std::array<DeltaHistogram, 2> b0; ///< per channel
    std::array<DeltaHistogram, 2> b1;
    std::vector<AnalyzedRecord> per_record;
    std::vector<std::string> warnings;
    std::optional<TruthComparison> truth;
};

struct AnalysisInputs {
    std::span<const TimeTagRecord> records;
    const PassTrack* pass = nullptr;
    const SlrVelocityTrack* slr = nullptr;
    std::span<const CycleSchedule> schedules;
    SimulationConfig sim;
    PhysicalConstants constants;
    AnalysisParams params;
};

/// Full pipeline. Failed fits leave has_visibility / has_which_path unset
/// and add a warning.
AnalysisReport analyze(const AnalysisInputs& in);

/// Adds truth-vs-estimate deltas; truth must be parallel to the input records.
void compare_with_truth(AnalysisReport& report, std::span<const TruthEntry> truth,
                        const SimulationConfig& sim);

} // namespace wdc
