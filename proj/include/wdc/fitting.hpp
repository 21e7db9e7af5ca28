#pragma once

// Least-squares peak fitting on count histograms: Gaussian multiplets with a
// common width over a flat background, and exponentially modified Gaussian
// (EMG) pairs for interferometer-unbalance calibration.
//
// Fits are unweighted least squares on counts. Parameter errors use the
// sandwich estimate with per-bin variance max(count, 1).

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <span>
#include <vector>

namespace wdc::fit {

/// Fixed-width bins starting at `lo`; x units are up to the caller.
struct BinnedData {
    double lo = 0.0;
    double width = 1.0;
    std::vector<double> counts;

    std::size_t size() const { return counts.size(); }
    double edge(std::size_t i) const { return lo + width * double(i); }
    double center(std::size_t i) const { return lo + width * (double(i) + 0.5); }
    double total() const;
};

struct LmOptions {
    int max_iterations = 300;
    double tolerance = 1e-10;
};

struct LmResult {
    Eigen::VectorXd params;
    Eigen::MatrixXd covariance;
    double rss = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Fills `model` (size of the data) for parameters `p`.
using ModelFn = std::function<void(const Eigen::VectorXd& p, Eigen::VectorXd& model)>;

/// Levenberg-Marquardt on counts - model(p). `scales` sets the finite
/// difference step per parameter.
LmResult levenberg_marquardt(const ModelFn& model, const Eigen::VectorXd& data,
                             Eigen::VectorXd p0, const Eigen::VectorXd& scales,
                             const LmOptions& options = {});

/// Probability mass of N(mu, sigma) in [lo, hi].
double gaussian_bin_mass(double lo, double hi, double mu, double sigma);
/// Length of [lo, hi] inside [-half_width, half_width].
double gate_overlap(double lo, double hi, double half_width);

/// Scaled complementary error function exp(z^2) erfc(z).
double erfcx(double z);
/// EMG density: Gaussian(mu, sigma) convolved with an exponential of mean tau.
/// tau = 0 gives the plain Gaussian.
double emg_pdf(double x, double mu, double sigma, double tau);

struct GaussianPeaksFit {
    std::vector<double> areas;
    std::vector<double> area_errors;
    Eigen::MatrixXd area_covariance;
    std::vector<double> centers;
    std::vector<double> center_errors;
    double sigma = 0.0;
    double sigma_error = 0.0;
    double background = 0.0;       ///< counts per unit x inside the gate
    double background_error = 0.0;
    double rss = 0.0;
    int iterations = 0;
    bool converged = false;

    double total_area() const;
};

/// Fits sum_k A_k N(c_k, sigma) + C over the gate |x| <= gate_half_width.
/// Initialization: given centers, given sigma, background from the median of
/// in-gate bins away from every peak. Throws FitError on non-convergence.
GaussianPeaksFit fit_gaussian_peaks(const BinnedData& h, std::span<const double> center_guess,
                                    double sigma_guess, double gate_half_width,
                                    const LmOptions& options = {});

/// Same model with centers and sigma held fixed: areas and background from
/// linear least squares.
GaussianPeaksFit fit_peak_amplitudes(const BinnedData& h, std::span<const double> centers,
                                     double sigma, double gate_half_width);

struct EmgPairFit {
    std::array<double, 2> locations{};
    std::array<double, 2> location_errors{};
    std::array<double, 2> areas{};
    double sigma = 0.0;
    double tau = 0.0;
    double background = 0.0;
    double location_covariance = 0.0; ///< cov(loc0, loc1)
    bool converged = false;
};

/// Two EMG peaks with shared sigma and tau over a flat background.
EmgPairFit fit_emg_pair(const BinnedData& h, std::array<double, 2> location_guess,
                        double sigma_guess, double tau_guess, const LmOptions& options = {});

} // namespace wdc::fit
