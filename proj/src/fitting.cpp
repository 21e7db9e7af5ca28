#include "wdc/fitting.hpp"

#include "wdc/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace wdc::fit {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double BinnedData::total() const
{
    return std::accumulate(counts.begin(), counts.end(), 0.0);
}

namespace {

VectorXd to_vector(const std::vector<double>& v)
{
    return Eigen::Map<const VectorXd>(v.data(), Eigen::Index(v.size()));
}

MatrixXd numeric_jacobian(const ModelFn& model, const VectorXd& p, const VectorXd& scales,
                          Eigen::Index n)
{
    MatrixXd jac(n, p.size());
    VectorXd up(n), down(n);
    for (Eigen::Index j = 0; j < p.size(); ++j) {
        const double h = 1e-6 * std::max(std::abs(p[j]), scales[j]);
        VectorXd q = p;
        q[j] = p[j] + h;
        model(q, up);
        q[j] = p[j] - h;
        model(q, down);
        jac.col(j) = (up - down) / (2.0 * h);
    }
    return jac;
}

// (J^T J)^-1 J^T V J (J^T J)^-1 with V = diag(max(count, 1)).
MatrixXd sandwich_covariance(const MatrixXd& jac, const VectorXd& data)
{
    const MatrixXd jtj = jac.transpose() * jac;
    const MatrixXd bread = jtj.completeOrthogonalDecomposition().pseudoInverse();
    const VectorXd variance = data.cwiseMax(1.0);
    const MatrixXd meat = jac.transpose() * variance.asDiagonal() * jac;
    return bread * meat * bread;
}

} // namespace

LmResult levenberg_marquardt(const ModelFn& model, const VectorXd& data, VectorXd p0,
                             const VectorXd& scales, const LmOptions& options)
{
    const Eigen::Index n = data.size();
    VectorXd prediction(n);
    model(p0, prediction);
    double rss = (data - prediction).squaredNorm();
    if (!std::isfinite(rss))
        throw FitError("model is not finite at the initial parameters");

    LmResult result;
    double lambda = 1e-3;
    for (int it = 0; it < options.max_iterations; ++it) {
        result.iterations = it + 1;
        const MatrixXd jac = numeric_jacobian(model, p0, scales, n);
        const VectorXd residual = data - prediction;
        const MatrixXd jtj = jac.transpose() * jac;
        const VectorXd gradient = jac.transpose() * residual;

        bool improved = false;
        while (lambda < 1e12) {
            MatrixXd damped = jtj;
            for (Eigen::Index j = 0; j < damped.rows(); ++j)
                damped(j, j) += lambda * std::max(jtj(j, j), 1e-12);
            const VectorXd step = damped.ldlt().solve(gradient);
            const VectorXd trial = p0 + step;
            VectorXd trial_prediction(n);
            model(trial, trial_prediction);
            const double trial_rss = (data - trial_prediction).squaredNorm();
            if (std::isfinite(trial_rss) && trial_rss <= rss) {
                const double drop = rss - trial_rss;
                const bool small_step =
                    (step.cwiseAbs().array() <= options.tolerance * (p0.cwiseAbs().array() + scales.array()))
                        .all();
                p0 = trial;
                prediction = trial_prediction;
                rss = trial_rss;
                lambda = std::max(lambda / 10.0, 1e-12);
                improved = true;
                if (drop <= options.tolerance * std::max(rss, 1e-300) || small_step)
                    result.converged = true;
                break;
            }
            lambda *= 10.0;
        }
        // No downhill step at any damping: already at the minimum to
        // working precision.
        if (!improved)
            result.converged = true;
        if (result.converged)
            break;
    }

    result.params = p0;
    result.rss = rss;
    result.covariance = sandwich_covariance(numeric_jacobian(model, p0, scales, n), data);
    return result;
}

double gaussian_bin_mass(double lo, double hi, double mu, double sigma)
{
    const double s = std::numbers::sqrt2 * sigma;
    return 0.5 * (std::erf((hi - mu) / s) - std::erf((lo - mu) / s));
}

double gate_overlap(double lo, double hi, double half_width)
{
    return std::max(0.0, std::min(hi, half_width) - std::max(lo, -half_width));
}

double erfcx(double z)
{
    if (z < 26.0)
        return std::exp(z * z) * std::erfc(z);
    const double inv2 = 1.0 / (z * z);
    const double series =
        1.0 - 0.5 * inv2 + 0.75 * inv2 * inv2 - 1.875 * inv2 * inv2 * inv2 +
        6.5625 * inv2 * inv2 * inv2 * inv2;
    return series / (z * std::sqrt(std::numbers::pi));
}

double emg_pdf(double x, double mu, double sigma, double tau)
{
    const double u = (x - mu) / sigma;
    if (tau <= 0.0)
        return std::exp(-0.5 * u * u) / (sigma * std::sqrt(2.0 * std::numbers::pi));
    const double z = (sigma / tau - u) / std::numbers::sqrt2;
    if (z >= 0.0)
        return std::exp(-0.5 * u * u) * erfcx(z) / (2.0 * tau);
    const double r = sigma / tau;
    return std::exp(0.5 * r * r - u * r) * std::erfc(z) / (2.0 * tau);
}

double GaussianPeaksFit::total_area() const
{
    return std::accumulate(areas.begin(), areas.end(), 0.0);
}

namespace {

double initial_background(const BinnedData& h, std::span<const double> centers, double sigma,
                          double gate)
{
    std::vector<double> density;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double overlap = gate_overlap(h.edge(i), h.edge(i + 1), gate);
        if (overlap < h.width)
            continue;
        const double x = h.center(i);
        const bool clear = std::all_of(centers.begin(), centers.end(),
                                       [&](double c) { return std::abs(x - c) > 3.0 * sigma; });
        if (clear)
            density.push_back(h.counts[i] / h.width);
    }
    if (density.empty())
        return 0.0;
    auto mid = density.begin() + std::ptrdiff_t(density.size() / 2);
    std::nth_element(density.begin(), mid, density.end());
    return *mid;
}

} // namespace

GaussianPeaksFit fit_gaussian_peaks(const BinnedData& h, std::span<const double> center_guess,
                                    double sigma_guess, double gate_half_width,
                                    const LmOptions& options)
{
    const std::size_t k = center_guess.size();
    if (k == 0 || h.size() == 0)
        throw FitError("nothing to fit");
    if (!(sigma_guess > 0.0))
        throw FitError("initial sigma must be positive");

    const Eigen::Index n = Eigen::Index(h.size());
    std::vector<double> overlap(h.size());
    for (std::size_t i = 0; i < h.size(); ++i)
        overlap[i] = gate_overlap(h.edge(i), h.edge(i + 1), gate_half_width);

    // Layout: areas[k], centers[k], sigma, background.
    const Eigen::Index m = Eigen::Index(2 * k + 2);
    const Eigen::Index i_sigma = Eigen::Index(2 * k);
    const Eigen::Index i_bg = i_sigma + 1;

    VectorXd p(m), scales(m);
    const double bg0 = initial_background(h, center_guess, sigma_guess, gate_half_width);
    for (std::size_t j = 0; j < k; ++j) {
        double in_peak = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i)
            if (std::abs(h.center(i) - center_guess[j]) <= 2.0 * sigma_guess)
                in_peak += h.counts[i];
        const double area = std::max((in_peak - bg0 * 4.0 * sigma_guess) / 0.9545, 1.0);
        p[Eigen::Index(j)] = area;
        scales[Eigen::Index(j)] = std::max(area, 1.0);
        p[Eigen::Index(k + j)] = center_guess[j];
        scales[Eigen::Index(k + j)] = sigma_guess;
    }
    p[i_sigma] = sigma_guess;
    scales[i_sigma] = sigma_guess;
    p[i_bg] = bg0;
    scales[i_bg] = std::max(bg0, 1.0 / h.width);

    const ModelFn model = [&](const VectorXd& q, VectorXd& out) {
        const double sigma = std::abs(q[i_sigma]);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double lo = h.edge(std::size_t(i));
            const double hi = lo + h.width;
            double v = q[i_bg] * overlap[std::size_t(i)];
            for (std::size_t j = 0; j < k; ++j)
                v += q[Eigen::Index(j)] * gaussian_bin_mass(lo, hi, q[Eigen::Index(k + j)], sigma);
            out[i] = v;
        }
    };

    const LmResult lm = levenberg_marquardt(model, to_vector(h.counts), p, scales, options);
    if (!lm.converged)
        throw FitError("Gaussian peak fit did not converge after " +
                       std::to_string(lm.iterations) + " iterations (rss " +
                       std::to_string(lm.rss) + ")");

    GaussianPeaksFit fit;
    for (std::size_t j = 0; j < k; ++j) {
        const auto a = Eigen::Index(j);
        const auto c = Eigen::Index(k + j);
        fit.areas.push_back(lm.params[a]);
        fit.area_errors.push_back(std::sqrt(std::max(lm.covariance(a, a), 0.0)));
        fit.centers.push_back(lm.params[c]);
        fit.center_errors.push_back(std::sqrt(std::max(lm.covariance(c, c), 0.0)));
    }
    fit.area_covariance = lm.covariance.topLeftCorner(Eigen::Index(k), Eigen::Index(k));
    fit.sigma = std::abs(lm.params[i_sigma]);
    fit.sigma_error = std::sqrt(std::max(lm.covariance(i_sigma, i_sigma), 0.0));
    fit.background = lm.params[i_bg];
    fit.background_error = std::sqrt(std::max(lm.covariance(i_bg, i_bg), 0.0));
    fit.rss = lm.rss;
    fit.iterations = lm.iterations;
    fit.converged = true;
    return fit;
}

GaussianPeaksFit fit_peak_amplitudes(const BinnedData& h, std::span<const double> centers,
                                     double sigma, double gate_half_width)
{
    const std::size_t k = centers.size();
    if (k == 0 || h.size() == 0)
        throw FitError("nothing to fit");
    const Eigen::Index n = Eigen::Index(h.size());
    MatrixXd design(n, Eigen::Index(k + 1));
    for (Eigen::Index i = 0; i < n; ++i) {
        const double lo = h.edge(std::size_t(i));
        const double hi = lo + h.width;
        for (std::size_t j = 0; j < k; ++j)
            design(i, Eigen::Index(j)) = gaussian_bin_mass(lo, hi, centers[j], sigma);
        design(i, Eigen::Index(k)) = gate_overlap(lo, hi, gate_half_width);
    }
    const VectorXd data = to_vector(h.counts);
    const VectorXd coef = design.colPivHouseholderQr().solve(data);
    const MatrixXd cov = sandwich_covariance(design, data);

    GaussianPeaksFit fit;
    for (std::size_t j = 0; j < k; ++j) {
        const auto a = Eigen::Index(j);
        fit.areas.push_back(coef[a]);
        fit.area_errors.push_back(std::sqrt(std::max(cov(a, a), 0.0)));
        fit.centers.push_back(centers[j]);
        fit.center_errors.push_back(0.0);
    }
    fit.area_covariance = cov.topLeftCorner(Eigen::Index(k), Eigen::Index(k));
    fit.sigma = sigma;
    fit.background = coef[Eigen::Index(k)];
    fit.background_error = std::sqrt(std::max(cov(Eigen::Index(k), Eigen::Index(k)), 0.0));
    fit.rss = (data - design * coef).squaredNorm();
    fit.converged = true;
    return fit;
}

EmgPairFit fit_emg_pair(const BinnedData& h, std::array<double, 2> location_guess,
                        double sigma_guess, double tau_guess, const LmOptions& options)
{
    if (h.size() == 0)
        throw FitError("nothing to fit");
    if (!(sigma_guess > 0.0) || !(tau_guess >= 0.0))
        throw FitError("invalid EMG initialization");

    const Eigen::Index n = Eigen::Index(h.size());
    // Layout: area0, area1, loc0, loc1, sigma, tau, background (per bin).
    VectorXd p(7), scales(7);
    const double split = 0.5 * (location_guess[0] + location_guess[1]);
    double left = 0.0, right = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i)
        (h.center(i) < split ? left : right) += h.counts[i];
    p << std::max(left, 1.0), std::max(right, 1.0), location_guess[0], location_guess[1],
        sigma_guess, tau_guess, 0.0;
    scales << std::max(left, 1.0), std::max(right, 1.0), sigma_guess, sigma_guess, sigma_guess,
        std::max(tau_guess, 0.1 * sigma_guess), 1.0;

    const ModelFn model = [&](const VectorXd& q, VectorXd& out) {
        const double sigma = std::abs(q[4]);
        const double tau = std::abs(q[5]);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double lo = h.edge(std::size_t(i));
            const double mid = lo + 0.5 * h.width;
            const double hi = lo + h.width;
            double v = q[6];
            for (int j = 0; j < 2; ++j) {
                const double loc = q[2 + j];
                const double mass = h.width / 6.0 *
                                    (emg_pdf(lo, loc, sigma, tau) + 4.0 * emg_pdf(mid, loc, sigma, tau) +
                                     emg_pdf(hi, loc, sigma, tau));
                v += q[j] * mass;
            }
            out[i] = v;
        }
    };

    const LmResult lm = levenberg_marquardt(model, to_vector(h.counts), p, scales, options);
    if (!lm.converged)
        throw FitError("EMG pair fit did not converge");

    EmgPairFit fit;
    fit.areas = {lm.params[0], lm.params[1]};
    fit.locations = {lm.params[2], lm.params[3]};
    fit.location_errors = {std::sqrt(std::max(lm.covariance(2, 2), 0.0)),
                           std::sqrt(std::max(lm.covariance(3, 3), 0.0))};
    fit.location_covariance = lm.covariance(2, 3);
    fit.sigma = std::abs(lm.params[4]);
    fit.tau = std::abs(lm.params[5]);
    fit.background = lm.params[6];
    fit.converged = true;
    return fit;
}

} // namespace wdc::fit
