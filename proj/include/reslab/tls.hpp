#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "reslab/constants.hpp"
#include "reslab/error.hpp"
#include "reslab/levmar.hpp"
#include "reslab/rng.hpp"
#include "reslab/types.hpp"

namespace reslab {

// Placement of the saturation exponent. The default applies beta to the
// whole factor (1 + n/n_c); the variant applies it to the ratio only,
// 1 + (n/n_c)^beta.
enum class TLSModelVariant { exponent_outside, exponent_inside };

inline const char* to_string(TLSModelVariant v) {
    return v == TLSModelVariant::exponent_outside ? "exponent-outside" : "exponent-inside";
}

// Power-dependent dielectric loss parameters. f_tls0 is the product of the
// filling factor and the zero-power TLS loss tangent; the two are never
// separable from a power sweep, so only the product is carried.
struct TLSParams {
    double f_tls0 = 0.0;
    double n_c = 1.0;        // critical photon number
    double beta = 0.0;       // saturation exponent, in [0, 1]
    double tan_other = 0.0;  // power-independent loss

    void validate() const {
        if (!(f_tls0 > 0.0) || !std::isfinite(f_tls0))
            throw ValidationError("tls params: f_tls0 must be positive");
        if (!(n_c > 0.0) || !std::isfinite(n_c))
            throw ValidationError("tls params: n_c must be positive");
        if (!(beta >= 0.0 && beta <= 1.0))
            throw ValidationError("tls params: beta must be in [0, 1]");
        if (!(tan_other >= 0.0) || !std::isfinite(tan_other))
            throw ValidationError("tls params: tan_other must be >= 0");
    }
};

// tanh(h f_r / 2 k_B T): thermal de-saturation factor of the TLS bath.
inline double tls_thermal_factor(double f_r, double temperature) {
    if (!(f_r > 0.0) || !(temperature > 0.0))
        throw ValidationError("loss model: f_r and temperature must be positive");
    return std::tanh(constants::h * f_r / (2.0 * constants::k_b * temperature));
}

// Total loss tangent at mean photon number n:
//   tan d = f_tls0 tanh(h f_r / 2 k_B T) / (1 + n/n_c)^beta + tan_other
inline double loss_model(const TLSParams& p, double n_mean, double f_r, double temperature,
                         TLSModelVariant variant = TLSModelVariant::exponent_outside) {
    p.validate();
    if (!(n_mean >= 0.0) || !std::isfinite(n_mean))
        throw ValidationError("loss model: n_mean must be >= 0");
    const double thermal = tls_thermal_factor(f_r, temperature);
    const double saturation = variant == TLSModelVariant::exponent_outside
                                  ? std::pow(1.0 + n_mean / p.n_c, p.beta)
                                  : 1.0 + std::pow(n_mean / p.n_c, p.beta);
    return p.f_tls0 * thermal / saturation + p.tan_other;
}

// Internal quality factor in the zero-power limit.
inline double qi_low_photon(const TLSParams& p, double f_r, double temperature,
                            TLSModelVariant variant = TLSModelVariant::exponent_outside) {
    const double loss = loss_model(p, 0.0, f_r, temperature, variant);
    if (!(loss > 0.0)) throw ValidationError("qi_low_photon: total loss is zero, Q_i diverges");
    return 1.0 / loss;
}

struct TLSSigmas {
    double f_tls0 = 0.0;
    double n_c = 0.0;
    double beta = 0.0;
    double tan_other = 0.0;
};

struct TLSFitResult {
    TLSParams params;
    TLSSigmas sigmas;  // 1-sigma from linearized covariance scaled by reduced chi^2
    double q_i_lp = 0.0;
    double chi2_reduced = 0.0;
    double f_r = 0.0;
    double temperature = 0.0;
    TLSModelVariant variant = TLSModelVariant::exponent_outside;
    std::vector<std::string> bounds_active;  // e.g. "beta_lower", "tan_other_lower"
    std::vector<std::string> diagnostics;
};

struct TLSFitOptions {
    TLSModelVariant variant = TLSModelVariant::exponent_outside;
    double n_c_lower = 1e-2;
    double n_c_upper = 1e9;
    int bootstrap_samples = 0;  // 0 = linearized sigmas only
    std::uint64_t bootstrap_seed = 1;
    LevMarOptions solver{};
};

namespace detail {

// Internal fit coordinates: log for the positive parameters, a logistic map
// for the bounded ones. Keeps the solver unconstrained while the physical
// parameters respect their bounds.
struct TLSTransform {
    double nc_lo_ln, nc_hi_ln;

    explicit TLSTransform(const TLSFitOptions& o)
        : nc_lo_ln(std::log(o.n_c_lower)), nc_hi_ln(std::log(o.n_c_upper)) {}

    static double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }
    static double logit(double s) { return std::log(s / (1.0 - s)); }

    TLSParams params(const Eigen::VectorXd& u) const {
        TLSParams p;
        p.f_tls0 = std::exp(u[0]);
        const double s = logistic(u[1]);
        p.n_c = std::exp(nc_lo_ln + (nc_hi_ln - nc_lo_ln) * s);
        p.beta = logistic(u[2]);
        p.tan_other = std::exp(u[3]);
        return p;
    }

    // d(param)/d(u) for the chain rule
    Eigen::Vector4d dparam_du(const Eigen::VectorXd& u) const {
        const TLSParams p = params(u);
        const double s = logistic(u[1]);
        Eigen::Vector4d d;
        d[0] = p.f_tls0;
        d[1] = p.n_c * (nc_hi_ln - nc_lo_ln) * s * (1.0 - s);
        d[2] = p.beta * (1.0 - p.beta);
        d[3] = p.tan_other;
        return d;
    }

    Eigen::VectorXd coords(const TLSParams& p) const {
        Eigen::VectorXd u(4);
        u[0] = std::log(p.f_tls0);
        const double s_nc =
            std::clamp((std::log(p.n_c) - nc_lo_ln) / (nc_hi_ln - nc_lo_ln), 1e-6, 1.0 - 1e-6);
        u[1] = logit(s_nc);
        u[2] = logit(std::clamp(p.beta, 1e-6, 1.0 - 1e-6));
        u[3] = std::log(std::max(p.tan_other, 1e-300));
        return u;
    }
};

// Loss-model value and gradient with respect to the physical parameters
// {f_tls0, n_c, beta, tan_other} at one photon number.
inline double loss_gradient(const TLSParams& p, double n, double thermal,
                            TLSModelVariant variant, Eigen::Vector4d& grad) {
    if (variant == TLSModelVariant::exponent_outside) {
        const double base = 1.0 + n / p.n_c;
        const double sat = std::pow(base, p.beta);
        const double tls = p.f_tls0 * thermal / sat;
        grad[0] = thermal / sat;
        grad[1] = tls * p.beta * n / (p.n_c * p.n_c * base);
        grad[2] = -tls * std::log(base);
        grad[3] = 1.0;
        return tls + p.tan_other;
    }
    const double ratio = n / p.n_c;
    const double pow_r = n > 0.0 ? std::pow(ratio, p.beta) : 0.0;
    const double sat = 1.0 + pow_r;
    const double tls = p.f_tls0 * thermal / sat;
    grad[0] = thermal / sat;
    grad[1] = tls / sat * p.beta * pow_r / p.n_c;
    grad[2] = n > 0.0 ? -tls / sat * pow_r * std::log(ratio) : 0.0;
    grad[3] = 1.0;
    return tls + p.tan_other;
}

}  // namespace detail

// Weighted least squares of the loss model against a power sweep, with
// residuals taken in loss space (tan d = 1/Q_i). Uncertainty weights are used
// when every point carries one; otherwise the fit is unweighted.
inline TLSFitResult fit_tls(const PowerSweep& sweep, const TLSFitOptions& opts = {}) {
    sweep.validate();
    const std::size_t n_pts = sweep.points.size();
    if (n_pts < 6) throw ValidationError("tls fit: need at least 6 points");

    double n_min = sweep.points.front().n_mean, n_max = n_min;
    bool all_sigma = true;
    for (const auto& pt : sweep.points) {
        n_min = std::min(n_min, pt.n_mean);
        n_max = std::max(n_max, pt.n_mean);
        all_sigma = all_sigma && pt.q_i_sigma.has_value();
    }
    if (!(n_max / n_min >= 1e3))
        throw ValidationError("tls fit: photon numbers must span at least 3 decades");

    const double thermal = tls_thermal_factor(sweep.f_r, sweep.temperature);

    // losses and weights; sigma on tan d propagated from sigma on q_i
    Eigen::VectorXd y(n_pts), w(n_pts), n_mean(n_pts);
    double q_max = 0.0, q_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_pts; ++i) {
        const auto& pt = sweep.points[i];
        n_mean[i] = pt.n_mean;
        y[i] = 1.0 / pt.q_i;
        w[i] = all_sigma ? pt.q_i * pt.q_i / *pt.q_i_sigma : 1.0;
        q_max = std::max(q_max, pt.q_i);
        q_min = std::min(q_min, pt.q_i);
    }

    // starting point: a fraction of the smallest observed loss goes to the
    // power-independent channel, the rest of the zero-power loss to TLS
    TLSParams init;
    init.tan_other = 0.5 / q_max;
    init.f_tls0 = std::max((1.0 / q_min - init.tan_other) / thermal, 1e-3 / q_min);
    double log_gm = 0.0;
    for (std::size_t i = 0; i < n_pts; ++i) log_gm += std::log(n_mean[i]);
    init.n_c = std::clamp(std::exp(log_gm / static_cast<double>(n_pts)), opts.n_c_lower * 1.01,
                          opts.n_c_upper * 0.99);
    init.beta = 0.2;

    const detail::TLSTransform tf(opts);

    auto model = [&](const Eigen::VectorXd& u, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
        const TLSParams p = tf.params(u);
        const Eigen::Vector4d du = tf.dparam_du(u);
        r.resize(n_pts);
        jac.resize(static_cast<Eigen::Index>(n_pts), 4);
        Eigen::Vector4d grad;
        for (std::size_t i = 0; i < n_pts; ++i) {
            const double value = detail::loss_gradient(p, n_mean[i], thermal, opts.variant, grad);
            r[i] = (value - y[i]) * w[i];
            for (int j = 0; j < 4; ++j) jac(static_cast<Eigen::Index>(i), j) = grad[j] * du[j] * w[i];
        }
    };

    const LevMarSummary summary = levmar_solve(model, tf.coords(init), opts.solver);

    TLSFitResult result;
    result.params = tf.params(summary.x);
    result.f_r = sweep.f_r;
    result.temperature = sweep.temperature;
    result.variant = opts.variant;

    // Bound bookkeeping. A saturated logistic or a collapsed log coordinate
    // means the data pinned the parameter against its bound.
    const double zero_power_loss = result.params.f_tls0 * thermal + result.params.tan_other;
    if (result.params.beta < 1e-6) {
        result.params.beta = 0.0;
        result.bounds_active.push_back("beta_lower");
        result.diagnostics.push_back(
            "no power dependence: split between f_tls0 and tan_other is not identifiable");
    } else if (result.params.beta > 1.0 - 1e-6) {
        result.params.beta = 1.0;
        result.bounds_active.push_back("beta_upper");
    }
    if (result.params.tan_other < 1e-4 * zero_power_loss) {
        result.params.tan_other = 0.0;
        result.bounds_active.push_back("tan_other_lower");
    }
    if (result.params.n_c < opts.n_c_lower * (1.0 + 1e-6))
        result.bounds_active.push_back("n_c_lower");
    else if (result.params.n_c > opts.n_c_upper * (1.0 - 1e-6))
        result.bounds_active.push_back("n_c_upper");

    // reduced chi^2 at the (possibly clamped) reported parameters
    double cost = 0.0;
    for (std::size_t i = 0; i < n_pts; ++i) {
        const double value =
            loss_model(result.params, n_mean[i], sweep.f_r, sweep.temperature, opts.variant);
        const double ri = (value - y[i]) * w[i];
        cost += ri * ri;
    }
    const double dof = static_cast<double>(n_pts) - 4.0;
    result.chi2_reduced = cost / dof;
    result.q_i_lp = qi_low_photon(result.params, sweep.f_r, sweep.temperature, opts.variant);

    // Linearized covariance in physical coordinates, scaled by reduced chi^2.
    {
        Eigen::MatrixXd jac(n_pts, 4);
        Eigen::Vector4d grad;
        TLSParams p = result.params;
        p.n_c = std::max(p.n_c, 1e-300);
        p.beta = std::clamp(p.beta, 0.0, 1.0);
        for (std::size_t i = 0; i < n_pts; ++i) {
            detail::loss_gradient(p, n_mean[i], thermal, opts.variant, grad);
            for (int j = 0; j < 4; ++j) jac(static_cast<Eigen::Index>(i), j) = grad[j] * w[i];
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac, Eigen::ComputeThinV);
        const Eigen::VectorXd& sv = svd.singularValues();
        const double floor = sv[0] * 1e-14;
        Eigen::Vector4d var = Eigen::Vector4d::Zero();
        for (int k = 0; k < 4; ++k) {
            const double s = std::max(sv[k], floor);
            for (int j = 0; j < 4; ++j) {
                const double v = svd.matrixV()(j, k);
                var[j] += (v * v) / (s * s);
            }
        }
        var *= result.chi2_reduced;
        result.sigmas.f_tls0 = std::sqrt(var[0]);
        result.sigmas.n_c = std::sqrt(var[1]);
        result.sigmas.beta = std::sqrt(var[2]);
        result.sigmas.tan_other = std::sqrt(var[3]);
    }

    // Residual-resampling bootstrap as an alternative uncertainty estimate.
    if (opts.bootstrap_samples > 0) {
        Rng rng(opts.bootstrap_seed);
        std::vector<double> fits_f0, fits_nc, fits_beta, fits_to;
        Eigen::VectorXd fitted(n_pts);
        for (std::size_t i = 0; i < n_pts; ++i)
            fitted[i] = loss_model(result.params, n_mean[i], sweep.f_r, sweep.temperature,
                                   opts.variant);
        for (int b = 0; b < opts.bootstrap_samples; ++b) {
            PowerSweep replica = sweep;
            for (std::size_t i = 0; i < n_pts; ++i) {
                const std::size_t k = rng.next_u64() % n_pts;
                const double resampled = fitted[i] + (y[k] - fitted[k]) * w[k] / w[i];
                if (!(resampled > 0.0)) {
                    replica.points[i].q_i = sweep.points[i].q_i;
                    continue;
                }
                replica.points[i].q_i = 1.0 / resampled;
            }
            try {
                TLSFitOptions sub = opts;
                sub.bootstrap_samples = 0;
                const TLSFitResult r = fit_tls(replica, sub);
                fits_f0.push_back(r.params.f_tls0);
                fits_nc.push_back(r.params.n_c);
                fits_beta.push_back(r.params.beta);
                fits_to.push_back(r.params.tan_other);
            } catch (const Error&) {
                // a replica that fails to converge is dropped
            }
        }
        auto stddev = [](const std::vector<double>& v) {
            if (v.size() < 2) return 0.0;
            double mean = 0.0;
            for (double x : v) mean += x;
            mean /= static_cast<double>(v.size());
            double ss = 0.0;
            for (double x : v) ss += (x - mean) * (x - mean);
            return std::sqrt(ss / static_cast<double>(v.size() - 1));
        };
        result.sigmas.f_tls0 = stddev(fits_f0);
        result.sigmas.n_c = stddev(fits_nc);
        result.sigmas.beta = stddev(fits_beta);
        result.sigmas.tan_other = stddev(fits_to);
        result.diagnostics.push_back("sigmas from " + std::to_string(fits_f0.size()) +
                                     " bootstrap replicas");
    }

    return result;
}

// Change in loss parameters between two epochs of the same resonator.
struct AgingDelta {
    double f_tls0_pct = 0.0;      // 100 (after - before) / before
    double tan_other_delta = 0.0;  // absolute
    double q_i_lp_delta = 0.0;     // absolute
};

inline AgingDelta aging_report(const TLSFitResult& before, const TLSFitResult& after) {
    if (!(before.params.f_tls0 > 0.0))
        throw ValidationError("aging report: reference f_tls0 must be positive");
    AgingDelta delta;
    delta.f_tls0_pct = 100.0 * (after.params.f_tls0 - before.params.f_tls0) / before.params.f_tls0;
    delta.tan_other_delta = after.params.tan_other - before.params.tan_other;
    delta.q_i_lp_delta = after.q_i_lp - before.q_i_lp;
    return delta;
}

}  // namespace reslab
