#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <vector>

#include "reslab/circle_fit.hpp"
#include "reslab/error.hpp"
#include "reslab/levmar.hpp"
#include "reslab/notch.hpp"
#include "reslab/types.hpp"

namespace reslab {

namespace detail {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline std::vector<double> unwrapped_phase(const std::vector<Complex>& samples) {
    std::vector<double> phase(samples.size());
    double offset = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double raw = std::arg(samples[i]);
        if (!std::isfinite(raw))
            throw ValidationError("phase unwrap: non-finite phase (zero sample?)");
        if (i > 0) {
            const double prev_raw = std::arg(samples[i - 1]);
            double jump = raw - prev_raw;
            while (jump > std::numbers::pi) jump -= kTwoPi;
            while (jump < -std::numbers::pi) jump += kTwoPi;
            offset += jump - (raw - prev_raw);
        }
        phase[i] = raw + offset;
    }
    return phase;
}

inline std::vector<Complex> delay_corrected(const ComplexTrace& trace, double tau) {
    std::vector<Complex> out(trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i)
        out[i] = trace.samples[i] * std::polar(1.0, kTwoPi * trace.freqs[i] * tau);
    return out;
}

// Circle residual of the delay-corrected trace; the delay estimate is the
// minimizer of this over tau.
inline double circle_residual_at(const ComplexTrace& trace, double tau) {
    try {
        return fit_circle(delay_corrected(trace, tau)).residual_rms;
    } catch (const GeometryError&) {
        return std::numeric_limits<double>::infinity();
    }
}

}  // namespace detail

// Cable-delay estimate. A linear fit of the unwrapped phase gives a coarse
// value; it is biased by the resonance's own phase excursion, so the estimate
// is refined by minimizing the circle-fit residual of the corrected samples
// over a bracket of +-10/span around the coarse value (grid scan, then
// golden-section).
inline double estimate_delay(const ComplexTrace& trace) {
    trace.validate();
    const std::size_t n = trace.size();
    if (n < 16) throw ValidationError("delay estimate: need at least 16 points");

    const auto phase = detail::unwrapped_phase(trace.samples);

    double mean_f = 0.0, mean_p = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_f += trace.freqs[i];
        mean_p += phase[i];
    }
    mean_f /= static_cast<double>(n);
    mean_p /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double df = trace.freqs[i] - mean_f;
        sxx += df * df;
        sxy += df * (phase[i] - mean_p);
    }
    const double tau0 = -(sxy / sxx) / detail::kTwoPi;
    if (!std::isfinite(tau0)) throw ValidationError("delay estimate: degenerate frequency grid");

    const double span = trace.span();
    const double half_bracket = 10.0 / span;

    // The residual landscape repeats on a scale of ~1/span, so locate the
    // global basin on a grid before polishing.
    constexpr int kGrid = 201;
    double best_tau = tau0;
    double best_res = std::numeric_limits<double>::infinity();
    for (int k = 0; k < kGrid; ++k) {
        const double tau =
            tau0 - half_bracket + 2.0 * half_bracket * static_cast<double>(k) / (kGrid - 1);
        const double res = detail::circle_residual_at(trace, tau);
        if (res < best_res) {
            best_res = res;
            best_tau = tau;
        }
    }

    const double grid_step = 2.0 * half_bracket / (kGrid - 1);
    double lo = best_tau - grid_step;
    double hi = best_tau + grid_step;
    constexpr double kInvGolden = 0.6180339887498949;
    double x1 = hi - kInvGolden * (hi - lo);
    double x2 = lo + kInvGolden * (hi - lo);
    double f1 = detail::circle_residual_at(trace, x1);
    double f2 = detail::circle_residual_at(trace, x2);
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo < std::max(1e-6 * std::abs(mid), 1e-10 / span)) break;
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - kInvGolden * (hi - lo);
            f1 = detail::circle_residual_at(trace, x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + kInvGolden * (hi - lo);
            f2 = detail::circle_residual_at(trace, x2);
        }
    }
    return 0.5 * (lo + hi);
}

struct PhaseFit {
    double theta0 = 0.0;
    double q_l = 0.0;
    double f_r = 0.0;
};

// Least-squares fit of the unwrapped phase of origin-centered circle data to
// theta(f) = theta0 + 2 atan(2 q_l (1 - f/f_r)).
inline PhaseFit fit_phase(const ComplexTrace& centered) {
    centered.validate();
    const std::size_t n = centered.size();
    if (n < 8) throw ValidationError("phase fit: need at least 8 points");

    const auto phase = detail::unwrapped_phase(centered.samples);
    const auto [min_it, max_it] = std::minmax_element(phase.begin(), phase.end());
    if (*max_it - *min_it < 1e-3)
        throw FitError("phase fit: phase is constant, no resonance present");

    // f_r guess: extremal phase slope
    std::size_t steepest = 0;
    double steepest_slope = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double slope =
            std::abs((phase[i + 1] - phase[i]) / (centered.freqs[i + 1] - centered.freqs[i]));
        if (slope > steepest_slope) {
            steepest_slope = slope;
            steepest = i;
        }
    }
    const double f_r0 = 0.5 * (centered.freqs[steepest] + centered.freqs[steepest + 1]);

    // q_l guess from the phase half-width: theta moves by +-pi/2 one
    // half-linewidth away from resonance
    const double theta_c = 0.5 * (phase[steepest] + phase[steepest + 1]);
    double f_lo = 0.0, f_hi = 0.0;
    for (std::size_t i = steepest + 1; i-- > 0;) {
        if (std::abs(phase[i] - theta_c) >= std::numbers::pi / 2.0) {
            f_lo = centered.freqs[i];
            break;
        }
    }
    for (std::size_t i = steepest + 1; i < n; ++i) {
        if (std::abs(phase[i] - theta_c) >= std::numbers::pi / 2.0) {
            f_hi = centered.freqs[i];
            break;
        }
    }
    double q_l0 = (f_lo > 0.0 && f_hi > f_lo) ? f_r0 / (f_hi - f_lo)
                                              : steepest_slope * f_r0 / 4.0;
    if (!(q_l0 > 0.0) || !std::isfinite(q_l0)) q_l0 = f_r0 / centered.span();
    // keep the start within what the grid can represent; noisy half-width
    // estimates can otherwise land far outside the convergence basin
    const double grid_step = centered.span() / static_cast<double>(n - 1);
    q_l0 = std::clamp(q_l0, 0.2 * f_r0 / centered.span(), 10.0 * f_r0 / grid_step);

    double theta00 = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        theta00 += phase[i] - 2.0 * std::atan(2.0 * q_l0 * (1.0 - centered.freqs[i] / f_r0));
    theta00 /= static_cast<double>(n);

    auto model = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
        const double theta0 = x[0];
        const double q_l = std::exp(x[1]);
        const double f_r = std::exp(x[2]);
        r.resize(static_cast<Eigen::Index>(n));
        jac.resize(static_cast<Eigen::Index>(n), 3);
        for (std::size_t i = 0; i < n; ++i) {
            const double rel = 1.0 - centered.freqs[i] / f_r;
            const double u = 2.0 * q_l * rel;
            const double denom = 1.0 + u * u;
            r[static_cast<Eigen::Index>(i)] = theta0 + 2.0 * std::atan(u) - phase[i];
            jac(static_cast<Eigen::Index>(i), 0) = 1.0;
            jac(static_cast<Eigen::Index>(i), 1) = 2.0 * u / denom;  // d/d(ln q_l)
            jac(static_cast<Eigen::Index>(i), 2) =
                4.0 * q_l * (centered.freqs[i] / f_r) / denom;  // d/d(ln f_r)
        }
    };

    Eigen::VectorXd x0(3);
    x0 << theta00, std::log(q_l0), std::log(f_r0);
    const LevMarSummary summary = levmar_solve(model, x0);

    PhaseFit fit;
    // theta0 is only defined modulo a full turn (the unwrap picks a branch)
    fit.theta0 = std::remainder(summary.x[0], detail::kTwoPi);
    fit.q_l = std::exp(summary.x[1]);
    fit.f_r = std::exp(summary.x[2]);
    return fit;
}

struct ExtractOptions {
    bool refine = true;  // joint 7-parameter polish after the staged pipeline
    LevMarOptions solver{};
};

namespace detail {

// Frame of reference for the joint refinement. Two numerical traps are
// avoided here:
//  - alpha and tau enter the model as alpha - 2 pi f tau with f ~ GHz, so
//    against absolute frequency their columns are collinear to within
//    (span/f)^2 and the fit creeps along that ridge. The internal phase
//    alpha_c is referenced to the band center f_ref instead.
//  - f_r is fit as a relative detuning against a fixed anchor rather than as
//    a value in Hz: a double holds f_r only to ~1 ulp of several GHz, which
//    for narrow lines is coarser than the fit can otherwise resolve.
// Internal coordinates: [detune, ln q_l, ln |q_c|, phi, ln a, alpha_c, tau]
// with f_r = f_anchor (1 + detune).
struct RefineFrame {
    double f_anchor = 0.0;
    double f_ref = 0.0;
};

inline NotchParams params_from_coords(const Eigen::VectorXd& x, const RefineFrame& frame) {
    NotchParams p;
    p.f_r = frame.f_anchor + x[0] * frame.f_anchor;
    p.q_l = std::exp(x[1]);
    p.abs_qc = std::exp(x[2]);
    p.phi = x[3];
    p.a = std::exp(x[4]);
    p.tau = x[6];
    p.alpha = std::remainder(x[5] + kTwoPi * frame.f_ref * p.tau, kTwoPi);
    return p;
}

inline Eigen::VectorXd coords_from_params(const NotchParams& p, const RefineFrame& frame) {
    Eigen::VectorXd x(7);
    x << (p.f_r - frame.f_anchor) / frame.f_anchor, std::log(p.q_l), std::log(p.abs_qc), p.phi,
        std::log(p.a), std::remainder(p.alpha - kTwoPi * frame.f_ref * p.tau, kTwoPi), p.tau;
    return x;
}

inline void notch_residuals(const ComplexTrace& trace, const RefineFrame& frame,
                            const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
    const double detune = x[0];
    const double q_l = std::exp(x[1]);
    const double abs_qc = std::exp(x[2]);
    const double phi = x[3];
    const double a = std::exp(x[4]);
    const double alpha_c = x[5];
    const double tau = x[6];
    const std::size_t n = trace.size();
    r.resize(static_cast<Eigen::Index>(2 * n));
    jac.resize(static_cast<Eigen::Index>(2 * n), 7);
    const double one_plus = 1.0 + detune;
    if (!(one_plus > 0.0)) {
        r.setConstant(std::numeric_limits<double>::infinity());
        jac.setZero();
        return;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double f = trace.freqs[i];
        // (f - f_r)/f_r computed without materializing f_r, so the detuning
        // keeps full precision for lines much narrower than 1 ulp of f
        const double rel_anchor = (f - frame.f_anchor) / frame.f_anchor;
        const double delta = (rel_anchor - detune) / one_plus;
        const Complex denom(1.0, 2.0 * q_l * delta);
        const Complex mismatch = std::polar(1.0, phi);
        const Complex dip = (q_l / abs_qc) * mismatch / denom;
        const Complex env = std::polar(a, alpha_c - kTwoPi * (f - frame.f_ref) * tau);
        const Complex s = env * (1.0 - dip);

        const double f_over_fr = (1.0 + rel_anchor) / one_plus;
        const Complex d_detune =
            -env * dip * Complex(0.0, 2.0 * q_l * f_over_fr / one_plus) / denom;
        const Complex d_ln_ql = -env * mismatch * q_l / (abs_qc * denom * denom);
        const Complex d_ln_qc = env * dip;
        const Complex d_phi = -env * Complex(0.0, 1.0) * dip;
        const Complex d_ln_a = s;
        const Complex d_alpha = Complex(0.0, 1.0) * s;
        const Complex d_tau = Complex(0.0, -kTwoPi * (f - frame.f_ref)) * s;

        const auto row_re = static_cast<Eigen::Index>(2 * i);
        const auto row_im = row_re + 1;
        const Complex resid = s - trace.samples[i];
        r[row_re] = resid.real();
        r[row_im] = resid.imag();
        const Complex cols[7] = {d_detune, d_ln_ql, d_ln_qc, d_phi, d_ln_a, d_alpha, d_tau};
        for (int j = 0; j < 7; ++j) {
            jac(row_re, j) = cols[j].real();
            jac(row_im, j) = cols[j].imag();
        }
    }
}

}  // namespace detail

// Full extraction pipeline: delay estimate -> delay correction -> circle fit
// -> phase fit -> amplitude/phase normalization against the off-resonant
// point -> mismatch geometry -> optional joint refinement of all seven model
// parameters against the raw trace.
inline NotchFit extract(const ComplexTrace& trace, const ExtractOptions& opts = {}) {
    trace.validate();
    const std::size_t n = trace.size();
    if (n < 8) throw ValidationError("extract: need at least 8 points");

    std::size_t dip_index = 0;
    double dip_mag = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double m = std::abs(trace.samples[i]);
        if (m < dip_mag) {
            dip_mag = m;
            dip_index = i;
        }
    }
    if (dip_index == 0 || dip_index == n - 1)
        throw GeometryError("extract: resonance dip sits at the edge of the grid");

    const double tau_est = estimate_delay(trace);

    ComplexTrace corrected;
    corrected.freqs = trace.freqs;
    corrected.samples = detail::delay_corrected(trace, tau_est);

    const CircleFit circle = fit_circle(corrected.samples);

    ComplexTrace centered = corrected;
    for (auto& z : centered.samples) z -= circle.center;
    const PhaseFit phase = fit_phase(centered);

    // Off-resonant point: diametrically opposite the resonance point on the
    // fitted circle. In the normalized frame it maps to 1 + 0i.
    const Complex resonance_dir = std::polar(1.0, phase.theta0);
    const Complex off_resonant = circle.center - circle.radius * resonance_dir;
    if (std::abs(off_resonant) < 1e-15)
        throw GeometryError("extract: off-resonant amplitude is zero");

    std::vector<Complex> normalized(n);
    for (std::size_t i = 0; i < n; ++i) normalized[i] = corrected.samples[i] / off_resonant;
    const CircleFit norm_circle = fit_circle(normalized);

    const Complex one_minus_center = Complex(1.0, 0.0) - norm_circle.center;
    NotchParams staged;
    staged.f_r = phase.f_r;
    staged.q_l = phase.q_l;
    staged.abs_qc = phase.q_l / (2.0 * norm_circle.radius);
    staged.phi = std::arg(one_minus_center);
    staged.a = std::abs(off_resonant);
    staged.alpha = std::arg(off_resonant);
    staged.tau = tau_est;
    if (!(std::abs(staged.phi) < std::numbers::pi / 2.0))
        throw GeometryError("extract: impedance mismatch angle out of range");

    NotchFit fit;
    fit.staged = staged;
    fit.params = staged;
    fit.circle_center = circle.center;
    fit.circle_radius = circle.radius;

    if (opts.refine) {
        const detail::RefineFrame frame{staged.f_r,
                                        0.5 * (trace.freqs.front() + trace.freqs.back())};
        auto model = [&trace, &frame](const Eigen::VectorXd& x, Eigen::VectorXd& r,
                                      Eigen::MatrixXd& jac) {
            detail::notch_residuals(trace, frame, x, r, jac);
        };
        LevMarOptions solver = opts.solver;
        if (solver.cost_floor == 0.0) {
            // perfect-fit floor: double-precision roundoff on 2n residuals
            const double unit = 1e-13 * staged.a;
            solver.cost_floor = unit * unit * static_cast<double>(2 * n);
        }
        const LevMarSummary summary =
            levmar_solve(model, detail::coords_from_params(staged, frame), solver);
        fit.params = detail::params_from_coords(summary.x, frame);
        fit.params.phi = std::remainder(fit.params.phi, detail::kTwoPi);
        fit.refined = true;
        if (!(std::abs(fit.params.phi) < std::numbers::pi / 2.0))
            throw GeometryError("extract: refined mismatch angle out of range");
    }

    fit.q_i = internal_q(fit.params.q_l, fit.params.abs_qc, fit.params.phi);

    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Complex resid = trace.samples[i] - s21_model(fit.params, trace.freqs[i]);
        ss += std::norm(resid);
    }
    fit.residual_rms = std::sqrt(ss / static_cast<double>(n)) / fit.params.a;
    return fit;
}

}  // namespace reslab
