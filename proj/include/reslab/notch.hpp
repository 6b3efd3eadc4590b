#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "reslab/error.hpp"
#include "reslab/types.hpp"

namespace reslab {

// Parameters of the notch (side-coupled) transmission model
//
//   S21(f) = a e^{i alpha} e^{-2 pi i f tau}
//            [1 - (q_l/|q_c|) e^{i phi} / (1 + 2 i q_l (f/f_r - 1))]
//
// a, alpha, tau describe the measurement environment; f_r, q_l, |q_c|, phi
// describe the resonator and its coupling.
struct NotchParams {
    double f_r = 0.0;     // resonance frequency, Hz
    double q_l = 0.0;     // loaded quality factor
    double abs_qc = 0.0;  // magnitude of the coupling quality factor
    double phi = 0.0;     // impedance mismatch angle, rad
    double a = 1.0;       // environment amplitude
    double alpha = 0.0;   // environment phase, rad
    double tau = 0.0;     // cable delay, s

    void validate() const {
        if (!(f_r > 0.0)) throw ValidationError("notch params: f_r must be positive");
        if (!(q_l > 0.0)) throw ValidationError("notch params: q_l must be positive");
        if (!(abs_qc > 0.0)) throw ValidationError("notch params: abs_qc must be positive");
        if (!(std::abs(phi) < std::numbers::pi / 2.0))
            throw ValidationError("notch params: |phi| must be below pi/2");
        if (!(a >= 0.0)) throw ValidationError("notch params: a must be non-negative");
        if (std::cos(phi) > 0.0 && !(q_l < abs_qc / std::cos(phi)))
            throw ValidationError("notch params: q_l >= abs_qc/cos(phi) implies Q_i <= 0");
    }
};

inline Complex s21_model(const NotchParams& p, double f) {
    // (f - f_r)/f_r rather than f/f_r - 1: the direct difference keeps the
    // detuning accurate for narrow lines at multi-GHz carriers.
    const double delta = (f - p.f_r) / p.f_r;
    const Complex denom(1.0, 2.0 * p.q_l * delta);
    const Complex dip = std::polar(p.q_l / p.abs_qc, p.phi) / denom;
    const Complex env = std::polar(p.a, p.alpha - 2.0 * std::numbers::pi * f * p.tau);
    return env * (1.0 - dip);
}

// Diameter-corrected internal quality factor: 1/q_i = 1/q_l - cos(phi)/|q_c|.
inline double internal_q(double q_l, double abs_qc, double phi) {
    if (!(q_l > 0.0) || !(abs_qc > 0.0))
        throw ValidationError("internal_q: quality factors must be positive");
    if (!(std::abs(phi) < std::numbers::pi / 2.0))
        throw ValidationError("internal_q: |phi| must be below pi/2");
    const double inv = 1.0 / q_l - std::cos(phi) / abs_qc;
    if (!(inv > 0.0))
        throw GeometryError("internal_q: unphysical parameters, internal loss would be <= 0");
    return 1.0 / inv;
}

// Full result of a notch extraction. params holds the reported values; the
// staged pipeline output is always kept alongside for diagnostics, whether or
// not the joint refinement ran.
struct NotchFit {
    NotchParams params;
    NotchParams staged;
    double q_i = 0.0;
    double residual_rms = 0.0;   // rms complex misfit relative to the amplitude a
    Complex circle_center;       // delay-corrected resonance circle
    double circle_radius = 0.0;
    bool refined = false;
};

}  // namespace reslab
