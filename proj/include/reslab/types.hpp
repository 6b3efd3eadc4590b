#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "reslab/error.hpp"

namespace reslab {

using Complex = std::complex<double>;

// One complex transmission trace: a strictly increasing frequency grid with a
// dimensionless complex sample per point. Immutable by convention once built;
// every consumer takes it by const reference.
struct ComplexTrace {
    std::vector<double> freqs;     // Hz
    std::vector<Complex> samples;  // dimensionless transmission
    std::string meta;              // optional label/epoch

    std::size_t size() const noexcept { return freqs.size(); }

    double span() const { return freqs.empty() ? 0.0 : freqs.back() - freqs.front(); }

    void validate() const {
        if (freqs.size() != samples.size())
            throw ValidationError("trace: frequency and sample arrays differ in length");
        if (freqs.empty())
            throw ValidationError("trace: no data points");
        for (std::size_t i = 0; i < freqs.size(); ++i) {
            if (!std::isfinite(freqs[i]) || freqs[i] <= 0.0)
                throw ValidationError("trace: non-finite or non-positive frequency at index " +
                                      std::to_string(i));
            if (!std::isfinite(samples[i].real()) || !std::isfinite(samples[i].imag()))
                throw ValidationError("trace: non-finite sample at index " + std::to_string(i));
            if (i > 0 && freqs[i] <= freqs[i - 1])
                throw ValidationError("trace: frequencies not strictly increasing at index " +
                                      std::to_string(i));
        }
    }
};

// One (mean photon number, internal quality factor) point of a power sweep.
struct SweepPoint {
    double n_mean = 0.0;
    double q_i = 0.0;
    std::optional<double> q_i_sigma;  // 1-sigma uncertainty on q_i
};

// A power sweep for one resonator at one epoch: ordered (n, Q_i) points plus
// the fixed measurement context.
struct PowerSweep {
    std::vector<SweepPoint> points;
    double f_r = 0.0;         // Hz
    double temperature = 0.0;  // K

    void validate() const {
        if (!(f_r > 0.0) || !std::isfinite(f_r))
            throw ValidationError("sweep: resonance frequency must be positive");
        if (!(temperature > 0.0) || !std::isfinite(temperature))
            throw ValidationError("sweep: temperature must be positive");
        if (points.empty())
            throw ValidationError("sweep: no data points");
        for (std::size_t i = 0; i < points.size(); ++i) {
            const auto& p = points[i];
            if (!(p.n_mean > 0.0) || !std::isfinite(p.n_mean))
                throw ValidationError("sweep: non-positive photon number at row " +
                                      std::to_string(i));
            if (!(p.q_i > 0.0) || !std::isfinite(p.q_i))
                throw ValidationError("sweep: non-positive quality factor at row " +
                                      std::to_string(i));
            if (p.q_i_sigma && (!(*p.q_i_sigma > 0.0) || !std::isfinite(*p.q_i_sigma)))
                throw ValidationError("sweep: non-positive uncertainty at row " +
                                      std::to_string(i));
        }
    }
};

// Pointwise division by a reference trace taken with the resonator absent
// (e.g. above the superconducting transition). Removes the multiplicative
// line response; the frequency grid is unchanged.
inline ComplexTrace calibrate_background(const ComplexTrace& trace, const ComplexTrace& reference) {
    trace.validate();
    reference.validate();
    if (trace.freqs.size() != reference.freqs.size())
        throw ValidationError("background calibration: frequency grids differ in length");
    for (std::size_t i = 0; i < trace.freqs.size(); ++i) {
        if (trace.freqs[i] != reference.freqs[i])
            throw ValidationError("background calibration: frequency grids differ at index " +
                                  std::to_string(i));
    }
    ComplexTrace out;
    out.freqs = trace.freqs;
    out.meta = trace.meta;
    out.samples.resize(trace.samples.size());
    for (std::size_t i = 0; i < trace.samples.size(); ++i) {
        if (std::abs(reference.samples[i]) < 1e-15)
            throw ValidationError("background calibration: reference sample near zero at index " +
                                  std::to_string(i));
        out.samples[i] = trace.samples[i] / reference.samples[i];
    }
    return out;
}

}  // namespace reslab
