#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "reslab/notch.hpp"
#include "reslab/rng.hpp"
#include "reslab/tls.hpp"
#include "reslab/types.hpp"

namespace reslab {

enum class NoiseKind { none, complex_gaussian, multiplicative };

inline const char* to_string(NoiseKind k) {
    switch (k) {
        case NoiseKind::none: return "none";
        case NoiseKind::complex_gaussian: return "complex_gaussian";
        default: return "multiplicative";
    }
}

// Noise recipe for synthetic data. Generation is bit-reproducible: the same
// spec and inputs always produce the same output on any platform.
struct NoiseSpec {
    NoiseKind kind = NoiseKind::none;
    double sigma = 0.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(sigma >= 0.0) || !std::isfinite(sigma))
            throw ValidationError("noise spec: sigma must be >= 0");
    }
};

namespace detail {

inline std::string format_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

// Evaluates the notch model on a uniform grid and applies measurement noise.
// complex_gaussian perturbs each sample by sigma (g1 + i g2) scaled to the
// off-resonant amplitude; multiplicative scales each sample by (1 + sigma g).
inline ComplexTrace synth_trace(const NotchParams& p, double f_min, double f_max,
                                std::size_t n_points, const NoiseSpec& noise) {
    p.validate();
    noise.validate();
    if (n_points < 8) throw ValidationError("synth trace: need at least 8 points");
    if (!(f_min > 0.0) || !(f_min < f_max))
        throw ValidationError("synth trace: need 0 < f_min < f_max");
    if (!(f_min < p.f_r && p.f_r < f_max))
        throw ValidationError("synth trace: resonance lies outside the frequency grid");

    ComplexTrace trace;
    trace.freqs.resize(n_points);
    trace.samples.resize(n_points);
    const double step = (f_max - f_min) / static_cast<double>(n_points - 1);
    for (std::size_t k = 0; k < n_points; ++k) {
        const double f = f_min + step * static_cast<double>(k);
        trace.freqs[k] = f;
        trace.samples[k] = s21_model(p, f);
    }

    if (noise.kind != NoiseKind::none && noise.sigma > 0.0) {
        Rng rng(noise.seed);
        for (auto& z : trace.samples) {
            if (noise.kind == NoiseKind::complex_gaussian) {
                const double g1 = rng.next_gaussian();
                const double g2 = rng.next_gaussian();
                z += noise.sigma * p.a * Complex(g1, g2);
            } else {
                z *= 1.0 + noise.sigma * rng.next_gaussian();
            }
        }
    }

    trace.meta = std::string("prng=") + kPrngName + " seed=" + std::to_string(noise.seed) +
                 " noise=" + to_string(noise.kind) + " sigma=" + detail::format_g(noise.sigma) +
                 "\nf_r=" + detail::format_g(p.f_r) + " q_l=" + detail::format_g(p.q_l) +
                 " abs_qc=" + detail::format_g(p.abs_qc) + " phi=" + detail::format_g(p.phi) +
                 " a=" + detail::format_g(p.a) + " alpha=" + detail::format_g(p.alpha) +
                 " tau=" + detail::format_g(p.tau);
    return trace;
}

// Q_i(n) = 1 / loss_model(n) over the given photon-number grid. Noise is
// multiplicative on Q_i; the applied noise level is recorded per point as
// q_i_sigma so downstream fits can weight accordingly.
inline PowerSweep synth_sweep(const TLSParams& p, double f_r, double temperature,
                              std::span<const double> n_grid, const NoiseSpec& noise,
                              TLSModelVariant variant = TLSModelVariant::exponent_outside) {
    p.validate();
    noise.validate();
    if (n_grid.empty()) throw ValidationError("synth sweep: empty photon grid");
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        if (!(n_grid[i] > 0.0))
            throw ValidationError("synth sweep: photon numbers must be positive");
        if (i > 0 && n_grid[i] < n_grid[i - 1])
            throw ValidationError("synth sweep: photon grid must be sorted");
    }

    PowerSweep sweep;
    sweep.f_r = f_r;
    sweep.temperature = temperature;
    const bool noisy = noise.kind != NoiseKind::none && noise.sigma > 0.0;
    Rng rng(noise.seed);
    for (double n : n_grid) {
        SweepPoint pt;
        pt.n_mean = n;
        pt.q_i = 1.0 / loss_model(p, n, f_r, temperature, variant);
        if (noisy) {
            // keep the factor positive; a resample only triggers at absurd
            // sigma and stays deterministic for a given seed
            double factor = 1.0 + noise.sigma * rng.next_gaussian();
            while (factor <= 1e-2) factor = 1.0 + noise.sigma * rng.next_gaussian();
            pt.q_i_sigma = noise.sigma * pt.q_i;
            pt.q_i *= factor;
        }
        sweep.points.push_back(pt);
    }
    sweep.validate();
    return sweep;
}

// Log-spaced photon-number grid, endpoints included.
inline std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0) || !(hi > lo) || count < 2)
        throw ValidationError("log_spaced: need 0 < lo < hi and count >= 2");
    std::vector<double> grid(count);
    const double llo = std::log10(lo), lhi = std::log10(hi);
    for (std::size_t i = 0; i < count; ++i)
        grid[i] = std::pow(10.0, llo + (lhi - llo) * static_cast<double>(i) /
                                     static_cast<double>(count - 1));
    return grid;
}

}  // namespace reslab
