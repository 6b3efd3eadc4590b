#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "reslab/extract.hpp"
#include "reslab/rng.hpp"
#include "reslab/synth.hpp"

using namespace reslab;
using Catch::Approx;

namespace {

NotchParams example_params() {
    NotchParams p;
    p.f_r = 5.209e9;
    p.q_l = 7.33e5;
    p.abs_qc = 2.28e6;
    p.phi = 0.1;
    p.a = 0.9;
    p.alpha = 0.5;
    p.tau = 40e-9;
    return p;
}

ComplexTrace example_trace(const NotchParams& p, const NoiseSpec& noise = {},
                           std::size_t points = 1001) {
    const double half = 5.0 * p.f_r / p.q_l;
    return synth_trace(p, p.f_r - half, p.f_r + half, points, noise);
}

void check_recovery(const NotchParams& truth, const NotchParams& got, double tol) {
    CHECK(got.f_r == Approx(truth.f_r).epsilon(tol));
    CHECK(got.q_l == Approx(truth.q_l).epsilon(tol));
    CHECK(got.abs_qc == Approx(truth.abs_qc).epsilon(tol));
    CHECK(got.phi == Approx(truth.phi).epsilon(tol));
    CHECK(got.a == Approx(truth.a).epsilon(tol));
    CHECK(got.alpha == Approx(truth.alpha).epsilon(tol));
    CHECK(got.tau == Approx(truth.tau).epsilon(tol));
}

}  // namespace

TEST_CASE("delay estimation") {
    NotchParams p = example_params();

    SECTION("noiseless 40 ns delay") {
        const double tau = estimate_delay(example_trace(p));
        CHECK(tau == Approx(40e-9).epsilon(1e-4));
    }
    SECTION("zero delay stays near zero") {
        p.tau = 0.0;
        const ComplexTrace t = example_trace(p);
        CHECK(std::abs(estimate_delay(t)) < 1e-3 / t.span());
    }
    SECTION("1% noise, median of 100 seeds within 1%") {
        // delay sensitivity scales with the swept bandwidth, so the delay
        // characterization trace is wider than a single-resonance fit window
        const double half = 50.0 * p.f_r / p.q_l;
        std::vector<double> errors;
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const ComplexTrace t =
                synth_trace(p, p.f_r - half, p.f_r + half, 3001,
                            {NoiseKind::complex_gaussian, 0.01, seed});
            errors.push_back(std::abs(estimate_delay(t) - p.tau) / p.tau);
        }
        std::nth_element(errors.begin(), errors.begin() + 50, errors.end());
        CHECK(errors[50] < 0.01);
    }
    SECTION("too few points") {
        ComplexTrace t = example_trace(p, {}, 1001);
        t.freqs.resize(12);
        t.samples.resize(12);
        CHECK_THROWS_AS(estimate_delay(t), ValidationError);
    }
}

TEST_CASE("phase fit") {
    const double q_l = 5e5, f_r = 5.2e9, theta0 = 0.3;
    auto make_centered = [&](double noise_sigma, std::uint64_t seed) {
        ComplexTrace t;
        Rng rng(seed);
        const double half = 5.0 * f_r / q_l;
        for (int k = 0; k < 501; ++k) {
            const double f = f_r - half + 2.0 * half * k / 500.0;
            double theta = theta0 + 2.0 * std::atan(2.0 * q_l * (1.0 - f / f_r));
            if (noise_sigma > 0.0) theta += noise_sigma * rng.next_gaussian();
            t.freqs.push_back(f);
            t.samples.push_back(std::polar(0.25, theta));
        }
        return t;
    };

    SECTION("exact data recovers to 1e-9") {
        const PhaseFit fit = fit_phase(make_centered(0.0, 0));
        CHECK(fit.theta0 == Approx(theta0).epsilon(1e-9));
        CHECK(fit.q_l == Approx(q_l).epsilon(1e-9));
        CHECK(fit.f_r == Approx(f_r).epsilon(1e-9));
    }
    SECTION("constant phase is a degenerate fit") {
        ComplexTrace flat;
        for (int k = 0; k < 64; ++k) {
            flat.freqs.push_back(5e9 + 1e4 * k);
            flat.samples.push_back(std::polar(0.3, 1.0));
        }
        CHECK_THROWS_AS(fit_phase(flat), FitError);
    }
    SECTION("0.01 rad phase noise, medians over 100 seeds") {
        std::vector<double> err_fr, err_ql;
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const PhaseFit fit = fit_phase(make_centered(0.01, seed));
            err_fr.push_back(std::abs(fit.f_r - f_r) / f_r);
            err_ql.push_back(std::abs(fit.q_l - q_l) / q_l);
        }
        std::nth_element(err_fr.begin(), err_fr.begin() + 50, err_fr.end());
        std::nth_element(err_ql.begin(), err_ql.begin() + 50, err_ql.end());
        CHECK(err_fr[50] < 1e-8);
        CHECK(err_ql[50] < 0.01);
    }
}

TEST_CASE("joint-refinement Jacobian matches finite differences") {
    const NotchParams p = example_params();
    const ComplexTrace trace = example_trace(p, {}, 64);
    const detail::RefineFrame frame{p.f_r * (1.0 - 2e-8),
                                    0.5 * (trace.freqs.front() + trace.freqs.back())};
    Eigen::VectorXd x = detail::coords_from_params(p, frame);
    // move off the optimum so residuals and gradients are non-trivial
    x[0] += 1e-8;
    x[1] += 0.02;
    x[3] -= 0.01;
    x[6] += 1e-9;

    // step sizes respect each coordinate's curvature scale (the detuning
    // moves by fractions of a linewidth, tau by fractions of 1/span)
    const double fd_steps[7] = {1e-9, 1e-7, 1e-7, 1e-7, 1e-7, 1e-7, 1e-13};

    Eigen::VectorXd r0;
    Eigen::MatrixXd jac;
    detail::notch_residuals(trace, frame, x, r0, jac);
    for (int j = 0; j < 7; ++j) {
        const double h = fd_steps[j];
        Eigen::VectorXd xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        Eigen::VectorXd rp, rm;
        Eigen::MatrixXd scratch;
        detail::notch_residuals(trace, frame, xp, rp, scratch);
        detail::notch_residuals(trace, frame, xm, rm, scratch);
        const Eigen::VectorXd fd = (rp - rm) / (2.0 * h);
        const double scale = std::max(1.0, fd.norm());
        CHECK((jac.col(j) - fd).norm() / scale < 1e-5);
    }
}

TEST_CASE("noiseless extraction reproduces the generating parameters") {
    const NotchParams p = example_params();
    const NotchFit fit = extract(example_trace(p));
    check_recovery(p, fit.params, 1e-6);
    CHECK(fit.refined);
    CHECK(fit.residual_rms < 1e-9);
    CHECK(fit.q_i ==
          Approx(internal_q(fit.params.q_l, fit.params.abs_qc, fit.params.phi)).epsilon(1e-12));
}

TEST_CASE("staged-only extraction is available and close") {
    const NotchParams p = example_params();
    ExtractOptions opts;
    opts.refine = false;
    const NotchFit fit = extract(example_trace(p), opts);
    CHECK_FALSE(fit.refined);
    check_recovery(p, fit.params, 1e-3);
    CHECK(fit.params.f_r == fit.staged.f_r);
}

TEST_CASE("extraction round-trips random parameter draws") {
    Rng rng(314159);
    int done = 0;
    while (done < 10) {
        NotchParams p;
        p.f_r = 4.6e9 + 0.8e9 * rng.next_uniform();
        p.q_l = std::pow(10.0, 4.0 + 2.7 * rng.next_uniform());
        p.abs_qc = p.q_l * (1.2 + 98.8 * rng.next_uniform());
        p.phi = 0.8 * rng.next_uniform() - 0.4;
        p.a = 0.5 + 1.5 * rng.next_uniform();
        p.alpha = (rng.next_uniform() < 0.5 ? -1.0 : 1.0) * (0.1 + 2.4 * rng.next_uniform());
        p.tau = 1e-9 + 99e-9 * rng.next_uniform();
        const NotchFit fit = extract(example_trace(p));
        check_recovery(p, fit.params, 1e-6);
        ++done;
    }
}

TEST_CASE("extraction under 1% complex noise (median of 25 seeds)") {
    const NotchParams p = example_params();
    const double q_i_true = internal_q(p.q_l, p.abs_qc, p.phi);
    std::vector<double> errors;
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const NotchFit fit = extract(example_trace(p, {NoiseKind::complex_gaussian, 0.01, seed}));
        errors.push_back(std::abs(fit.q_i - q_i_true) / q_i_true);
    }
    std::nth_element(errors.begin(), errors.begin() + 12, errors.end());
    CHECK(errors[12] < 0.03);
}

TEST_CASE("multiplying by a delay shifts tau and leaves q_i alone") {
    const NotchParams p = example_params();
    const ComplexTrace base = example_trace(p);
    const NotchFit ref = extract(base);

    const double extra = 13e-9;
    ComplexTrace shifted = base;
    for (std::size_t i = 0; i < shifted.size(); ++i)
        shifted.samples[i] *=
            std::polar(1.0, -2.0 * std::numbers::pi * shifted.freqs[i] * extra);
    const NotchFit fit = extract(shifted);
    CHECK(fit.params.tau == Approx(ref.params.tau + extra).epsilon(1e-4));
    CHECK(fit.q_i == Approx(ref.q_i).epsilon(1e-3));
}

TEST_CASE("a global complex factor moves only a and alpha") {
    const NotchParams p = example_params();
    const ComplexTrace base = example_trace(p);
    const NotchFit ref = extract(base);

    const Complex c = std::polar(1.7, 1.1);
    ComplexTrace scaled = base;
    for (auto& z : scaled.samples) z *= c;
    const NotchFit fit = extract(scaled);
    CHECK(fit.params.f_r == Approx(ref.params.f_r).epsilon(1e-9));
    CHECK(fit.params.q_l == Approx(ref.params.q_l).epsilon(1e-9));
    CHECK(fit.params.abs_qc == Approx(ref.params.abs_qc).epsilon(1e-9));
    CHECK(fit.params.phi == Approx(ref.params.phi).margin(1e-9));
    CHECK(fit.q_i == Approx(ref.q_i).epsilon(1e-9));
    CHECK(fit.params.a == Approx(ref.params.a * 1.7).epsilon(1e-9));
    CHECK(fit.params.alpha == Approx(ref.params.alpha + 1.1).epsilon(1e-9));
}

TEST_CASE("background calibration followed by extraction recovers the model") {
    const NotchParams p = example_params();
    const ComplexTrace pure = example_trace(p);

    ComplexTrace background;
    background.freqs = pure.freqs;
    for (double f : pure.freqs) {
        const double rel = (f - pure.freqs.front()) / pure.span();
        background.samples.push_back(std::polar(1.2 + 0.1 * std::sin(6.0 * rel),
                                                0.2 + 0.5 * rel));
    }
    ComplexTrace measured = pure;
    for (std::size_t i = 0; i < measured.size(); ++i)
        measured.samples[i] *= background.samples[i];

    const NotchFit fit = extract(calibrate_background(measured, background));
    check_recovery(p, fit.params, 1e-9);
}

TEST_CASE("extraction rejects a dip at the window edge") {
    const NotchParams p = example_params();
    ComplexTrace t;
    const double start = p.f_r + 0.2 * p.f_r / p.q_l;  // window begins past resonance
    for (int k = 0; k < 256; ++k) {
        const double f = start + k * (5.0 * p.f_r / p.q_l) / 255.0;
        t.freqs.push_back(f);
        t.samples.push_back(s21_model(p, f));
    }
    CHECK_THROWS_AS(extract(t), GeometryError);
}
