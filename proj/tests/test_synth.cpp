#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "reslab/notch.hpp"
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

}  // namespace

TEST_CASE("noiseless synthesis equals the model exactly") {
    const NotchParams p = example_params();
    const double half = 5.0 * p.f_r / p.q_l;
    const ComplexTrace t = synth_trace(p, p.f_r - half, p.f_r + half, 101, {});
    for (std::size_t i = 0; i < t.size(); ++i)
        CHECK(t.samples[i] == s21_model(p, t.freqs[i]));
}

TEST_CASE("trace synthesis is deterministic per seed") {
    const NotchParams p = example_params();
    const double half = 5.0 * p.f_r / p.q_l;
    const NoiseSpec noise{NoiseKind::complex_gaussian, 0.01, 42};
    const ComplexTrace a = synth_trace(p, p.f_r - half, p.f_r + half, 64, noise);
    const ComplexTrace b = synth_trace(p, p.f_r - half, p.f_r + half, 64, noise);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.samples[i] == b.samples[i]);

    const ComplexTrace c =
        synth_trace(p, p.f_r - half, p.f_r + half, 64, {NoiseKind::complex_gaussian, 0.01, 43});
    bool any_differ = false;
    for (std::size_t i = 0; i < a.size(); ++i) any_differ |= (a.samples[i] != c.samples[i]);
    CHECK(any_differ);
    CHECK(a.meta.find("xoshiro256++-1.0") != std::string::npos);
    CHECK(a.meta.find("seed=42") != std::string::npos);
}

TEST_CASE("noise has zero mean across seeds") {
    const NotchParams p = example_params();
    const double half = 5.0 * p.f_r / p.q_l;
    const std::size_t n = 8;
    const ComplexTrace clean = synth_trace(p, p.f_r - half, p.f_r + half, n, {});
    const double sigma = 0.01;

    std::vector<Complex> sum(n, Complex(0, 0));
    const int seeds = 10000;
    for (int s = 0; s < seeds; ++s) {
        const ComplexTrace noisy = synth_trace(
            p, p.f_r - half, p.f_r + half, n,
            {NoiseKind::complex_gaussian, sigma, static_cast<std::uint64_t>(s)});
        for (std::size_t i = 0; i < n; ++i) sum[i] += noisy.samples[i] - clean.samples[i];
    }
    const double bound = 3.0 * sigma * p.a / std::sqrt(static_cast<double>(seeds));
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(std::abs(sum[i].real()) / seeds < bound);
        CHECK(std::abs(sum[i].imag()) / seeds < bound);
    }
}

TEST_CASE("synth_trace validates its window") {
    const NotchParams p = example_params();
    CHECK_THROWS_AS(synth_trace(p, p.f_r + 1e6, p.f_r + 2e6, 64, {}), ValidationError);
    CHECK_THROWS_AS(synth_trace(p, p.f_r - 1e6, p.f_r + 1e6, 4, {}), ValidationError);
    CHECK_THROWS_AS(synth_trace(p, p.f_r - 1e6, p.f_r + 1e6, 64, {NoiseKind::none, -0.1, 0}),
                    ValidationError);
}

TEST_CASE("synthetic sweep evaluates the loss model") {
    // aged passivated-Ta parameter set
    const TLSParams p{1.07e-6, 10.0, 0.14, 0.0};
    const std::vector<double> grid{1.0};
    const PowerSweep sweep = synth_sweep(p, 5.206e9, 0.010, grid, {});
    const double thermal = std::tanh(6.62607015e-34 * 5.206e9 / (2.0 * 1.380649e-23 * 0.010));
    const double expected = std::pow(1.1, 0.14) / (1.07e-6 * thermal);
    CHECK(sweep.points[0].q_i == Approx(expected).epsilon(1e-12));
}

TEST_CASE("a vanishing photon number reproduces the low-power limit exactly") {
    const TLSParams p{0.8e-6, 10.0, 0.2, 1e-7};
    const std::vector<double> grid{1e-30, 1.0, 100.0};
    const PowerSweep sweep = synth_sweep(p, 5e9, 0.010, grid, {});
    CHECK(sweep.points[0].q_i == qi_low_photon(p, 5e9, 0.010));
}

TEST_CASE("sweep synthesis is deterministic and records sigma") {
    const TLSParams p{0.8e-6, 10.0, 0.2, 0.0};
    const auto grid = log_spaced(1.0, 1e6, 12);
    const NoiseSpec noise{NoiseKind::multiplicative, 0.02, 9};
    const PowerSweep a = synth_sweep(p, 5e9, 0.010, grid, noise);
    const PowerSweep b = synth_sweep(p, 5e9, 0.010, grid, noise);
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        CHECK(a.points[i].q_i == b.points[i].q_i);
        REQUIRE(a.points[i].q_i_sigma.has_value());
    }
    CHECK_THROWS_AS(synth_sweep(p, 5e9, 0.010, std::vector<double>{}, noise), ValidationError);
    CHECK_THROWS_AS(synth_sweep(p, 5e9, 0.010, std::vector<double>{10.0, 1.0}, noise),
                    ValidationError);
}
