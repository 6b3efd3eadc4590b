// Acceptance suite: end-to-end checks of the analysis chain against frozen
// reference values and self-generated oracles. Prints one line per criterion
// and exits non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "reslab/constants.hpp"
#include "reslab/extract.hpp"
#include "reslab/photon.hpp"
#include "reslab/rng.hpp"
#include "reslab/synth.hpp"
#include "reslab/tls.hpp"
#include "reslab/xps.hpp"

using namespace reslab;

namespace {

// Reference loss parameters for epitaxial Ta and Al microstrip resonators,
// capped either with deposited alumina or with their native oxides, measured
// fresh and after air exposure. Units: q_i_lp and q_c in 1e6, f_tls0 and
// tan_other in 1e-6, f_r in GHz.
struct SurveyRow {
    const char* label;
    double q_i_lp;
    double f_tls0;
    double f_r_ghz;
    double q_c;
    double tan_other;
    double beta;
};

constexpr SurveyRow kLossSurvey[] = {
    {"deposited-Al2O3/Ta fresh", 1.08, 0.93, 5.209, 2.28, 0.00, 0.14},
    {"deposited-Al2O3/Ta 6 months", 0.98, 1.05, 5.212, 0.12, 0.00, 0.13},
    {"deposited-Al2O3/Ta 14 months", 0.92, 1.07, 5.206, 0.16, 0.00, 0.14},
    {"native-Ta2O5/Ta fresh", 1.35, 0.61, 5.075, 0.70, 0.14, 0.15},
    {"native-Ta2O5/Ta 2 months", 0.83, 0.96, 5.053, 0.27, 0.20, 0.18},
    {"deposited-Al2O3/Al fresh", 1.44, 0.68, 5.126, 0.42, 0.00, 0.24},
    {"deposited-Al2O3/Al 2 weeks", 1.23, 0.87, 5.122, 0.21, 0.00, 0.26},
    {"native-AlOx/Al fresh", 1.34, 0.59, 5.178, 0.20, 0.03, 0.21},
    {"native-AlOx/Al 2 weeks", 0.16, 0.89, 5.174, 0.24, 5.59, 0.21},
};
constexpr int kSurveySize = 9;
constexpr double kBaseTemperature = 0.010;

struct Outcome {
    bool pass = true;
    std::string detail;
};

double median(std::vector<double>& v) {
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
}

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

// 1. Internal consistency of the reference survey: the reported low-power
//    quality factor must follow from the reported loss parameters.
Outcome criterion_survey_consistency() {
    Outcome out;
    int within4 = 0, within7 = 0;
    double outlier_dev = 0.0;
    std::string outlier_label;
    for (const SurveyRow& row : kLossSurvey) {
        const TLSParams p{row.f_tls0 * 1e-6, 10.0, row.beta, row.tan_other * 1e-6};
        const double predicted = qi_low_photon(p, row.f_r_ghz * 1e9, kBaseTemperature);
        const double dev = (predicted - row.q_i_lp * 1e6) / (row.q_i_lp * 1e6);
        if (std::abs(dev) <= 0.04) ++within4;
        if (std::abs(dev) <= 0.07) ++within7;
        if (std::abs(dev) > std::abs(outlier_dev)) {
            outlier_dev = dev;
            outlier_label = row.label;
        }
    }
    out.pass = within4 >= 6 && within7 >= 8;
    out.detail = std::to_string(within4) + "/9 rows within 4%, " + std::to_string(within7) +
                 "/9 within 7%; largest deviation " + fmt("%+.1f%%", 100.0 * outlier_dev) +
                 " (" + outlier_label + ")";
    return out;
}

// 2. Aging percentages from the survey's fresh/aged parameter pairs.
Outcome criterion_aging_percentages() {
    auto fit_for = [](const SurveyRow& row) {
        TLSFitResult r;
        r.params = {row.f_tls0 * 1e-6, 10.0, row.beta, row.tan_other * 1e-6};
        r.f_r = row.f_r_ghz * 1e9;
        r.temperature = kBaseTemperature;
        r.q_i_lp = qi_low_photon(r.params, r.f_r, r.temperature);
        return r;
    };
    const struct {
        int before, after;
        double expected_pct;
    } cases[] = {
        {5, 6, 27.9},  // deposited Al2O3 on Al
        {0, 2, 15.1},  // deposited Al2O3 on Ta (fresh vs 14 months)
        {7, 8, 50.8},  // native AlOx on Al
        {3, 4, 57.4},  // native Ta2O5 on Ta
    };
    Outcome out;
    for (const auto& c : cases) {
        const AgingDelta delta =
            aging_report(fit_for(kLossSurvey[c.before]), fit_for(kLossSurvey[c.after]));
        const double err = std::abs(delta.f_tls0_pct - c.expected_pct);
        out.detail += fmt("%+.2f%% ", delta.f_tls0_pct);
        if (err > 0.1) out.pass = false;
    }
    out.detail += "(each within 0.1 pp of the reference changes)";
    return out;
}

// 3. Thermal saturation factor at 5.209 GHz and 10 mK.
Outcome criterion_saturation_factor() {
    Outcome out;
    const double arg = constants::h * 5.209e9 / (2.0 * constants::k_b * kBaseTemperature);
    const double one_minus = 1.0 - std::tanh(arg);
    out.pass = std::abs(arg - 12.500) <= 0.001 && one_minus < 1e-10 && one_minus > 0.0;
    out.detail = "argument " + fmt("%.6f", arg) + ", 1 - tanh = " + fmt("%.2e", one_minus);
    return out;
}

// 4. Notch extraction round-trip: noiseless recovery to 1e-6 on 50 random
//    parameter draws; median q_i error under 1% complex noise below 3%.
Outcome criterion_notch_roundtrip() {
    Outcome out;
    Rng rng(20240521);
    double worst_rel = 0.0;
    const char* worst_field = "";
    for (int draw = 0; draw < 50; ++draw) {
        NotchParams p;
        p.f_r = 4.6e9 + 0.8e9 * rng.next_uniform();
        p.q_l = std::pow(10.0, 4.0 + (std::log10(5e6) - 4.0) * rng.next_uniform());
        p.abs_qc = p.q_l * (1.2 + 98.8 * rng.next_uniform());
        p.phi = 0.8 * rng.next_uniform() - 0.4;
        p.a = 0.5 + 1.5 * rng.next_uniform();
        p.alpha = (rng.next_uniform() < 0.5 ? -1.0 : 1.0) * (0.1 + 2.4 * rng.next_uniform());
        p.tau = 100e-9 * rng.next_uniform();
        const double half = 5.0 * p.f_r / p.q_l;
        const NotchFit fit =
            extract(synth_trace(p, p.f_r - half, p.f_r + half, 1001, {}));

        const struct {
            const char* name;
            double truth, got;
        } fields[] = {{"f_r", p.f_r, fit.params.f_r},     {"q_l", p.q_l, fit.params.q_l},
                      {"abs_qc", p.abs_qc, fit.params.abs_qc}, {"phi", p.phi, fit.params.phi},
                      {"a", p.a, fit.params.a},           {"alpha", p.alpha, fit.params.alpha},
                      {"tau", p.tau, fit.params.tau}};
        for (const auto& f : fields) {
            const double rel = std::abs(f.got - f.truth) / std::abs(f.truth);
            if (rel > worst_rel) {
                worst_rel = rel;
                worst_field = f.name;
            }
        }
    }
    const bool noiseless_ok = worst_rel <= 1e-6;

    NotchParams p;
    p.f_r = 5.209e9;
    p.q_l = 7.33e5;
    p.abs_qc = 2.28e6;
    p.phi = 0.1;
    p.a = 0.9;
    p.alpha = 0.5;
    p.tau = 40e-9;
    const double q_i_true = internal_q(p.q_l, p.abs_qc, p.phi);
    const double half = 5.0 * p.f_r / p.q_l;
    std::vector<double> qi_err;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const NotchFit fit = extract(synth_trace(p, p.f_r - half, p.f_r + half, 1001,
                                                 {NoiseKind::complex_gaussian, 0.01, seed}));
        qi_err.push_back(std::abs(fit.q_i - q_i_true) / q_i_true);
    }
    const double med = median(qi_err);

    out.pass = noiseless_ok && med <= 0.03;
    out.detail = "worst noiseless relative error " + fmt("%.2e", worst_rel) + " (" + worst_field +
                 "), median q_i error at 1% noise " + fmt("%.2f%%", 100.0 * med);
    return out;
}

// 5. Loss-model fit round-trip for every survey row: 25-point sweeps with 2%
//    multiplicative noise, medians over 100 seeds.
Outcome criterion_loss_fit_roundtrip() {
    Outcome out;
    const auto grid = log_spaced(1.0, 1e7, 25);
    double worst_f0 = 0.0, worst_beta = 0.0, worst_to_excess = 0.0;
    for (const SurveyRow& row : kLossSurvey) {
        const TLSParams truth{row.f_tls0 * 1e-6, 10.0, row.beta, row.tan_other * 1e-6};
        std::vector<double> err_f0, err_beta, err_to;
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const PowerSweep sweep =
                synth_sweep(truth, row.f_r_ghz * 1e9, kBaseTemperature, grid,
                            {NoiseKind::multiplicative, 0.02, seed});
            const TLSFitResult fit = fit_tls(sweep);
            err_f0.push_back(std::abs(fit.params.f_tls0 - truth.f_tls0) / truth.f_tls0);
            err_beta.push_back(std::abs(fit.params.beta - truth.beta));
            err_to.push_back(std::abs(fit.params.tan_other - truth.tan_other));
        }
        const double med_f0 = median(err_f0);
        const double med_beta = median(err_beta);
        const double med_to = median(err_to);
        const double to_allow = std::max(0.10 * truth.tan_other, 2e-8);
        worst_f0 = std::max(worst_f0, med_f0);
        worst_beta = std::max(worst_beta, med_beta);
        worst_to_excess = std::max(worst_to_excess, med_to / to_allow);
        if (med_f0 > 0.05 || med_beta > 0.05 || med_to > to_allow) out.pass = false;
    }
    out.detail = "worst medians over 9 rows x 100 seeds: f_tls0 " + fmt("%.2f%%", 100.0 * worst_f0) +
                 ", beta " + fmt("%.3f", worst_beta) + ", tan_other at " +
                 fmt("%.2f", worst_to_excess) + "x its allowance";
    return out;
}

// 6. Photon-number calibration properties and the worked example.
Outcome criterion_photon_properties() {
    Outcome out;
    const AttenuationChain chain{{{"room", 60.0}, {"cryo", 60.0}}};

    // log-linearity, slope exactly 0.1 per dBm
    bool slope_ok = true;
    Rng rng(8);
    for (int rep = 0; rep < 25; ++rep) {
        const double d1 = -60.0 + 80.0 * rng.next_uniform();
        const double d2 = d1 + 0.5 + 40.0 * rng.next_uniform();
        const double n1 = mean_photons(chain_power(d1, chain), 5.209e9, 7.33e5, 2.28e6);
        const double n2 = mean_photons(chain_power(d2, chain), 5.209e9, 7.33e5, 2.28e6);
        slope_ok = slope_ok && std::abs(std::log10(n2 / n1) / (d2 - d1) - 0.1) < 1e-12;
    }

    // permutation invariance, bit-exact
    const AttenuationChain perm1{{{"a", 17.3}, {"b", 60.0}, {"c", 42.7}}};
    const AttenuationChain perm2{{{"c", 42.7}, {"a", 17.3}, {"b", 60.0}}};
    const AttenuationChain perm3{{{"b", 60.0}, {"c", 42.7}, {"a", 17.3}}};
    const bool perm_ok = chain_power(-11.5, perm1) == chain_power(-11.5, perm2) &&
                         chain_power(-11.5, perm1) == chain_power(-11.5, perm3);

    // worked example against a longhand oracle
    const double q_l = 1.0 / (1.0 / 1.08e6 + 1.0 / 2.28e6);  // from the survey's first row
    const double lib = mean_photons(chain_power(-20.0, chain), 5.209e9, q_l, 2.28e6);
    const double p_oracle = 1e-3 * std::pow(10.0, (-20.0 - 120.0) / 10.0);
    const double hbar_oracle = 6.62607015e-34 / (2.0 * std::numbers::pi);
    const double omega = 2.0 * std::numbers::pi * 5.209e9;
    const double n_oracle = 2.0 * q_l * q_l * p_oracle / (hbar_oracle * omega * omega * 2.28e6);
    const bool example_ok = std::abs(lib - n_oracle) / n_oracle < 1e-9;

    out.pass = slope_ok && perm_ok && example_ok;
    out.detail = std::string("slope 0.1/dBm ") + (slope_ok ? "ok" : "FAILED") +
                 ", permutation bit-exact " + (perm_ok ? "ok" : "FAILED") +
                 ", worked example <n> = " + fmt("%.2f", lib);
    return out;
}

// 7. Oxide thickness / intensity ratio are exact inverses; the measured
//    growth series maps to monotonically increasing ratios.
Outcome criterion_oxide_inverse() {
    Outcome out;
    Rng rng(63);
    double worst = 0.0;
    bool monotone = true;
    for (int rep = 0; rep < 20; ++rep) {
        XPSConstants c;
        c.lambda_ox_nm = 0.5 + 4.5 * rng.next_uniform();
        c.r0 = 0.2 + 3.0 * rng.next_uniform();
        c.theta_rad = std::numbers::pi / 2.0 * (0.2 + 0.8 * rng.next_uniform());
        for (int k = 0; k <= 100; ++k) {
            const double d = 10.0 * k / 100.0;
            const double back = oxide_thickness(oxide_ratio(d, c), c);
            worst = std::max(worst, std::abs(back - d) / std::max(d, 1e-3));
        }
        double prev = -1.0;
        for (double d : {1.2, 2.15, 2.64, 2.79}) {
            const double ratio = oxide_ratio(d, c);
            monotone = monotone && ratio > prev;
            prev = ratio;
        }
    }
    out.pass = worst <= 1e-12 && monotone;
    out.detail = "worst inverse error " + fmt("%.2e", worst) + ", growth series monotone " +
                 (monotone ? "ok" : "FAILED");
    return out;
}

}  // namespace

int main() {
    struct Entry {
        const char* name;
        Outcome (*run)();
        double time_limit_s;
    };
    const Entry entries[] = {
        {"survey internal consistency", criterion_survey_consistency, 1.0},
        {"aging percentages", criterion_aging_percentages, 1.0},
        {"saturation factor", criterion_saturation_factor, 60.0},
        {"notch extraction round-trip", criterion_notch_roundtrip, 60.0},
        {"loss-model fit round-trip", criterion_loss_fit_roundtrip, 60.0},
        {"photon-number properties", criterion_photon_properties, 60.0},
        {"oxide thickness inverse pair", criterion_oxide_inverse, 60.0},
    };

    int failures = 0;
    int index = 0;
    for (const Entry& e : entries) {
        ++index;
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = e.run();
        } catch (const std::exception& ex) {
            outcome.pass = false;
            outcome.detail = std::string("exception: ") + ex.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (elapsed > e.time_limit_s) {
            outcome.pass = false;
            outcome.detail += " [exceeded " + std::to_string(e.time_limit_s) + " s limit]";
        }
        std::printf("[%s] %d. %s: %s (%.2f s)\n", outcome.pass ? "PASS" : "FAIL", index, e.name,
                    outcome.detail.c_str(), elapsed);
        if (!outcome.pass) ++failures;
    }
    if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
