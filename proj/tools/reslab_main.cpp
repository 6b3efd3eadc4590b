// reslab: command-line surface over the resonator loss analysis library.
//
// Exit codes are a stable contract for scripting:
//   0  success
//   1  input or validation error
//   2  numerical non-convergence / degenerate geometry

#include <CLI11.hpp>

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "reslab/reslab.hpp"

namespace {

void write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw reslab::ValidationError("cannot open file for writing: " + out_path);
    out << text;
    if (!out) throw reslab::ValidationError("write failed: " + out_path);
}

std::uint64_t effective_seed(std::uint64_t flag_seed) {
    const char* env = std::getenv("RESLAB_SEED");
    if (env == nullptr || *env == '\0') return flag_seed;
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0' || errno == ERANGE)
        throw reslab::ValidationError("RESLAB_SEED is not a valid integer: " + std::string(env));
    return static_cast<std::uint64_t>(v);
}

std::string csv_line(const std::vector<std::pair<std::string, double>>& fields) {
    std::string header, row;
    char buf[40];
    for (const auto& [name, value] : fields) {
        if (!header.empty()) {
            header += ',';
            row += ',';
        }
        header += name;
        std::snprintf(buf, sizeof buf, "%.17g", value);
        row += buf;
    }
    return header + '\n' + row + '\n';
}

std::string notch_fit_text(const reslab::NotchFit& fit, const std::string& format) {
    if (format == "csv") {
        return csv_line({{"f_r_hz", fit.params.f_r},
                         {"q_l", fit.params.q_l},
                         {"abs_qc", fit.params.abs_qc},
                         {"phi_rad", fit.params.phi},
                         {"a", fit.params.a},
                         {"alpha_rad", fit.params.alpha},
                         {"tau_s", fit.params.tau},
                         {"q_i", fit.q_i},
                         {"residual_rms", fit.residual_rms}});
    }
    return reslab::to_json(fit).dump(2) + '\n';
}

std::string tls_fit_text(const reslab::TLSFitResult& fit, const std::string& format) {
    if (format == "csv") {
        return csv_line({{"f_tls0", fit.params.f_tls0},
                         {"n_c", fit.params.n_c},
                         {"beta", fit.params.beta},
                         {"tan_other", fit.params.tan_other},
                         {"q_i_lp", fit.q_i_lp},
                         {"f_r_hz", fit.f_r},
                         {"temperature_k", fit.temperature},
                         {"chi2_reduced", fit.chi2_reduced}});
    }
    return reslab::to_json(fit).dump(2) + '\n';
}

struct SynthTraceArgs {
    reslab::NotchParams params;
    double f_min = 0.0, f_max = 0.0;
    std::size_t points = 1001;
    std::string noise = "none";
    double sigma = 0.0;
    std::uint64_t seed = 0;
    std::string out, format = "re_im";
};

struct SynthSweepArgs {
    reslab::TLSParams params;
    double f_r = 0.0, temp = 0.010;
    double n_min = 1.0, n_max = 1e7;
    std::size_t points = 25;
    std::string noise = "none";
    double sigma = 0.0;
    std::uint64_t seed = 0;
    std::string variant = "exponent-outside";
    std::string out;
};

reslab::NoiseKind parse_noise(const std::string& name) {
    if (name == "none") return reslab::NoiseKind::none;
    if (name == "complex_gaussian") return reslab::NoiseKind::complex_gaussian;
    if (name == "multiplicative") return reslab::NoiseKind::multiplicative;
    throw reslab::ValidationError("unknown noise kind: " + name);
}

reslab::TLSModelVariant parse_variant(const std::string& name) {
    if (name == "exponent-outside") return reslab::TLSModelVariant::exponent_outside;
    if (name == "exponent-inside") return reslab::TLSModelVariant::exponent_inside;
    throw reslab::ValidationError("unknown model variant: " + name);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"resonator loss analysis toolkit"};
    app.require_subcommand(1);

    // ---- fit-s21 ----------------------------------------------------------
    auto* fit_s21 = app.add_subcommand("fit-s21", "fit the notch model to a transmission trace");
    std::string s21_trace, s21_background, s21_out, s21_format = "json";
    bool s21_no_refine = false;
    fit_s21->add_option("trace", s21_trace, "trace CSV (freq_hz,re,im or freq_hz,amp_db,phase_rad)")
        ->required();
    fit_s21->add_option("--background", s21_background,
                        "reference trace taken with the resonator absent");
    fit_s21->add_flag("--no-refine", s21_no_refine,
                      "skip the joint 7-parameter refinement, report staged values");
    fit_s21->add_option("--out", s21_out, "output path (default stdout)");
    fit_s21->add_option("--format", s21_format)->check(CLI::IsMember({"json", "csv"}));

    // ---- fit-tls ----------------------------------------------------------
    auto* fit_tls_cmd = app.add_subcommand("fit-tls", "fit the power-dependent loss model");
    std::string tls_sweep, tls_out, tls_plot, tls_format = "json";
    std::string tls_variant = "exponent-outside";
    double tls_fr = 0.0, tls_temp = 0.010;
    int tls_bootstrap = 0;
    std::uint64_t tls_bootstrap_seed = 1;
    fit_tls_cmd->add_option("sweep", tls_sweep, "sweep CSV (n_mean,qi[,qi_sigma])")->required();
    fit_tls_cmd->add_option("--fr", tls_fr, "resonance frequency, Hz")->required();
    fit_tls_cmd->add_option("--temp", tls_temp, "base temperature, K (default 0.010)");
    fit_tls_cmd->add_option("--model-variant", tls_variant)
        ->check(CLI::IsMember({"exponent-outside", "exponent-inside"}));
    fit_tls_cmd->add_option("--bootstrap", tls_bootstrap,
                            "bootstrap replicas for uncertainties (default: linearized)");
    fit_tls_cmd->add_option("--bootstrap-seed", tls_bootstrap_seed);
    fit_tls_cmd->add_option("--plot", tls_plot, "write an SVG of Q_i vs <n> with the fit curve");
    fit_tls_cmd->add_option("--out", tls_out, "output path (default stdout)");
    fit_tls_cmd->add_option("--format", tls_format)->check(CLI::IsMember({"json", "csv"}));

    // ---- photons ----------------------------------------------------------
    auto* photons = app.add_subcommand("photons", "photon number from source power and chain");
    std::string ph_chain, ph_out, ph_format = "text";
    double ph_dbm = 0.0, ph_fr = 0.0, ph_ql = 0.0, ph_qc = 0.0;
    photons->add_option("--source-dbm", ph_dbm, "power at the chain input, dBm")->required();
    photons->add_option("--chain", ph_chain, "attenuation chain JSON")->required();
    photons->add_option("--fr", ph_fr, "resonance frequency, Hz");
    photons->add_option("--ql", ph_ql, "loaded quality factor");
    photons->add_option("--qc", ph_qc, "coupling quality factor magnitude");
    photons->add_option("--out", ph_out, "output path (default stdout)");
    photons->add_option("--format", ph_format)->check(CLI::IsMember({"json", "text"}));

    // ---- xps --------------------------------------------------------------
    auto* xps = app.add_subcommand("xps", "oxide thickness from XPS intensity ratio (or back)");
    std::string xps_config, xps_material = "al-2p", xps_out, xps_format = "json";
    double xps_ratio = -1.0, xps_thickness = -1.0;
    double xps_lambda = 0.0, xps_r0 = 0.0, xps_theta = 0.0;
    xps->add_option("--ratio", xps_ratio, "oxide/metal intensity ratio -> thickness");
    xps->add_option("--thickness", xps_thickness, "thickness in nm -> intensity ratio");
    xps->add_option("--material", xps_material)->check(CLI::IsMember({"al-2p", "ta-4f"}));
    xps->add_option("--config", xps_config, "constants JSON {lambda_ox_nm,r0[,theta_rad]}");
    xps->add_option("--lambda-ox", xps_lambda, "attenuation length in the oxide, nm");
    xps->add_option("--r0", xps_r0, "normalization factor");
    xps->add_option("--theta", xps_theta, "take-off angle, rad");
    xps->add_option("--out", xps_out, "output path (default stdout)");
    xps->add_option("--format", xps_format)->check(CLI::IsMember({"json", "text"}));

    // ---- synth ------------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "generate synthetic fixtures");
    synth->require_subcommand(1);

    auto* synth_s21 = synth->add_subcommand("s21", "synthetic transmission trace");
    SynthTraceArgs st;
    synth_s21->add_option("--fr", st.params.f_r, "resonance frequency, Hz")->required();
    synth_s21->add_option("--ql", st.params.q_l, "loaded quality factor")->required();
    synth_s21->add_option("--qc", st.params.abs_qc, "coupling quality factor magnitude")
        ->required();
    synth_s21->add_option("--phi", st.params.phi, "impedance mismatch angle, rad");
    synth_s21->add_option("--a", st.params.a, "environment amplitude");
    synth_s21->add_option("--alpha", st.params.alpha, "environment phase, rad");
    synth_s21->add_option("--tau", st.params.tau, "cable delay, s");
    synth_s21->add_option("--f-min", st.f_min, "grid start, Hz (default fr - 5 fr/ql)");
    synth_s21->add_option("--f-max", st.f_max, "grid end, Hz (default fr + 5 fr/ql)");
    synth_s21->add_option("--points", st.points, "grid size (default 1001)");
    synth_s21->add_option("--noise", st.noise)
        ->check(CLI::IsMember({"none", "complex_gaussian", "multiplicative"}));
    synth_s21->add_option("--sigma", st.sigma, "noise level");
    synth_s21->add_option("--seed", st.seed, "PRNG seed (env RESLAB_SEED overrides)");
    synth_s21->add_option("--trace-format", st.format)->check(CLI::IsMember({"re_im", "db_phase"}));
    synth_s21->add_option("--out", st.out, "output path (default stdout)");

    auto* synth_sweep_cmd = synth->add_subcommand("sweep", "synthetic power sweep");
    SynthSweepArgs ss;
    synth_sweep_cmd->add_option("--f-tls0", ss.params.f_tls0, "TLS loss parameter")->required();
    synth_sweep_cmd->add_option("--nc", ss.params.n_c, "critical photon number")->required();
    synth_sweep_cmd->add_option("--beta", ss.params.beta, "saturation exponent")->required();
    synth_sweep_cmd->add_option("--tan-other", ss.params.tan_other, "power-independent loss");
    synth_sweep_cmd->add_option("--fr", ss.f_r, "resonance frequency, Hz")->required();
    synth_sweep_cmd->add_option("--temp", ss.temp, "temperature, K (default 0.010)");
    synth_sweep_cmd->add_option("--n-min", ss.n_min, "lowest photon number (default 1)");
    synth_sweep_cmd->add_option("--n-max", ss.n_max, "highest photon number (default 1e7)");
    synth_sweep_cmd->add_option("--points", ss.points, "grid size (default 25)");
    synth_sweep_cmd->add_option("--noise", ss.noise)
        ->check(CLI::IsMember({"none", "multiplicative"}));
    synth_sweep_cmd->add_option("--sigma", ss.sigma, "noise level");
    synth_sweep_cmd->add_option("--seed", ss.seed, "PRNG seed (env RESLAB_SEED overrides)");
    synth_sweep_cmd->add_option("--variant", ss.variant)
        ->check(CLI::IsMember({"exponent-outside", "exponent-inside"}));
    synth_sweep_cmd->add_option("--out", ss.out, "output path (default stdout)");

    // ---- report -----------------------------------------------------------
    auto* report = app.add_subcommand("report", "aging comparison of two loss fits");
    std::string rep_before, rep_after, rep_out, rep_format = "md";
    std::string rep_label_before = "before", rep_label_after = "after";
    report->add_option("before", rep_before, "fit-tls JSON for the earlier epoch")->required();
    report->add_option("after", rep_after, "fit-tls JSON for the later epoch")->required();
    report->add_option("--label-before", rep_label_before);
    report->add_option("--label-after", rep_label_after);
    report->add_option("--out", rep_out, "output path (default stdout)");
    report->add_option("--format", rep_format)->check(CLI::IsMember({"md", "csv", "json"}));

    try {
        app.parse(argc, argv);

        if (*fit_s21) {
            reslab::ComplexTrace trace =
                reslab::load_trace(s21_trace, reslab::detect_trace_format(s21_trace));
            if (!s21_background.empty()) {
                const reslab::ComplexTrace ref = reslab::load_trace(
                    s21_background, reslab::detect_trace_format(s21_background));
                trace = reslab::calibrate_background(trace, ref);
            }
            reslab::ExtractOptions opts;
            opts.refine = !s21_no_refine;
            const reslab::NotchFit fit = reslab::extract(trace, opts);
            write_output(notch_fit_text(fit, s21_format), s21_out);
        } else if (*fit_tls_cmd) {
            const reslab::PowerSweep sweep =
                reslab::load_power_sweep(tls_sweep, tls_fr, tls_temp);
            reslab::TLSFitOptions opts;
            opts.variant = parse_variant(tls_variant);
            opts.bootstrap_samples = tls_bootstrap;
            opts.bootstrap_seed = tls_bootstrap_seed;
            const reslab::TLSFitResult fit = reslab::fit_tls(sweep, opts);
            if (!tls_plot.empty()) reslab::write_sweep_plot(sweep, fit, tls_plot);
            write_output(tls_fit_text(fit, tls_format), tls_out);
        } else if (*photons) {
            const reslab::AttenuationChain chain =
                reslab::chain_from_json(reslab::load_json(ph_chain));
            const double p_applied = reslab::chain_power(ph_dbm, chain);
            const bool have_q = ph_fr > 0.0 || ph_ql > 0.0 || ph_qc > 0.0;
            std::optional<double> n_mean;
            if (have_q) n_mean = reslab::mean_photons(p_applied, ph_fr, ph_ql, ph_qc);
            if (ph_format == "json") {
                reslab::Json j{{"source_dbm", ph_dbm},
                               {"total_db", chain.total_db()},
                               {"applied_power_w", p_applied}};
                if (n_mean) j["n_mean"] = *n_mean;
                write_output(j.dump(2) + '\n', ph_out);
            } else {
                char buf[160];
                std::string text;
                std::snprintf(buf, sizeof buf, "total attenuation: %.17g dB\n", chain.total_db());
                text += buf;
                std::snprintf(buf, sizeof buf, "applied power: %.17g W\n", p_applied);
                text += buf;
                if (n_mean) {
                    std::snprintf(buf, sizeof buf, "mean photon number: %.17g\n", *n_mean);
                    text += buf;
                }
                write_output(text, ph_out);
            }
        } else if (*xps) {
            if ((xps_ratio >= 0.0) == (xps_thickness >= 0.0))
                throw reslab::ValidationError("xps: give exactly one of --ratio or --thickness");
            reslab::XPSConstants c =
                xps_material == "ta-4f" ? reslab::xps_ta_4f() : reslab::xps_al_2p();
            if (xps_lambda > 0.0) c.lambda_ox_nm = xps_lambda;
            if (xps_r0 > 0.0) c.r0 = xps_r0;
            if (xps_theta > 0.0) c.theta_rad = xps_theta;
            if (xps_lambda > 0.0 || xps_r0 > 0.0 || xps_theta > 0.0) c.label = "user-supplied";
            if (!xps_config.empty()) c = reslab::xps_from_json(reslab::load_json(xps_config));
            reslab::Json j{{"constants", reslab::to_json(c)}};
            if (xps_ratio >= 0.0) {
                j["ratio"] = xps_ratio;
                j["thickness_nm"] = reslab::oxide_thickness(xps_ratio, c);
            } else {
                j["thickness_nm"] = xps_thickness;
                j["ratio"] = reslab::oxide_ratio(xps_thickness, c);
            }
            if (xps_format == "json") {
                write_output(j.dump(2) + '\n', xps_out);
            } else {
                char buf[160];
                std::snprintf(buf, sizeof buf, "%s = %.17g (constants: %s)\n",
                              xps_ratio >= 0.0 ? "thickness_nm" : "ratio",
                              xps_ratio >= 0.0 ? j["thickness_nm"].get<double>()
                                               : j["ratio"].get<double>(),
                              c.label.c_str());
                write_output(buf, xps_out);
            }
        } else if (*synth_s21) {
            st.seed = effective_seed(st.seed);
            if (st.f_min == 0.0 && st.f_max == 0.0 && st.params.q_l > 0.0) {
                st.f_min = st.params.f_r * (1.0 - 5.0 / st.params.q_l);
                st.f_max = st.params.f_r * (1.0 + 5.0 / st.params.q_l);
            }
            reslab::NoiseSpec noise{parse_noise(st.noise), st.sigma, st.seed};
            const reslab::ComplexTrace trace =
                reslab::synth_trace(st.params, st.f_min, st.f_max, st.points, noise);
            const reslab::TraceFormat fmt = st.format == "db_phase"
                                                ? reslab::TraceFormat::db_phase
                                                : reslab::TraceFormat::re_im;
            if (st.out.empty())
                reslab::save_trace(trace, std::cout, fmt);
            else
                reslab::save_trace(trace, st.out, fmt);
        } else if (*synth_sweep_cmd) {
            ss.seed = effective_seed(ss.seed);
            reslab::NoiseSpec noise{parse_noise(ss.noise), ss.sigma, ss.seed};
            const std::vector<double> grid = reslab::log_spaced(ss.n_min, ss.n_max, ss.points);
            const reslab::PowerSweep sweep = reslab::synth_sweep(
                ss.params, ss.f_r, ss.temp, grid, noise, parse_variant(ss.variant));
            const std::string comments =
                std::string("prng=") + reslab::kPrngName + " seed=" + std::to_string(ss.seed) +
                " noise=" + ss.noise + " sigma=" + std::to_string(ss.sigma);
            if (ss.out.empty())
                reslab::save_power_sweep(sweep, std::cout, comments);
            else
                reslab::save_power_sweep(sweep, ss.out, comments);
        } else if (*report) {
            const reslab::Json jb = reslab::load_json(rep_before);
            const reslab::Json ja = reslab::load_json(rep_after);
            reslab::ReportRow before{rep_label_before, reslab::tls_fit_from_json(jb), {}};
            reslab::ReportRow after{rep_label_after, reslab::tls_fit_from_json(ja), {}};
            if (jb.contains("q_c")) before.q_c = jb.at("q_c").get<double>();
            if (ja.contains("q_c")) after.q_c = ja.at("q_c").get<double>();
            const reslab::AgingDelta delta = reslab::aging_report(before.fit, after.fit);
            if (rep_format == "json") {
                const reslab::Json j{{"f_tls0_pct_change", delta.f_tls0_pct},
                                     {"tan_other_delta", delta.tan_other_delta},
                                     {"q_i_lp_delta", delta.q_i_lp_delta}};
                write_output(j.dump(2) + '\n', rep_out);
            } else if (rep_format == "csv") {
                write_output(reslab::render_csv(before, after, delta), rep_out);
            } else {
                write_output(reslab::render_markdown(before, after, delta), rep_out);
            }
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 1;
    } catch (const reslab::FitError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const reslab::GeometryError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const reslab::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
