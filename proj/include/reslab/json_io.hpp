#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "reslab/error.hpp"
#include "reslab/notch.hpp"
#include "reslab/photon.hpp"
#include "reslab/tls.hpp"
#include "reslab/xps.hpp"

namespace reslab {

using Json = nlohmann::json;

inline Json to_json(const NotchFit& fit) {
    Json j;
    j["f_r_hz"] = fit.params.f_r;
    j["q_l"] = fit.params.q_l;
    j["abs_qc"] = fit.params.abs_qc;
    j["phi_rad"] = fit.params.phi;
    j["a"] = fit.params.a;
    j["alpha_rad"] = fit.params.alpha;
    j["tau_s"] = fit.params.tau;
    j["q_i"] = fit.q_i;
    j["residual_rms"] = fit.residual_rms;
    j["refined"] = fit.refined;
    j["staged"] = {{"f_r_hz", fit.staged.f_r},   {"q_l", fit.staged.q_l},
                   {"abs_qc", fit.staged.abs_qc}, {"phi_rad", fit.staged.phi},
                   {"a", fit.staged.a},           {"alpha_rad", fit.staged.alpha},
                   {"tau_s", fit.staged.tau}};
    j["circle"] = {{"center_re", fit.circle_center.real()},
                   {"center_im", fit.circle_center.imag()},
                   {"radius", fit.circle_radius}};
    return j;
}

inline NotchFit notch_fit_from_json(const Json& j) {
    try {
        NotchFit fit;
        fit.params.f_r = j.at("f_r_hz").get<double>();
        fit.params.q_l = j.at("q_l").get<double>();
        fit.params.abs_qc = j.at("abs_qc").get<double>();
        fit.params.phi = j.at("phi_rad").get<double>();
        fit.params.a = j.at("a").get<double>();
        fit.params.alpha = j.at("alpha_rad").get<double>();
        fit.params.tau = j.at("tau_s").get<double>();
        fit.q_i = j.at("q_i").get<double>();
        fit.residual_rms = j.at("residual_rms").get<double>();
        fit.refined = j.value("refined", false);
        fit.staged = fit.params;
        if (j.contains("staged")) {
            const Json& s = j.at("staged");
            fit.staged.f_r = s.at("f_r_hz").get<double>();
            fit.staged.q_l = s.at("q_l").get<double>();
            fit.staged.abs_qc = s.at("abs_qc").get<double>();
            fit.staged.phi = s.at("phi_rad").get<double>();
            fit.staged.a = s.at("a").get<double>();
            fit.staged.alpha = s.at("alpha_rad").get<double>();
            fit.staged.tau = s.at("tau_s").get<double>();
        }
        if (j.contains("circle")) {
            const Json& c = j.at("circle");
            fit.circle_center = Complex(c.at("center_re").get<double>(),
                                        c.at("center_im").get<double>());
            fit.circle_radius = c.at("radius").get<double>();
        }
        return fit;
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("notch fit JSON: ") + e.what());
    }
}

inline Json to_json(const TLSFitResult& r) {
    Json j;
    j["f_tls0"] = r.params.f_tls0;
    j["n_c"] = r.params.n_c;
    j["beta"] = r.params.beta;
    j["tan_other"] = r.params.tan_other;
    j["q_i_lp"] = r.q_i_lp;
    j["f_r_hz"] = r.f_r;
    j["temperature_k"] = r.temperature;
    j["sigmas"] = {{"f_tls0", r.sigmas.f_tls0},
                   {"n_c", r.sigmas.n_c},
                   {"beta", r.sigmas.beta},
                   {"tan_other", r.sigmas.tan_other}};
    j["chi2_reduced"] = r.chi2_reduced;
    j["bounds_active"] = r.bounds_active;
    j["model_variant"] = to_string(r.variant);
    if (!r.diagnostics.empty()) j["diagnostics"] = r.diagnostics;
    return j;
}

inline TLSFitResult tls_fit_from_json(const Json& j) {
    try {
        TLSFitResult r;
        r.params.f_tls0 = j.at("f_tls0").get<double>();
        r.params.n_c = j.at("n_c").get<double>();
        r.params.beta = j.at("beta").get<double>();
        r.params.tan_other = j.at("tan_other").get<double>();
        r.q_i_lp = j.at("q_i_lp").get<double>();
        r.f_r = j.at("f_r_hz").get<double>();
        r.temperature = j.at("temperature_k").get<double>();
        if (j.contains("sigmas")) {
            const Json& s = j.at("sigmas");
            r.sigmas.f_tls0 = s.value("f_tls0", 0.0);
            r.sigmas.n_c = s.value("n_c", 0.0);
            r.sigmas.beta = s.value("beta", 0.0);
            r.sigmas.tan_other = s.value("tan_other", 0.0);
        }
        r.chi2_reduced = j.value("chi2_reduced", 0.0);
        if (j.contains("bounds_active"))
            r.bounds_active = j.at("bounds_active").get<std::vector<std::string>>();
        if (j.contains("diagnostics"))
            r.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
        if (j.value("model_variant", "exponent-outside") == std::string("exponent-inside"))
            r.variant = TLSModelVariant::exponent_inside;
        return r;
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("tls fit JSON: ") + e.what());
    }
}

// Chain config: {"stages":[{"label":"RT","db":60},...]}
inline AttenuationChain chain_from_json(const Json& j) {
    try {
        AttenuationChain chain;
        for (const auto& s : j.at("stages")) {
            AttenuationStage stage;
            stage.label = s.value("label", "");
            stage.db = s.at("db").get<double>();
            chain.stages.push_back(stage);
        }
        chain.validate();
        return chain;
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("chain JSON: ") + e.what());
    }
}

inline Json to_json(const AttenuationChain& chain) {
    Json stages = Json::array();
    for (const auto& s : chain.stages) stages.push_back({{"label", s.label}, {"db", s.db}});
    return Json{{"stages", stages}};
}

inline XPSConstants xps_from_json(const Json& j) {
    try {
        XPSConstants c;
        c.lambda_ox_nm = j.at("lambda_ox_nm").get<double>();
        c.r0 = j.at("r0").get<double>();
        c.theta_rad = j.value("theta_rad", c.theta_rad);
        c.label = j.value("label", "user-supplied");
        c.validate();
        return c;
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("xps constants JSON: ") + e.what());
    }
}

inline Json to_json(const XPSConstants& c) {
    return Json{{"lambda_ox_nm", c.lambda_ox_nm},
                {"r0", c.r0},
                {"theta_rad", c.theta_rad},
                {"label", c.label}};
}

inline Json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw ParseError(std::string("invalid JSON in ") + path + ": " + e.what());
    }
}

}  // namespace reslab
