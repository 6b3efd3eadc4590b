#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "reslab/constants.hpp"
#include "reslab/error.hpp"

namespace reslab {

struct AttenuationStage {
    std::string label;
    double db = 0.0;
};

// Ordered attenuation stages between the source and the resonator input.
struct AttenuationChain {
    std::vector<AttenuationStage> stages;

    void validate() const {
        for (const auto& s : stages)
            if (!(s.db >= 0.0) || !std::isfinite(s.db))
                throw ValidationError("attenuation chain: stage '" + s.label +
                                      "' must have a finite attenuation >= 0 dB");
    }

    // Summed in sorted order so the total is bit-identical under any
    // permutation of the stages.
    double total_db() const {
        std::vector<double> dbs;
        dbs.reserve(stages.size());
        for (const auto& s : stages) dbs.push_back(s.db);
        std::sort(dbs.begin(), dbs.end());
        double total = 0.0;
        for (double d : dbs) total += d;
        return total;
    }
};

// Power delivered past the chain, in watts.
inline double chain_power(double source_dbm, const AttenuationChain& chain) {
    if (!std::isfinite(source_dbm))
        throw ValidationError("chain_power: source power must be finite");
    chain.validate();
    return 1e-3 * std::pow(10.0, (source_dbm - chain.total_db()) / 10.0);
}

// Steady-state mean photon number of a notch resonator driven at resonance:
// <n> = 2 Q_l^2 P / (hbar w_r^2 |Q_c|).
inline double mean_photons(double p_applied_w, double f_r, double q_l, double abs_qc) {
    if (!(p_applied_w >= 0.0) || !std::isfinite(p_applied_w))
        throw ValidationError("mean_photons: applied power must be >= 0");
    if (!(f_r > 0.0) || !(q_l > 0.0) || !(abs_qc > 0.0))
        throw ValidationError("mean_photons: f_r, q_l, abs_qc must be positive");
    const double omega = 2.0 * std::numbers::pi * f_r;
    return 2.0 * q_l * q_l * p_applied_w / (constants::hbar * omega * omega * abs_qc);
}

}  // namespace reslab
