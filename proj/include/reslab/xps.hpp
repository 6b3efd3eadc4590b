#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "reslab/error.hpp"

namespace reslab {

// Material constants for the single-overlayer XPS attenuation model.
// r0 is the normalization N_m lambda_m / (N_ox lambda_ox).
struct XPSConstants {
    double lambda_ox_nm = 0.0;  // photoelectron attenuation length in the oxide
    double r0 = 0.0;
    double theta_rad = std::numbers::pi / 2.0;  // electron take-off angle
    std::string label;

    void validate() const {
        if (!(lambda_ox_nm > 0.0) || !std::isfinite(lambda_ox_nm))
            throw ValidationError("xps constants: lambda_ox must be positive");
        if (!(r0 > 0.0) || !std::isfinite(r0))
            throw ValidationError("xps constants: r0 must be positive");
        if (!(theta_rad > 0.0) || !(theta_rad <= std::numbers::pi / 2.0))
            throw ValidationError("xps constants: take-off angle must be in (0, pi/2]");
    }
};

// Shipped defaults are order-of-magnitude placeholders for the two core
// levels this toolkit deals with; quantitative work needs calibrated values.
inline XPSConstants xps_al_2p() {
    return {2.8, 1.4, std::numbers::pi / 2.0, "Al 2p (illustrative, not calibrated)"};
}

inline XPSConstants xps_ta_4f() {
    return {1.9, 0.5, std::numbers::pi / 2.0, "Ta 4f (illustrative, not calibrated)"};
}

// Overlayer thickness from the oxide-to-metal intensity ratio:
// d = lambda_ox sin(theta) ln(1 + R/r0).
inline double oxide_thickness(double ratio, const XPSConstants& c) {
    c.validate();
    if (!(ratio >= 0.0) || !std::isfinite(ratio))
        throw ValidationError("oxide_thickness: intensity ratio must be >= 0");
    return c.lambda_ox_nm * std::sin(c.theta_rad) * std::log1p(ratio / c.r0);
}

// Exact inverse of oxide_thickness.
inline double oxide_ratio(double d_nm, const XPSConstants& c) {
    c.validate();
    if (!(d_nm >= 0.0) || !std::isfinite(d_nm))
        throw ValidationError("oxide_ratio: thickness must be >= 0");
    return c.r0 * std::expm1(d_nm / (c.lambda_ox_nm * std::sin(c.theta_rad)));
}

}  // namespace reslab
