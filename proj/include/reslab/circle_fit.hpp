#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "reslab/error.hpp"
#include "reslab/types.hpp"

namespace reslab {

struct CircleFit {
    Complex center;
    double radius = 0.0;
    double residual_rms = 0.0;  // rms of geometric distance to the circle
};

// Taubin algebraic circle fit (gradient-weighted least squares of
// |z - c|^2 - r^2). Nearly unbiased on partial arcs, exact on exact circle
// data, no iteration over the data itself: the only nonlinear step is a
// Newton solve of a cubic in one scalar.
inline CircleFit fit_circle(std::span<const Complex> points) {
    const std::size_t n = points.size();
    if (n < 3) throw GeometryError("circle fit: need at least 3 points");

    double mean_x = 0.0, mean_y = 0.0;
    for (const auto& p : points) {
        mean_x += p.real();
        mean_y += p.imag();
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);

    // Second- and third-order central moments
    double mxx = 0, myy = 0, mxy = 0, mxz = 0, myz = 0, mzz = 0;
    for (const auto& p : points) {
        const double x = p.real() - mean_x;
        const double y = p.imag() - mean_y;
        const double z = x * x + y * y;
        mxx += x * x;
        myy += y * y;
        mxy += x * y;
        mxz += x * z;
        myz += y * z;
        mzz += z * z;
    }
    mxx /= n; myy /= n; mxy /= n; mxz /= n; myz /= n; mzz /= n;

    // Collinearity check on the 2x2 scatter eigenvalues
    const double tr = mxx + myy;
    const double det2 = mxx * myy - mxy * mxy;
    const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det2));
    const double lam_min = 0.5 * (tr - disc);
    const double lam_max = 0.5 * (tr + disc);
    if (!(lam_max > 0.0) || lam_min <= 1e-12 * lam_max)
        throw GeometryError("circle fit: points are collinear or coincident");

    const double mz = mxx + myy;
    const double cov_xy = mxx * myy - mxy * mxy;
    const double var_z = mzz - mz * mz;

    const double a3 = 4.0 * mz;
    const double a2 = -3.0 * mz * mz - mzz;
    const double a1 = var_z * mz + 4.0 * cov_xy * mz - mxz * mxz - myz * myz;
    const double a0 = mxz * (mxz * myy - myz * mxy) + myz * (myz * mxx - mxz * mxy) -
                      var_z * cov_xy;
    const double a22 = a2 + a2;
    const double a33 = a3 + a3 + a3;

    // Newton iteration on the characteristic cubic, started at 0; converges
    // to the smallest positive root for well-posed data.
    double x = 0.0;
    double y = a0;
    for (int iter = 0; iter < 99; ++iter) {
        const double dy = a1 + x * (a22 + a33 * x);
        const double x_new = x - y / dy;
        if (!std::isfinite(x_new) || x_new == x) break;
        const double y_new = a0 + x_new * (a1 + x_new * (a2 + x_new * a3));
        if (std::abs(y_new) >= std::abs(y)) break;
        x = x_new;
        y = y_new;
    }

    const double det = x * x - x * mz + cov_xy;
    if (!std::isfinite(det) || std::abs(det) < 1e-15 * std::max(mz * mz, 1e-300))
        throw GeometryError("circle fit: degenerate geometry");

    const double cx = (mxz * (myy - x) - myz * mxy) / det / 2.0;
    const double cy = (myz * (mxx - x) - mxz * mxy) / det / 2.0;

    CircleFit fit;
    fit.center = Complex(cx + mean_x, cy + mean_y);
    fit.radius = std::sqrt(cx * cx + cy * cy + mz);
    if (!std::isfinite(fit.radius) || fit.radius <= 0.0)
        throw GeometryError("circle fit: degenerate geometry");

    double ss = 0.0;
    for (const auto& p : points) {
        const double d = std::abs(p - fit.center) - fit.radius;
        ss += d * d;
    }
    fit.residual_rms = std::sqrt(ss / static_cast<double>(n));
    return fit;
}

inline CircleFit fit_circle(const std::vector<Complex>& points) {
    return fit_circle(std::span<const Complex>(points));
}

}  // namespace reslab
