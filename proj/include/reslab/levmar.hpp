#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "reslab/error.hpp"

namespace reslab {

struct LevMarOptions {
    int max_iterations = 200;
    double gradient_tol = 1e-12;  // cosine-style scaled gradient test
    double step_tol = 1e-12;      // relative step size test
    double cost_floor = 0.0;      // absolute sum-of-squares floor (perfect fit)
};

struct LevMarSummary {
    Eigen::VectorXd x;
    double cost = 0.0;  // sum of squared residuals at the solution
    int iterations = 0;
    std::string stop_reason;
};

// Levenberg-Marquardt with Marquardt diagonal scaling. The model callback
// fills residuals r(x) and the analytic Jacobian J = dr/dx. Non-convergence
// within max_iterations is an error carrying the last iterate, never a
// silently returned partial result.
template <typename Model>
LevMarSummary levmar_solve(Model&& model, Eigen::VectorXd x, const LevMarOptions& opts = {}) {
    const auto n = x.size();
    Eigen::VectorXd r;
    Eigen::MatrixXd jac;
    model(x, r, jac);
    double cost = r.squaredNorm();
    if (!std::isfinite(cost))
        throw FitError("fit: residuals not finite at the initial point");

    Eigen::VectorXd diag_scale(n);
    double lambda = 1e-3;
    double nu = 2.0;

    auto scaled_gradient_small = [&](const Eigen::VectorXd& g) {
        if (cost <= 0.0) return true;
        const double rnorm = std::sqrt(cost);
        for (Eigen::Index j = 0; j < n; ++j) {
            const double cnorm = jac.col(j).norm();
            if (cnorm > 0.0 && std::abs(g[j]) > opts.gradient_tol * cnorm * rnorm) return false;
        }
        return true;
    };

    for (int iter = 1; iter <= opts.max_iterations; ++iter) {
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd g = jac.transpose() * r;

        // fresh Marquardt scaling each iteration; the floor keeps parameters
        // with a vanishing column (e.g. saturated bound transforms) solvable
        const double max_diag = jtj.diagonal().maxCoeff();
        for (Eigen::Index j = 0; j < n; ++j)
            diag_scale[j] = std::max({jtj(j, j), 1e-10 * max_diag, 1e-300});

        if (cost <= opts.cost_floor)
            return {std::move(x), cost, iter, "cost floor"};
        if (scaled_gradient_small(g))
            return {std::move(x), cost, iter, "gradient tolerance"};

        bool stepped = false;
        while (!stepped) {
            Eigen::MatrixXd a = jtj;
            a.diagonal() += lambda * diag_scale;
            const Eigen::VectorXd step = a.ldlt().solve(-g);
            if (!step.allFinite()) {
                lambda *= nu;
                nu *= 2.0;
                if (lambda > 1e32) return {std::move(x), cost, iter, "step limit"};
                continue;
            }

            const Eigen::VectorXd x_new = x + step;
            Eigen::VectorXd r_new;
            Eigen::MatrixXd jac_new;
            model(x_new, r_new, jac_new);
            const double cost_new = r_new.squaredNorm();

            const double predicted =
                -g.dot(step) + lambda * step.dot(diag_scale.cwiseProduct(step));
            const double actual = cost - cost_new;

            if (std::isfinite(cost_new) && actual > 0.0) {
                const double rho = predicted > 0.0 ? actual / predicted : 1.0;
                x = x_new;
                r = std::move(r_new);
                jac = std::move(jac_new);
                const double prev_cost = cost;
                cost = cost_new;
                const double shrink = 1.0 - std::pow(2.0 * rho - 1.0, 3.0);
                lambda *= std::max(1.0 / 3.0, shrink);
                nu = 2.0;
                stepped = true;
                // Convergence is only judged on accepted steps; a small
                // proposal under an inflated lambda says nothing.
                bool tiny_step = true;
                for (Eigen::Index j = 0; j < n; ++j)
                    if (std::abs(step[j]) > opts.step_tol * (std::abs(x[j]) + opts.step_tol))
                        tiny_step = false;
                if (tiny_step)
                    return {std::move(x), cost, iter, "step tolerance"};
                // Both observed and predicted improvements at numerical noise
                // level: nothing left to gain.
                if (actual <= 1e-14 * prev_cost && predicted <= 1e-14 * prev_cost)
                    return {std::move(x), cost, iter, "cost tolerance"};
            } else {
                lambda *= nu;
                nu *= 2.0;
                // the trust region has collapsed to numerical stationarity
                if (lambda > 1e32) return {std::move(x), cost, iter, "step limit"};
            }
        }
    }

    std::vector<double> last(x.data(), x.data() + x.size());
    throw FitError("fit: no convergence after " + std::to_string(opts.max_iterations) +
                       " iterations (cost " + std::to_string(cost) + ")",
                   std::move(last));
}

}  // namespace reslab
