#pragma once

#include "cdri/core.hpp"

#include <array>
#include <span>
#include <vector>

namespace cdri {

/// Least-squares line fit, closed form.
struct OlsModel {
    double intercept = 0.0;
    double slope = 0.0;

    double predict(double t) const { return intercept + slope * t; }
};

/// Solves the 2x2 normal equations in centered form:
/// slope = sum((t-mean_t)(y-mean_y)) / sum((t-mean_t)^2). Throws
/// std::invalid_argument with fewer than 2 points or all t identical.
OlsModel fit_ols(std::span<const double> t, std::span<const double> y);

/// VAR(1) with ridge-penalized coefficient matrix and unpenalized intercept:
/// y_t ~ c + A y_{t-1}, minimizing sum ||y_t - c - A y_{t-1}||^2 + lambda ||A||_F^2.
struct VarModel {
    std::array<double, kDimensionCount> intercept{};
    std::array<std::array<double, kDimensionCount>, kDimensionCount> coefficients{};
    double lambda = 0.0;

    std::array<double, kDimensionCount> step(const std::array<double, kDimensionCount>& prev) const;
};

/// Fits by closed-form augmented normal equations, one 6x6 solve per output
/// dimension (5 lag coefficients + intercept; the penalty matrix carries
/// lambda on the lag block only). Throws std::invalid_argument with fewer
/// than 2 rows, negative lambda, or lambda = 0 on a singular design.
VarModel fit_var(const std::vector<std::array<double, kDimensionCount>>& rows, double lambda);

/// Iterates y <- c + A y, `steps` times.
std::array<double, kDimensionCount> predict_var(const VarModel& model,
                                                const std::array<double, kDimensionCount>& last,
                                                int steps);

/// Penalized training objective at given coefficients; the local-optimality
/// property test compares the fitted solution against perturbations of it.
double var_objective(const std::vector<std::array<double, kDimensionCount>>& rows,
                     const VarModel& model);

} // namespace cdri
