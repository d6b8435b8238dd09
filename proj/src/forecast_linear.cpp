#include "cdri/forecast_linear.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace cdri {

OlsModel fit_ols(std::span<const double> t, std::span<const double> y) {
    if (t.size() != y.size()) {
        throw std::invalid_argument("fit_ols: t and y differ in length");
    }
    if (t.size() < 2) {
        throw std::invalid_argument("fit_ols: need at least 2 points");
    }
    auto n = static_cast<double>(t.size());
    double mean_t = 0.0;
    double mean_y = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        mean_t += t[i];
        mean_y += y[i];
    }
    mean_t /= n;
    mean_y /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        double dt = t[i] - mean_t;
        sxx += dt * dt;
        sxy += dt * (y[i] - mean_y);
    }
    if (sxx == 0.0) {
        throw std::invalid_argument("fit_ols: all t values identical (singular design)");
    }
    OlsModel model;
    model.slope = sxy / sxx;
    model.intercept = mean_y - model.slope * mean_t;
    return model;
}

std::array<double, kDimensionCount> VarModel::step(const std::array<double, kDimensionCount>& prev) const {
    std::array<double, kDimensionCount> out{};
    for (std::size_t i = 0; i < kDimensionCount; ++i) {
        double v = intercept[i];
        for (std::size_t j = 0; j < kDimensionCount; ++j) {
            v += coefficients[i][j] * prev[j];
        }
        out[i] = v;
    }
    return out;
}

VarModel fit_var(const std::vector<std::array<double, kDimensionCount>>& rows, double lambda) {
    if (rows.size() < 2) {
        throw std::invalid_argument("fit_var: need at least 2 rows (1 transition)");
    }
    if (lambda < 0.0) {
        throw std::invalid_argument("fit_var: lambda must be nonnegative");
    }
    const auto n = static_cast<Eigen::Index>(rows.size() - 1); // transitions
    constexpr Eigen::Index k = kDimensionCount;

    // Design Z: lagged vectors plus an intercept column; response Y: next vectors.
    Eigen::MatrixXd Z(n, k + 1);
    Eigen::MatrixXd Y(n, k);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < k; ++c) {
            Z(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
            Y(r, c) = rows[static_cast<std::size_t>(r + 1)][static_cast<std::size_t>(c)];
        }
        Z(r, k) = 1.0;
    }

    // Augmented normal equations, intercept unpenalized.
    Eigen::MatrixXd G = Z.transpose() * Z;
    for (Eigen::Index c = 0; c < k; ++c) {
        G(c, c) += lambda;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(G);
    if (!lu.isInvertible()) {
        throw std::invalid_argument("fit_var: singular design; use lambda > 0");
    }
    Eigen::MatrixXd B = lu.solve(Z.transpose() * Y); // (k+1) x k

    VarModel model;
    model.lambda = lambda;
    for (std::size_t i = 0; i < kDimensionCount; ++i) {
        for (std::size_t j = 0; j < kDimensionCount; ++j) {
            model.coefficients[i][j] = B(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
        }
        model.intercept[i] = B(k, static_cast<Eigen::Index>(i));
    }
    return model;
}

std::array<double, kDimensionCount> predict_var(const VarModel& model,
                                                const std::array<double, kDimensionCount>& last,
                                                int steps) {
    if (steps < 1) {
        throw std::invalid_argument("predict_var: steps must be positive");
    }
    std::array<double, kDimensionCount> state = last;
    for (int s = 0; s < steps; ++s) {
        state = model.step(state);
    }
    return state;
}

double var_objective(const std::vector<std::array<double, kDimensionCount>>& rows,
                     const VarModel& model) {
    double obj = 0.0;
    for (std::size_t r = 0; r + 1 < rows.size(); ++r) {
        auto pred = model.step(rows[r]);
        for (std::size_t i = 0; i < kDimensionCount; ++i) {
            double e = rows[r + 1][i] - pred[i];
            obj += e * e;
        }
    }
    for (std::size_t i = 0; i < kDimensionCount; ++i) {
        for (std::size_t j = 0; j < kDimensionCount; ++j) {
            obj += model.lambda * model.coefficients[i][j] * model.coefficients[i][j];
        }
    }
    return obj;
}

} // namespace cdri
