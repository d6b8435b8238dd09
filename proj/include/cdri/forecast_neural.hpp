#pragma once

#include "cdri/core.hpp"
#include "cdri/ingest.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cdri {

/// Internal [0,1] scaling of the [1,5] score domain.
inline double scale_score(double x) { return (x - 1.0) / 4.0; }
inline double unscale_score(double u) { return 1.0 + 4.0 * u; }

struct LstmConfig {
    int hidden_size = 8;
    int epochs = 500;
    double step_size = 0.05;
    std::uint64_t seed = 1;
};

/// Flat parameter storage shared by the model and its gradients.
/// Gate matrices are H x (I+H), row-major, acting on [x_t; h_{t-1}];
/// the output head is I x H plus bias.
struct LstmParams {
    std::vector<double> w_i, w_f, w_o, w_g;
    std::vector<double> b_i, b_f, b_o, b_g;
    std::vector<double> w_out, b_out;

    static LstmParams zeros(int input_size, int hidden_size);

    /// Named views over the ten blocks, in a fixed order.
    std::array<std::pair<const char*, std::vector<double>*>, 10> blocks();
    std::array<std::pair<const char*, const std::vector<double>*>, 10> blocks() const;
};

struct LstmModel {
    int input_size = static_cast<int>(kDimensionCount);
    int hidden_size = 8;
    LstmParams params;
    LstmConfig config;
    std::vector<double> loss_history; // one entry per epoch run
};

using ScaledSequence = std::vector<std::array<double, kDimensionCount>>;

/// Seeded initialization: gate and output weights uniform in
/// +-0.5/sqrt(hidden), biases zero, draw order fixed.
LstmModel lstm_init(const LstmConfig& config);

/// Single forward pass over a scaled sequence; h_0 = c_0 = 0. Throws
/// std::invalid_argument on an empty sequence.
std::array<double, kDimensionCount> lstm_forward(const LstmModel& model, const ScaledSequence& seq);

/// Mean squared error of the forward prediction against target (mean over the
/// 5 output components).
double lstm_loss(const LstmModel& model, const ScaledSequence& seq,
                 const std::array<double, kDimensionCount>& target);

/// Analytic gradients of lstm_loss via full backpropagation through time.
LstmParams lstm_gradients(const LstmModel& model, const ScaledSequence& seq,
                          const std::array<double, kDimensionCount>& target,
                          double* loss_out = nullptr);

struct GradCheckBlock {
    std::string name;
    double max_rel_error = 0.0;
};

struct GradCheckReport {
    std::vector<GradCheckBlock> blocks;
    double max_rel_error = 0.0;
    bool pass = false; // threshold 1e-4

    static constexpr double kThreshold = 1e-4;
};

/// Central finite differences over every parameter against the supplied
/// analytic gradients. Relative error per parameter is
/// |g_a - g_fd| / max(1e-8, |g_a| + |g_fd|).
GradCheckReport gradient_check_against(const LstmModel& model, const ScaledSequence& seq,
                                       const std::array<double, kDimensionCount>& target,
                                       double epsilon, const LstmParams& analytic);

GradCheckReport gradient_check(const LstmModel& model, const ScaledSequence& seq,
                               const std::array<double, kDimensionCount>& target, double epsilon);

/// Trains on the aggregate series: one pair per prefix (rows 0..k-1 scaled,
/// target row k), full-batch fixed-step gradient descent, loss recorded each
/// epoch before the update. Throws std::invalid_argument with fewer than 2
/// time steps.
LstmModel lstm_train(const SeriesPanel& panel, const LstmConfig& config);

/// Feeds the full scaled history, then autoregressively appends its own
/// predictions for `steps` steps; the final step is unscaled to [1,5] domain.
std::array<double, kDimensionCount> lstm_predict(const LstmModel& model, const SeriesPanel& panel,
                                                 int steps);

} // namespace cdri
