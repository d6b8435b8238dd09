#include "cdri/forecast_neural.hpp"

#include "cdri/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace cdri {

namespace {

constexpr int kInput = static_cast<int>(kDimensionCount);

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// One timestep's activations, kept for the backward pass.
struct StepCache {
    std::vector<double> z;      // [x_t; h_{t-1}], length I+H
    std::vector<double> i, f, o, g;
    std::vector<double> c;      // cell state after the step
    std::vector<double> tanh_c;
    std::vector<double> h;
};

struct ForwardCache {
    std::vector<StepCache> steps;
    std::array<double, kDimensionCount> prediction{};
};

// y += W x for an H x D row-major matrix.
void gemv_add(const std::vector<double>& w, const std::vector<double>& x, std::vector<double>& y) {
    std::size_t rows = y.size();
    std::size_t cols = x.size();
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = 0.0;
        const double* row = w.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) {
            acc += row[c] * x[c];
        }
        y[r] += acc;
    }
}

ForwardCache run_forward(const LstmModel& model, const ScaledSequence& seq) {
    if (seq.empty()) {
        throw std::invalid_argument("lstm_forward: empty sequence");
    }
    auto H = static_cast<std::size_t>(model.hidden_size);
    std::size_t D = static_cast<std::size_t>(kInput) + H;

    ForwardCache cache;
    cache.steps.reserve(seq.size());
    std::vector<double> h_prev(H, 0.0);
    std::vector<double> c_prev(H, 0.0);

    for (const auto& x : seq) {
        StepCache st;
        st.z.resize(D);
        for (std::size_t k = 0; k < kDimensionCount; ++k) {
            st.z[k] = x[k];
        }
        for (std::size_t k = 0; k < H; ++k) {
            st.z[kDimensionCount + k] = h_prev[k];
        }

        st.i.assign(model.params.b_i.begin(), model.params.b_i.end());
        st.f.assign(model.params.b_f.begin(), model.params.b_f.end());
        st.o.assign(model.params.b_o.begin(), model.params.b_o.end());
        st.g.assign(model.params.b_g.begin(), model.params.b_g.end());
        gemv_add(model.params.w_i, st.z, st.i);
        gemv_add(model.params.w_f, st.z, st.f);
        gemv_add(model.params.w_o, st.z, st.o);
        gemv_add(model.params.w_g, st.z, st.g);

        st.c.resize(H);
        st.tanh_c.resize(H);
        st.h.resize(H);
        for (std::size_t k = 0; k < H; ++k) {
            st.i[k] = sigmoid(st.i[k]);
            st.f[k] = sigmoid(st.f[k]);
            st.o[k] = sigmoid(st.o[k]);
            st.g[k] = std::tanh(st.g[k]);
            st.c[k] = st.f[k] * c_prev[k] + st.i[k] * st.g[k];
            st.tanh_c[k] = std::tanh(st.c[k]);
            st.h[k] = st.o[k] * st.tanh_c[k];
        }
        h_prev = st.h;
        c_prev = st.c;
        cache.steps.push_back(std::move(st));
    }

    for (std::size_t r = 0; r < kDimensionCount; ++r) {
        double acc = model.params.b_out[r];
        const double* row = model.params.w_out.data() + r * H;
        for (std::size_t k = 0; k < H; ++k) {
            acc += row[k] * h_prev[k];
        }
        cache.prediction[r] = acc;
    }
    return cache;
}

double prediction_loss(const std::array<double, kDimensionCount>& pred,
                       const std::array<double, kDimensionCount>& target) {
    double loss = 0.0;
    for (std::size_t k = 0; k < kDimensionCount; ++k) {
        double e = pred[k] - target[k];
        loss += e * e;
    }
    return loss / static_cast<double>(kDimensionCount);
}

void accumulate(LstmParams& into, const LstmParams& grad) {
    auto dst = into.blocks();
    auto src = grad.blocks();
    for (std::size_t b = 0; b < dst.size(); ++b) {
        auto& d = *dst[b].second;
        const auto& s = *src[b].second;
        for (std::size_t k = 0; k < d.size(); ++k) {
            d[k] += s[k];
        }
    }
}

void scale_params(LstmParams& p, double factor) {
    for (auto& [name, vec] : p.blocks()) {
        (void)name;
        for (double& v : *vec) {
            v *= factor;
        }
    }
}

} // namespace

LstmParams LstmParams::zeros(int input_size, int hidden_size) {
    auto H = static_cast<std::size_t>(hidden_size);
    std::size_t D = static_cast<std::size_t>(input_size) + H;
    LstmParams p;
    p.w_i.assign(H * D, 0.0);
    p.w_f.assign(H * D, 0.0);
    p.w_o.assign(H * D, 0.0);
    p.w_g.assign(H * D, 0.0);
    p.b_i.assign(H, 0.0);
    p.b_f.assign(H, 0.0);
    p.b_o.assign(H, 0.0);
    p.b_g.assign(H, 0.0);
    p.w_out.assign(static_cast<std::size_t>(input_size) * H, 0.0);
    p.b_out.assign(static_cast<std::size_t>(input_size), 0.0);
    return p;
}

std::array<std::pair<const char*, std::vector<double>*>, 10> LstmParams::blocks() {
    return {{{"w_i", &w_i}, {"w_f", &w_f}, {"w_o", &w_o}, {"w_g", &w_g},
             {"b_i", &b_i}, {"b_f", &b_f}, {"b_o", &b_o}, {"b_g", &b_g},
             {"w_out", &w_out}, {"b_out", &b_out}}};
}

std::array<std::pair<const char*, const std::vector<double>*>, 10> LstmParams::blocks() const {
    return {{{"w_i", &w_i}, {"w_f", &w_f}, {"w_o", &w_o}, {"w_g", &w_g},
             {"b_i", &b_i}, {"b_f", &b_f}, {"b_o", &b_o}, {"b_g", &b_g},
             {"w_out", &w_out}, {"b_out", &b_out}}};
}

LstmModel lstm_init(const LstmConfig& config) {
    if (config.hidden_size < 1) {
        throw std::invalid_argument("lstm_init: hidden size must be >= 1");
    }
    LstmModel model;
    model.hidden_size = config.hidden_size;
    model.config = config;
    model.params = LstmParams::zeros(kInput, config.hidden_size);

    double bound = 0.5 / std::sqrt(static_cast<double>(config.hidden_size));
    Pcg32 rng(derive_seed(config.seed, 0x157f));
    for (std::vector<double>* w :
         {&model.params.w_i, &model.params.w_f, &model.params.w_o, &model.params.w_g,
          &model.params.w_out}) {
        for (double& v : *w) {
            v = rng.uniform(-bound, bound);
        }
    }
    // Forget gate starts low so the hidden state settles within the few steps
    // these short panels provide; predictions on a history one step longer
    // than any training prefix then stay close to the trained outputs.
    for (double& b : model.params.b_f) {
        b = -1.0;
    }
    return model;
}

std::array<double, kDimensionCount> lstm_forward(const LstmModel& model, const ScaledSequence& seq) {
    return run_forward(model, seq).prediction;
}

double lstm_loss(const LstmModel& model, const ScaledSequence& seq,
                 const std::array<double, kDimensionCount>& target) {
    return prediction_loss(run_forward(model, seq).prediction, target);
}

LstmParams lstm_gradients(const LstmModel& model, const ScaledSequence& seq,
                          const std::array<double, kDimensionCount>& target, double* loss_out) {
    ForwardCache cache = run_forward(model, seq);
    if (loss_out) {
        *loss_out = prediction_loss(cache.prediction, target);
    }

    auto H = static_cast<std::size_t>(model.hidden_size);
    std::size_t D = static_cast<std::size_t>(kInput) + H;
    std::size_t T = cache.steps.size();
    LstmParams grad = LstmParams::zeros(kInput, model.hidden_size);

    // Output head.
    std::vector<double> dh(H, 0.0);
    const std::vector<double>& h_last = cache.steps[T - 1].h;
    for (std::size_t r = 0; r < kDimensionCount; ++r) {
        double dy = 2.0 * (cache.prediction[r] - target[r]) / static_cast<double>(kDimensionCount);
        grad.b_out[r] += dy;
        for (std::size_t k = 0; k < H; ++k) {
            grad.w_out[r * H + k] += dy * h_last[k];
            dh[k] += model.params.w_out[r * H + k] * dy;
        }
    }

    std::vector<double> dc(H, 0.0);
    std::vector<double> da_i(H), da_f(H), da_o(H), da_g(H);

    for (std::size_t t = T; t-- > 0;) {
        const StepCache& st = cache.steps[t];
        const std::vector<double>* c_prev = t > 0 ? &cache.steps[t - 1].c : nullptr;

        for (std::size_t k = 0; k < H; ++k) {
            double d_o = dh[k] * st.tanh_c[k];
            da_o[k] = d_o * st.o[k] * (1.0 - st.o[k]);
            dc[k] += dh[k] * st.o[k] * (1.0 - st.tanh_c[k] * st.tanh_c[k]);
            double cp = c_prev ? (*c_prev)[k] : 0.0;
            double d_f = dc[k] * cp;
            da_f[k] = d_f * st.f[k] * (1.0 - st.f[k]);
            double d_i = dc[k] * st.g[k];
            da_i[k] = d_i * st.i[k] * (1.0 - st.i[k]);
            double d_g = dc[k] * st.i[k];
            da_g[k] = d_g * (1.0 - st.g[k] * st.g[k]);
        }

        std::vector<double> dz(D, 0.0);
        auto apply_gate = [&](const std::vector<double>& w, std::vector<double>& w_grad,
                              std::vector<double>& b_grad, const std::vector<double>& da) {
            for (std::size_t r = 0; r < H; ++r) {
                b_grad[r] += da[r];
                const double* w_row = w.data() + r * D;
                double* g_row = w_grad.data() + r * D;
                for (std::size_t c = 0; c < D; ++c) {
                    g_row[c] += da[r] * st.z[c];
                    dz[c] += w_row[c] * da[r];
                }
            }
        };
        apply_gate(model.params.w_i, grad.w_i, grad.b_i, da_i);
        apply_gate(model.params.w_f, grad.w_f, grad.b_f, da_f);
        apply_gate(model.params.w_o, grad.w_o, grad.b_o, da_o);
        apply_gate(model.params.w_g, grad.w_g, grad.b_g, da_g);

        // Carry into the previous step: dh from the hidden slice of z, dc
        // through the forget gate.
        for (std::size_t k = 0; k < H; ++k) {
            dh[k] = dz[kDimensionCount + k];
            dc[k] *= st.f[k];
        }
    }
    return grad;
}

GradCheckReport gradient_check_against(const LstmModel& model, const ScaledSequence& seq,
                                       const std::array<double, kDimensionCount>& target,
                                       double epsilon, const LstmParams& analytic) {
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("gradient_check: epsilon must be positive");
    }
    GradCheckReport report;
    LstmModel probe = model;
    auto probe_blocks = probe.params.blocks();
    auto analytic_blocks = analytic.blocks();

    for (std::size_t b = 0; b < probe_blocks.size(); ++b) {
        GradCheckBlock block;
        block.name = probe_blocks[b].first;
        std::vector<double>& vec = *probe_blocks[b].second;
        const std::vector<double>& ga = *analytic_blocks[b].second;
        for (std::size_t k = 0; k < vec.size(); ++k) {
            double saved = vec[k];
            vec[k] = saved + epsilon;
            double up = lstm_loss(probe, seq, target);
            vec[k] = saved - epsilon;
            double down = lstm_loss(probe, seq, target);
            vec[k] = saved;
            double fd = (up - down) / (2.0 * epsilon);
            double rel = std::abs(ga[k] - fd) / std::max(1e-8, std::abs(ga[k]) + std::abs(fd));
            block.max_rel_error = std::max(block.max_rel_error, rel);
        }
        report.max_rel_error = std::max(report.max_rel_error, block.max_rel_error);
        report.blocks.push_back(std::move(block));
    }
    report.pass = report.max_rel_error < GradCheckReport::kThreshold;
    return report;
}

GradCheckReport gradient_check(const LstmModel& model, const ScaledSequence& seq,
                               const std::array<double, kDimensionCount>& target, double epsilon) {
    return gradient_check_against(model, seq, target, epsilon, lstm_gradients(model, seq, target));
}

LstmModel lstm_train(const SeriesPanel& panel, const LstmConfig& config) {
    if (panel.aggregate.size() < 2) {
        throw std::invalid_argument("lstm_train: need at least 2 time steps");
    }
    ScaledSequence scaled;
    scaled.reserve(panel.aggregate.size());
    for (const auto& row : panel.aggregate) {
        std::array<double, kDimensionCount> s{};
        for (std::size_t k = 0; k < kDimensionCount; ++k) {
            s[k] = scale_score(row[k]);
        }
        scaled.push_back(s);
    }

    LstmModel model = lstm_init(config);
    std::size_t pairs = scaled.size() - 1;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        LstmParams grad_sum = LstmParams::zeros(kInput, model.hidden_size);
        double loss_sum = 0.0;
        for (std::size_t k = 1; k < scaled.size(); ++k) {
            ScaledSequence prefix(scaled.begin(), scaled.begin() + static_cast<std::ptrdiff_t>(k));
            double pair_loss = 0.0;
            LstmParams grad = lstm_gradients(model, prefix, scaled[k], &pair_loss);
            accumulate(grad_sum, grad);
            loss_sum += pair_loss;
        }
        scale_params(grad_sum, 1.0 / static_cast<double>(pairs));
        model.loss_history.push_back(loss_sum / static_cast<double>(pairs));

        auto params = model.params.blocks();
        auto grads = grad_sum.blocks();
        for (std::size_t b = 0; b < params.size(); ++b) {
            auto& p = *params[b].second;
            const auto& g = *grads[b].second;
            for (std::size_t k = 0; k < p.size(); ++k) {
                p[k] -= config.step_size * g[k];
            }
        }
    }
    return model;
}

std::array<double, kDimensionCount> lstm_predict(const LstmModel& model, const SeriesPanel& panel,
                                                 int steps) {
    if (steps < 1) {
        throw std::invalid_argument("lstm_predict: steps must be positive");
    }
    ScaledSequence seq;
    seq.reserve(panel.aggregate.size() + static_cast<std::size_t>(steps));
    for (const auto& row : panel.aggregate) {
        std::array<double, kDimensionCount> s{};
        for (std::size_t k = 0; k < kDimensionCount; ++k) {
            s[k] = scale_score(row[k]);
        }
        seq.push_back(s);
    }
    std::array<double, kDimensionCount> last{};
    for (int s = 0; s < steps; ++s) {
        last = lstm_forward(model, seq);
        seq.push_back(last);
    }
    std::array<double, kDimensionCount> out{};
    for (std::size_t k = 0; k < kDimensionCount; ++k) {
        out[k] = unscale_score(last[k]);
    }
    return out;
}

} // namespace cdri
