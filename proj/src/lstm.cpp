#include "vlab/lstm.hpp"

#include "vlab/error.hpp"
#include "vlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace vlab::lstm {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using MatMap = Eigen::Map<MatrixXd>;
using ConstMatMap = Eigen::Map<const MatrixXd>;

ConstMatMap view(const TrainedLstm& m, std::size_t slot) {
    const auto& s = m.layout[slot];
    return ConstMatMap(m.weights.data() + s.offset, static_cast<Eigen::Index>(s.rows),
                       static_cast<Eigen::Index>(s.cols));
}

MatMap grad_view(const TrainedLstm& m, std::vector<double>& g, std::size_t slot) {
    const auto& s = m.layout[slot];
    return MatMap(g.data() + s.offset, static_cast<Eigen::Index>(s.rows), static_cast<Eigen::Index>(s.cols));
}

MatrixXd sigmoid(const MatrixXd& x) {
    return x.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

/// Gathers rows of a dataset into a batch.
void gather(const WindowedDataset& data, std::span<const std::size_t> idx, MatrixXd& x, VectorXd& y) {
    x.resize(static_cast<Eigen::Index>(idx.size()), data.inputs.cols());
    y.resize(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t r = 0; r < idx.size(); ++r) {
        x.row(static_cast<Eigen::Index>(r)) = data.inputs.row(static_cast<Eigen::Index>(idx[r]));
        y(static_cast<Eigen::Index>(r)) = data.targets(static_cast<Eigen::Index>(idx[r]));
    }
}

}  // namespace

std::string to_string(Target target) { return target == Target::next_return ? "return" : "realized-vol"; }

Target parse_target(std::string_view name) {
    if (name == "return") return Target::next_return;
    if (name == "realized-vol" || name == "realized_vol") return Target::realized_vol;
    throw InvalidArgument("unknown LSTM target '" + std::string(name) + "' (expected return|realized-vol)");
}

ScaledPair scale_fit_apply(std::span<const double> train, std::span<const double> other) {
    if (train.empty()) throw InvalidArgument("cannot fit a scaler on empty data");
    const auto [lo, hi] = std::minmax_element(train.begin(), train.end());
    if (!(*hi > *lo)) throw InvalidArgument("cannot fit a scaler on constant data");
    ScaledPair out;
    out.scaler = {*lo, *hi};
    out.train.reserve(train.size());
    out.other.reserve(other.size());
    for (double x : train) out.train.push_back(out.scaler.apply(x));
    for (double x : other) out.other.push_back(out.scaler.apply(x));
    return out;
}

WindowedDataset build_windows(std::span<const double> series, std::size_t window_len) {
    if (window_len < 1) throw InvalidArgument("window length must be at least 1");
    if (series.size() <= window_len)
        throw InvalidArgument("series of length " + std::to_string(series.size()) + " is too short for window " +
                              std::to_string(window_len));
    const std::size_t n = series.size() - window_len;
    WindowedDataset d;
    d.window_len = window_len;
    d.inputs.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(window_len));
    d.targets.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < window_len; ++j)
            d.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = series[i + j];
        d.targets(static_cast<Eigen::Index>(i)) = series[i + window_len];
    }
    return d;
}

WindowedDataset build_windows(const market::ReturnSeries& series, std::size_t window_len, const MinMaxScaler& scaler) {
    std::vector<double> scaled;
    scaled.reserve(series.size());
    for (double v : series.values) scaled.push_back(scaler.apply(v));
    auto d = build_windows(scaled, window_len);
    d.scale_min = scaler.min;
    d.scale_max = scaler.max;
    d.target_dates.assign(series.dates.begin() + static_cast<std::ptrdiff_t>(window_len), series.dates.end());
    return d;
}

void validate(const LstmConfig& c) {
    if (c.window_len < 1) throw InvalidArgument("LSTM window length must be at least 1");
    if (c.layer_sizes.empty()) throw InvalidArgument("LSTM needs at least one recurrent layer");
    for (auto h : c.layer_sizes)
        if (h == 0) throw InvalidArgument("LSTM layer sizes must be positive");
    if (!(c.dropout >= 0.0 && c.dropout < 1.0)) throw InvalidArgument("dropout must lie in [0, 1)");
    if (c.batch_size == 0) throw InvalidArgument("batch size must be positive");
    if (c.epochs < 0) throw InvalidArgument("epochs must be non-negative");
    if (!(c.learning_rate >= 0.0)) throw InvalidArgument("learning rate must be non-negative");
}

std::vector<TensorSlot> tensor_layout(const LstmConfig& config) {
    std::vector<TensorSlot> slots;
    std::size_t offset = 0;
    auto add = [&](std::string name, std::size_t rows, std::size_t cols) {
        slots.push_back({std::move(name), rows, cols, offset});
        offset += rows * cols;
    };
    std::size_t in = 1;
    for (std::size_t l = 0; l < config.layer_sizes.size(); ++l) {
        const std::size_t h = config.layer_sizes[l];
        const std::string p = "l" + std::to_string(l);
        add(p + ".wx", 4 * h, in);
        add(p + ".wh", 4 * h, h);
        add(p + ".b", 4 * h, 1);
        in = h;
    }
    add("head.w", 1, in);
    add("head.b", 1, 1);
    return slots;
}

double init_bound(std::size_t fan_in, std::size_t fan_out) noexcept {
    return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

TrainedLstm init(const LstmConfig& config, std::uint64_t seed) {
    validate(config);
    TrainedLstm m;
    m.config = config;
    m.config.seed = seed;
    m.layout = tensor_layout(config);
    m.weights.assign(m.layout.back().offset + m.layout.back().size(), 0.0);

    Rng rng(mix_seed(seed, 0x1a17));
    auto fill_uniform = [&](const TensorSlot& s, double bound) {
        for (std::size_t i = 0; i < s.size(); ++i) m.weights[s.offset + i] = bound * (2.0 * rng.uniform() - 1.0);
    };
    const std::size_t layers = config.layer_sizes.size();
    std::size_t in = 1;
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t h = config.layer_sizes[l];
        fill_uniform(m.layout[3 * l], init_bound(in, 4 * h));
        fill_uniform(m.layout[3 * l + 1], init_bound(h, 4 * h));
        const auto& b = m.layout[3 * l + 2];
        for (std::size_t r = h; r < 2 * h; ++r) m.weights[b.offset + r] = 1.0;  // forget gate
        in = h;
    }
    fill_uniform(m.layout[3 * layers], init_bound(in, 1));
    return m;
}

MatrixXd apply_dropout(const MatrixXd& x, double rate, std::uint64_t seed) {
    Rng rng(seed);
    const double keep_scale = 1.0 / (1.0 - rate);
    MatrixXd out(x.rows(), x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j)
        for (Eigen::Index i = 0; i < x.rows(); ++i) out(i, j) = rng.uniform() < rate ? 0.0 : x(i, j) * keep_scale;
    return out;
}

ForwardResult forward(const TrainedLstm& model, const MatrixXd& inputs, bool training_mode,
                      std::uint64_t dropout_seed) {
    const auto& cfg = model.config;
    if (static_cast<std::size_t>(inputs.cols()) != cfg.window_len)
        throw InvalidArgument("input width " + std::to_string(inputs.cols()) + " does not match window length " +
                              std::to_string(cfg.window_len));
    const Eigen::Index batch = inputs.rows();
    const std::size_t steps = cfg.window_len;
    const std::size_t layers = cfg.layer_sizes.size();
    const bool dropout = training_mode && cfg.dropout > 0.0;
    Rng mask_rng(dropout_seed);
    const double keep_scale = dropout ? 1.0 / (1.0 - cfg.dropout) : 1.0;

    ForwardResult out;
    out.layers.resize(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        const auto hsz = static_cast<Eigen::Index>(cfg.layer_sizes[l]);
        const auto wx = view(model, 3 * l);
        const auto wh = view(model, 3 * l + 1);
        const auto b = view(model, 3 * l + 2);
        auto& lc = out.layers[l];
        for (auto* v : {&lc.input, &lc.i, &lc.f, &lc.g, &lc.o, &lc.c, &lc.tanh_c, &lc.h, &lc.output}) v->resize(steps);
        if (dropout) lc.mask.resize(steps);

        MatrixXd h_prev = MatrixXd::Zero(hsz, batch);
        MatrixXd c_prev = MatrixXd::Zero(hsz, batch);
        for (std::size_t t = 0; t < steps; ++t) {
            lc.input[t] = l == 0 ? MatrixXd(inputs.col(static_cast<Eigen::Index>(t)).transpose())
                                 : out.layers[l - 1].output[t];
            MatrixXd z = wx * lc.input[t] + wh * h_prev;
            z.colwise() += b.col(0);
            lc.i[t] = sigmoid(z.topRows(hsz));
            lc.f[t] = sigmoid(z.middleRows(hsz, hsz));
            lc.g[t] = z.middleRows(2 * hsz, hsz).array().tanh();
            lc.o[t] = sigmoid(z.bottomRows(hsz));
            lc.c[t] = lc.f[t].cwiseProduct(c_prev) + lc.i[t].cwiseProduct(lc.g[t]);
            lc.tanh_c[t] = lc.c[t].array().tanh();
            lc.h[t] = lc.o[t].cwiseProduct(lc.tanh_c[t]);

            MatrixXd y = cfg.relu_outputs ? MatrixXd(lc.h[t].cwiseMax(0.0)) : lc.h[t];
            if (dropout) {
                MatrixXd mask(hsz, batch);
                for (Eigen::Index j = 0; j < batch; ++j)
                    for (Eigen::Index i = 0; i < hsz; ++i)
                        mask(i, j) = mask_rng.uniform() < cfg.dropout ? 0.0 : keep_scale;
                y = y.cwiseProduct(mask);
                lc.mask[t] = std::move(mask);
            }
            lc.output[t] = std::move(y);
            h_prev = lc.h[t];
            c_prev = lc.c[t];
        }
    }

    const auto head_w = view(model, 3 * layers);
    const double head_b = model.weights[model.layout[3 * layers + 1].offset];
    const MatrixXd pred = head_w * out.layers.back().output.back();
    out.predictions = pred.row(0).transpose().array() + head_b;
    return out;
}

double loss_and_gradient(const TrainedLstm& model, const MatrixXd& inputs, const VectorXd& targets,
                         std::vector<double>& gradient, bool training_mode, std::uint64_t dropout_seed,
                         double loss_scale) {
    const auto& cfg = model.config;
    const auto fwd = forward(model, inputs, training_mode, dropout_seed);
    const Eigen::Index batch = inputs.rows();
    const std::size_t steps = cfg.window_len;
    const std::size_t layers = cfg.layer_sizes.size();

    const VectorXd err = fwd.predictions - targets;
    const double loss = loss_scale * err.squaredNorm() / static_cast<double>(batch);

    gradient.assign(model.weights.size(), 0.0);
    const MatrixXd dpred = (2.0 * loss_scale / static_cast<double>(batch)) * err.transpose();  // 1 x B

    const auto head_w = view(model, 3 * layers);
    grad_view(model, gradient, 3 * layers) = dpred * fwd.layers.back().output.back().transpose();
    gradient[model.layout[3 * layers + 1].offset] = dpred.sum();

    // d loss / d output[t] of the layer currently being processed.
    std::vector<MatrixXd> d_out(steps);
    const auto top = static_cast<Eigen::Index>(cfg.layer_sizes.back());
    for (std::size_t t = 0; t < steps; ++t) d_out[t] = MatrixXd::Zero(top, batch);
    d_out[steps - 1] = head_w.transpose() * dpred;

    for (std::size_t l = layers; l-- > 0;) {
        const auto hsz = static_cast<Eigen::Index>(cfg.layer_sizes[l]);
        const auto& lc = fwd.layers[l];
        const auto wx = view(model, 3 * l);
        const auto wh = view(model, 3 * l + 1);
        auto gwx = grad_view(model, gradient, 3 * l);
        auto gwh = grad_view(model, gradient, 3 * l + 1);
        auto gb = grad_view(model, gradient, 3 * l + 2);

        MatrixXd dh_next = MatrixXd::Zero(hsz, batch);
        MatrixXd dc_next = MatrixXd::Zero(hsz, batch);
        MatrixXd dgates(4 * hsz, batch);
        std::vector<MatrixXd> d_in(steps);
        for (std::size_t t = steps; t-- > 0;) {
            MatrixXd dy = d_out[t];
            if (!lc.mask.empty()) dy = dy.cwiseProduct(lc.mask[t]);
            if (cfg.relu_outputs) dy = dy.cwiseProduct((lc.h[t].array() > 0.0).cast<double>().matrix());
            const MatrixXd dh = dy + dh_next;

            MatrixXd c_prev = MatrixXd::Zero(hsz, batch);
            if (t > 0) c_prev = lc.c[t - 1];
            const MatrixXd dc =
                dc_next + dh.cwiseProduct(lc.o[t]).cwiseProduct((1.0 - lc.tanh_c[t].array().square()).matrix());

            dgates.topRows(hsz) = dc.cwiseProduct(lc.g[t]).cwiseProduct(
                lc.i[t].cwiseProduct((1.0 - lc.i[t].array()).matrix()));
            dgates.middleRows(hsz, hsz) = dc.cwiseProduct(c_prev).cwiseProduct(
                lc.f[t].cwiseProduct((1.0 - lc.f[t].array()).matrix()));
            dgates.middleRows(2 * hsz, hsz) =
                dc.cwiseProduct(lc.i[t]).cwiseProduct((1.0 - lc.g[t].array().square()).matrix());
            dgates.bottomRows(hsz) = dh.cwiseProduct(lc.tanh_c[t]).cwiseProduct(
                lc.o[t].cwiseProduct((1.0 - lc.o[t].array()).matrix()));

            gwx.noalias() += dgates * lc.input[t].transpose();
            if (t > 0) gwh.noalias() += dgates * lc.h[t - 1].transpose();
            gb += dgates.rowwise().sum();

            if (l > 0) d_in[t] = wx.transpose() * dgates;
            dh_next = wh.transpose() * dgates;
            dc_next = dc.cwiseProduct(lc.f[t]);
        }
        if (l > 0) d_out = std::move(d_in);
    }
    return loss;
}

double evaluate_mse(const TrainedLstm& model, const WindowedDataset& data) {
    if (data.num_samples() == 0) return std::numeric_limits<double>::quiet_NaN();
    // Chunked so memory stays bounded on long series.
    constexpr Eigen::Index chunk = 256;
    double sse = 0.0;
    for (Eigen::Index start = 0; start < data.inputs.rows(); start += chunk) {
        const Eigen::Index len = std::min(chunk, data.inputs.rows() - start);
        const auto fwd = forward(model, data.inputs.middleRows(start, len), false);
        sse += (fwd.predictions - data.targets.segment(start, len)).squaredNorm();
    }
    return sse / static_cast<double>(data.num_samples());
}

TrainedLstm train(TrainedLstm model, const WindowedDataset& data, const WindowedDataset* validation) {
    const auto& cfg = model.config;
    validate(cfg);
    if (data.num_samples() == 0) throw InvalidArgument("cannot train on an empty dataset");
    if (data.window_len != cfg.window_len) throw InvalidArgument("dataset window does not match the model");

    model.scaler = data.scaler();
    model.train_loss.clear();
    model.val_loss.clear();

    const std::size_t n = data.num_samples();
    const std::size_t n_weights = model.weights.size();
    std::vector<double> m(n_weights, 0.0), v(n_weights, 0.0), grad;
    std::vector<std::size_t> perm(n);
    MatrixXd xb;
    VectorXd yb;
    std::uint64_t step = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(perm.begin(), perm.end(), 0);
        Rng shuffle(mix_seed(cfg.seed, 0x5000'0000ULL + static_cast<std::uint64_t>(epoch)));
        for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[shuffle.below(i)]);

        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size, ++batch_index) {
            const std::size_t len = std::min(cfg.batch_size, n - start);
            gather(data, std::span<const std::size_t>(perm).subspan(start, len), xb, yb);
            const std::uint64_t dseed =
                mix_seed(cfg.seed, (static_cast<std::uint64_t>(epoch) << 32) + batch_index + 1);
            const double loss = loss_and_gradient(model, xb, yb, grad, true, dseed);
            if (!std::isfinite(loss))
                throw NumericError("non-finite training loss at epoch " + std::to_string(epoch + 1) + ", batch " +
                                   std::to_string(batch_index + 1));
            ++step;
            const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
            for (std::size_t k = 0; k < n_weights; ++k) {
                m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * grad[k];
                v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * grad[k] * grad[k];
                model.weights[k] -= cfg.learning_rate * (m[k] / bc1) / (std::sqrt(v[k] / bc2) + cfg.epsilon);
            }
        }

        const double train_mse = evaluate_mse(model, data);
        if (!std::isfinite(train_mse))
            throw NumericError("non-finite training loss at end of epoch " + std::to_string(epoch + 1));
        model.train_loss.push_back(train_mse);
        model.val_loss.push_back(validation ? evaluate_mse(model, *validation)
                                            : std::numeric_limits<double>::quiet_NaN());
    }
    return model;
}

double gradient_check(const TrainedLstm& model, const MatrixXd& inputs, const VectorXd& targets,
                      std::size_t n_weights, std::uint64_t seed, double h) {
    std::vector<double> analytic;
    loss_and_gradient(model, inputs, targets, analytic);

    std::vector<std::size_t> idx(model.weights.size());
    std::iota(idx.begin(), idx.end(), 0);
    if (n_weights < idx.size()) {
        Rng rng(seed);
        for (std::size_t i = 0; i < n_weights; ++i) std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
        idx.resize(n_weights);
    }

    TrainedLstm probe = model;
    std::vector<double> scratch;
    double worst = 0.0;
    for (std::size_t k : idx) {
        const double w = model.weights[k];
        probe.weights[k] = w + h;
        const double up = loss_and_gradient(probe, inputs, targets, scratch);
        probe.weights[k] = w - h;
        const double down = loss_and_gradient(probe, inputs, targets, scratch);
        probe.weights[k] = w;
        const double numeric = (up - down) / (2.0 * h);
        const double denom = std::max({std::abs(analytic[k]), std::abs(numeric), 1e-6});
        worst = std::max(worst, std::abs(analytic[k] - numeric) / denom);
    }
    return worst;
}

Eigen::VectorXd predict(const TrainedLstm& model, const WindowedDataset& dataset) {
    VectorXd out(static_cast<Eigen::Index>(dataset.num_samples()));
    constexpr Eigen::Index chunk = 256;
    for (Eigen::Index start = 0; start < dataset.inputs.rows(); start += chunk) {
        const Eigen::Index len = std::min(chunk, dataset.inputs.rows() - start);
        out.segment(start, len) = forward(model, dataset.inputs.middleRows(start, len), false).predictions;
    }
    const MinMaxScaler scaler = model.scaler;
    return out.unaryExpr([scaler](double v) { return scaler.invert(v); });
}

}  // namespace vlab::lstm
