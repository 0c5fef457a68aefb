#pragma once

#include "vlab/date.hpp"
#include "vlab/market_data.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace vlab::lstm {

/// What the network predicts one day ahead.
enum class Target { next_return, realized_vol };

[[nodiscard]] std::string to_string(Target target);
[[nodiscard]] Target parse_target(std::string_view name);

/// x -> (x - min) / (max - min). Out-of-range values are not clipped.
struct MinMaxScaler {
    double min = 0.0;
    double max = 1.0;

    [[nodiscard]] double apply(double x) const noexcept { return (x - min) / (max - min); }
    [[nodiscard]] double invert(double y) const noexcept { return min + y * (max - min); }
    [[nodiscard]] bool is_identity() const noexcept { return min == 0.0 && max == 1.0; }
};

struct ScaledPair {
    std::vector<double> train;
    std::vector<double> other;
    MinMaxScaler scaler;
};

/// Fits min/max on `train` only and applies them to both partitions.
/// Throws InvalidArgument for empty or constant training data.
[[nodiscard]] ScaledPair scale_fit_apply(std::span<const double> train, std::span<const double> other);

/// Supervised windows: inputs row i = series[i .. i+w-1], targets[i] = series[i+w].
struct WindowedDataset {
    Eigen::MatrixXd inputs;   // num_samples x window_len
    Eigen::VectorXd targets;  // num_samples
    std::size_t window_len = 0;
    double scale_min = 0.0;
    double scale_max = 1.0;
    std::vector<Date> target_dates;  // empty when built from bare values

    [[nodiscard]] std::size_t num_samples() const noexcept { return static_cast<std::size_t>(targets.size()); }
    [[nodiscard]] MinMaxScaler scaler() const noexcept { return {scale_min, scale_max}; }
};

/// Windows over already-scaled (or raw) values. Throws when size <= window_len.
[[nodiscard]] WindowedDataset build_windows(std::span<const double> series, std::size_t window_len);

/// Scales `series` with `scaler`, windows it and keeps the target dates.
[[nodiscard]] WindowedDataset build_windows(const market::ReturnSeries& series, std::size_t window_len,
                                            const MinMaxScaler& scaler = {});

struct LstmConfig {
    std::size_t window_len = 5;
    std::vector<std::size_t> layer_sizes = {512, 256, 128};
    double dropout = 0.2;
    std::size_t batch_size = 64;
    int epochs = 100;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    /// ReLU on each recurrent layer's output sequence before it feeds the next layer / the head.
    bool relu_outputs = true;
    std::uint64_t seed = 20170101;
    Target target = Target::next_return;
    /// Realized-volatility window when target == realized_vol.
    std::size_t vol_window = 10;
};

void validate(const LstmConfig& config);

/// Where one tensor lives inside TrainedLstm::weights (column-major).
struct TensorSlot {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t offset = 0;

    [[nodiscard]] std::size_t size() const noexcept { return rows * cols; }
};

/// Tensor layout for a config: per layer l{i}.wx (4H x I), l{i}.wh (4H x H),
/// l{i}.b (4H x 1) with gate blocks ordered input, forget, candidate, output;
/// then head.w (1 x H_last) and head.b (1 x 1).
[[nodiscard]] std::vector<TensorSlot> tensor_layout(const LstmConfig& config);

struct TrainedLstm {
    LstmConfig config;
    std::vector<TensorSlot> layout;
    std::vector<double> weights;
    MinMaxScaler scaler;
    std::vector<double> train_loss;  // per epoch, evaluation-mode MSE on the training windows
    std::vector<double> val_loss;    // per epoch, NaN when no validation set was given

    [[nodiscard]] std::size_t epochs_run() const noexcept { return train_loss.size(); }
};

/// Uniform(+-sqrt(6 / (fan_in + fan_out))) weights, forget-gate bias 1, other biases 0.
[[nodiscard]] TrainedLstm init(const LstmConfig& config, std::uint64_t seed);

/// Bound used by init for a weight matrix.
[[nodiscard]] double init_bound(std::size_t fan_in, std::size_t fan_out) noexcept;

/// Intermediate values of one forward pass, kept for backpropagation.
struct LayerCache {
    std::vector<Eigen::MatrixXd> input;   // per step, I x B
    std::vector<Eigen::MatrixXd> i, f, g, o;
    std::vector<Eigen::MatrixXd> c, tanh_c, h;
    std::vector<Eigen::MatrixXd> mask;    // empty when no dropout was applied
    std::vector<Eigen::MatrixXd> output;  // relu(h) * mask, H x B
};

struct ForwardResult {
    Eigen::VectorXd predictions;  // scaled units
    std::vector<LayerCache> layers;
};

/// Runs the stacked LSTM over `inputs` (num_samples x window_len). In
/// training mode inverted dropout masks are drawn from `dropout_seed`.
[[nodiscard]] ForwardResult forward(const TrainedLstm& model, const Eigen::MatrixXd& inputs, bool training_mode,
                                    std::uint64_t dropout_seed = 0);

/// Multiplies each entry by 0 (probability rate) or 1 / (1 - rate).
[[nodiscard]] Eigen::MatrixXd apply_dropout(const Eigen::MatrixXd& x, double rate, std::uint64_t seed);

/// loss_scale * mean((pred - y)^2) and its gradient w.r.t. every weight (BPTT).
double loss_and_gradient(const TrainedLstm& model, const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                         std::vector<double>& gradient, bool training_mode = false, std::uint64_t dropout_seed = 0,
                         double loss_scale = 1.0);

/// Mean squared error in evaluation mode.
[[nodiscard]] double evaluate_mse(const TrainedLstm& model, const WindowedDataset& data);

/// Mini-batch Adam training for config.epochs epochs. Batches are drawn
/// from a seeded permutation each epoch. Throws NumericError naming the
/// epoch and batch if the loss becomes non-finite.
[[nodiscard]] TrainedLstm train(TrainedLstm model, const WindowedDataset& data,
                                const WindowedDataset* validation = nullptr);

/// Largest relative error between the analytic gradient and central finite
/// differences over `n_weights` randomly chosen weights (all of them if the
/// model has fewer). Relative error is |a - n| / max(|a|, |n|, 1e-6).
[[nodiscard]] double gradient_check(const TrainedLstm& model, const Eigen::MatrixXd& inputs,
                                    const Eigen::VectorXd& targets, std::size_t n_weights = 200,
                                    std::uint64_t seed = 1, double h = 1e-5);

/// Evaluation-mode predictions mapped back through the model's scaler.
[[nodiscard]] Eigen::VectorXd predict(const TrainedLstm& model, const WindowedDataset& dataset);

}  // namespace vlab::lstm
