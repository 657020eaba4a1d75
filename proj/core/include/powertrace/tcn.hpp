#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace powertrace::tcn {

struct MinMaxScaler {
  double x_min = 0.0;
  double x_max = 1.0;

  // Values outside the fitted range map outside [0, 1]; nothing is clamped.
  double apply(double x) const { return (x - x_min) / (x_max - x_min); }
  double invert(double y) const { return x_min + y * (x_max - x_min); }
  std::vector<double> apply(std::span<const double> xs) const;
  std::vector<double> invert(std::span<const double> ys) const;
};

// Throws ConstantSeries unless the input holds at least two distinct values.
MinMaxScaler scaler_fit(std::span<const double> series);

struct TcnConfig {
  std::size_t seq_len = 40;
  std::size_t filters = 64;
  std::size_t kernel = 2;
  std::size_t layers = 2;
  double dropout = 0.0;
  std::size_t batch = 16;
  // Dilated convolutions inside each residual block; dilation of block l is 2^l.
  std::size_t convs_per_block = 2;

  std::size_t dilation(std::size_t layer) const { return std::size_t{1} << layer; }
  // 1 + convs_per_block * sum_l (kernel - 1) * 2^l
  std::size_t receptive_field() const;

  friend bool operator==(const TcnConfig&, const TcnConfig&) = default;
};

// Overlapping windows series[k .. k+seq_len) with next-step target series[k+seq_len].
struct WindowSet {
  std::size_t seq_len = 0;
  std::vector<double> inputs;  // size() * seq_len values, window-major
  std::vector<double> targets;

  std::size_t size() const { return targets.size(); }
  std::span<const double> input(std::size_t k) const {
    return {inputs.data() + k * seq_len, seq_len};
  }
};

WindowSet make_windows(std::span<const double> series, std::size_t seq_len);

struct ConvLayout {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 1;
  std::size_t dilation = 1;
  std::size_t weight_offset = 0;  // [out][in][kernel]; tap kernel-1 reads the current step
  std::size_t bias_offset = 0;

  std::size_t weight_count() const { return out_channels * in_channels * kernel; }
};

struct BlockLayout {
  std::vector<ConvLayout> convs;
  std::optional<ConvLayout> downsample;  // 1x1 projection when channel counts differ
};

// All parameters live in one flat vector; the layouts index into it.
struct TcnModel {
  TcnConfig config;
  MinMaxScaler scaler;
  std::vector<BlockLayout> blocks;
  std::size_t head_weight_offset = 0;
  std::size_t head_bias_offset = 0;
  std::vector<double> params;

  std::size_t parameter_count() const { return params.size(); }
};

// Builds the layout for `config` with every parameter set to zero.
TcnModel make_model(const TcnConfig& config);
// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
void init_uniform(TcnModel& model, std::uint64_t seed);

// Activations recorded by a forward pass, each stored [channel][time].
struct ForwardTrace {
  struct ConvTrace {
    std::vector<double> pre;   // convolution output before the nonlinearity
    std::vector<double> out;   // after ReLU and dropout
    std::vector<double> mask;  // dropout scale per element (empty when dropout is off)
  };
  struct BlockTrace {
    std::size_t in_channels = 0;
    std::vector<double> input;
    std::vector<ConvTrace> convs;
    std::vector<double> residual;
    std::vector<double> sum;
    std::vector<double> output;
  };
  std::vector<BlockTrace> blocks;
  double output = 0.0;

  // Final block's features at the last timestep (what the head reads).
  std::vector<double> head_features() const;
};

// Inference forward pass (dropout disabled). Throws ShapeMismatch on a wrong window length.
double tcn_forward(const TcnModel& model, std::span<const double> window);
// Forward pass recording activations; dropout is applied only when `dropout_rng` is given.
double tcn_forward(const TcnModel& model, std::span<const double> window, ForwardTrace& trace,
                   std::mt19937_64* dropout_rng = nullptr);
// Accumulates d(loss)/d(params) into `grad` given d(loss)/d(output).
void tcn_backward(const TcnModel& model, const ForwardTrace& trace, double d_output,
                  std::span<double> grad);

struct TrainOptions {
  std::size_t max_epochs = 200;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t patience = 10;
  // Trailing share of the windows held out (chronologically) for early stopping.
  double validation_fraction = 0.2;
};

struct TrainResult {
  TcnModel model;
  std::vector<double> loss_curve;     // mean training MSE per epoch
  std::vector<double> val_mae_curve;  // empty when no validation windows exist
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
  bool early_stopped = false;
};

// Adam on mean squared error; deterministic for a fixed seed. The returned model keeps the
// parameters of the best validation epoch.
TrainResult tcn_train(const WindowSet& windows, const TcnConfig& config, std::uint64_t seed,
                      const TrainOptions& options = {});

struct GradientCheck {
  bool skipped = false;
  std::string notice;  // "DropoutActive" when skipped
  double max_relative_error = 0.0;
  std::size_t parameters_checked = 0;
};

inline constexpr std::size_t kGradientCheckMaxParams = 5000;

// Central differences of the squared error against back-propagated gradients.
GradientCheck gradient_check(const TcnModel& model, std::span<const double> window, double target,
                             double epsilon = 1e-5);

struct ForecastEval {
  double mae_scaled = 0.0;
  double rmse_scaled = 0.0;
  double mae_volts = 0.0;
  double rmse_volts = 0.0;
  std::vector<double> actual_volts;     // series[seq_len ..]
  std::vector<double> predicted_scaled;
  std::vector<double> predicted_volts;  // scaler.invert(predicted_scaled)
};

// One-step-ahead predictions for every target in a raw-unit series.
ForecastEval evaluate_forecast(const TcnModel& model, std::span<const double> series);

// Multi-step forecast by feeding predictions back as inputs; returns raw units.
std::vector<double> forecast_recursive(const TcnModel& model, std::span<const double> history,
                                       std::size_t steps);

struct ForecastExperiment {
  TrainResult training;
  ForecastEval test;
  std::size_t split_index = 0;  // first raw index of the held-out span
};

// Chronological split: scaler and model fit on the leading share, evaluation on the tail.
ForecastExperiment run_forecast(std::span<const double> series, const TcnConfig& config,
                                std::uint64_t seed, const TrainOptions& options = {},
                                double test_fraction = 0.2);

struct TcnGridRow {
  TcnConfig config;
  double val_mae = 0.0;   // best validation MAE inside the training span (selection criterion)
  double test_mae = 0.0;  // scaled units on the held-out tail, reported only
  std::size_t epochs_run = 0;
};

struct TcnGridResult {
  TcnConfig best;
  std::size_t best_index = 0;
  std::vector<TcnGridRow> table;
};

TcnGridResult tcn_grid_search(std::span<const double> series, std::span<const TcnConfig> grid,
                              std::uint64_t seed, const TrainOptions& options = {});

// Small default grid; contains seq_len 40, 64 filters, kernel 2, 2 layers, batch 16.
std::vector<TcnConfig> default_grid();

std::string grid_table_csv(const TcnGridResult& result);
std::vector<TcnConfig> grid_from_json(std::string_view text, const TcnConfig& base);

std::string to_json(const TcnModel& model);
TcnModel tcn_from_json(std::string_view text);

}  // namespace powertrace::tcn
