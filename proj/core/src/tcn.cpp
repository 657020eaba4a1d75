#include "powertrace/tcn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "powertrace/error.hpp"
#include "powertrace/format.hpp"
#include "powertrace/metrics.hpp"

namespace powertrace::tcn {

namespace {

void check_config(const TcnConfig& c) {
  if (c.seq_len == 0 || c.filters == 0 || c.kernel == 0 || c.layers == 0 || c.batch == 0 ||
      c.convs_per_block == 0 || !(c.dropout >= 0.0 && c.dropout < 1.0) || c.layers > 20) {
    throw Error(Errc::InvalidParams, "tcn", "invalid TCN configuration");
  }
}

ConvLayout add_conv(std::size_t in, std::size_t out, std::size_t kernel, std::size_t dilation,
                    std::size_t& cursor) {
  ConvLayout c{in, out, kernel, dilation, cursor, 0};
  cursor += c.weight_count();
  c.bias_offset = cursor;
  cursor += out;
  return c;
}

// Causal dilated convolution over [channel][time] buffers of length `len`.
void conv_forward(const ConvLayout& c, const double* p, const double* in, double* out,
                  std::size_t len) {
  for (std::size_t o = 0; o < c.out_channels; ++o) {
    double* y = out + o * len;
    std::fill(y, y + len, p[c.bias_offset + o]);
    for (std::size_t i = 0; i < c.in_channels; ++i) {
      const double* x = in + i * len;
      const double* w = p + c.weight_offset + (o * c.in_channels + i) * c.kernel;
      for (std::size_t j = 0; j < c.kernel; ++j) {
        const std::size_t shift = (c.kernel - 1 - j) * c.dilation;
        if (shift >= len) continue;
        const double wj = w[j];
        for (std::size_t t = shift; t < len; ++t) y[t] += wj * x[t - shift];
      }
    }
  }
}

// Accumulates weight/bias gradients and, when d_in is non-null, input gradients.
void conv_backward(const ConvLayout& c, const double* p, const double* in, const double* d_out,
                   double* d_in, double* grad, std::size_t len) {
  for (std::size_t o = 0; o < c.out_channels; ++o) {
    const double* dy = d_out + o * len;
    double bias_grad = 0.0;
    for (std::size_t t = 0; t < len; ++t) bias_grad += dy[t];
    grad[c.bias_offset + o] += bias_grad;
    for (std::size_t i = 0; i < c.in_channels; ++i) {
      const double* x = in + i * len;
      const std::size_t w_base = c.weight_offset + (o * c.in_channels + i) * c.kernel;
      for (std::size_t j = 0; j < c.kernel; ++j) {
        const std::size_t shift = (c.kernel - 1 - j) * c.dilation;
        if (shift >= len) continue;
        double g = 0.0;
        for (std::size_t t = shift; t < len; ++t) g += dy[t] * x[t - shift];
        grad[w_base + j] += g;
        if (d_in != nullptr) {
          double* dx = d_in + i * len;
          const double w = p[w_base + j];
          for (std::size_t t = shift; t < len; ++t) dx[t - shift] += w * dy[t];
        }
      }
    }
  }
}

void check_window(const TcnModel& model, std::span<const double> window) {
  if (window.size() != model.config.seq_len) {
    throw Error(Errc::ShapeMismatch, "window length " + std::to_string(window.size()) +
                                         " != seq_len " + std::to_string(model.config.seq_len));
  }
  if (model.params.empty()) throw Error(Errc::UntrainedModel, "tcn", "model has no parameters");
}

double squared_error(const TcnModel& model, std::span<const double> window, double target) {
  const double e = tcn_forward(model, window) - target;
  return e * e;
}

std::vector<double> predict_windows(const TcnModel& model, const WindowSet& windows,
                                    std::size_t begin, std::size_t end) {
  std::vector<double> out;
  out.reserve(end - begin);
  ForwardTrace trace;
  for (std::size_t k = begin; k < end; ++k) {
    out.push_back(tcn_forward(model, windows.input(k), trace, nullptr));
  }
  return out;
}

std::size_t split_point(std::size_t n, double test_fraction) {
  return n - static_cast<std::size_t>(std::floor(test_fraction * static_cast<double>(n)));
}

}  // namespace

std::vector<double> MinMaxScaler::apply(std::span<const double> xs) const {
  std::vector<double> out(xs.size());
  std::transform(xs.begin(), xs.end(), out.begin(), [&](double x) { return apply(x); });
  return out;
}

std::vector<double> MinMaxScaler::invert(std::span<const double> ys) const {
  std::vector<double> out(ys.size());
  std::transform(ys.begin(), ys.end(), out.begin(), [&](double y) { return invert(y); });
  return out;
}

MinMaxScaler scaler_fit(std::span<const double> series) {
  if (series.empty()) throw Error(Errc::EmptySeries, "tcn", "cannot fit a scaler to no data");
  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  if (!(*lo < *hi)) throw Error(Errc::ConstantSeries, "series has a single distinct value");
  return MinMaxScaler{*lo, *hi};
}

std::size_t TcnConfig::receptive_field() const {
  std::size_t span = 0;
  for (std::size_t l = 0; l < layers; ++l) span += (kernel - 1) * dilation(l);
  return 1 + convs_per_block * span;
}

WindowSet make_windows(std::span<const double> series, std::size_t seq_len) {
  if (seq_len == 0) throw Error(Errc::InvalidParams, "tcn", "seq_len must be >= 1");
  if (series.size() <= seq_len) {
    throw Error(Errc::SeriesTooShort, "tcn",
                "series of length " + std::to_string(series.size()) +
                    " yields no window for seq_len " + std::to_string(seq_len));
  }
  WindowSet w;
  w.seq_len = seq_len;
  const std::size_t count = series.size() - seq_len;
  w.inputs.reserve(count * seq_len);
  w.targets.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    w.inputs.insert(w.inputs.end(), series.begin() + static_cast<std::ptrdiff_t>(k),
                    series.begin() + static_cast<std::ptrdiff_t>(k + seq_len));
    w.targets.push_back(series[k + seq_len]);
  }
  return w;
}

TcnModel make_model(const TcnConfig& config) {
  check_config(config);
  TcnModel m;
  m.config = config;
  std::size_t cursor = 0;
  std::size_t channels = 1;
  for (std::size_t l = 0; l < config.layers; ++l) {
    BlockLayout block;
    std::size_t in = channels;
    for (std::size_t c = 0; c < config.convs_per_block; ++c) {
      block.convs.push_back(add_conv(in, config.filters, config.kernel, config.dilation(l), cursor));
      in = config.filters;
    }
    if (channels != config.filters) {
      block.downsample = add_conv(channels, config.filters, 1, 1, cursor);
    }
    channels = config.filters;
    m.blocks.push_back(std::move(block));
  }
  m.head_weight_offset = cursor;
  cursor += config.filters;
  m.head_bias_offset = cursor;
  cursor += 1;
  m.params.assign(cursor, 0.0);
  return m;
}

void init_uniform(TcnModel& model, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto fill = [&](std::size_t offset, std::size_t count, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (std::size_t i = 0; i < count; ++i) model.params[offset + i] = u(rng);
  };
  auto fill_conv = [&](const ConvLayout& c) {
    const std::size_t fan_in = c.in_channels * c.kernel;
    fill(c.weight_offset, c.weight_count(), fan_in);
    fill(c.bias_offset, c.out_channels, fan_in);
  };
  for (const auto& block : model.blocks) {
    for (const auto& c : block.convs) fill_conv(c);
    if (block.downsample) fill_conv(*block.downsample);
  }
  fill(model.head_weight_offset, model.config.filters, model.config.filters);
  fill(model.head_bias_offset, 1, model.config.filters);
}

std::vector<double> ForwardTrace::head_features() const {
  if (blocks.empty()) return {};
  const auto& last = blocks.back();
  if (last.in_channels == 0 || last.input.empty()) return {};
  const std::size_t len = last.input.size() / last.in_channels;
  const std::size_t channels = last.output.size() / len;
  std::vector<double> out(channels);
  for (std::size_t c = 0; c < channels; ++c) out[c] = last.output[c * len + len - 1];
  return out;
}

double tcn_forward(const TcnModel& model, std::span<const double> window) {
  ForwardTrace trace;
  return tcn_forward(model, window, trace, nullptr);
}

double tcn_forward(const TcnModel& model, std::span<const double> window, ForwardTrace& trace,
                   std::mt19937_64* dropout_rng) {
  check_window(model, window);
  const std::size_t len = model.config.seq_len;
  const double rate = model.config.dropout;
  const bool use_dropout = dropout_rng != nullptr && rate > 0.0;
  const double keep = 1.0 - rate;
  const double* p = model.params.data();

  trace.blocks.resize(model.blocks.size());
  std::size_t channels = 1;
  for (std::size_t b = 0; b < model.blocks.size(); ++b) {
    const BlockLayout& layout = model.blocks[b];
    auto& bt = trace.blocks[b];
    bt.in_channels = channels;
    if (b == 0) {
      bt.input.assign(window.begin(), window.end());
    } else {
      bt.input = trace.blocks[b - 1].output;
    }
    bt.convs.resize(layout.convs.size());
    const std::vector<double>* h = &bt.input;
    for (std::size_t c = 0; c < layout.convs.size(); ++c) {
      const ConvLayout& conv = layout.convs[c];
      auto& ct = bt.convs[c];
      ct.pre.resize(conv.out_channels * len);
      conv_forward(conv, p, h->data(), ct.pre.data(), len);
      ct.out.resize(ct.pre.size());
      for (std::size_t i = 0; i < ct.pre.size(); ++i) ct.out[i] = ct.pre[i] > 0.0 ? ct.pre[i] : 0.0;
      if (use_dropout) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        ct.mask.resize(ct.out.size());
        for (std::size_t i = 0; i < ct.out.size(); ++i) {
          ct.mask[i] = u(*dropout_rng) < keep ? 1.0 / keep : 0.0;
          ct.out[i] *= ct.mask[i];
        }
      } else {
        ct.mask.clear();
      }
      h = &ct.out;
    }
    if (layout.downsample) {
      bt.residual.resize(layout.downsample->out_channels * len);
      conv_forward(*layout.downsample, p, bt.input.data(), bt.residual.data(), len);
    } else {
      bt.residual = bt.input;
    }
    bt.sum.resize(h->size());
    bt.output.resize(h->size());
    for (std::size_t i = 0; i < h->size(); ++i) {
      bt.sum[i] = (*h)[i] + bt.residual[i];
      bt.output[i] = bt.sum[i] > 0.0 ? bt.sum[i] : 0.0;
    }
    channels = model.config.filters;
  }

  const auto& out = trace.blocks.back().output;
  double y = p[model.head_bias_offset];
  for (std::size_t c = 0; c < model.config.filters; ++c) {
    y += p[model.head_weight_offset + c] * out[c * len + len - 1];
  }
  trace.output = y;
  return y;
}

void tcn_backward(const TcnModel& model, const ForwardTrace& trace, double d_output,
                  std::span<double> grad) {
  if (grad.size() != model.params.size()) {
    throw Error(Errc::ShapeMismatch, "gradient buffer does not match parameter count");
  }
  const std::size_t len = model.config.seq_len;
  const std::size_t filters = model.config.filters;
  const double* p = model.params.data();

  const auto& last_out = trace.blocks.back().output;
  std::vector<double> d_block(filters * len, 0.0);
  for (std::size_t c = 0; c < filters; ++c) {
    grad[model.head_weight_offset + c] += d_output * last_out[c * len + len - 1];
    d_block[c * len + len - 1] = d_output * p[model.head_weight_offset + c];
  }
  grad[model.head_bias_offset] += d_output;

  for (std::size_t b = model.blocks.size(); b-- > 0;) {
    const BlockLayout& layout = model.blocks[b];
    const auto& bt = trace.blocks[b];

    std::vector<double> d_sum(d_block.size());
    for (std::size_t i = 0; i < d_sum.size(); ++i) d_sum[i] = bt.sum[i] > 0.0 ? d_block[i] : 0.0;

    std::vector<double> d_input(bt.in_channels * len, 0.0);
    if (layout.downsample) {
      conv_backward(*layout.downsample, p, bt.input.data(), d_sum.data(), d_input.data(),
                    grad.data(), len);
    } else {
      for (std::size_t i = 0; i < d_sum.size(); ++i) d_input[i] += d_sum[i];
    }

    std::vector<double> d_h = d_sum;
    for (std::size_t c = layout.convs.size(); c-- > 0;) {
      const ConvLayout& conv = layout.convs[c];
      const auto& ct = bt.convs[c];
      std::vector<double> d_pre(ct.pre.size());
      for (std::size_t i = 0; i < d_pre.size(); ++i) {
        double g = ct.pre[i] > 0.0 ? d_h[i] : 0.0;
        if (!ct.mask.empty()) g *= ct.mask[i];
        d_pre[i] = g;
      }
      const std::vector<double>& in = c == 0 ? bt.input : bt.convs[c - 1].out;
      std::vector<double> d_in(conv.in_channels * len, 0.0);
      conv_backward(conv, p, in.data(), d_pre.data(), d_in.data(), grad.data(), len);
      d_h = std::move(d_in);
    }
    for (std::size_t i = 0; i < d_input.size(); ++i) d_input[i] += d_h[i];
    d_block = std::move(d_input);
  }
}

TrainResult tcn_train(const WindowSet& windows, const TcnConfig& config, std::uint64_t seed,
                      const TrainOptions& options) {
  check_config(config);
  if (windows.seq_len != config.seq_len) {
    throw Error(Errc::ShapeMismatch, "windows were built for a different seq_len");
  }
  const std::size_t total = windows.size();
  const auto n_val = static_cast<std::size_t>(
      std::floor(options.validation_fraction * static_cast<double>(total)));
  const std::size_t n_train = total - n_val;
  if (total < config.batch || n_train == 0) {
    throw Error(Errc::NotEnoughData, std::to_string(total) + " windows cannot fill a batch of " +
                                         std::to_string(config.batch));
  }

  TrainResult result;
  result.model = make_model(config);
  init_uniform(result.model, seed);
  TcnModel& model = result.model;
  std::vector<double>& params = model.params;

  std::mt19937_64 rng(seed ^ 0x5DEECE66DULL);
  std::vector<double> grad(params.size()), m(params.size(), 0.0), v(params.size(), 0.0);
  std::vector<std::size_t> order(n_train);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> best_params = params;
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  std::size_t step = 0;
  ForwardTrace trace;

  for (std::size_t epoch = 0; epoch < options.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n_train; start += config.batch) {
      const std::size_t stop = std::min(start + config.batch, n_train);
      const double scale = 1.0 / static_cast<double>(stop - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t b = start; b < stop; ++b) {
        const std::size_t k = order[b];
        const double e = tcn_forward(model, windows.input(k), trace, &rng) - windows.targets[k];
        epoch_loss += e * e;
        tcn_backward(model, trace, 2.0 * e * scale, grad);
      }
      ++step;
      const double c1 = 1.0 - std::pow(options.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(options.beta2, static_cast<double>(step));
      for (std::size_t i = 0; i < params.size(); ++i) {
        m[i] = options.beta1 * m[i] + (1.0 - options.beta1) * grad[i];
        v[i] = options.beta2 * v[i] + (1.0 - options.beta2) * grad[i] * grad[i];
        params[i] -= options.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + options.epsilon);
      }
    }
    epoch_loss /= static_cast<double>(n_train);
    if (!std::isfinite(epoch_loss)) {
      throw Error(Errc::DivergedLoss, "training loss became non-finite at epoch " +
                                          std::to_string(epoch + 1));
    }
    result.loss_curve.push_back(epoch_loss);
    result.epochs_run = epoch + 1;

    if (n_val == 0) {
      result.best_epoch = epoch;
      continue;
    }
    const auto pred = predict_windows(model, windows, n_train, total);
    const double val_mae = metrics::mae(
        std::span<const double>(windows.targets).subspan(n_train), pred);
    result.val_mae_curve.push_back(val_mae);
    if (val_mae < best_val) {
      best_val = val_mae;
      best_params = params;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= options.patience) {
      result.early_stopped = true;
      break;
    }
  }
  if (n_val > 0) params = best_params;
  return result;
}

GradientCheck gradient_check(const TcnModel& model, std::span<const double> window, double target,
                             double epsilon) {
  GradientCheck out;
  if (model.config.dropout > 0.0) {
    out.skipped = true;
    out.notice = "DropoutActive";
    return out;
  }
  if (model.parameter_count() > kGradientCheckMaxParams) {
    throw Error(Errc::InvalidParams, "tcn",
                "gradient check is limited to " + std::to_string(kGradientCheckMaxParams) +
                    " parameters");
  }
  ForwardTrace trace;
  const double e = tcn_forward(model, window, trace, nullptr) - target;
  std::vector<double> analytic(model.parameter_count(), 0.0);
  tcn_backward(model, trace, 2.0 * e, analytic);

  TcnModel probe = model;
  for (std::size_t i = 0; i < probe.params.size(); ++i) {
    const double saved = probe.params[i];
    probe.params[i] = saved + epsilon;
    const double up = squared_error(probe, window, target);
    probe.params[i] = saved - epsilon;
    const double down = squared_error(probe, window, target);
    probe.params[i] = saved;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-7});
    out.max_relative_error = std::max(out.max_relative_error, std::abs(analytic[i] - numeric) / denom);
  }
  out.parameters_checked = probe.params.size();
  return out;
}

ForecastEval evaluate_forecast(const TcnModel& model, std::span<const double> series) {
  const std::size_t len = model.config.seq_len;
  if (series.size() <= len) {
    throw Error(Errc::SeriesTooShort, "tcn", "series must be longer than seq_len");
  }
  const std::vector<double> scaled = model.scaler.apply(series);
  const WindowSet windows = make_windows(scaled, len);

  ForecastEval ev;
  ev.predicted_scaled = predict_windows(model, windows, 0, windows.size());
  ev.predicted_volts = model.scaler.invert(ev.predicted_scaled);
  ev.actual_volts.assign(series.begin() + static_cast<std::ptrdiff_t>(len), series.end());
  ev.mae_scaled = metrics::mae(windows.targets, ev.predicted_scaled);
  ev.rmse_scaled = metrics::rmse(windows.targets, ev.predicted_scaled);
  ev.mae_volts = metrics::mae(ev.actual_volts, ev.predicted_volts);
  ev.rmse_volts = metrics::rmse(ev.actual_volts, ev.predicted_volts);
  return ev;
}

std::vector<double> forecast_recursive(const TcnModel& model, std::span<const double> history,
                                       std::size_t steps) {
  const std::size_t len = model.config.seq_len;
  if (history.size() < len) {
    throw Error(Errc::SeriesTooShort, "tcn", "history shorter than seq_len");
  }
  std::vector<double> window = model.scaler.apply(history.subspan(history.size() - len));
  std::vector<double> out;
  out.reserve(steps);
  ForwardTrace trace;
  for (std::size_t s = 0; s < steps; ++s) {
    const double next = tcn_forward(model, window, trace, nullptr);
    out.push_back(model.scaler.invert(next));
    std::rotate(window.begin(), window.begin() + 1, window.end());
    window.back() = next;
  }
  return out;
}

ForecastExperiment run_forecast(std::span<const double> series, const TcnConfig& config,
                                std::uint64_t seed, const TrainOptions& options,
                                double test_fraction) {
  check_config(config);
  const std::size_t split = split_point(series.size(), test_fraction);
  if (split <= config.seq_len || series.size() - split < 1) {
    throw Error(Errc::NotEnoughData, "series too short for a chronological train/test split");
  }
  const auto train_part = series.first(split);
  const MinMaxScaler scaler = scaler_fit(train_part);
  const WindowSet windows = make_windows(scaler.apply(train_part), config.seq_len);

  ForecastExperiment ex;
  ex.split_index = split;
  ex.training = tcn_train(windows, config, seed, options);
  ex.training.model.scaler = scaler;
  ex.test = evaluate_forecast(ex.training.model, series.subspan(split - config.seq_len));
  return ex;
}

TcnGridResult tcn_grid_search(std::span<const double> series, std::span<const TcnConfig> grid,
                              std::uint64_t seed, const TrainOptions& options) {
  if (grid.empty()) throw Error(Errc::InvalidParams, "tcn", "grid search needs at least one cell");
  TcnGridResult result;
  for (const TcnConfig& cell : grid) {
    const ForecastExperiment ex = run_forecast(series, cell, seed, options);
    const auto& curve = ex.training.val_mae_curve;
    const double val = curve.empty() ? ex.training.loss_curve.back()
                                     : *std::min_element(curve.begin(), curve.end());
    result.table.push_back({cell, val, ex.test.mae_scaled, ex.training.epochs_run});
  }
  for (std::size_t i = 1; i < result.table.size(); ++i) {
    if (result.table[i].val_mae < result.table[result.best_index].val_mae) result.best_index = i;
  }
  result.best = result.table[result.best_index].config;
  return result;
}

std::vector<TcnConfig> default_grid() {
  std::vector<TcnConfig> grid;
  for (std::size_t seq : {20, 40}) {
    for (std::size_t filters : {32, 64}) {
      for (std::size_t kernel : {2, 3}) {
        for (double dropout : {0.0, 0.2}) {
          TcnConfig c;
          c.seq_len = seq;
          c.filters = filters;
          c.kernel = kernel;
          c.layers = 2;
          c.dropout = dropout;
          c.batch = 16;
          grid.push_back(c);
        }
      }
    }
  }
  return grid;
}

std::string grid_table_csv(const TcnGridResult& result) {
  std::string out = "seq_len,filters,kernel,layers,dropout,batch,val_mae_scaled,test_mae_scaled,epochs\n";
  for (const auto& row : result.table) {
    const auto& c = row.config;
    out += std::to_string(c.seq_len) + "," + std::to_string(c.filters) + "," +
           std::to_string(c.kernel) + "," + std::to_string(c.layers) + "," +
           format_shortest(c.dropout) + "," + std::to_string(c.batch) + "," +
           format_fixed(row.val_mae, 6) + "," + format_fixed(row.test_mae, 6) + "," +
           std::to_string(row.epochs_run) + "\n";
  }
  return out;
}

}  // namespace powertrace::tcn
