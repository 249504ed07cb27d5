#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "senticast/corpus.hpp"
#include "senticast/rng.hpp"

namespace senticast::net {

struct GateParams {
  Eigen::MatrixXd U;  // [hidden x in]
  Eigen::MatrixXd W;  // [hidden x hidden]
  Eigen::VectorXd b;  // [hidden]
};

struct LstmCellParams {
  GateParams input, forget, output, candidate;

  int hidden() const { return int(input.U.rows()); }
  int in_width() const { return int(input.U.cols()); }
};

/// Carry gate of the highway connection between stacked layers. The depth
/// weight acts elementwise on the lower layer's cell state, keeping the
/// gate per-unit.
struct HighwayParams {
  Eigen::MatrixXd U_d;  // [hidden x in]
  Eigen::VectorXd w_d;  // [hidden], elementwise
  Eigen::VectorXd b_d;  // [hidden]
};

struct DirectionParams {
  LstmCellParams cell;
  std::optional<HighwayParams> highway;  // layers >= 2 when the carry gate is enabled
};

struct LayerParams {
  DirectionParams fwd, bwd;
};

struct ModelParams {
  std::vector<LayerParams> layers;
  Eigen::VectorXd head_w;  // [2*hidden]
  Eigen::VectorXd head_b;  // [1]
};

/// Per-feature standardization fitted on the training portion only.
struct NormStats {
  Eigen::VectorXd mean, sigma;  // population sigma; sigma 0 maps the feature to 0
  double target_mean = 0;
  double target_sigma = 1;
};

struct TrainConfig {
  double dropout = 0.2;
  int batch = 32;
  int hidden = 128;
  double learning_rate = 1e-3;
  double weight_decay = 1e-2;
  int max_epochs = 1000;
  int patience = 20;
  uint64_t seed = 1;
  int layers = 2;          // layer 1 plain, layers >= 2 highway-gated
  bool use_highway = true;
};

struct ForecastModel {
  ModelParams params;
  int hidden = 0;
  int input_width = 0;
  int num_layers = 0;
  bool use_highway = true;
  double dropout = 0;
  NormStats norm;
  uint64_t seed = 0;
  bool trained = false;
};

/// Fresh model with uniform +-1/sqrt(fan_in) weights, zero biases and a +1
/// forget-gate bias, drawn from the seed's "net.init" stream.
ForecastModel init_model(int input_width, const TrainConfig& cfg);

struct CellOutput {
  Eigen::VectorXd h, c;
};

/// One plain LSTM step: logistic gates, tanh candidate,
/// c_t = f.c_{t-1} + i.g, h_t = o.tanh(c_t).
CellOutput lstm_cell_forward(const LstmCellParams& p, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& h_prev, const Eigen::VectorXd& c_prev);

/// Highway step: adds d_t = sigma(U_d x + w_d*c_lower + b_d) and
/// c_t = d*c_lower + f*c_{t-1} + i*g. All products elementwise.
CellOutput highway_cell_forward(const LstmCellParams& p, const HighwayParams& hw,
                                const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev,
                                const Eigen::VectorXd& c_prev, const Eigen::VectorXd& c_lower);

enum class Mode { train, eval };

/// Intermediate activations kept for backpropagation through time.
struct StepCache {
  Eigen::VectorXd x;        // input as seen by the cell (post-dropout)
  Eigen::VectorXd i, f, o;  // gate activations
  Eigen::VectorXd g;        // candidate tanh
  Eigen::VectorXd d;        // carry gate (empty when no highway)
  Eigen::VectorXd c, tanh_c, h;
};

struct DirectionTrace {
  std::vector<StepCache> steps;  // in the direction's processing order
};

struct LayerForwardResult {
  std::vector<Eigen::VectorXd> output;  // per real time step, [2*hidden]
  DirectionTrace fwd, bwd;
};

/// One bidirectional layer: forward pass left-to-right, backward pass
/// right-to-left over the same inputs; per-step output is the
/// concatenation [h_fwd ; h_bwd]. Lower-layer cell traces feed the carry
/// gates per direction.
LayerForwardResult bilstm_layer_forward(const LayerParams& layer,
                                        const std::vector<Eigen::VectorXd>& inputs,
                                        const DirectionTrace* lower_fwd = nullptr,
                                        const DirectionTrace* lower_bwd = nullptr);

struct LayerTrace {
  DirectionTrace fwd, bwd;
  std::vector<Eigen::VectorXd> drop_mask;  // per real time step; empty when no dropout applied
};

struct ForwardTrace {
  std::vector<LayerTrace> layers;
  Eigen::VectorXd head_in;  // last-step concatenated hidden state of the top layer
  double prediction = 0;
};

/// Full stacked forward pass over a normalized [T x F] window. Train mode
/// applies inverted dropout to the inputs of layers >= 2, drawn from
/// `dropout_rng`.
ForwardTrace forward(const ForecastModel& model, const Eigen::MatrixXd& window, Mode mode,
                     Rng* dropout_rng = nullptr);

/// Prediction only (normalized units).
double model_forward(const ForecastModel& model, const Eigen::MatrixXd& window,
                     Mode mode = Mode::eval, Rng* dropout_rng = nullptr);

/// Exact reverse-mode gradients through time, both directions, highway
/// connections and dropout masks. `dloss_dpred` is the upstream derivative
/// at the prediction; gradients accumulate into `grads`.
void backward(const ForecastModel& model, const ForwardTrace& trace, double dloss_dpred,
              ModelParams& grads);

ModelParams zero_like(const ModelParams& p);

/// Flat view over every parameter tensor in a fixed, documented order
/// (serialization order). Data pointers are column-major contiguous.
struct TensorView {
  std::string name;
  Eigen::Index rows = 0, cols = 0;
  double* data = nullptr;
  Eigen::Index size() const { return rows * cols; }
};

std::vector<TensorView> tensor_views(ModelParams& p);

struct TrainResult {
  std::vector<double> train_loss;  // mean squared error per epoch, normalized units
  std::vector<double> val_loss;
  int best_epoch = -1;
  int epochs_run = 0;
};

/// Mini-batch optimization with decoupled weight decay (adaptive moments,
/// beta 0.9/0.999, eps 1e-8). The chronologically last `validation_fraction`
/// of the samples is held out for early stopping; best-validation
/// parameters are restored. Fully deterministic given cfg.seed.
TrainResult train(ForecastModel& model, std::span<const corpus::WindowSample> samples,
                  const TrainConfig& cfg, double validation_fraction = 0.1);

/// Normalizes a raw window with the model's stats, runs an eval-mode
/// forward pass and de-normalizes back to price units.
double predict(const ForecastModel& model, const Eigen::MatrixXd& raw_window);

struct PredictionSeries {
  std::vector<Date> dates;
  std::vector<double> predicted;  // price units
};

/// One prediction per test date, each using the `window` rows strictly
/// before it. Throws ValidationError listing any dates with insufficient
/// history.
PredictionSeries predict_series(const ForecastModel& model, const corpus::FeatureTable& table,
                                int window, std::span<const Date> test_dates);

/// Binary checkpoint: fixed field order, shape-tagged tensors, 8-byte
/// little-endian floats. Two implementations can exchange checkpoints
/// bit-exactly.
void save_model(const std::filesystem::path& path, const ForecastModel& model);
ForecastModel load_model(const std::filesystem::path& path);

}  // namespace senticast::net
