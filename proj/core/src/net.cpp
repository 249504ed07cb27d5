#include "senticast/net.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "senticast/errors.hpp"

namespace senticast::net {

namespace {

Eigen::VectorXd logistic(const Eigen::VectorXd& z) {
  return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

void check_shapes(const LstmCellParams& p) {
  const int H = p.hidden();
  const int I = p.in_width();
  for (const GateParams* g : {&p.input, &p.forget, &p.output, &p.candidate}) {
    if (g->U.rows() != H || g->U.cols() != I || g->W.rows() != H || g->W.cols() != H ||
        g->b.size() != H)
      throw ValidationError("lstm cell: inconsistent parameter shapes");
  }
}

GateParams make_gate(int hidden, int in, Rng& rng, double forget_bias = 0.0) {
  GateParams g;
  double su = 1.0 / std::sqrt(double(in));
  double sw = 1.0 / std::sqrt(double(hidden));
  g.U.resize(hidden, in);
  for (int r = 0; r < hidden; ++r)
    for (int c = 0; c < in; ++c) g.U(r, c) = rng.uniform(-su, su);
  g.W.resize(hidden, hidden);
  for (int r = 0; r < hidden; ++r)
    for (int c = 0; c < hidden; ++c) g.W(r, c) = rng.uniform(-sw, sw);
  g.b = Eigen::VectorXd::Constant(hidden, forget_bias);
  return g;
}

DirectionParams make_direction(int hidden, int in, bool highway, Rng& rng) {
  DirectionParams d;
  d.cell.input = make_gate(hidden, in, rng);
  d.cell.forget = make_gate(hidden, in, rng, 1.0);
  d.cell.output = make_gate(hidden, in, rng);
  d.cell.candidate = make_gate(hidden, in, rng);
  if (highway) {
    HighwayParams hw;
    double su = 1.0 / std::sqrt(double(in));
    double sw = 1.0 / std::sqrt(double(hidden));
    hw.U_d.resize(hidden, in);
    for (int r = 0; r < hidden; ++r)
      for (int c = 0; c < in; ++c) hw.U_d(r, c) = rng.uniform(-su, su);
    hw.w_d.resize(hidden);
    for (int r = 0; r < hidden; ++r) hw.w_d[r] = rng.uniform(-sw, sw);
    hw.b_d = Eigen::VectorXd::Zero(hidden);
    d.highway = std::move(hw);
  }
  return d;
}

}  // namespace

ForecastModel init_model(int input_width, const TrainConfig& cfg) {
  if (input_width < 1) throw ValidationError("model input width must be positive");
  if (cfg.hidden < 1 || cfg.layers < 1) throw ValidationError("hidden size and layer count must be >= 1");
  if (cfg.dropout < 0 || cfg.dropout >= 1) throw ValidationError("dropout must lie in [0, 1)");

  Rng rng = Rng(cfg.seed).stream("net.init");
  ForecastModel m;
  m.hidden = cfg.hidden;
  m.input_width = input_width;
  m.num_layers = cfg.layers;
  m.use_highway = cfg.use_highway;
  m.dropout = cfg.dropout;
  m.seed = cfg.seed;

  for (int l = 0; l < cfg.layers; ++l) {
    int in = l == 0 ? input_width : 2 * cfg.hidden;
    bool hw = cfg.use_highway && l > 0;
    LayerParams layer;
    layer.fwd = make_direction(cfg.hidden, in, hw, rng);
    layer.bwd = make_direction(cfg.hidden, in, hw, rng);
    m.params.layers.push_back(std::move(layer));
  }
  m.params.head_w.resize(2 * cfg.hidden);
  double sh = 1.0 / std::sqrt(double(2 * cfg.hidden));
  for (int i = 0; i < 2 * cfg.hidden; ++i) m.params.head_w[i] = rng.uniform(-sh, sh);
  m.params.head_b = Eigen::VectorXd::Zero(1);
  return m;
}

CellOutput lstm_cell_forward(const LstmCellParams& p, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& h_prev, const Eigen::VectorXd& c_prev) {
  check_shapes(p);
  if (x.size() != p.in_width() || h_prev.size() != p.hidden() || c_prev.size() != p.hidden())
    throw ValidationError("lstm cell: input shape mismatch");
  Eigen::VectorXd i = logistic(p.input.U * x + p.input.W * h_prev + p.input.b);
  Eigen::VectorXd f = logistic(p.forget.U * x + p.forget.W * h_prev + p.forget.b);
  Eigen::VectorXd o = logistic(p.output.U * x + p.output.W * h_prev + p.output.b);
  Eigen::VectorXd g = (p.candidate.U * x + p.candidate.W * h_prev + p.candidate.b).array().tanh();
  CellOutput out;
  out.c = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
  out.h = o.cwiseProduct(out.c.array().tanh().matrix());
  return out;
}

CellOutput highway_cell_forward(const LstmCellParams& p, const HighwayParams& hw,
                                const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev,
                                const Eigen::VectorXd& c_prev, const Eigen::VectorXd& c_lower) {
  check_shapes(p);
  if (x.size() != p.in_width() || h_prev.size() != p.hidden() || c_prev.size() != p.hidden() ||
      c_lower.size() != p.hidden())
    throw ValidationError("highway cell: input shape mismatch");
  if (hw.U_d.rows() != p.hidden() || hw.U_d.cols() != p.in_width() ||
      hw.w_d.size() != p.hidden() || hw.b_d.size() != p.hidden())
    throw ValidationError("highway cell: carry-gate shape mismatch");
  Eigen::VectorXd i = logistic(p.input.U * x + p.input.W * h_prev + p.input.b);
  Eigen::VectorXd f = logistic(p.forget.U * x + p.forget.W * h_prev + p.forget.b);
  Eigen::VectorXd o = logistic(p.output.U * x + p.output.W * h_prev + p.output.b);
  Eigen::VectorXd g = (p.candidate.U * x + p.candidate.W * h_prev + p.candidate.b).array().tanh();
  Eigen::VectorXd d = logistic(hw.U_d * x + hw.w_d.cwiseProduct(c_lower) + hw.b_d);
  CellOutput out;
  out.c = d.cwiseProduct(c_lower) + f.cwiseProduct(c_prev) + i.cwiseProduct(g);
  out.h = o.cwiseProduct(out.c.array().tanh().matrix());
  return out;
}

namespace {

// Runs one direction over inputs given in its own processing order.
// `lower` is the same direction of the layer below, index-aligned.
DirectionTrace run_direction(const DirectionParams& dp, const std::vector<Eigen::VectorXd>& xs,
                             const DirectionTrace* lower) {
  const int H = dp.cell.hidden();
  if (dp.highway && lower == nullptr)
    throw ValidationError("highway direction needs the lower layer's cell trace");
  DirectionTrace tr;
  tr.steps.reserve(xs.size());
  Eigen::VectorXd h = Eigen::VectorXd::Zero(H);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(H);
  for (size_t k = 0; k < xs.size(); ++k) {
    StepCache s;
    s.x = xs[k];
    const auto& p = dp.cell;
    s.i = logistic(p.input.U * s.x + p.input.W * h + p.input.b);
    s.f = logistic(p.forget.U * s.x + p.forget.W * h + p.forget.b);
    s.o = logistic(p.output.U * s.x + p.output.W * h + p.output.b);
    s.g = (p.candidate.U * s.x + p.candidate.W * h + p.candidate.b).array().tanh();
    if (dp.highway) {
      const Eigen::VectorXd& c_lower = lower->steps[k].c;
      s.d = logistic(dp.highway->U_d * s.x + dp.highway->w_d.cwiseProduct(c_lower) +
                     dp.highway->b_d);
      s.c = s.d.cwiseProduct(c_lower) + s.f.cwiseProduct(c) + s.i.cwiseProduct(s.g);
    } else {
      s.c = s.f.cwiseProduct(c) + s.i.cwiseProduct(s.g);
    }
    s.tanh_c = s.c.array().tanh();
    s.h = s.o.cwiseProduct(s.tanh_c);
    h = s.h;
    c = s.c;
    tr.steps.push_back(std::move(s));
  }
  return tr;
}

}  // namespace

LayerForwardResult bilstm_layer_forward(const LayerParams& layer,
                                        const std::vector<Eigen::VectorXd>& inputs,
                                        const DirectionTrace* lower_fwd,
                                        const DirectionTrace* lower_bwd) {
  if (inputs.empty()) throw ValidationError("bilstm layer: empty input sequence");
  const size_t T = inputs.size();
  std::vector<Eigen::VectorXd> reversed(inputs.rbegin(), inputs.rend());

  LayerForwardResult r;
  r.fwd = run_direction(layer.fwd, inputs, lower_fwd);
  r.bwd = run_direction(layer.bwd, reversed, lower_bwd);

  const int H = layer.fwd.cell.hidden();
  r.output.resize(T);
  for (size_t t = 0; t < T; ++t) {
    Eigen::VectorXd out(2 * H);
    out.head(H) = r.fwd.steps[t].h;
    out.tail(H) = r.bwd.steps[T - 1 - t].h;  // processing index T-1-t is real time t
    r.output[t] = std::move(out);
  }
  return r;
}

ForwardTrace forward(const ForecastModel& model, const Eigen::MatrixXd& window, Mode mode,
                     Rng* dropout_rng) {
  const auto T = window.rows();
  if (T < 1) throw ValidationError("forward: empty window");
  if (int(window.cols()) != model.input_width)
    throw ValidationError("forward: window width " + std::to_string(window.cols()) +
                          " does not match model input width " + std::to_string(model.input_width));
  const bool drop = mode == Mode::train && model.dropout > 0;
  if (drop && dropout_rng == nullptr)
    throw ValidationError("forward: train mode with dropout needs a dropout stream");

  std::vector<Eigen::VectorXd> input(static_cast<size_t>(T));
  for (Eigen::Index t = 0; t < T; ++t) input[size_t(t)] = window.row(t).transpose();

  ForwardTrace trace;
  trace.layers.resize(size_t(model.num_layers));
  const double keep = 1.0 - model.dropout;

  for (size_t l = 0; l < size_t(model.num_layers); ++l) {
    LayerTrace& lt = trace.layers[l];
    if (l > 0 && drop) {
      lt.drop_mask.resize(size_t(T));
      for (size_t t = 0; t < size_t(T); ++t) {
        Eigen::VectorXd mask(input[t].size());
        for (Eigen::Index j = 0; j < mask.size(); ++j)
          mask[j] = dropout_rng->bernoulli(keep) ? 1.0 / keep : 0.0;
        input[t] = input[t].cwiseProduct(mask);
        lt.drop_mask[t] = std::move(mask);
      }
    }
    const DirectionTrace* low_f = l > 0 && model.use_highway ? &trace.layers[l - 1].fwd : nullptr;
    const DirectionTrace* low_b = l > 0 && model.use_highway ? &trace.layers[l - 1].bwd : nullptr;
    LayerForwardResult r = bilstm_layer_forward(model.params.layers[l], input, low_f, low_b);
    lt.fwd = std::move(r.fwd);
    lt.bwd = std::move(r.bwd);
    input = std::move(r.output);
  }

  trace.head_in = input[size_t(T - 1)];
  trace.prediction = model.params.head_w.dot(trace.head_in) + model.params.head_b[0];
  return trace;
}

double model_forward(const ForecastModel& model, const Eigen::MatrixXd& window, Mode mode,
                     Rng* dropout_rng) {
  return forward(model, window, mode, dropout_rng).prediction;
}

namespace {

struct DirectionGrads {
  LstmCellParams* cell;
  HighwayParams* highway;  // null when absent
};

// Reverse pass over one direction, everything in processing order.
// Returns input gradients; fills `dc_lower` (gradient on the lower layer's
// cells through the carry gate) when the direction has a highway.
std::vector<Eigen::VectorXd> direction_backward(
    const DirectionParams& dp, const DirectionTrace& tr, const DirectionTrace* lower,
    const std::vector<Eigen::VectorXd>& dh_out, const std::vector<Eigen::VectorXd>& dc_extra,
    DirectionParams& grads, std::vector<Eigen::VectorXd>* dc_lower) {
  const int H = dp.cell.hidden();
  const size_t T = tr.steps.size();
  std::vector<Eigen::VectorXd> dx(T);

  Eigen::VectorXd dh_rec = Eigen::VectorXd::Zero(H);  // recurrent grad from step k+1
  Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(H);

  for (size_t k = T; k-- > 0;) {
    const StepCache& s = tr.steps[k];
    const Eigen::VectorXd h_prev = k > 0 ? tr.steps[k - 1].h : Eigen::VectorXd::Zero(H);
    const Eigen::VectorXd c_prev = k > 0 ? tr.steps[k - 1].c : Eigen::VectorXd::Zero(H);

    Eigen::VectorXd dh = dh_out[k] + dh_rec;
    Eigen::VectorXd dc = dc_next;
    if (!dc_extra.empty()) dc += dc_extra[k];

    Eigen::VectorXd do_ = dh.cwiseProduct(s.tanh_c);
    dc += dh.cwiseProduct(s.o).cwiseProduct(
        (1.0 - s.tanh_c.array().square()).matrix());

    Eigen::VectorXd di = dc.cwiseProduct(s.g);
    Eigen::VectorXd df = dc.cwiseProduct(c_prev);
    Eigen::VectorXd dg = dc.cwiseProduct(s.i);

    Eigen::VectorXd da_i = di.cwiseProduct(s.i).cwiseProduct((1.0 - s.i.array()).matrix());
    Eigen::VectorXd da_f = df.cwiseProduct(s.f).cwiseProduct((1.0 - s.f.array()).matrix());
    Eigen::VectorXd da_o = do_.cwiseProduct(s.o).cwiseProduct((1.0 - s.o.array()).matrix());
    Eigen::VectorXd da_c = dg.cwiseProduct((1.0 - s.g.array().square()).matrix());

    grads.cell.input.U.noalias() += da_i * s.x.transpose();
    grads.cell.input.W.noalias() += da_i * h_prev.transpose();
    grads.cell.input.b += da_i;
    grads.cell.forget.U.noalias() += da_f * s.x.transpose();
    grads.cell.forget.W.noalias() += da_f * h_prev.transpose();
    grads.cell.forget.b += da_f;
    grads.cell.output.U.noalias() += da_o * s.x.transpose();
    grads.cell.output.W.noalias() += da_o * h_prev.transpose();
    grads.cell.output.b += da_o;
    grads.cell.candidate.U.noalias() += da_c * s.x.transpose();
    grads.cell.candidate.W.noalias() += da_c * h_prev.transpose();
    grads.cell.candidate.b += da_c;

    Eigen::VectorXd dxk = dp.cell.input.U.transpose() * da_i +
                          dp.cell.forget.U.transpose() * da_f +
                          dp.cell.output.U.transpose() * da_o +
                          dp.cell.candidate.U.transpose() * da_c;
    dh_rec = dp.cell.input.W.transpose() * da_i + dp.cell.forget.W.transpose() * da_f +
             dp.cell.output.W.transpose() * da_o + dp.cell.candidate.W.transpose() * da_c;

    if (dp.highway) {
      const Eigen::VectorXd& c_lower = lower->steps[k].c;
      Eigen::VectorXd dd = dc.cwiseProduct(c_lower);
      Eigen::VectorXd da_d = dd.cwiseProduct(s.d).cwiseProduct((1.0 - s.d.array()).matrix());
      grads.highway->U_d.noalias() += da_d * s.x.transpose();
      grads.highway->w_d += da_d.cwiseProduct(c_lower);
      grads.highway->b_d += da_d;
      dxk += dp.highway->U_d.transpose() * da_d;
      (*dc_lower)[k] += dc.cwiseProduct(s.d) + da_d.cwiseProduct(dp.highway->w_d);
    }

    dx[k] = std::move(dxk);
    dc_next = dc.cwiseProduct(s.f);
  }
  return dx;
}

}  // namespace

ModelParams zero_like(const ModelParams& p) {
  ModelParams z;
  z.layers.reserve(p.layers.size());
  for (const LayerParams& l : p.layers) {
    LayerParams zl;
    for (auto [src, dst] : {std::pair{&l.fwd, &zl.fwd}, std::pair{&l.bwd, &zl.bwd}}) {
      for (auto [gs, gd] : {std::pair{&src->cell.input, &dst->cell.input},
                            std::pair{&src->cell.forget, &dst->cell.forget},
                            std::pair{&src->cell.output, &dst->cell.output},
                            std::pair{&src->cell.candidate, &dst->cell.candidate}}) {
        gd->U = Eigen::MatrixXd::Zero(gs->U.rows(), gs->U.cols());
        gd->W = Eigen::MatrixXd::Zero(gs->W.rows(), gs->W.cols());
        gd->b = Eigen::VectorXd::Zero(gs->b.size());
      }
      if (src->highway) {
        HighwayParams hw;
        hw.U_d = Eigen::MatrixXd::Zero(src->highway->U_d.rows(), src->highway->U_d.cols());
        hw.w_d = Eigen::VectorXd::Zero(src->highway->w_d.size());
        hw.b_d = Eigen::VectorXd::Zero(src->highway->b_d.size());
        dst->highway = std::move(hw);
      }
    }
    z.layers.push_back(std::move(zl));
  }
  z.head_w = Eigen::VectorXd::Zero(p.head_w.size());
  z.head_b = Eigen::VectorXd::Zero(1);
  return z;
}

void backward(const ForecastModel& model, const ForwardTrace& trace, double dloss_dpred,
              ModelParams& grads) {
  const int H = model.hidden;
  const size_t L = trace.layers.size();
  const size_t T = trace.layers[0].fwd.steps.size();

  grads.head_w += dloss_dpred * trace.head_in;
  grads.head_b[0] += dloss_dpred;

  std::vector<Eigen::VectorXd> dh_fwd(T, Eigen::VectorXd::Zero(H));
  std::vector<Eigen::VectorXd> dh_bwd(T, Eigen::VectorXd::Zero(H));
  Eigen::VectorXd dhead = model.params.head_w * dloss_dpred;
  dh_fwd[T - 1] += dhead.head(H);
  dh_bwd[0] += dhead.tail(H);  // backward processing index 0 is real time T-1

  std::vector<Eigen::VectorXd> dc_fwd, dc_bwd;  // empty = all zeros

  for (size_t l = L; l-- > 0;) {
    const LayerParams& lp = model.params.layers[l];
    const LayerTrace& lt = trace.layers[l];
    LayerParams& lg = grads.layers[l];
    bool has_hw = lp.fwd.highway.has_value();
    const DirectionTrace* low_f = has_hw ? &trace.layers[l - 1].fwd : nullptr;
    const DirectionTrace* low_b = has_hw ? &trace.layers[l - 1].bwd : nullptr;

    std::vector<Eigen::VectorXd> dc_lower_f, dc_lower_b;
    if (has_hw) {
      dc_lower_f.assign(T, Eigen::VectorXd::Zero(H));
      dc_lower_b.assign(T, Eigen::VectorXd::Zero(H));
    }

    auto dx_f = direction_backward(lp.fwd, lt.fwd, low_f, dh_fwd, dc_fwd, lg.fwd,
                                   has_hw ? &dc_lower_f : nullptr);
    auto dx_b = direction_backward(lp.bwd, lt.bwd, low_b, dh_bwd, dc_bwd, lg.bwd,
                                   has_hw ? &dc_lower_b : nullptr);

    if (l == 0) break;  // gradient on raw features is not needed

    // Map input gradients back to the lower layer's per-step outputs.
    std::vector<Eigen::VectorXd> next_dh_fwd(T, Eigen::VectorXd::Zero(H));
    std::vector<Eigen::VectorXd> next_dh_bwd(T, Eigen::VectorXd::Zero(H));
    for (size_t t = 0; t < T; ++t) {
      Eigen::VectorXd din = dx_f[t] + dx_b[T - 1 - t];
      if (!lt.drop_mask.empty()) din = din.cwiseProduct(lt.drop_mask[t]);
      next_dh_fwd[t] += din.head(H);
      next_dh_bwd[T - 1 - t] += din.tail(H);
    }
    dh_fwd = std::move(next_dh_fwd);
    dh_bwd = std::move(next_dh_bwd);
    dc_fwd = std::move(dc_lower_f);
    dc_bwd = std::move(dc_lower_b);
  }
}

std::vector<TensorView> tensor_views(ModelParams& p) {
  std::vector<TensorView> out;
  auto add_mat = [&](const std::string& name, Eigen::MatrixXd& m) {
    out.push_back({name, m.rows(), m.cols(), m.data()});
  };
  auto add_vec = [&](const std::string& name, Eigen::VectorXd& v) {
    out.push_back({name, v.size(), 1, v.data()});
  };
  for (size_t l = 0; l < p.layers.size(); ++l) {
    for (auto [dir, dname] :
         {std::pair{&p.layers[l].fwd, "fwd"}, std::pair{&p.layers[l].bwd, "bwd"}}) {
      std::string base = "layer" + std::to_string(l + 1) + "." + dname + ".";
      for (auto [gate, gname] : {std::pair{&dir->cell.input, "i"},
                                 std::pair{&dir->cell.forget, "f"},
                                 std::pair{&dir->cell.output, "o"},
                                 std::pair{&dir->cell.candidate, "c"}}) {
        add_mat(base + gname + ".U", gate->U);
        add_mat(base + gname + ".W", gate->W);
        add_vec(base + gname + ".b", gate->b);
      }
      if (dir->highway) {
        add_mat(base + "hw.U", dir->highway->U_d);
        add_vec(base + "hw.w", dir->highway->w_d);
        add_vec(base + "hw.b", dir->highway->b_d);
      }
    }
  }
  add_vec("head.w", p.head_w);
  add_vec("head.b", p.head_b);
  return out;
}

namespace {

struct AdamState {
  ModelParams m, v;
  int t = 0;
};

void adamw_step(ModelParams& params, ModelParams& grads, AdamState& st, double lr, double wd) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  ++st.t;
  const double bc1 = 1.0 - std::pow(b1, st.t);
  const double bc2 = 1.0 - std::pow(b2, st.t);
  auto pv = tensor_views(params);
  auto gv = tensor_views(grads);
  auto mv = tensor_views(st.m);
  auto vv = tensor_views(st.v);
  for (size_t i = 0; i < pv.size(); ++i) {
    double* p = pv[i].data;
    double* g = gv[i].data;
    double* m = mv[i].data;
    double* v = vv[i].data;
    const auto n = pv[i].size();
    for (Eigen::Index j = 0; j < n; ++j) {
      m[j] = b1 * m[j] + (1.0 - b1) * g[j];
      v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
      double mhat = m[j] / bc1;
      double vhat = v[j] / bc2;
      p[j] -= lr * (mhat / (std::sqrt(vhat) + eps) + wd * p[j]);
    }
  }
}

void zero_grads(ModelParams& g) {
  for (auto& v : tensor_views(g)) std::memset(v.data, 0, size_t(v.size()) * sizeof(double));
}

NormStats fit_norm(std::span<const corpus::WindowSample> train) {
  const auto F = train.front().features.cols();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(F), sumsq = Eigen::VectorXd::Zero(F);
  double tsum = 0, tsumsq = 0;
  int64_t rows = 0;
  for (const auto& s : train) {
    for (Eigen::Index r = 0; r < s.features.rows(); ++r) {
      sum += s.features.row(r).transpose();
      sumsq += s.features.row(r).transpose().cwiseAbs2();
      ++rows;
    }
    tsum += s.target;
    tsumsq += s.target * s.target;
  }
  NormStats n;
  n.mean = sum / double(rows);
  Eigen::VectorXd var = sumsq / double(rows) - n.mean.cwiseAbs2();
  n.sigma = var.cwiseMax(0.0).cwiseSqrt();
  n.target_mean = tsum / double(train.size());
  double tvar = tsumsq / double(train.size()) - n.target_mean * n.target_mean;
  n.target_sigma = std::sqrt(std::max(tvar, 0.0));
  return n;
}

Eigen::MatrixXd normalize_window(const NormStats& n, const Eigen::MatrixXd& raw) {
  Eigen::MatrixXd out(raw.rows(), raw.cols());
  for (Eigen::Index c = 0; c < raw.cols(); ++c) {
    double s = n.sigma[c];
    if (s > 0)
      out.col(c) = (raw.col(c).array() - n.mean[c]) / s;
    else
      out.col(c).setZero();
  }
  return out;
}

}  // namespace

TrainResult train(ForecastModel& model, std::span<const corpus::WindowSample> samples,
                  const TrainConfig& cfg, double validation_fraction) {
  if (samples.size() < 2) throw ValidationError("train: need at least 2 samples");
  if (validation_fraction < 0 || validation_fraction >= 1)
    throw ValidationError("train: validation fraction must lie in [0, 1)");
  for (const auto& s : samples)
    if (int(s.features.cols()) != model.input_width)
      throw ValidationError("train: sample width does not match model input width");

  const size_t n = samples.size();
  size_t n_val = validation_fraction > 0
                     ? std::max<size_t>(1, size_t(std::floor(validation_fraction * double(n) + 1e-9)))
                     : 0;
  if (n_val >= n) n_val = n - 1;
  const size_t n_train = n - n_val;

  model.norm = fit_norm(samples.subspan(0, n_train));
  model.seed = cfg.seed;
  model.dropout = cfg.dropout;

  std::vector<Eigen::MatrixXd> feats(n);
  std::vector<double> targets(n);
  for (size_t i = 0; i < n; ++i) {
    feats[i] = normalize_window(model.norm, samples[i].features);
    targets[i] = model.norm.target_sigma > 0
                     ? (samples[i].target - model.norm.target_mean) / model.norm.target_sigma
                     : 0.0;
  }

  Rng shuffle_rng = Rng(cfg.seed).stream("net.shuffle");
  Rng dropout_rng = Rng(cfg.seed).stream("net.dropout");

  const size_t batch = cfg.batch <= 0 ? n_train : std::min(size_t(cfg.batch), n_train);
  ModelParams grads = zero_like(model.params);
  AdamState adam{zero_like(model.params), zero_like(model.params), 0};

  std::vector<size_t> order(n_train);
  for (size_t i = 0; i < n_train; ++i) order[i] = i;

  auto eval_mse = [&](size_t begin, size_t end) {
    double sse = 0;
    for (size_t i = begin; i < end; ++i) {
      double err = model_forward(model, feats[i], Mode::eval) - targets[i];
      sse += err * err;
    }
    return sse / double(end - begin);
  };

  TrainResult result;
  double best_val = std::numeric_limits<double>::infinity();
  ModelParams best_params = model.params;
  int bad_epochs = 0;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_sse = 0;
    for (size_t start = 0; start < n_train; start += batch) {
      const size_t stop = std::min(start + batch, n_train);
      const double bsize = double(stop - start);
      zero_grads(grads);
      for (size_t k = start; k < stop; ++k) {
        size_t i = order[k];
        ForwardTrace trace = forward(model, feats[i], Mode::train, &dropout_rng);
        double err = trace.prediction - targets[i];
        epoch_sse += err * err;
        backward(model, trace, 2.0 * err / bsize, grads);
      }
      adamw_step(model.params, grads, adam, cfg.learning_rate, cfg.weight_decay);
    }
    double train_mse = epoch_sse / double(n_train);
    if (!std::isfinite(train_mse))
      throw DivergenceError("training diverged at epoch " + std::to_string(epoch), epoch);
    result.train_loss.push_back(train_mse);

    double val = n_val > 0 ? eval_mse(n_train, n) : eval_mse(0, n_train);
    if (!std::isfinite(val))
      throw DivergenceError("validation loss diverged at epoch " + std::to_string(epoch), epoch);
    result.val_loss.push_back(val);
    result.epochs_run = epoch + 1;

    if (val < best_val) {
      best_val = val;
      best_params = model.params;
      result.best_epoch = epoch;
      bad_epochs = 0;
    } else {
      ++bad_epochs;
      if (bad_epochs > cfg.patience) break;
    }
  }

  model.params = std::move(best_params);
  model.trained = true;
  return result;
}

double predict(const ForecastModel& model, const Eigen::MatrixXd& raw_window) {
  if (model.norm.mean.size() == 0)
    throw ValidationError("predict: model has no normalization statistics (not trained)");
  double pred = model_forward(model, normalize_window(model.norm, raw_window), Mode::eval);
  return model.norm.target_mean + pred * model.norm.target_sigma;
}

PredictionSeries predict_series(const ForecastModel& model, const corpus::FeatureTable& table,
                                int window, std::span<const Date> test_dates) {
  if (window < 1) throw ValidationError("predict_series: window must be positive");
  std::vector<std::string> bad;
  PredictionSeries out;
  for (Date d : test_dates) {
    auto it = std::lower_bound(table.dates.begin(), table.dates.end(), d);
    if (it == table.dates.end() || *it != d) {
      bad.push_back(to_string(d) + " (not in feature table)");
      continue;
    }
    auto r = it - table.dates.begin();
    if (r < window) {
      bad.push_back(to_string(d) + " (only " + std::to_string(r) + " prior rows)");
      continue;
    }
    out.dates.push_back(d);
    out.predicted.push_back(predict(model, table.features.middleRows(r - window, window)));
  }
  if (!bad.empty()) {
    std::string msg = "predict_series: missing window history for dates:";
    for (const auto& b : bad) msg += " " + b;
    throw ValidationError(msg);
  }
  return out;
}

namespace {

constexpr char kMagic[8] = {'S', 'C', 'F', 'C', 'K', 'P', 'T', '1'};

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xFF));
}
void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(char((v >> (8 * i)) & 0xFF));
}
void put_f64(std::string& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(out, bits);
}

struct Reader {
  const std::string& data;
  size_t pos = 0;
  explicit Reader(const std::string& d) : data(d) {}
  void need(size_t n) const {
    if (pos + n > data.size()) throw SchemaError("model checkpoint truncated");
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= uint32_t(uint8_t(data[pos + size_t(i)])) << (8 * i);
    pos += 4;
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(uint8_t(data[pos + size_t(i)])) << (8 * i);
    pos += 8;
    return v;
  }
  double f64() {
    uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
};

}  // namespace

void save_model(const std::filesystem::path& path, const ForecastModel& model) {
  std::string out;
  out.append(kMagic, sizeof kMagic);
  put_u32(out, 1);  // version
  put_u32(out, uint32_t(model.num_layers));
  put_u32(out, uint32_t(model.hidden));
  put_u32(out, uint32_t(model.input_width));
  put_u32(out, model.use_highway ? 1 : 0);
  put_f64(out, model.dropout);
  put_u64(out, model.seed);
  put_u32(out, model.trained ? 1 : 0);
  put_u32(out, uint32_t(model.norm.mean.size()));
  for (Eigen::Index i = 0; i < model.norm.mean.size(); ++i) put_f64(out, model.norm.mean[i]);
  for (Eigen::Index i = 0; i < model.norm.sigma.size(); ++i) put_f64(out, model.norm.sigma[i]);
  put_f64(out, model.norm.target_mean);
  put_f64(out, model.norm.target_sigma);

  auto views = tensor_views(const_cast<ModelParams&>(model.params));  // read-only access
  put_u32(out, uint32_t(views.size()));
  for (const auto& v : views) {
    put_u32(out, uint32_t(v.rows));
    put_u32(out, uint32_t(v.cols));
    for (Eigen::Index r = 0; r < v.rows; ++r)
      for (Eigen::Index c = 0; c < v.cols; ++c) put_f64(out, v.data[c * v.rows + r]);
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write '" + path.string() + "'");
  f.write(out.data(), std::streamsize(out.size()));
  if (!f) throw IoError("write failed for '" + path.string() + "'");
}

ForecastModel load_model(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "'");
  std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  Reader r(data);
  r.need(sizeof kMagic);
  if (std::memcmp(data.data(), kMagic, sizeof kMagic) != 0)
    throw SchemaError("'" + path.string() + "' is not a model checkpoint");
  r.pos = sizeof kMagic;
  if (r.u32() != 1) throw SchemaError("unsupported checkpoint version");

  TrainConfig cfg;
  cfg.layers = int(r.u32());
  cfg.hidden = int(r.u32());
  int input_width = int(r.u32());
  cfg.use_highway = r.u32() != 0;
  cfg.dropout = r.f64();
  cfg.seed = r.u64();
  bool trained = r.u32() != 0;

  ForecastModel m = init_model(input_width, cfg);
  m.trained = trained;
  uint32_t fc = r.u32();
  m.norm.mean.resize(fc);
  m.norm.sigma.resize(fc);
  for (uint32_t i = 0; i < fc; ++i) m.norm.mean[i] = r.f64();
  for (uint32_t i = 0; i < fc; ++i) m.norm.sigma[i] = r.f64();
  m.norm.target_mean = r.f64();
  m.norm.target_sigma = r.f64();

  auto views = tensor_views(m.params);
  uint32_t count = r.u32();
  if (count != views.size()) throw SchemaError("checkpoint tensor count mismatch");
  for (auto& v : views) {
    uint32_t rows = r.u32(), cols = r.u32();
    if (Eigen::Index(rows) != v.rows || Eigen::Index(cols) != v.cols)
      throw SchemaError("checkpoint tensor '" + v.name + "' has unexpected shape");
    for (Eigen::Index rr = 0; rr < v.rows; ++rr)
      for (Eigen::Index cc = 0; cc < v.cols; ++cc) v.data[cc * v.rows + rr] = r.f64();
  }
  return m;
}

}  // namespace senticast::net
