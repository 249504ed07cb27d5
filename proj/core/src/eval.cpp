#include "senticast/eval.hpp"

#include <algorithm>
#include <cmath>

#include "senticast/csv.hpp"

namespace senticast::eval {

RegressionMetrics regression_metrics(std::span<const double> actual,
                                     std::span<const double> predicted) {
  if (actual.size() != predicted.size())
    throw ValidationError("regression_metrics: length mismatch");
  if (actual.size() < 2) throw ValidationError("regression_metrics: need at least 2 points");

  const double n = double(actual.size());
  double sse = 0, ape = 0, mean = 0;
  for (size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] == 0) throw ValidationError("regression_metrics: zero actual makes MAPE undefined");
    double e = actual[i] - predicted[i];
    sse += e * e;
    ape += std::fabs(e / actual[i]);
    mean += actual[i];
  }
  mean /= n;
  double sst = 0;
  for (double y : actual) sst += (y - mean) * (y - mean);
  if (sst == 0)
    throw ValidationError("regression_metrics: constant actual series makes R2 undefined");

  RegressionMetrics m;
  m.rmse = std::sqrt(sse / n);
  m.mape = 100.0 * ape / n;
  m.r2 = 1.0 - sse / sst;
  return m;
}

std::vector<double> rpe_series(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size()) throw ValidationError("rpe_series: length mismatch");
  std::vector<double> out;
  out.reserve(actual.size());
  for (size_t i = 0; i < actual.size(); ++i) {
    if (!(actual[i] > 0)) throw ValidationError("rpe_series: actuals must be strictly positive");
    out.push_back(100.0 * (predicted[i] - actual[i]) / actual[i]);
  }
  return out;
}

std::pair<double, double> aose(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size()) throw ValidationError("aose: length mismatch");
  double over = 0, under = 0;
  int64_t n_over = 0, n_under = 0;
  for (size_t i = 0; i < actual.size(); ++i) {
    double d = predicted[i] - actual[i];
    if (d > 0) {
      over += d;
      ++n_over;
    } else if (d < 0) {
      under += -d;
      ++n_under;
    }
  }
  return {n_over ? over / double(n_over) : 0.0, n_under ? under / double(n_under) : 0.0};
}

RegressionReport full_report(std::span<const double> actual, std::span<const double> predicted) {
  RegressionReport r;
  r.metrics = regression_metrics(actual, predicted);
  r.rpe = rpe_series(actual, predicted);
  std::tie(r.aose_over, r.aose_under) = aose(actual, predicted);
  return r;
}

ExperimentResult run_experiment(const corpus::FeatureTable& table, const ExperimentConfig& cfg,
                                uint64_t seed) {
  corpus::FeatureTable t = cfg.features.empty() ? table : table.select(cfg.features);
  const size_t n = t.dates.size();
  if (n != size_t(t.features.rows()) || n != t.close.size())
    throw ValidationError("run_experiment: inconsistent feature table");

  const size_t split = corpus::split_point(n, cfg.split_ratio);

  // Training samples draw only on the head of the table.
  auto train_samples = corpus::make_windows(t.features.topRows(Eigen::Index(split)),
                                            std::span(t.close).subspan(0, split),
                                            std::span(t.dates).subspan(0, split), cfg.window);

  net::TrainConfig tc = cfg.train;
  tc.seed = seed;
  net::ForecastModel model = net::init_model(int(t.features.cols()), tc);
  net::TrainResult info = net::train(model, train_samples, tc, cfg.validation_fraction);

  ExperimentResult r;
  r.train_info = std::move(info);
  r.dates.assign(t.dates.begin() + long(split), t.dates.end());
  r.actual.assign(t.close.begin() + long(split), t.close.end());
  net::PredictionSeries pred = net::predict_series(model, t, cfg.window, r.dates);
  r.predicted = std::move(pred.predicted);
  r.report = full_report(r.actual, r.predicted);
  return r;
}

namespace {

std::vector<std::string> concat(std::vector<std::string> a, std::span<const std::string> b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

AblationTable run_ablation(const corpus::FeatureTable& table, std::span<const int> windows,
                           std::span<const uint64_t> seeds, const AblationConfig& cfg) {
  if (windows.empty() || seeds.empty())
    throw ValidationError("run_ablation: need at least one window and one seed");

  struct Variant {
    std::string name;
    bool sentiment;
    bool highway;
  };
  const Variant variants[] = {{"bilstm", false, false},
                              {"bilstm-si", true, false},
                              {"bilstm-highway", false, true},
                              {"full", true, true}};

  AblationTable out;
  for (int window : windows) {
    // metrics[variant][seed]
    std::vector<std::vector<RegressionMetrics>> metrics(4);
    for (size_t v = 0; v < 4; ++v) {
      ExperimentConfig ec = cfg.base;
      ec.window = window;
      ec.features = variants[v].sentiment
                        ? concat(cfg.technical_features, cfg.sentiment_features)
                        : cfg.technical_features;
      ec.train.use_highway = variants[v].highway;
      for (uint64_t seed : seeds)
        metrics[v].push_back(run_experiment(table, ec, seed).report.metrics);
    }
    for (size_t v = 0; v < 4; ++v) {
      AblationRow row;
      row.config = variants[v].name;
      row.window = window;
      double rmse = 0, mape = 0, r2 = 0, rr = 0, mr = 0, r2r = 0;
      for (size_t s = 0; s < seeds.size(); ++s) {
        const auto& m = metrics[v][s];
        const auto& base = metrics[0][s];
        rmse += m.rmse;
        mape += m.mape;
        r2 += m.r2;
        double ratio = base.rmse / m.rmse;
        rr += ratio;
        mr += base.mape / m.mape;
        r2r += m.r2 / base.r2;
        row.seed_rmse_ratios.push_back(ratio);
      }
      const double ns = double(seeds.size());
      row.mean = {rmse / ns, mape / ns, r2 / ns};
      row.rmse_ratio = rr / ns;
      row.mape_ratio = mr / ns;
      row.r2_ratio = r2r / ns;
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

void save_prediction_csv(const std::filesystem::path& path, const ExperimentResult& r) {
  csv::Writer w;
  w.row({"date", "actual", "predicted", "rpe"});
  for (size_t i = 0; i < r.dates.size(); ++i)
    w.row({to_string(r.dates[i]), csv::format_fixed(r.actual[i], 6),
           csv::format_fixed(r.predicted[i], 6), csv::format_fixed(r.report.rpe[i], 6)});
  w.save(path);
}

void save_metrics_csv(const std::filesystem::path& path, const ExperimentResult& r) {
  csv::Writer w;
  w.row({"rmse", "mape", "r2", "aose_over", "aose_under", "test_points", "epochs_run"});
  w.row({csv::format_fixed(r.report.metrics.rmse, 6), csv::format_fixed(r.report.metrics.mape, 6),
         csv::format_fixed(r.report.metrics.r2, 6), csv::format_fixed(r.report.aose_over, 6),
         csv::format_fixed(r.report.aose_under, 6), std::to_string(r.dates.size()),
         std::to_string(r.train_info.epochs_run)});
  w.save(path);
}

void save_ablation_csv(const std::filesystem::path& path, const AblationTable& t) {
  csv::Writer w;
  w.row({"window", "config", "rmse", "mape", "r2", "rmse_ratio", "mape_ratio", "r2_ratio"});
  for (const auto& r : t.rows)
    w.row({std::to_string(r.window), r.config, csv::format_fixed(r.mean.rmse, 6),
           csv::format_fixed(r.mean.mape, 6), csv::format_fixed(r.mean.r2, 6),
           csv::format_fixed(r.rmse_ratio, 6), csv::format_fixed(r.mape_ratio, 6),
           csv::format_fixed(r.r2_ratio, 6)});
  w.save(path);
}

}  // namespace senticast::eval
