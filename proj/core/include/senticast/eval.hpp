#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "senticast/corpus.hpp"
#include "senticast/net.hpp"

namespace senticast::eval {

struct RegressionMetrics {
  double rmse = 0;
  double mape = 0;  // percent
  double r2 = 0;
};

/// RMSE, MAPE (percent) and the standard coefficient of determination
/// R2 = 1 - SSE/SST. Requires equal lengths >= 2 and nonzero actual values
/// for the MAPE term.
RegressionMetrics regression_metrics(std::span<const double> actual,
                                     std::span<const double> predicted);

/// Signed relative percentage error per date: 100*(pred - actual)/actual.
/// Requires strictly positive actuals.
std::vector<double> rpe_series(std::span<const double> actual, std::span<const double> predicted);

/// Average one-sided errors: mean over-prediction (pred > actual) and mean
/// under-prediction magnitudes, each 0 when the side is empty.
std::pair<double, double> aose(std::span<const double> actual, std::span<const double> predicted);

struct RegressionReport {
  RegressionMetrics metrics;
  std::vector<double> rpe;
  double aose_over = 0;
  double aose_under = 0;
};

RegressionReport full_report(std::span<const double> actual, std::span<const double> predicted);

struct ExperimentConfig {
  int window = 7;
  double split_ratio = 0.8;
  double validation_fraction = 0.1;
  net::TrainConfig train;
  std::vector<std::string> features;  // feature columns to use; empty = all
};

struct ExperimentResult {
  std::vector<Date> dates;  // test dates
  std::vector<double> actual;
  std::vector<double> predicted;
  RegressionReport report;
  net::TrainResult train_info;
};

/// Trains on the chronological `split_ratio` head of the table and
/// evaluates one prediction per remaining date, all in price units.
/// Deterministic given `seed` (overrides cfg.train.seed).
ExperimentResult run_experiment(const corpus::FeatureTable& table, const ExperimentConfig& cfg,
                                uint64_t seed);

struct AblationConfig {
  ExperimentConfig base;  // window is taken from the windows list
  std::vector<std::string> technical_features;
  std::vector<std::string> sentiment_features;
};

struct AblationRow {
  std::string config;  // bilstm | bilstm-si | bilstm-highway | full
  int window = 0;
  RegressionMetrics mean;              // means over seeds
  double rmse_ratio = 1;               // baseline/variant, mean of per-seed ratios
  double mape_ratio = 1;               // baseline/variant
  double r2_ratio = 1;                 // variant/baseline
  std::vector<double> seed_rmse_ratios;  // per-seed detail (pairing by seed)
};

struct AblationTable {
  std::vector<AblationRow> rows;  // 4 configs per window, windows in input order
};

/// Four configurations per window: plain stacked BiLSTM without sentiment
/// features (baseline), +sentiment, +highway, and both. Ratios are oriented
/// so that values above 1 mean improvement over the baseline; each seed's
/// variant is paired with the same seed's baseline.
AblationTable run_ablation(const corpus::FeatureTable& table, std::span<const int> windows,
                           std::span<const uint64_t> seeds, const AblationConfig& cfg);

/// CSV `date,actual,predicted,rpe` at 6 decimals.
void save_prediction_csv(const std::filesystem::path& path, const ExperimentResult& r);
void save_metrics_csv(const std::filesystem::path& path, const ExperimentResult& r);
/// Long-format ablation CSV: one row per (window, config).
void save_ablation_csv(const std::filesystem::path& path, const AblationTable& t);

}  // namespace senticast::eval
