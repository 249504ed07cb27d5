#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace senticast::stats {

/// Price rate of change: 100*(C_t - C_{t-1})/C_{t-1}, length n-1.
/// All closes must be strictly positive.
std::vector<double> roc(std::span<const double> close);

/**
 * Ordinary least squares fit of y on X (X includes the intercept column).
 *
 * Solved by column-pivoted Householder QR; a rank-deficient design throws
 * SingularDesignError naming one of the dependent columns.
 */
struct OlsFit {
  Eigen::VectorXd beta;
  double rss = 0;
  Eigen::VectorXd residuals;
  int n = 0;  // observations
  int k = 0;  // regressors including intercept
};

OlsFit ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& X);

/**
 * Nested-model Granger causality test.
 *
 * Restricted model: effect_t on an intercept and `lag` of its own lags.
 * Unrestricted model adds `lag` lags of the cause. The first `lag`
 * observations are dropped (no padding), so the effective sample is
 * n - lag and the F statistic has (lag, n_eff - 2*lag - 1) degrees of
 * freedom. The two directions of a bidirectional run are independent
 * fits; nothing is reused.
 */
struct GrangerResult {
  std::string cause, effect;
  int lag = 0;
  double f_stat = 0;
  double p_value = 1;
  int n_effective = 0;
};

GrangerResult granger_test(std::span<const double> effect, std::span<const double> cause, int lag,
                           const std::string& cause_name = "x", const std::string& effect_name = "y");

/**
 * Augmented Dickey-Fuller unit-root test, constant and no trend:
 *
 *   dy_t = alpha + gamma*y_{t-1} + sum_{i=1..p} delta_i * dy_{t-i} + e_t
 *
 * The t statistic on gamma is compared against the fixed large-sample
 * critical values -3.43 / -2.86 / -2.57 (1% / 5% / 10%). `lag` overrides
 * the default Schwert lag, floor(12*(n/100)^(1/4)).
 */
struct AdfResult {
  double t_statistic = 0;
  int lag_used = 0;
  bool reject_1pct = false;
  bool reject_5pct = false;
  bool reject_10pct = false;
  int n_effective = 0;
};

AdfResult adf_test(std::span<const double> series, std::optional<int> lag = std::nullopt);

/// Schwert's default ADF lag.
int schwert_lag(size_t n);

/// Upper-tail probability of the F(d1, d2) distribution at x, via the
/// regularized incomplete beta function (continued-fraction evaluation,
/// absolute error below 1e-10).
double f_upper_tail(double x, int d1, int d2);

/// Regularized incomplete beta I_x(a, b).
double regularized_incomplete_beta(double x, double a, double b);

/// "***" / "**" / "*" at the 1% / 5% / 10% levels, empty otherwise.
std::string significance_stars(double p);

/// CSV `stock,variable,direction,lag,F,p,stars`, one row per test.
void save_gct_csv(const std::filesystem::path& path, const std::string& stock,
                  std::span<const GrangerResult> results);

struct AdfReportRow {
  std::string variable;
  AdfResult result;
};

/// CSV `variable,t_stat,lag,reject_1pct,reject_5pct,reject_10pct,stars`.
void save_adf_csv(const std::filesystem::path& path, std::span<const AdfReportRow> rows);

}  // namespace senticast::stats
