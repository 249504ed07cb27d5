#include "senticast/stats.hpp"

#include <Eigen/QR>
#include <cmath>

#include "senticast/csv.hpp"
#include "senticast/errors.hpp"

namespace senticast::stats {

std::vector<double> roc(std::span<const double> close) {
  if (close.size() < 2) throw ValidationError("roc: need at least 2 prices");
  for (double c : close)
    if (!(c > 0)) throw ValidationError("roc: closes must be strictly positive");
  std::vector<double> out;
  out.reserve(close.size() - 1);
  for (size_t t = 1; t < close.size(); ++t)
    out.push_back(100.0 * (close[t] - close[t - 1]) / close[t - 1]);
  return out;
}

OlsFit ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& X) {
  const auto n = X.rows();
  const auto k = X.cols();
  if (y.rows() != n) throw ValidationError("ols: y and X row counts differ");
  if (n <= k) throw ValidationError("ols: need more observations than regressors");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < k) {
    // Columns permuted past the numerical rank are the dependent ones.
    int bad = int(qr.colsPermutation().indices()[qr.rank()]);
    throw SingularDesignError("ols: design matrix is rank deficient (column " +
                                  std::to_string(bad) + " is linearly dependent)",
                              bad);
  }
  OlsFit fit;
  fit.beta = qr.solve(y);
  fit.residuals = y - X * fit.beta;
  fit.rss = fit.residuals.squaredNorm();
  fit.n = int(n);
  fit.k = int(k);
  return fit;
}

namespace {

// Builds the lagged design for y_t on [1, y_{t-1..t-p}, (x_{t-1..t-q})].
// Rows start at index `drop` of the original series.
Eigen::MatrixXd lag_design(std::span<const double> y, std::span<const double> x, int p, int q,
                           int drop) {
  const int n_eff = int(y.size()) - drop;
  Eigen::MatrixXd X(n_eff, 1 + p + q);
  for (int t = 0; t < n_eff; ++t) {
    int row = t + drop;
    X(t, 0) = 1.0;
    for (int i = 1; i <= p; ++i) X(t, i) = y[size_t(row - i)];
    for (int j = 1; j <= q; ++j) X(t, p + j) = x[size_t(row - j)];
  }
  return X;
}

}  // namespace

GrangerResult granger_test(std::span<const double> effect, std::span<const double> cause, int lag,
                           const std::string& cause_name, const std::string& effect_name) {
  if (lag < 1) throw ValidationError("granger_test: lag must be >= 1");
  if (effect.size() != cause.size())
    throw ValidationError("granger_test: series lengths differ");
  const int n = int(effect.size());
  const int n_eff = n - lag;
  const int dof2 = n_eff - (2 * lag + 1);
  if (dof2 <= 0)
    throw ValidationError("granger_test: series too short for lag " + std::to_string(lag));

  Eigen::VectorXd y(n_eff);
  for (int t = 0; t < n_eff; ++t) y[t] = effect[size_t(t + lag)];

  OlsFit restricted = ols(y, lag_design(effect, cause, lag, 0, lag));
  OlsFit unrestricted = ols(y, lag_design(effect, cause, lag, lag, lag));

  double num = (restricted.rss - unrestricted.rss) / double(lag);
  double den = unrestricted.rss / double(dof2);
  double f = den > 0 ? num / den : 0.0;
  if (f < 0) f = 0;  // guard tiny negative round-off; RSS_r >= RSS_u by nesting

  GrangerResult r;
  r.cause = cause_name;
  r.effect = effect_name;
  r.lag = lag;
  r.f_stat = f;
  r.p_value = f_upper_tail(f, lag, dof2);
  r.n_effective = n_eff;
  return r;
}

int schwert_lag(size_t n) {
  return int(std::floor(12.0 * std::pow(double(n) / 100.0, 0.25)));
}

AdfResult adf_test(std::span<const double> series, std::optional<int> lag) {
  const int n = int(series.size());
  const int p = lag.value_or(schwert_lag(series.size()));
  if (p < 0) throw ValidationError("adf_test: negative lag");
  if (n < p + 10) throw ValidationError("adf_test: series too short for lag " + std::to_string(p));

  // dy_t for t = p+1 .. n-1, regressors: 1, y_{t-1}, dy_{t-1..t-p}
  const int n_eff = n - p - 1;
  const int k = 2 + p;
  if (n_eff <= k + 2) throw ValidationError("adf_test: insufficient observations");

  Eigen::VectorXd y(n_eff);
  Eigen::MatrixXd X(n_eff, k);
  for (int t = 0; t < n_eff; ++t) {
    int row = t + p + 1;
    y[t] = series[size_t(row)] - series[size_t(row - 1)];
    X(t, 0) = 1.0;
    X(t, 1) = series[size_t(row - 1)];
    for (int i = 1; i <= p; ++i)
      X(t, 1 + i) = series[size_t(row - i)] - series[size_t(row - i - 1)];
  }

  OlsFit fit = ols(y, X);
  double sigma2 = fit.rss / double(n_eff - k);

  // Standard error of the y_{t-1} coefficient: sqrt(sigma2 * [(X'X)^-1]_11).
  Eigen::MatrixXd xtx = X.transpose() * X;
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(k);
  e1[1] = 1.0;
  Eigen::VectorXd col = xtx.colPivHouseholderQr().solve(e1);
  double se = std::sqrt(sigma2 * col[1]);
  if (!(se > 0)) throw ValidationError("adf_test: degenerate regression");

  AdfResult r;
  r.t_statistic = fit.beta[1] / se;
  r.lag_used = p;
  r.n_effective = n_eff;
  // Large-sample critical values, constant-only specification.
  r.reject_1pct = r.t_statistic < -3.43;
  r.reject_5pct = r.t_statistic < -2.86;
  r.reject_10pct = r.t_statistic < -2.57;
  return r;
}

namespace {

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_cf(double x, double a, double b) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-15;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 500; ++m) {
    double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double x, double a, double b) {
  if (!(a > 0 && b > 0)) throw ValidationError("incomplete beta: a, b must be positive");
  if (x <= 0) return 0.0;
  if (x >= 1) return 1.0;
  double front = std::exp(a * std::log(x) + b * std::log(1.0 - x) - log_beta(a, b));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(x, a, b) / a;
  return 1.0 - front * beta_cf(1.0 - x, b, a) / b;
}

double f_upper_tail(double x, int d1, int d2) {
  if (d1 < 1 || d2 < 1) throw ValidationError("f_upper_tail: degrees of freedom must be >= 1");
  if (!(x >= 0)) throw ValidationError("f_upper_tail: x must be non-negative");
  if (x == 0) return 1.0;
  double a = double(d2), b = double(d1);
  return regularized_incomplete_beta(a / (a + b * x), a / 2.0, b / 2.0);
}

std::string significance_stars(double p) {
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.10) return "*";
  return "";
}

void save_gct_csv(const std::filesystem::path& path, const std::string& stock,
                  std::span<const GrangerResult> results) {
  csv::Writer w;
  w.row({"stock", "variable", "direction", "lag", "F", "p", "stars"});
  for (const auto& r : results) {
    // The tested variable is whichever side is not the price return.
    const std::string& variable = r.cause == "ROC" ? r.effect : r.cause;
    w.row({stock, variable, r.cause + "->" + r.effect, std::to_string(r.lag),
           csv::format_fixed(r.f_stat, 6), csv::format_fixed(r.p_value, 6),
           significance_stars(r.p_value)});
  }
  w.save(path);
}

void save_adf_csv(const std::filesystem::path& path, std::span<const AdfReportRow> rows) {
  csv::Writer w;
  w.row({"variable", "t_stat", "lag", "reject_1pct", "reject_5pct", "reject_10pct", "stars"});
  for (const auto& r : rows) {
    double p_proxy = r.result.reject_1pct ? 0.005 : (r.result.reject_5pct ? 0.03 : (r.result.reject_10pct ? 0.075 : 0.5));
    w.row({r.variable, csv::format_fixed(r.result.t_statistic, 6),
           std::to_string(r.result.lag_used), r.result.reject_1pct ? "1" : "0",
           r.result.reject_5pct ? "1" : "0", r.result.reject_10pct ? "1" : "0",
           significance_stars(p_proxy)});
  }
  w.save(path);
}

}  // namespace senticast::stats
