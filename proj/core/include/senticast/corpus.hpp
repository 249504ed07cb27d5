#pragma once

#include <Eigen/Core>
#include <cmath>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "senticast/date.hpp"
#include "senticast/errors.hpp"

namespace senticast::corpus {

/// One forum message. `id` is the 0-based data-row ordinal in the source
/// file (JSONL line or CSV data row) and is the join key for external
/// sentiment scores.
struct Post {
  int64_t id = 0;
  std::string stock_id;
  Timestamp ts;
  std::string title;
  std::string body;
  int64_t reads = 0;
  int64_t comments = 0;
  int64_t likes = 0;

  bool operator==(const Post&) const = default;
};

struct LabeledText {
  std::string text;
  int label = 0;  // -1 bearish, 0 neutral, +1 bullish

  bool operator==(const LabeledText&) const = default;
};

/// Daily closing prices plus exactly nine named indicator series.
/// Trading days are defined by this file; there is no exchange calendar.
struct MarketSeries {
  std::string stock_id;
  std::vector<Date> dates;
  std::vector<double> close;
  std::vector<std::string> indicator_names;           // size 9
  std::vector<std::vector<double>> indicators;        // 9 series, each dates.size()
  bool resorted = false;                              // input rows arrived out of order

  size_t size() const { return dates.size(); }
  /// Index of a trading date, -1 if absent.
  int find(Date d) const;
};

enum class PostFormat { jsonl, csv };

struct PostLoadResult {
  std::vector<Post> posts;  // sorted by timestamp, input order preserved on ties
  size_t skipped = 0;       // rows failing invariants
};

/// Loads and cleans posts. Rows failing invariants are skipped and counted;
/// if more than half of the data rows are invalid the file is rejected with
/// a SchemaError naming the first offending row.
PostLoadResult load_posts(const std::filesystem::path& path, PostFormat format);
/// JSONL writer; load_posts(save_posts(p)) round-trips loaded posts exactly.
void save_posts(const std::filesystem::path& path, std::span<const Post> posts);

std::vector<LabeledText> load_labeled(const std::filesystem::path& path);
void save_labeled(const std::filesystem::path& path, std::span<const LabeledText> rows);

MarketSeries load_market(const std::filesystem::path& path, std::string stock_id = "");
void save_market(const std::filesystem::path& path, const MarketSeries& m);

struct AlignedDay {
  Date date;
  std::vector<size_t> post_indices;  // indices into the aligned post span
};

struct Alignment {
  std::vector<AlignedDay> days;  // one per trading day, in market order
  size_t dropped_before = 0;     // effective date precedes first trading day
  size_t dropped_after = 0;      // effective date follows last trading day
  size_t dropped() const { return dropped_before + dropped_after; }
};

constexpr int kDefaultCutoffSeconds = 15 * 3600;  // session close

/// Assigns every post to the next trading date at or after its effective
/// date. Effective date: the calendar date of the timestamp, rolled to the
/// next day when time-of-day >= cutoff. Posts falling outside the market's
/// date range are dropped and counted.
Alignment align_to_trading_days(std::span<const Post> posts, const MarketSeries& market,
                                int cutoff_seconds = kDefaultCutoffSeconds);

/// floor(ratio*n) with a tiny nudge so exact products are not lost to
/// binary rounding. Requires 0 < ratio < 1 and n >= 2.
size_t split_point(size_t n, double ratio);

template <class T>
std::pair<std::vector<T>, std::vector<T>> split_chronological(const std::vector<T>& xs,
                                                              double ratio) {
  size_t k = split_point(xs.size(), ratio);
  return {std::vector<T>(xs.begin(), xs.begin() + k), std::vector<T>(xs.begin() + k, xs.end())};
}

struct WindowSample {
  Eigen::MatrixXd features;  // [window x feature_count], rows strictly before target_date
  double target = 0;
  Date target_date;
};

/// One sample per admissible target row; sample count = n - window.
std::vector<WindowSample> make_windows(const Eigen::MatrixXd& features,
                                       std::span<const double> targets,
                                       std::span<const Date> dates, int window);

/// Date-indexed feature matrix joined from market indicators and sentiment
/// series; `close` is the prediction target in price units.
struct FeatureTable {
  std::vector<Date> dates;
  std::vector<std::string> feature_names;
  Eigen::MatrixXd features;  // [dates x features]
  std::vector<double> close;

  FeatureTable select(std::span<const std::string> names) const;
};

}  // namespace senticast::corpus
