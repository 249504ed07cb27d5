#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "senticast/corpus.hpp"
#include "senticast/scorer.hpp"

namespace senticast::index {

/// Index variants:
///   count      - log ratio of bullish vs bearish post counts
///   score      - log ratio of summed propensity scores
///   popularity - score sums weighted by standardized read/comment/like counts
enum class Variant { count, score, popularity };
enum class Field { title, body };

Variant parse_variant(std::string_view s);
Field parse_field(std::string_view s);
std::string to_string(Variant v);
std::string to_string(Field f);

struct MetricStats {
  double mean = 0;
  double sigma = 0;  // population standard deviation

  /// (x - mean) / sigma, or 0 when sigma is 0.
  double standardize(double x) const { return sigma > 0 ? (x - mean) / sigma : 0.0; }
};

MetricStats fit_metric(std::span<const double> xs);

/// Standardization statistics for the popularity counters, fitted per stock
/// per metric over a declared post population.
struct PopularityStats {
  MetricStats reads, comments, likes;
  std::string stock_id;
  Timestamp from, to;  // fitted population range
  size_t population = 0;
};

PopularityStats fit_popularity_stats(std::span<const corpus::Post> posts,
                                     std::string stock_id = "");

struct ZscoreResult {
  std::vector<double> values;
  bool sigma_zero = false;
};

/// Elementwise (x - mean)/sigma with population sigma. When `stats` is
/// absent the series is self-fitted. A zero sigma yields all zeros and
/// sets the flag.
ZscoreResult zscore(std::span<const double> series, const MetricStats* stats = nullptr);

/// One post's contribution to a daily index. `weight` is the summed
/// standardized popularity (ignored by the count and score variants).
struct PostSignal {
  double score = 0;
  int cls = 0;  // -1 / 0 / +1
  double weight = 0;
};

constexpr double kLogFloor = 1e-6;

/// ln((1 + bull_count) / (1 + bear_count)); neutral posts ignored.
double bi_count(std::span<const PostSignal> day);

/// ln((1 + sum of bullish scores) / (1 - sum of bearish scores)).
/// Membership follows the class; a bullish-classed score <= 0 (or
/// bearish-classed score >= 0) contributes nothing.
double bi_score(std::span<const PostSignal> day);

struct BiPopularityResult {
  double value = 0;
  int floor_hits = 0;  // 0..2: numerator and/or denominator clamped
};

/// Popularity-weighted variant. Standardized weights can drive a log
/// argument to zero or below; each argument is floored at `floor_eps` and
/// the clamp is counted.
BiPopularityResult bi_popularity(std::span<const PostSignal> day, double floor_eps = kLogFloor);

struct DailySentimentSeries {
  std::string stock_id;
  Variant variant = Variant::count;
  Field field = Field::title;
  std::vector<Date> dates;
  std::vector<double> values;
  std::vector<uint8_t> floor_flags;  // 1 when the floor triggered that day
  size_t floor_hits = 0;             // number of days with a floor hit
};

/// One value per trading day of the alignment. `stats` is required for the
/// popularity variant and recorded as the fitting scope. Throws
/// ValidationError if any aligned post lacks a score.
DailySentimentSeries build_index_series(const corpus::Alignment& alignment,
                                        std::span<const corpus::Post> posts,
                                        std::span<const scorer::ScoredPost> scores,
                                        Variant variant, Field field,
                                        const PopularityStats* stats = nullptr);

/// CSV `date,value,floor_hit` with 6 decimal places.
void save_series_csv(const std::filesystem::path& path, const DailySentimentSeries& s);
DailySentimentSeries load_series_csv(const std::filesystem::path& path);

}  // namespace senticast::index
