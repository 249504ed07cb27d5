#include "senticast/index.hpp"

#include <cmath>
#include <unordered_map>

#include "senticast/csv.hpp"

namespace senticast::index {

Variant parse_variant(std::string_view s) {
  if (s == "bi" || s == "count") return Variant::count;
  if (s == "score") return Variant::score;
  if (s == "pop" || s == "popularity") return Variant::popularity;
  throw ValidationError("unknown index variant '" + std::string(s) + "' (expected bi|score|pop)");
}

Field parse_field(std::string_view s) {
  if (s == "title") return Field::title;
  if (s == "body") return Field::body;
  throw ValidationError("unknown field '" + std::string(s) + "' (expected title|body)");
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::count: return "bi";
    case Variant::score: return "score";
    default: return "pop";
  }
}

std::string to_string(Field f) { return f == Field::title ? "title" : "body"; }

MetricStats fit_metric(std::span<const double> xs) {
  if (xs.empty()) throw ValidationError("cannot fit statistics on an empty series");
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= double(xs.size());
  double var = 0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= double(xs.size());  // population variance
  return {mean, std::sqrt(var)};
}

PopularityStats fit_popularity_stats(std::span<const corpus::Post> posts, std::string stock_id) {
  if (posts.empty()) throw ValidationError("cannot fit popularity statistics on zero posts");
  std::vector<double> r, c, l;
  r.reserve(posts.size());
  c.reserve(posts.size());
  l.reserve(posts.size());
  Timestamp lo = posts.front().ts, hi = posts.front().ts;
  for (const auto& p : posts) {
    r.push_back(double(p.reads));
    c.push_back(double(p.comments));
    l.push_back(double(p.likes));
    lo = std::min(lo, p.ts);
    hi = std::max(hi, p.ts);
  }
  PopularityStats s;
  s.reads = fit_metric(r);
  s.comments = fit_metric(c);
  s.likes = fit_metric(l);
  s.stock_id = std::move(stock_id);
  s.from = lo;
  s.to = hi;
  s.population = posts.size();
  return s;
}

ZscoreResult zscore(std::span<const double> series, const MetricStats* stats) {
  if (series.empty()) throw ValidationError("zscore: empty series");
  MetricStats m = stats ? *stats : fit_metric(series);
  ZscoreResult out;
  out.sigma_zero = !(m.sigma > 0);
  out.values.reserve(series.size());
  for (double x : series) out.values.push_back(m.standardize(x));
  return out;
}

namespace {

// Bullish scores enter only when positive, bearish only when negative;
// anything else is treated as neutral.
inline bool counts_bull(const PostSignal& p) { return p.cls > 0 && p.score > 0; }
inline bool counts_bear(const PostSignal& p) { return p.cls < 0 && p.score < 0; }

}  // namespace

double bi_count(std::span<const PostSignal> day) {
  int64_t bulls = 0, bears = 0;
  for (const auto& p : day) {
    if (p.cls > 0) ++bulls;
    else if (p.cls < 0) ++bears;
  }
  return std::log((1.0 + double(bulls)) / (1.0 + double(bears)));
}

double bi_score(std::span<const PostSignal> day) {
  double bull_sum = 0, bear_sum = 0;
  for (const auto& p : day) {
    if (counts_bull(p)) bull_sum += p.score;
    else if (counts_bear(p)) bear_sum += p.score;  // negative values
  }
  return std::log((1.0 + bull_sum) / (1.0 - bear_sum));
}

BiPopularityResult bi_popularity(std::span<const PostSignal> day, double floor_eps) {
  double bull_sum = 0, bear_sum = 0;
  for (const auto& p : day) {
    if (counts_bull(p)) bull_sum += p.score * p.weight;
    else if (counts_bear(p)) bear_sum += p.score * p.weight;
  }
  double num = 1.0 + bull_sum;
  double den = 1.0 - bear_sum;
  BiPopularityResult out;
  if (num < floor_eps) {
    num = floor_eps;
    ++out.floor_hits;
  }
  if (den < floor_eps) {
    den = floor_eps;
    ++out.floor_hits;
  }
  out.value = std::log(num / den);
  return out;
}

DailySentimentSeries build_index_series(const corpus::Alignment& alignment,
                                        std::span<const corpus::Post> posts,
                                        std::span<const scorer::ScoredPost> scores,
                                        Variant variant, Field field,
                                        const PopularityStats* stats) {
  if (variant == Variant::popularity && stats == nullptr)
    throw ValidationError("popularity variant requires fitted popularity statistics");

  std::unordered_map<size_t, const scorer::ScoredPost*> by_index;
  by_index.reserve(scores.size());
  for (const auto& s : scores) by_index[s.post_index] = &s;

  DailySentimentSeries out;
  out.stock_id = stats ? stats->stock_id : (posts.empty() ? "" : posts.front().stock_id);
  out.variant = variant;
  out.field = field;
  out.dates.reserve(alignment.days.size());
  out.values.reserve(alignment.days.size());
  out.floor_flags.reserve(alignment.days.size());

  std::vector<PostSignal> day;
  for (const auto& d : alignment.days) {
    day.clear();
    for (size_t idx : d.post_indices) {
      auto it = by_index.find(idx);
      if (it == by_index.end())
        throw ValidationError("post id " + std::to_string(posts[idx].id) +
                              " aligned to " + to_string(d.date) + " has no sentiment score");
      const scorer::ScoredPost& s = *it->second;
      PostSignal sig;
      sig.score = field == Field::title ? s.title_score : s.body_score;
      sig.cls = field == Field::title ? s.title_class : s.body_class;
      if (variant == Variant::popularity) {
        const corpus::Post& p = posts[idx];
        sig.weight = stats->reads.standardize(double(p.reads)) +
                     stats->comments.standardize(double(p.comments)) +
                     stats->likes.standardize(double(p.likes));
      }
      day.push_back(sig);
    }
    double value = 0;
    int hits = 0;
    switch (variant) {
      case Variant::count: value = bi_count(day); break;
      case Variant::score: value = bi_score(day); break;
      case Variant::popularity: {
        auto r = bi_popularity(day);
        value = r.value;
        hits = r.floor_hits;
        break;
      }
    }
    out.dates.push_back(d.date);
    out.values.push_back(value);
    out.floor_flags.push_back(hits > 0 ? 1 : 0);
    if (hits > 0) ++out.floor_hits;
  }
  return out;
}

void save_series_csv(const std::filesystem::path& path, const DailySentimentSeries& s) {
  csv::Writer w;
  w.row({"date", "value", "floor_hit"});
  for (size_t i = 0; i < s.dates.size(); ++i)
    w.row({to_string(s.dates[i]), csv::format_fixed(s.values[i], 6),
           std::to_string(int(s.floor_flags[i]))});
  w.save(path);
}

DailySentimentSeries load_series_csv(const std::filesystem::path& path) {
  csv::Table t = csv::read_file(path);
  int cd = t.column("date"), cv = t.column("value"), cf = t.column("floor_hit");
  if (cd < 0 || cv < 0 || cf < 0)
    throw SchemaError("index series '" + path.string() + "' must have columns date,value,floor_hit");
  DailySentimentSeries s;
  for (const auto& row : t.rows) {
    s.dates.push_back(parse_date(row[cd]));
    s.values.push_back(csv::parse_double(row[cv], "value"));
    uint8_t flag = csv::parse_int(row[cf], "floor_hit") ? 1 : 0;
    s.floor_flags.push_back(flag);
    if (flag) ++s.floor_hits;
  }
  return s;
}

}  // namespace senticast::index
