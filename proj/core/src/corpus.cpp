#include "senticast/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "json.hpp"
#include "senticast/csv.hpp"
#include "senticast/text.hpp"

namespace senticast::corpus {

using nlohmann::json;

int MarketSeries::find(Date d) const {
  auto it = std::lower_bound(dates.begin(), dates.end(), d);
  if (it == dates.end() || *it != d) return -1;
  return int(it - dates.begin());
}

namespace {

std::string trimmed(std::string_view s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string_view::npos) return {};
  size_t b = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(a, b - a + 1));
}

// Parses one raw record into a Post; throws ValidationError on any
// invariant violation so the caller can count the skip.
Post make_post(int64_t id, std::string stock, std::string_view ts_str, std::string_view title,
               std::string_view body, int64_t reads, int64_t comments, int64_t likes) {
  Post p;
  p.id = id;
  p.stock_id = std::move(stock);
  p.ts = parse_timestamp(ts_str);
  p.title = text::clean_text(title);
  p.body = text::clean_text(body);
  p.reads = reads;
  p.comments = comments;
  p.likes = likes;
  if (p.reads < 0 || p.comments < 0 || p.likes < 0)
    throw ValidationError("negative popularity counter");
  if (trimmed(p.title).empty()) throw ValidationError("empty title");
  return p;
}

PostLoadResult finish_posts(std::vector<Post> posts, size_t skipped, size_t total,
                            const std::string& first_bad, const std::filesystem::path& path) {
  if (total > 0 && skipped * 2 > total)
    throw SchemaError("more than half of the rows in '" + path.string() +
                      "' are invalid; first offending row: " + first_bad);
  std::stable_sort(posts.begin(), posts.end(),
                   [](const Post& a, const Post& b) { return a.ts < b.ts; });
  return {std::move(posts), skipped};
}

}  // namespace

PostLoadResult load_posts(const std::filesystem::path& path, PostFormat format) {
  std::vector<Post> posts;
  size_t skipped = 0, total = 0;
  std::string first_bad;

  auto note_bad = [&](int64_t row, const std::string& why) {
    ++skipped;
    if (first_bad.empty()) first_bad = "row " + std::to_string(row) + " (" + why + ")";
  };

  if (format == PostFormat::jsonl) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::string line;
    int64_t row = 0;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (trimmed(line).empty()) continue;
      int64_t id = row++;
      ++total;
      try {
        json j = json::parse(line);
        posts.push_back(make_post(id, j.at("stock").get<std::string>(),
                                  j.at("ts").get<std::string>(), j.at("title").get<std::string>(),
                                  j.at("body").get<std::string>(), j.at("reads").get<int64_t>(),
                                  j.at("comments").get<int64_t>(), j.at("likes").get<int64_t>()));
      } catch (const std::exception& e) {
        note_bad(id, e.what());
      }
    }
    return finish_posts(std::move(posts), skipped, total, first_bad, path);
  }

  csv::Table t = csv::read_file(path);
  if (t.header.empty() && t.rows.empty()) return {};
  const char* names[] = {"stock", "ts", "title", "body", "reads", "comments", "likes"};
  int col[7];
  for (int i = 0; i < 7; ++i) {
    col[i] = t.column(names[i]);
    if (col[i] < 0)
      throw SchemaError("posts CSV '" + path.string() + "' is missing column '" + names[i] + "'");
  }
  for (size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    int64_t id = int64_t(r);
    ++total;
    try {
      if (row.size() != t.header.size()) throw ValidationError("wrong field count");
      posts.push_back(make_post(id, row[col[0]], row[col[1]], row[col[2]], row[col[3]],
                                csv::parse_int(row[col[4]], "reads"),
                                csv::parse_int(row[col[5]], "comments"),
                                csv::parse_int(row[col[6]], "likes")));
    } catch (const std::exception& e) {
      note_bad(id, e.what());
    }
  }
  return finish_posts(std::move(posts), skipped, total, first_bad, path);
}

void save_posts(const std::filesystem::path& path, std::span<const Post> posts) {
  std::string out;
  for (const Post& p : posts) {
    json j;
    j["stock"] = p.stock_id;
    j["ts"] = to_string(p.ts);
    j["title"] = p.title;
    j["body"] = p.body;
    j["reads"] = p.reads;
    j["comments"] = p.comments;
    j["likes"] = p.likes;
    out += j.dump();
    out.push_back('\n');
  }
  csv::write_text_file(path, out);
}

std::vector<LabeledText> load_labeled(const std::filesystem::path& path) {
  csv::Table t = csv::read_file(path);
  int ct = t.column("text"), cl = t.column("label");
  if (ct < 0 || cl < 0)
    throw SchemaError("labeled corpus '" + path.string() + "' must have columns text,label");
  std::vector<LabeledText> out;
  out.reserve(t.rows.size());
  for (size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (row.size() != t.header.size())
      throw SchemaError("labeled corpus row " + std::to_string(r) + ": wrong field count");
    long long label = csv::parse_int(row[cl], "label");
    if (label < -1 || label > 1)
      throw ValidationError("labeled corpus row " + std::to_string(r) + ": label must be in {-1,0,1}");
    if (trimmed(row[ct]).empty())
      throw ValidationError("labeled corpus row " + std::to_string(r) + ": empty text");
    out.push_back({row[ct], int(label)});
  }
  return out;
}

void save_labeled(const std::filesystem::path& path, std::span<const LabeledText> rows) {
  csv::Writer w;
  w.row({"text", "label"});
  for (const auto& r : rows) w.row({r.text, std::to_string(r.label)});
  w.save(path);
}

MarketSeries load_market(const std::filesystem::path& path, std::string stock_id) {
  csv::Table t = csv::read_file(path);
  if (t.header.size() < 2 || t.header[0] != "date" || t.header[1] != "close")
    throw SchemaError("market CSV '" + path.string() + "' must start with columns date,close");
  if (t.header.size() != 11)
    throw SchemaError("market CSV '" + path.string() + "' must have exactly 9 indicator columns, got " +
                      std::to_string(t.header.size() - 2));

  struct Row {
    Date date;
    double close;
    std::array<double, 9> ind;
  };
  std::vector<Row> rows;
  rows.reserve(t.rows.size());
  for (size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (row.size() != 11)
      throw SchemaError("market CSV row " + std::to_string(r) + ": expected 11 fields, got " +
                        std::to_string(row.size()));
    Row out;
    out.date = parse_date(row[0]);
    out.close = csv::parse_double(row[1], "close");
    if (!std::isfinite(out.close)) throw ValidationError("market CSV row " + std::to_string(r) + ": non-finite close");
    for (int i = 0; i < 9; ++i) out.ind[size_t(i)] = csv::parse_double(row[size_t(i) + 2], "indicator");
    rows.push_back(out);
  }

  bool sorted = std::is_sorted(rows.begin(), rows.end(),
                               [](const Row& a, const Row& b) { return a.date < b.date; });
  if (!sorted)
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.date < b.date; });
  for (size_t i = 1; i < rows.size(); ++i)
    if (rows[i].date == rows[i - 1].date)
      throw ValidationError("duplicate trading date " + to_string(rows[i].date) + " in '" +
                            path.string() + "'");

  MarketSeries m;
  m.stock_id = std::move(stock_id);
  m.resorted = !sorted;
  m.indicator_names.assign(t.header.begin() + 2, t.header.end());
  m.indicators.assign(9, {});
  for (auto& s : m.indicators) s.reserve(rows.size());
  m.dates.reserve(rows.size());
  m.close.reserve(rows.size());
  for (const Row& r : rows) {
    m.dates.push_back(r.date);
    m.close.push_back(r.close);
    for (int i = 0; i < 9; ++i) m.indicators[size_t(i)].push_back(r.ind[size_t(i)]);
  }
  return m;
}

void save_market(const std::filesystem::path& path, const MarketSeries& m) {
  csv::Writer w;
  std::vector<std::string> header = {"date", "close"};
  header.insert(header.end(), m.indicator_names.begin(), m.indicator_names.end());
  w.row(header);
  for (size_t r = 0; r < m.size(); ++r) {
    std::vector<std::string> row = {to_string(m.dates[r]), csv::format_shortest(m.close[r])};
    for (const auto& s : m.indicators) row.push_back(csv::format_shortest(s[r]));
    w.row(row);
  }
  w.save(path);
}

Alignment align_to_trading_days(std::span<const Post> posts, const MarketSeries& market,
                                int cutoff_seconds) {
  if (market.size() == 0) throw ValidationError("cannot align posts to an empty market series");
  Alignment a;
  a.days.reserve(market.size());
  for (Date d : market.dates) a.days.push_back({d, {}});

  for (size_t i = 0; i < posts.size(); ++i) {
    Date eff = posts[i].ts.date();
    if (posts[i].ts.seconds_of_day() >= cutoff_seconds) eff = eff.next();
    if (eff < market.dates.front()) {
      ++a.dropped_before;
      continue;
    }
    auto it = std::lower_bound(market.dates.begin(), market.dates.end(), eff);
    if (it == market.dates.end()) {
      ++a.dropped_after;
      continue;
    }
    a.days[size_t(it - market.dates.begin())].post_indices.push_back(i);
  }
  return a;
}

size_t split_point(size_t n, double ratio) {
  if (n < 2) throw ValidationError("chronological split needs at least 2 elements");
  if (!(ratio > 0.0 && ratio < 1.0))
    throw ValidationError("split ratio must lie strictly between 0 and 1");
  return size_t(std::floor(ratio * double(n) + 1e-9));
}

std::vector<WindowSample> make_windows(const Eigen::MatrixXd& features,
                                       std::span<const double> targets,
                                       std::span<const Date> dates, int window) {
  const auto n = size_t(features.rows());
  if (window < 1) throw ValidationError("window must be positive");
  if (targets.size() != n || dates.size() != n)
    throw ValidationError("make_windows: features, targets and dates must agree in length");
  if (n < size_t(window) + 1)
    throw ValidationError("make_windows: need at least window+1 rows, got " + std::to_string(n));

  std::vector<WindowSample> out;
  out.reserve(n - size_t(window));
  for (size_t t = size_t(window); t < n; ++t) {
    WindowSample s;
    s.features = features.middleRows(Eigen::Index(t) - window, window);
    s.target = targets[t];
    s.target_date = dates[t];
    out.push_back(std::move(s));
  }
  return out;
}

FeatureTable FeatureTable::select(std::span<const std::string> names) const {
  FeatureTable out;
  out.dates = dates;
  out.close = close;
  out.feature_names.assign(names.begin(), names.end());
  out.features.resize(features.rows(), Eigen::Index(names.size()));
  for (size_t j = 0; j < names.size(); ++j) {
    auto it = std::find(feature_names.begin(), feature_names.end(), names[j]);
    if (it == feature_names.end())
      throw ValidationError("unknown feature '" + names[j] + "'");
    out.features.col(Eigen::Index(j)) = features.col(it - feature_names.begin());
  }
  return out;
}

}  // namespace senticast::corpus
