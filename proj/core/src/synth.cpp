#include "senticast/synth.hpp"

#include <algorithm>
#include <cmath>

#include "senticast/csv.hpp"
#include "senticast/rng.hpp"

namespace senticast::synth {

namespace {

void validate(const SynthParams& p) {
  if (p.days < 10) throw ValidationError("synth: need at least 10 trading days");
  if (!(std::fabs(p.phi) < 1)) throw ValidationError("synth: |phi| must be < 1");
  if (p.latent_noise <= 0 || p.return_noise <= 0 || p.posts_per_day <= 0 || p.base_price <= 0 ||
      p.class_tilt <= 0)
    throw ValidationError("synth: scales must be positive");
  if (p.neutral_fraction < 0 || p.neutral_fraction >= 1)
    throw ValidationError("synth: neutral fraction must lie in [0, 1)");
  if (p.vocab_per_class < 1 || p.labeled_per_class < 1)
    throw ValidationError("synth: vocabulary and labeled corpus sizes must be positive");
}

std::vector<std::string> token_pool(const char* stem, int n) {
  std::vector<std::string> pool;
  pool.reserve(size_t(n));
  for (int i = 0; i < n; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%02d", stem, i);
    pool.emplace_back(buf);
  }
  return pool;
}

// Class-pool text with a share of filler tokens, so classifier scores do
// not all saturate at the extremes.
std::string sample_text(Rng& rng, const std::vector<std::string>& pool,
                        const std::vector<std::string>& filler, int min_tokens, int max_tokens,
                        double filler_share = 0.3) {
  int count = min_tokens + int(rng.uniform_index(uint64_t(max_tokens - min_tokens + 1)));
  std::string out;
  for (int i = 0; i < count; ++i) {
    if (i) out.push_back(' ');
    const auto& src = (&pool != &filler && rng.bernoulli(filler_share)) ? filler : pool;
    out += src[rng.uniform_index(src.size())];
  }
  return out;
}

double rsi(std::span<const double> close, size_t t, int period) {
  if (t == 0) return 50.0;
  size_t start = t >= size_t(period) ? t - size_t(period) : 0;
  double gain = 0, loss = 0;
  for (size_t i = start + 1; i <= t; ++i) {
    double d = close[i] - close[i - 1];
    if (d > 0) gain += d;
    else loss += -d;
  }
  if (gain + loss == 0) return 50.0;
  return 100.0 * gain / (gain + loss);
}

double trailing_mean(std::span<const double> close, size_t t, int k) {
  size_t start = t + 1 >= size_t(k) ? t + 1 - size_t(k) : 0;
  double sum = 0;
  for (size_t i = start; i <= t; ++i) sum += close[i];
  return sum / double(t - start + 1);
}

}  // namespace

SynthData synth_generate(const SynthParams& params) {
  validate(params);
  const Date start = params.start_date.days != 0 ? params.start_date : make_date(2022, 6, 1);

  Rng root(params.seed);
  Rng latent_rng = root.stream("synth.latent");
  Rng market_rng = root.stream("synth.market");
  Rng post_rng = root.stream("synth.posts");
  Rng label_rng = root.stream("synth.labeled");

  SynthData out;

  // Trading calendar: consecutive weekdays.
  std::vector<Date> dates;
  Date d = start;
  while (int(dates.size()) < params.days) {
    if (!d.is_weekend()) dates.push_back(d);
    d = d.next();
  }

  // Latent sentiment and prices.
  const size_t n = size_t(params.days);
  std::vector<double> s(n), close(n);
  double stationary_sigma = params.latent_noise / std::sqrt(1.0 - params.phi * params.phi);
  s[0] = latent_rng.normal(0, stationary_sigma);
  for (size_t t = 1; t < n; ++t) s[t] = params.phi * s[t - 1] + latent_rng.normal(0, params.latent_noise);
  close[0] = params.base_price;
  for (size_t t = 1; t < n; ++t) {
    double r = params.beta * s[t - 1] + latent_rng.normal(0, params.return_noise);
    close[t] = close[t - 1] * std::exp(r);
  }
  out.latent = s;

  corpus::MarketSeries& m = out.market;
  m.stock_id = params.stock_id;
  m.dates = dates;
  m.close = close;
  m.indicator_names = {"open",   "high",          "low", "close_lag1", "volume",
                       "turnover_rate", "ma5", "ma10", "rsi14"};
  m.indicators.assign(9, std::vector<double>(n));
  for (size_t t = 0; t < n; ++t) {
    double open = close[t] * std::exp(market_rng.normal(0, params.return_noise));
    double span_hi = std::fabs(market_rng.normal(0, params.return_noise));
    double span_lo = std::fabs(market_rng.normal(0, params.return_noise));
    m.indicators[0][t] = open;
    m.indicators[1][t] = std::max(open, close[t]) * std::exp(span_hi);
    m.indicators[2][t] = std::min(open, close[t]) * std::exp(-span_lo);
    m.indicators[3][t] = t > 0 ? close[t - 1] : params.base_price;
    m.indicators[4][t] = 1e6 * std::exp(market_rng.normal(0, 0.3));
    double ret = t > 0 ? std::log(close[t] / close[t - 1]) : 0.0;
    m.indicators[5][t] = 1.0 + 100.0 * std::fabs(ret) + 0.05 * std::fabs(market_rng.normal());
    m.indicators[6][t] = trailing_mean(close, t, 5);
    m.indicators[7][t] = trailing_mean(close, t, 10);
    m.indicators[8][t] = rsi(close, t, 14);
  }

  // Token pools per class.
  auto bull_pool = token_pool("gain", params.vocab_per_class);
  auto bear_pool = token_pool("drop", params.vocab_per_class);
  auto flat_pool = token_pool("flat", params.vocab_per_class);
  auto pool_for = [&](int cls) -> const std::vector<std::string>& {
    return cls > 0 ? bull_pool : (cls < 0 ? bear_pool : flat_pool);
  };

  // Posts for trading day t are stamped in the window
  // (prev trading day's cutoff, day t's cutoff], so alignment maps them back.
  const int cutoff = corpus::kDefaultCutoffSeconds;
  for (size_t t = 0; t < n; ++t) {
    int64_t window_begin = t > 0 ? int64_t(dates[t - 1].days) * 86400 + cutoff
                                 : int64_t(dates[0].days) * 86400;
    int64_t window_end = int64_t(dates[t].days) * 86400 + cutoff;  // exclusive

    double tilt = std::tanh(params.class_tilt * s[t]);
    double p_bull = (1.0 - params.neutral_fraction) * (1.0 + tilt) / 2.0;
    double p_bear = (1.0 - params.neutral_fraction) * (1.0 - tilt) / 2.0;

    int64_t count = post_rng.poisson(params.posts_per_day);
    for (int64_t k = 0; k < count; ++k) {
      double u = post_rng.uniform();
      int cls = u < p_bull ? 1 : (u < p_bull + p_bear ? -1 : 0);

      corpus::Post p;
      p.stock_id = params.stock_id;
      p.ts.seconds = window_begin + int64_t(post_rng.uniform_index(uint64_t(window_end - window_begin)));
      p.title = sample_text(post_rng, pool_for(cls), flat_pool, 3, 7);
      p.body = sample_text(post_rng, pool_for(cls), flat_pool, 8, 19);

      // Attention is right-skewed (most posts modest, a few viral) and
      // boosted when the post agrees with the day's mood.
      double agreement = cls == 0 ? 0.0 : double(cls) * tilt;
      double boost = std::exp(params.popularity_alignment * agreement);
      auto skew = [&] { return std::exp(0.8 * post_rng.normal() - 0.32); };
      p.reads = post_rng.poisson(400.0 * boost * skew());
      p.comments = post_rng.poisson(3.0 * boost * skew());
      p.likes = post_rng.poisson(5.0 * boost * skew());
      out.posts.push_back(std::move(p));
    }
  }
  std::stable_sort(out.posts.begin(), out.posts.end(),
                   [](const corpus::Post& a, const corpus::Post& b) { return a.ts < b.ts; });
  for (size_t i = 0; i < out.posts.size(); ++i) out.posts[i].id = int64_t(i);

  // Labeled corpus for the built-in scorer, same token mixture as the posts.
  for (int cls : {-1, 0, 1})
    for (int i = 0; i < params.labeled_per_class; ++i)
      out.labeled.push_back({sample_text(label_rng, pool_for(cls), flat_pool, 3, 10), cls});

  return out;
}

SynthFiles write_synth(const SynthData& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  SynthFiles f;
  f.posts = dir / "posts.jsonl";
  f.market = dir / "market.csv";
  f.labeled = dir / "labeled.csv";
  f.truth = dir / "truth_latent.csv";

  corpus::save_posts(f.posts, data.posts);
  corpus::save_market(f.market, data.market);
  corpus::save_labeled(f.labeled, data.labeled);

  csv::Writer w;
  w.row({"date", "latent"});
  for (size_t t = 0; t < data.latent.size(); ++t)
    w.row({to_string(data.market.dates[t]), csv::format_shortest(data.latent[t])});
  w.save(f.truth);
  return f;
}

}  // namespace senticast::synth
