#include "senticast/cli.hpp"

#include <algorithm>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "senticast/csv.hpp"
#include "senticast/eval.hpp"
#include "senticast/index.hpp"
#include "senticast/report.hpp"
#include "senticast/scorer.hpp"
#include "senticast/stats.hpp"
#include "senticast/synth.hpp"

namespace senticast::cli {

using nlohmann::json;

namespace {

// Ground-truth artifacts from `synth` must never feed a modeling command.
void check_input_path(const std::string& path) {
  std::string name = std::filesystem::path(path).filename().string();
  if (name.rfind("truth_", 0) == 0)
    throw ValidationError("refusing ground-truth file '" + path + "' as an input");
}

std::filesystem::path ensure_out_dir(const std::string& out) {
  if (out.empty()) throw ValidationError("missing required output directory (--out)");
  std::filesystem::path dir(out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out + "'");
  return dir;
}

// Values resolve flag > config file > default.
class Cfg {
 public:
  explicit Cfg(const std::optional<std::string>& config_path) {
    if (config_path) {
      try {
        j_ = json::parse(csv::read_text_file(*config_path));
      } catch (const json::exception& e) {
        throw ValidationError("config file '" + *config_path + "': " + e.what());
      }
    }
  }

  template <class T>
  T get(const std::optional<T>& flag, const char* key, T def) const {
    if (flag) return *flag;
    if (j_.contains(key)) return j_.at(key).get<T>();
    return def;
  }

  template <class T>
  T require(const std::optional<T>& flag, const char* key) const {
    if (flag) return *flag;
    if (j_.contains(key)) return j_.at(key).get<T>();
    throw ValidationError(std::string("missing required field '") + key +
                          "' (flag or config key)");
  }

 private:
  json j_;
};

std::vector<int> parse_int_list(const std::string& s, const char* what) {
  std::vector<int> out;
  size_t pos = 0;
  while (pos < s.size()) {
    size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    out.push_back(int(csv::parse_int(std::string_view(s).substr(pos, comma - pos), what)));
    pos = comma + 1;
  }
  if (out.empty()) throw ValidationError(std::string("empty list for ") + what);
  return out;
}

std::vector<std::string> parse_string_list(const std::string& s) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (pos < s.size()) {
    size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    out.push_back(s.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return out;
}

std::pair<std::string, std::string> parse_named_path(const std::string& s) {
  size_t eq = s.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == s.size())
    throw ValidationError("expected NAME=PATH, got '" + s + "'");
  return {s.substr(0, eq), s.substr(eq + 1)};
}

corpus::PostFormat parse_post_format(const std::string& s) {
  if (s == "jsonl") return corpus::PostFormat::jsonl;
  if (s == "csv") return corpus::PostFormat::csv;
  throw ValidationError("unknown posts format '" + s + "' (expected jsonl|csv)");
}

// Inner-join of market indicators and named sentiment series on dates.
corpus::FeatureTable build_feature_table(
    const corpus::MarketSeries& market,
    const std::vector<std::pair<std::string, index::DailySentimentSeries>>& sentiment) {
  corpus::FeatureTable t;
  t.feature_names = market.indicator_names;
  for (const auto& [name, series] : sentiment) {
    if (std::find(t.feature_names.begin(), t.feature_names.end(), name) != t.feature_names.end())
      throw ValidationError("duplicate feature name '" + name + "'");
    t.feature_names.push_back(name);
  }

  std::vector<size_t> keep;  // market row indices present in every sentiment series
  std::vector<std::vector<double>> senti_cols(sentiment.size());
  for (size_t r = 0; r < market.size(); ++r) {
    bool ok = true;
    std::vector<double> vals(sentiment.size());
    for (size_t s = 0; s < sentiment.size(); ++s) {
      const auto& dates = sentiment[s].second.dates;
      auto it = std::lower_bound(dates.begin(), dates.end(), market.dates[r]);
      if (it == dates.end() || *it != market.dates[r]) {
        ok = false;
        break;
      }
      vals[s] = sentiment[s].second.values[size_t(it - dates.begin())];
    }
    if (!ok) continue;
    keep.push_back(r);
    for (size_t s = 0; s < sentiment.size(); ++s) senti_cols[s].push_back(vals[s]);
  }
  if (keep.empty()) throw ValidationError("no trading dates shared by market and sentiment series");

  t.dates.reserve(keep.size());
  t.close.reserve(keep.size());
  t.features.resize(Eigen::Index(keep.size()), Eigen::Index(t.feature_names.size()));
  for (size_t i = 0; i < keep.size(); ++i) {
    size_t r = keep[i];
    t.dates.push_back(market.dates[r]);
    t.close.push_back(market.close[r]);
    for (size_t c = 0; c < 9; ++c) t.features(Eigen::Index(i), Eigen::Index(c)) = market.indicators[c][r];
    for (size_t s = 0; s < sentiment.size(); ++s)
      t.features(Eigen::Index(i), Eigen::Index(9 + s)) = senti_cols[s][i];
  }
  return t;
}

struct TrainFlags {
  std::optional<int> hidden, layers, epochs, patience, batch, window;
  std::optional<double> lr, weight_decay, dropout, split, val_fraction;
  std::optional<bool> no_highway;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--window", f.window, "input window length (7|15|30)");
  cmd->add_option("--hidden", f.hidden, "hidden size per direction");
  cmd->add_option("--layers", f.layers, "stacked layer count");
  cmd->add_option("--epochs", f.epochs, "max training epochs");
  cmd->add_option("--patience", f.patience, "early-stop patience");
  cmd->add_option("--batch", f.batch, "mini-batch size");
  cmd->add_option("--lr", f.lr, "learning rate");
  cmd->add_option("--weight-decay", f.weight_decay, "decoupled weight decay");
  cmd->add_option("--dropout", f.dropout, "inter-layer dropout rate");
  cmd->add_flag("--no-highway", f.no_highway, "disable the carry gates");
  cmd->add_option("--split", f.split, "chronological train fraction (default 0.8)");
  cmd->add_option("--val-fraction", f.val_fraction, "early-stop validation tail fraction");
}

net::TrainConfig resolve_train_config(const Cfg& cfg, const TrainFlags& f, uint64_t seed,
                                      const net::TrainConfig& defaults) {
  net::TrainConfig tc = defaults;
  tc.hidden = cfg.get(f.hidden, "hidden", tc.hidden);
  tc.layers = cfg.get(f.layers, "layers", tc.layers);
  tc.max_epochs = cfg.get(f.epochs, "epochs", tc.max_epochs);
  tc.patience = cfg.get(f.patience, "patience", tc.patience);
  tc.batch = cfg.get(f.batch, "batch", tc.batch);
  tc.learning_rate = cfg.get(f.lr, "lr", tc.learning_rate);
  tc.weight_decay = cfg.get(f.weight_decay, "weight_decay", tc.weight_decay);
  tc.dropout = cfg.get(f.dropout, "dropout", tc.dropout);
  if (cfg.get(f.no_highway, "no_highway", false)) tc.use_highway = false;
  tc.seed = seed;
  return tc;
}

struct LoadedSeries {
  std::vector<std::pair<std::string, index::DailySentimentSeries>> series;
  std::vector<std::string> names;
  std::vector<std::string> paths;
};

LoadedSeries load_sentiment(const std::vector<std::string>& name_paths) {
  LoadedSeries out;
  for (const auto& np : name_paths) {
    auto [name, path] = parse_named_path(np);
    check_input_path(path);
    out.series.emplace_back(name, index::load_series_csv(path));
    out.names.push_back(name);
    out.paths.push_back(path);
  }
  return out;
}

// -------- subcommand implementations --------

int cmd_synth(const std::vector<std::string>& args, const Cfg& cfg,
              const std::optional<std::string>& out_flag, const std::optional<uint64_t>& seed_flag,
              const synth::SynthParams& flag_params, const std::optional<std::string>& start) {
  synth::SynthParams p = flag_params;
  p.seed = cfg.get(seed_flag, "seed", uint64_t(1));
  if (start) p.start_date = parse_date(*start);
  auto dir = ensure_out_dir(cfg.get(out_flag, "out", std::string()));
  synth::SynthData data = synth_generate(p);
  synth::SynthFiles files = write_synth(data, dir);
  std::vector<std::string> outputs = {files.posts.string(), files.market.string(),
                                      files.labeled.string(), files.truth.string()};
  report::write_manifest(dir, "synth", args, p.seed, {}, outputs);
  std::cout << "synth: " << data.posts.size() << " posts over " << p.days << " trading days -> "
            << dir.string() << "\n";
  return 0;
}

int cmd_train_scorer(const std::vector<std::string>& args, const Cfg& cfg,
                     const std::optional<std::string>& labeled,
                     const std::optional<std::string>& out_flag,
                     const std::optional<uint64_t>& seed_flag, const std::optional<double>& lr,
                     const std::optional<int>& epochs, const std::optional<int>& batch) {
  std::string labeled_path = cfg.require(labeled, "labeled");
  check_input_path(labeled_path);
  auto dir = ensure_out_dir(cfg.get(out_flag, "out", std::string()));

  scorer::TrainHyper hyper;
  hyper.lr = cfg.get(lr, "scorer_lr", hyper.lr);
  hyper.epochs = cfg.get(epochs, "scorer_epochs", hyper.epochs);
  hyper.batch = cfg.get(batch, "scorer_batch", hyper.batch);
  hyper.seed = cfg.get(seed_flag, "seed", uint64_t(1));

  auto corpus_rows = corpus::load_labeled(labeled_path);
  scorer::TrainOutcome outcome = scorer::train_classifier(corpus_rows, hyper);

  auto model_path = dir / "scorer.json";
  scorer::save_classifier(model_path, outcome.model);
  csv::Writer hist;
  hist.row({"epoch", "loss"});
  for (size_t e = 0; e < outcome.loss_history.size(); ++e)
    hist.row({std::to_string(e), csv::format_fixed(outcome.loss_history[e], 6)});
  auto hist_path = dir / "scorer_history.csv";
  hist.save(hist_path);

  report::write_manifest(dir, "train-scorer", args, hyper.seed, {labeled_path},
                         {model_path.string(), hist_path.string()});
  std::cout << "train-scorer: " << corpus_rows.size() << " rows, vocabulary "
            << outcome.model.vocab.size() << ", final loss "
            << csv::format_fixed(outcome.loss_history.back(), 6) << "\n";
  return 0;
}

int cmd_score(const std::vector<std::string>& args, const Cfg& cfg,
              const std::optional<std::string>& posts, const std::optional<std::string>& format,
              const std::optional<std::string>& scorer_path,
              const std::optional<std::string>& external,
              const std::optional<std::string>& out_flag,
              const std::optional<uint64_t>& seed_flag) {
  std::string posts_path = cfg.require(posts, "posts");
  check_input_path(posts_path);
  auto dir = ensure_out_dir(cfg.get(out_flag, "out", std::string()));
  uint64_t seed = cfg.get(seed_flag, "seed", uint64_t(1));

  auto loaded = corpus::load_posts(posts_path,
                                   parse_post_format(cfg.get(format, "posts_format", std::string("jsonl"))));
  if (loaded.skipped > 0)
    std::cerr << "warning: skipped " << loaded.skipped << " invalid post rows\n";

  std::string scorer_file = cfg.get(scorer_path, "scorer", std::string());
  std::string external_file = cfg.get(external, "external", std::string());
  if (scorer_file.empty() == external_file.empty())
    throw ValidationError("score needs exactly one of --scorer or --external");

  std::vector<scorer::ScoredPost> scores;
  std::vector<std::string> inputs = {posts_path};
  if (!scorer_file.empty()) {
    check_input_path(scorer_file);
    inputs.push_back(scorer_file);
    scores = scorer::score_posts(scorer::load_classifier(scorer_file), loaded.posts);
  } else {
    check_input_path(external_file);
    inputs.push_back(external_file);
    auto ext = scorer::load_external_scores(external_file);
    if (ext.rejected > 0)
      std::cerr << "warning: rejected " << ext.rejected << " out-of-range score rows\n";
    scores = scorer::apply_external_scores(loaded.posts, ext);
  }

  auto scores_path = dir / "scores.csv";
  scorer::save_scores(scores_path, scores);
  report::write_manifest(dir, "score", args, seed, inputs, {scores_path.string()});
  std::cout << "score: " << scores.size() << " posts scored -> " << scores_path.string() << "\n";
  return 0;
}

int cmd_index(const std::vector<std::string>& args, const Cfg& cfg,
              const std::optional<std::string>& posts, const std::optional<std::string>& format,
              const std::optional<std::string>& market, const std::optional<std::string>& scores,
              const std::optional<std::string>& variant, const std::optional<std::string>& field,
              const std::optional<std::string>& cutoff,
              const std::optional<std::string>& out_flag,
              const std::optional<uint64_t>& seed_flag) {
  std::string posts_path = cfg.require(posts, "posts");
  std::string market_path = cfg.require(market, "market");
  std::string scores_path = cfg.require(scores, "scores");
  for (const auto& p : {posts_path, market_path, scores_path}) check_input_path(p);
  auto dir = ensure_out_dir(cfg.get(out_flag, "out", std::string()));
  uint64_t seed = cfg.get(seed_flag, "seed", uint64_t(1));

  index::Variant var = index::parse_variant(cfg.get(variant, "index_variant", std::string("pop")));
  index::Field fld = index::parse_field(cfg.get(field, "field", std::string("title")));
  int cutoff_secs = parse_time_of_day(cfg.get(cutoff, "cutoff", std::string("15:00")));

  auto loaded = corpus::load_posts(posts_path,
                                   parse_post_format(cfg.get(format, "posts_format", std::string("jsonl"))));
  auto mkt = corpus::load_market(market_path);
  if (mkt.resorted) std::cerr << "note: market rows were re-sorted into date order\n";
  auto ext = scorer::load_external_scores(scores_path);
  auto scored = scorer::apply_external_scores(loaded.posts, ext);
  auto alignment = corpus::align_to_trading_days(loaded.posts, mkt, cutoff_secs);
  if (alignment.dropped() > 0)
    std::cerr << "note: dropped " << alignment.dropped() << " posts outside the trading range\n";

  index::PopularityStats stats = index::fit_popularity_stats(loaded.posts, mkt.stock_id);
  auto series = index::build_index_series(alignment, loaded.posts, scored, var, fld, &stats);

  auto out_path = dir / ("index_" + index::to_string(var) + "_" + index::to_string(fld) + ".csv");
  index::save_series_csv(out_path, series);
  report::write_manifest(dir, "index", args, seed, {posts_path, market_path, scores_path},
                         {out_path.string()});
  std::cout << "index: " << series.dates.size() << " trading days, floor hits "
            << series.floor_hits << " -> " << out_path.string() << "\n";
  return 0;
}

int cmd_gct(const std::vector<std::string>& args, const Cfg& cfg,
            const std::optional<std::string>& market, const std::vector<std::string>& series_flags,
            const std::optional<int>& max_lag, const std::optional<std::string>& out_flag,
            const std::optional<uint64_t>& seed_flag) {
  std::string market_path = cfg.require(market, "market");
  check_input_path(market_path);
  if (series_flags.empty()) throw ValidationError("gct needs at least one --series NAME=PATH");
  auto dir = ensure_out_dir(cfg.get(out_flag, "out", std::string()));
  uint64_t seed = cfg.get(seed_flag, "seed", uint64_t(1));
  int lags = cfg.get(max_lag, "max_lag", 3);
  if (lags < 1) throw ValidationError("--max-lag must be >= 1");

  auto mkt = corpus::load_market(market_path);
  auto roc = stats::roc(mkt.close);
  std::vector<Date> roc_dates(mkt.dates.begin() + 1, mkt.dates.end());

  LoadedSeries senti = load_sentiment(series_flags);

  std::vector<stats::AdfReportRow> adf_rows;
  std::vector<stats::GrangerResult> gct_rows;

  for (const auto& [name, series] : senti.series) {
    // Pair on the common trading-date axis.
    std::vector<double> x, y;
    for (size_t i = 0; i < roc_dates.size(); ++i) {
      auto it = std::lower_bound(series.dates.begin(), series.dates.end(), roc_dates[i]);
      if (it == series.dates.end() || *it != roc_dates[i]) continue;
      x.push_back(series.values[size_t(it - series.dates.begin())]);
      y.push_back(roc[i]);
    }
    if (adf_rows.empty()) adf_rows.push_back({"ROC", stats::adf_test(y)});
    adf_rows.push_back({name, stats::adf_test(x)});
    for (int lag = 1; lag <= lags; ++lag) {
      gct_rows.push_back(stats::granger_test(y, x, lag, name, "ROC"));
      gct_rows.push_back(stats::granger_test(x, y, lag, "ROC", name));
    }
  }

  auto adf_path = dir / "adf.csv";
  auto gct_path = dir / "gct.csv";
  stats::save_adf_csv(adf_path, adf_rows);
  stats::save_gct_csv(gct_path, mkt.stock_id.empty() ? "stock" : mkt.stock_id, gct_rows);

  std::vector<std::string> inputs = {market_path};
  inputs.insert(inputs.end(), senti.paths.begin(), senti.paths.end());
  report::write_manifest(dir, "gct", args, seed, inputs, {adf_path.string(), gct_path.string()});
  std::cout << "gct: " << gct_rows.size() << " tests -> " << gct_path.string() << "\n";
  return 0;
}

struct TablePrep {
  corpus::FeatureTable table;
  std::vector<std::string> inputs;
  std::vector<std::string> sentiment_names;
};

TablePrep prepare_table(const Cfg& cfg, const std::optional<std::string>& market,
                        const std::vector<std::string>& sentiment_flags,
                        const std::optional<std::string>& features) {
  std::string market_path = cfg.require(market, "market");
  check_input_path(market_path);
  LoadedSeries senti = load_sentiment(sentiment_flags);

  TablePrep prep;
  auto mkt = corpus::load_market(market_path);
  prep.table = build_feature_table(mkt, senti.series);
  prep.inputs.push_back(market_path);
  prep.inputs.insert(prep.inputs.end(), senti.paths.begin(), senti.paths.end());
  prep.sentiment_names = senti.names;

  std::string flist = cfg.get(features, "features", std::string());
  if (!flist.empty()) prep.table = prep.table.select(parse_string_list(flist));
  return prep;
}

int cmd_train(const std::vector<std::string>& args, const Cfg& cfg,
              const std::optional<std::string>& market,
              const std::vector<std::string>& sentiment_flags,
              const std::optional<std::string>& features, const TrainFlags& tf,
              const std::optional<std::string>& out_flag,
              const std::optional<uint64_t>& seed_flag) {
  auto dir = ensure_out_dir(cfg.get(out_flag, "out", std::string()));
  uint64_t seed = cfg.get(seed_flag, "seed", uint64_t(1));
  TablePrep prep = prepare_table(cfg, market, sentiment_flags, features);

  int window = cfg.get(tf.window, "window", 7);
  double split_ratio = cfg.get(tf.split, "split", 0.8);
  double val_fraction = cfg.get(tf.val_fraction, "val_fraction", 0.1);
  net::TrainConfig tc = resolve_train_config(cfg, tf, seed, net::TrainConfig{});

  size_t split = corpus::split_point(prep.table.dates.size(), split_ratio);
  auto samples = corpus::make_windows(prep.table.features.topRows(Eigen::Index(split)),
                                      std::span(prep.table.close).subspan(0, split),
                                      std::span(prep.table.dates).subspan(0, split), window);
  net::ForecastModel model = net::init_model(int(prep.table.features.cols()), tc);
  net::TrainResult result = net::train(model, samples, tc, val_fraction);

  auto ckpt = dir / "model.ckpt";
  net::save_model(ckpt, model);
  csv::Writer hist;
  hist.row({"epoch", "train_mse", "val_mse"});
  for (size_t e = 0; e < result.train_loss.size(); ++e)
    hist.row({std::to_string(e), csv::format_fixed(result.train_loss[e], 9),
              csv::format_fixed(result.val_loss[e], 9)});
  auto hist_path = dir / "train_history.csv";
  hist.save(hist_path);

  report::write_manifest(dir, "train", args, seed, prep.inputs,
                         {ckpt.string(), hist_path.string()});
  std::cout << "train: " << samples.size() << " samples, " << result.epochs_run
            << " epochs, best epoch " << result.best_epoch << " -> " << ckpt.string() << "\n";
  return 0;
}

int cmd_predict(const std::vector<std::string>& args, const Cfg& cfg,
                const std::optional<std::string>& market,
                const std::vector<std::string>& sentiment_flags,
                const std::optional<std::string>& features,
                const std::optional<std::string>& model_path, const TrainFlags& tf,
                const std::optional<std::string>& from_date,
                const std::optional<std::string>& out_flag,
                const std::optional<uint64_t>& seed_flag) {
  std::string ckpt = cfg.require(model_path, "model");
  check_input_path(ckpt);
  auto dir = ensure_out_dir(cfg.get(out_flag, "out", std::string()));
  uint64_t seed = cfg.get(seed_flag, "seed", uint64_t(1));
  TablePrep prep = prepare_table(cfg, market, sentiment_flags, features);

  int window = cfg.get(tf.window, "window", 7);
  net::ForecastModel model = net::load_model(ckpt);

  // Default test range: the chronological tail after the train split.
  std::vector<Date> test_dates;
  std::vector<double> actual;
  size_t begin;
  if (from_date) {
    Date d0 = parse_date(*from_date);
    begin = size_t(std::lower_bound(prep.table.dates.begin(), prep.table.dates.end(), d0) -
                   prep.table.dates.begin());
  } else {
    begin = corpus::split_point(prep.table.dates.size(), cfg.get(tf.split, "split", 0.8));
  }
  for (size_t i = begin; i < prep.table.dates.size(); ++i) {
    test_dates.push_back(prep.table.dates[i]);
    actual.push_back(prep.table.close[i]);
  }

  auto pred_path = dir / "predictions.csv";
  std::vector<std::string> outputs = {pred_path.string()};
  if (test_dates.empty()) {
    std::cerr << "warning: empty prediction range; writing header-only CSV\n";
    csv::Writer w;
    w.row({"date", "actual", "predicted", "rpe"});
    w.save(pred_path);
  } else {
    net::PredictionSeries pred = net::predict_series(model, prep.table, window, test_dates);
    auto rpe = eval::rpe_series(actual, pred.predicted);
    csv::Writer w;
    w.row({"date", "actual", "predicted", "rpe"});
    for (size_t i = 0; i < test_dates.size(); ++i)
      w.row({to_string(test_dates[i]), csv::format_fixed(actual[i], 6),
             csv::format_fixed(pred.predicted[i], 6), csv::format_fixed(rpe[i], 6)});
    w.save(pred_path);
  }

  std::vector<std::string> inputs = prep.inputs;
  inputs.push_back(ckpt);
  report::write_manifest(dir, "predict", args, seed, inputs, outputs);
  std::cout << "predict: " << test_dates.size() << " dates -> " << pred_path.string() << "\n";
  return 0;
}

int cmd_evaluate(const std::vector<std::string>& args, const Cfg& cfg,
                 const std::optional<std::string>& market,
                 const std::vector<std::string>& sentiment_flags,
                 const std::optional<std::string>& features, const TrainFlags& tf,
                 const std::optional<std::string>& out_flag,
                 const std::optional<uint64_t>& seed_flag) {
  auto dir = ensure_out_dir(cfg.get(out_flag, "out", std::string()));
  uint64_t seed = cfg.get(seed_flag, "seed", uint64_t(1));
  TablePrep prep = prepare_table(cfg, market, sentiment_flags, features);

  eval::ExperimentConfig ec;
  ec.window = cfg.get(tf.window, "window", 7);
  ec.split_ratio = cfg.get(tf.split, "split", 0.8);
  ec.validation_fraction = cfg.get(tf.val_fraction, "val_fraction", ec.validation_fraction);
  ec.train = resolve_train_config(cfg, tf, seed, net::TrainConfig{});

  eval::ExperimentResult result = eval::run_experiment(prep.table, ec, seed);

  auto pred_path = dir / "predictions.csv";
  auto metrics_path = dir / "metrics.csv";
  eval::save_prediction_csv(pred_path, result);
  eval::save_metrics_csv(metrics_path, result);
  std::vector<std::string> outputs = {pred_path.string(), metrics_path.string()};

  if (!result.dates.empty()) {
    auto svg_path = dir / "report.svg";
    csv::write_text_file(svg_path, report::svg_line_chart("actual vs predicted close",
                                                          result.dates, result.actual,
                                                          result.predicted));
    outputs.push_back(svg_path.string());
  } else {
    std::cerr << "warning: empty prediction set; no SVG written\n";
  }

  report::write_manifest(dir, "evaluate", args, seed, prep.inputs, outputs);
  std::cout << "evaluate: rmse " << csv::format_fixed(result.report.metrics.rmse, 6) << ", mape "
            << csv::format_fixed(result.report.metrics.mape, 6) << "%, r2 "
            << csv::format_fixed(result.report.metrics.r2, 6) << "\n";
  return 0;
}

int cmd_ablate(const std::vector<std::string>& args, const Cfg& cfg,
               const std::optional<std::string>& market,
               const std::vector<std::string>& sentiment_flags,
               const std::optional<std::string>& windows_flag,
               const std::optional<int>& seed_count, const TrainFlags& tf,
               const std::optional<std::string>& out_flag,
               const std::optional<uint64_t>& seed_flag) {
  auto dir = ensure_out_dir(cfg.get(out_flag, "out", std::string()));
  uint64_t seed = cfg.get(seed_flag, "seed", uint64_t(1));
  if (sentiment_flags.empty())
    throw ValidationError("ablate needs at least one --sentiment NAME=PATH series");
  TablePrep prep = prepare_table(cfg, market, sentiment_flags, std::nullopt);

  std::vector<int> windows =
      parse_int_list(cfg.get(windows_flag, "windows", std::string("7,15,30")), "windows");
  int n_seeds = cfg.get(seed_count, "seed_count", 2);
  if (n_seeds < 1) throw ValidationError("--seed-count must be >= 1");
  std::vector<uint64_t> seeds(static_cast<size_t>(n_seeds));
  for (int i = 0; i < n_seeds; ++i) seeds[size_t(i)] = seed + uint64_t(i);

  eval::AblationConfig ac;
  ac.base.split_ratio = cfg.get(tf.split, "split", 0.8);
  // Desk-scale profile: small net, short schedule, wide validation tail.
  // The study compares configurations, not absolute capacity; override with
  // the train flags for full-size runs.
  net::TrainConfig light;
  light.hidden = 16;
  light.max_epochs = 300;
  light.patience = 40;
  light.learning_rate = 3e-3;
  ac.base.validation_fraction = cfg.get(tf.val_fraction, "val_fraction", 0.2);
  ac.base.train = resolve_train_config(cfg, tf, seed, light);
  ac.technical_features.assign(prep.table.feature_names.begin(),
                               prep.table.feature_names.begin() + 9);
  ac.sentiment_features = prep.sentiment_names;

  eval::AblationTable table = eval::run_ablation(prep.table, windows, seeds, ac);
  auto out_path = dir / "ablation.csv";
  eval::save_ablation_csv(out_path, table);
  report::write_manifest(dir, "ablate", args, seed, prep.inputs, {out_path.string()});
  std::cout << "ablate: " << table.rows.size() << " rows (" << windows.size() << " windows x 4 configs, "
            << n_seeds << " seeds) -> " << out_path.string() << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"investor-sentiment indices and BiLSTM-highway price forecasting"};
  app.set_help_all_flag("--help-all");
  app.require_subcommand(1);

  std::optional<std::string> config_path, out;
  std::optional<uint64_t> seed;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file; flags override its keys");
    cmd->add_option("--seed", seed, "root random seed");
    cmd->add_option("--out", out, "output directory");
  };

  // synth
  auto* c_synth = app.add_subcommand("synth", "generate a coupled synthetic forum/market dataset");
  synth::SynthParams sp_defaults;
  std::optional<int> sy_days, sy_vocab, sy_labeled;
  std::optional<double> sy_phi, sy_beta, sy_posts, sy_lnoise, sy_rnoise, sy_neutral, sy_tilt,
      sy_align, sy_base;
  std::optional<std::string> sy_stock, sy_start;
  add_common(c_synth);
  c_synth->add_option("--days", sy_days, "trading days");
  c_synth->add_option("--phi", sy_phi, "latent AR(1) coefficient");
  c_synth->add_option("--beta", sy_beta, "return response to lagged sentiment");
  c_synth->add_option("--posts-per-day", sy_posts, "Poisson mean posts per day");
  c_synth->add_option("--latent-noise", sy_lnoise, "latent innovation sigma");
  c_synth->add_option("--return-noise", sy_rnoise, "return noise sigma");
  c_synth->add_option("--neutral-fraction", sy_neutral, "share of neutral posts");
  c_synth->add_option("--class-tilt", sy_tilt, "latent-to-class gain");
  c_synth->add_option("--pop-alignment", sy_align, "popularity alignment strength");
  c_synth->add_option("--base-price", sy_base, "starting price");
  c_synth->add_option("--vocab", sy_vocab, "tokens per class pool");
  c_synth->add_option("--labeled-per-class", sy_labeled, "labeled rows per class");
  c_synth->add_option("--stock", sy_stock, "stock id");
  c_synth->add_option("--start-date", sy_start, "first calendar date (YYYY-MM-DD)");

  // train-scorer
  auto* c_ts = app.add_subcommand("train-scorer", "train the built-in sentiment classifier");
  std::optional<std::string> ts_labeled;
  std::optional<double> ts_lr;
  std::optional<int> ts_epochs, ts_batch;
  add_common(c_ts);
  c_ts->add_option("--labeled", ts_labeled, "labeled corpus CSV (text,label)");
  c_ts->add_option("--lr", ts_lr, "learning rate");
  c_ts->add_option("--epochs", ts_epochs, "training epochs");
  c_ts->add_option("--batch", ts_batch, "mini-batch size (0 = full batch)");

  // score
  auto* c_score = app.add_subcommand("score", "score posts with a classifier or external scores");
  std::optional<std::string> sc_posts, sc_format, sc_scorer, sc_external;
  add_common(c_score);
  c_score->add_option("--posts", sc_posts, "posts file");
  c_score->add_option("--posts-format", sc_format, "jsonl|csv (default jsonl)");
  c_score->add_option("--scorer", sc_scorer, "trained classifier JSON");
  c_score->add_option("--external", sc_external, "external scores CSV");

  // index
  auto* c_index = app.add_subcommand("index", "build a daily sentiment index series");
  std::optional<std::string> ix_posts, ix_format, ix_market, ix_scores, ix_variant, ix_field,
      ix_cutoff;
  add_common(c_index);
  c_index->add_option("--posts", ix_posts, "posts file");
  c_index->add_option("--posts-format", ix_format, "jsonl|csv (default jsonl)");
  c_index->add_option("--market", ix_market, "market CSV");
  c_index->add_option("--scores", ix_scores, "scores CSV (post_id,title_score,body_score)");
  c_index->add_option("--index-variant", ix_variant, "bi|score|pop (default pop)");
  c_index->add_option("--field", ix_field, "title|body (default title)");
  c_index->add_option("--cutoff", ix_cutoff, "intraday cutoff HH:MM (default 15:00)");

  // gct
  auto* c_gct = app.add_subcommand("gct", "stationarity and Granger causality report");
  std::optional<std::string> g_market;
  std::vector<std::string> g_series;
  std::optional<int> g_maxlag;
  add_common(c_gct);
  c_gct->add_option("--market", g_market, "market CSV");
  c_gct->add_option("--series", g_series, "sentiment series as NAME=PATH (repeatable)");
  c_gct->add_option("--max-lag", g_maxlag, "test lags 1..N (default 3)");

  // train / predict / evaluate / ablate share table and train flags
  std::optional<std::string> t_market, t_features;
  std::vector<std::string> t_sentiment;
  TrainFlags tf;

  auto add_table_flags = [&](CLI::App* cmd) {
    cmd->add_option("--market", t_market, "market CSV");
    cmd->add_option("--sentiment", t_sentiment, "sentiment series as NAME=PATH (repeatable)");
    cmd->add_option("--features", t_features, "comma list of feature columns to use");
  };

  auto* c_train = app.add_subcommand("train", "train a forecast model and write a checkpoint");
  add_common(c_train);
  add_table_flags(c_train);
  add_train_flags(c_train, tf);

  auto* c_pred = app.add_subcommand("predict", "predict closes from a checkpoint");
  std::optional<std::string> p_model, p_from;
  add_common(c_pred);
  add_table_flags(c_pred);
  c_pred->add_option("--model", p_model, "model checkpoint");
  c_pred->add_option("--window", tf.window, "input window length");
  c_pred->add_option("--split", tf.split, "tail fraction boundary when --from-date is absent");
  c_pred->add_option("--from-date", p_from, "first prediction date (YYYY-MM-DD)");

  auto* c_eval = app.add_subcommand("evaluate", "train on the 80% split and report test metrics");
  add_common(c_eval);
  add_table_flags(c_eval);
  add_train_flags(c_eval, tf);

  auto* c_abl = app.add_subcommand("ablate", "4-configuration ablation study over windows and seeds");
  std::optional<std::string> a_windows;
  std::optional<int> a_seed_count;
  add_common(c_abl);
  add_table_flags(c_abl);
  add_train_flags(c_abl, tf);
  c_abl->add_option("--windows", a_windows, "comma list of windows (default 7,15,30)");
  c_abl->add_option("--seed-count", a_seed_count, "seeds per configuration (default 2)");

  std::vector<std::string> argv_copy = args;
  try {
    std::vector<const char*> argv;
    argv.push_back("senticast");
    for (const auto& a : argv_copy) argv.push_back(a.c_str());
    app.parse(int(argv.size()), argv.data());

    Cfg cfg(config_path);
    if (c_synth->parsed()) {
      synth::SynthParams p = sp_defaults;
      p.days = cfg.get(sy_days, "days", p.days);
      p.phi = cfg.get(sy_phi, "phi", p.phi);
      p.beta = cfg.get(sy_beta, "beta", p.beta);
      p.posts_per_day = cfg.get(sy_posts, "posts_per_day", p.posts_per_day);
      p.latent_noise = cfg.get(sy_lnoise, "latent_noise", p.latent_noise);
      p.return_noise = cfg.get(sy_rnoise, "return_noise", p.return_noise);
      p.neutral_fraction = cfg.get(sy_neutral, "neutral_fraction", p.neutral_fraction);
      p.class_tilt = cfg.get(sy_tilt, "class_tilt", p.class_tilt);
      p.popularity_alignment = cfg.get(sy_align, "pop_alignment", p.popularity_alignment);
      p.base_price = cfg.get(sy_base, "base_price", p.base_price);
      p.vocab_per_class = cfg.get(sy_vocab, "vocab", p.vocab_per_class);
      p.labeled_per_class = cfg.get(sy_labeled, "labeled_per_class", p.labeled_per_class);
      p.stock_id = cfg.get(sy_stock, "stock", p.stock_id);
      return cmd_synth(args, cfg, out, seed, p, sy_start);
    }
    if (c_ts->parsed())
      return cmd_train_scorer(args, cfg, ts_labeled, out, seed, ts_lr, ts_epochs, ts_batch);
    if (c_score->parsed())
      return cmd_score(args, cfg, sc_posts, sc_format, sc_scorer, sc_external, out, seed);
    if (c_index->parsed())
      return cmd_index(args, cfg, ix_posts, ix_format, ix_market, ix_scores, ix_variant, ix_field,
                       ix_cutoff, out, seed);
    if (c_gct->parsed()) return cmd_gct(args, cfg, g_market, g_series, g_maxlag, out, seed);
    if (c_train->parsed())
      return cmd_train(args, cfg, t_market, t_sentiment, t_features, tf, out, seed);
    if (c_pred->parsed())
      return cmd_predict(args, cfg, t_market, t_sentiment, t_features, p_model, tf, p_from, out,
                         seed);
    if (c_eval->parsed())
      return cmd_evaluate(args, cfg, t_market, t_sentiment, t_features, tf, out, seed);
    if (c_abl->parsed())
      return cmd_ablate(args, cfg, t_market, t_sentiment, a_windows, a_seed_count, tf, out, seed);
    throw ValidationError("no subcommand given");
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "senticast: error: " << e.what() << "\n";
    return 2;
  } catch (const DivergenceError& e) {
    std::cerr << "senticast: error: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "senticast: error: " << e.what() << "\n";
    return 4;
  } catch (const ValidationError& e) {
    std::cerr << "senticast: error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "senticast: error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace senticast::cli
