#include "senticast/scorer.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "senticast/csv.hpp"
#include "senticast/rng.hpp"
#include "senticast/text.hpp"

namespace senticast::scorer {

using corpus::LabeledText;
using nlohmann::json;

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> out;
  std::string run;
  auto flush = [&] {
    if (!run.empty()) {
      out.push_back(run);
      run.clear();
    }
  };
  for (size_t i = 0; i < s.size();) {
    uint32_t cp = text::next_codepoint(s, i);
    bool ascii_alnum = (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
    if (ascii_alnum) {
      run.push_back(char(cp >= 'A' && cp <= 'Z' ? cp + 32 : cp));
      continue;
    }
    flush();
    if (text::is_whitespace(cp) || text::is_separator_punct(cp) || text::is_emoji(cp)) continue;
    std::string tok;
    text::append_codepoint(tok, cp);
    out.push_back(std::move(tok));
  }
  flush();
  return out;
}

int TokenVocabulary::lookup(const std::string& token) const {
  auto it = index.find(token);
  return it == index.end() ? -1 : it->second;
}

int TokenVocabulary::add(const std::string& token) {
  auto [it, inserted] = index.try_emplace(token, int(tokens.size()));
  if (inserted) tokens.push_back(token);
  return it->second;
}

TokenVocabulary build_vocabulary(std::span<const LabeledText> corpus) {
  TokenVocabulary v;
  for (const auto& row : corpus)
    for (const auto& tok : tokenize(row.text)) v.add(tok);
  return v;
}

namespace {

constexpr int label_to_class(int label) { return label + 1; }

// Sparse bag-of-words counts for one text.
std::vector<std::pair<int, double>> bow(const TokenVocabulary& vocab, std::string_view s) {
  std::unordered_map<int, double> counts;
  for (const auto& tok : tokenize(s)) {
    int idx = vocab.lookup(tok);
    if (idx >= 0) counts[idx] += 1.0;
  }
  std::vector<std::pair<int, double>> out(counts.begin(), counts.end());
  std::sort(out.begin(), out.end());
  return out;
}

Eigen::Vector3d logits_for(const ClassifierModel& m,
                           const std::vector<std::pair<int, double>>& x) {
  Eigen::Vector3d z = m.bias;
  for (auto [idx, cnt] : x) z += cnt * m.weights.col(idx);
  return z;
}

}  // namespace

Eigen::Vector3d softmax3(const Eigen::Vector3d& logits) {
  double mx = logits.maxCoeff();
  Eigen::Vector3d e = (logits.array() - mx).exp();
  return e / e.sum();
}

namespace {

struct Encoded {
  std::vector<std::pair<int, double>> x;
  int cls;
};

double batch_loss_grad(const ClassifierModel& m, std::span<const Encoded> batch,
                       Eigen::MatrixXd* gw, Eigen::Vector3d* gb) {
  double loss = 0;
  for (const Encoded& e : batch) {
    Eigen::Vector3d p = softmax3(logits_for(m, e.x));
    loss += -std::log(std::max(p[e.cls], 1e-300));
    if (gw) {
      Eigen::Vector3d delta = p;
      delta[e.cls] -= 1.0;
      delta /= double(batch.size());
      for (auto [idx, cnt] : e.x) gw->col(idx) += cnt * delta;
      *gb += delta;
    }
  }
  return loss / double(batch.size());
}

std::vector<Encoded> encode_corpus(const TokenVocabulary& vocab,
                                   std::span<const LabeledText> corpus) {
  std::vector<Encoded> enc;
  enc.reserve(corpus.size());
  for (const auto& row : corpus) enc.push_back({bow(vocab, row.text), label_to_class(row.label)});
  return enc;
}

}  // namespace

TrainOutcome train_classifier(std::span<const LabeledText> corpus, const TrainHyper& hyper) {
  if (corpus.empty()) throw ValidationError("training corpus is empty");
  std::array<int, 3> support{};
  for (const auto& row : corpus) {
    if (row.label < -1 || row.label > 1) throw ValidationError("label outside {-1,0,1}");
    ++support[size_t(label_to_class(row.label))];
  }
  for (int c = 0; c < 3; ++c)
    if (support[size_t(c)] == 0)
      throw ValidationError("training corpus has no examples of class " + std::to_string(c - 1));
  if (hyper.lr <= 0 || hyper.epochs < 0 || hyper.batch < 0)
    throw ValidationError("invalid classifier hyperparameters");

  ClassifierModel m;
  m.vocab = build_vocabulary(corpus);
  m.weights = Eigen::MatrixXd::Zero(3, Eigen::Index(m.vocab.size()));
  m.bias.setZero();
  m.seed = hyper.seed;

  auto enc = encode_corpus(m.vocab, corpus);
  const size_t n = enc.size();
  const size_t batch = hyper.batch == 0 ? n : std::min(size_t(hyper.batch), n);

  Rng shuffle_rng = Rng(hyper.seed).stream("scorer.shuffle");
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;

  TrainOutcome out;
  out.loss_history.push_back(batch_loss_grad(m, enc, nullptr, nullptr));

  Eigen::MatrixXd gw(3, Eigen::Index(m.vocab.size()));
  Eigen::Vector3d gb;
  std::vector<Encoded> minibatch;
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    if (batch < n) shuffle_rng.shuffle(order);
    for (size_t start = 0; start < n; start += batch) {
      size_t stop = std::min(start + batch, n);
      minibatch.clear();
      for (size_t k = start; k < stop; ++k) minibatch.push_back(enc[order[k]]);
      gw.setZero();
      gb.setZero();
      batch_loss_grad(m, minibatch, &gw, &gb);
      m.weights -= hyper.lr * gw;
      m.bias -= hyper.lr * gb;
    }
    double full = batch_loss_grad(m, enc, nullptr, nullptr);
    if (!std::isfinite(full))
      throw DivergenceError("classifier training diverged at epoch " + std::to_string(epoch), epoch);
    out.loss_history.push_back(full);
  }
  out.model = std::move(m);
  return out;
}

double cross_entropy(const ClassifierModel& model, std::span<const LabeledText> corpus) {
  auto enc = encode_corpus(model.vocab, corpus);
  return batch_loss_grad(model, enc, nullptr, nullptr);
}

double cross_entropy_with_grad(const ClassifierModel& model, std::span<const LabeledText> corpus,
                               Eigen::MatrixXd& grad_weights, Eigen::Vector3d& grad_bias) {
  auto enc = encode_corpus(model.vocab, corpus);
  grad_weights = Eigen::MatrixXd::Zero(3, model.weights.cols());
  grad_bias.setZero();
  return batch_loss_grad(model, enc, &grad_weights, &grad_bias);
}

Scored score_text(const ClassifierModel& model, std::string_view text) {
  Eigen::Vector3d p = softmax3(logits_for(model, bow(model.vocab, text)));
  Scored s;
  s.score = p[2] - p[0];
  if (p[2] > p[0] && p[2] > p[1]) s.cls = 1;
  else if (p[0] > p[2] && p[0] > p[1]) s.cls = -1;
  else s.cls = 0;  // ties resolve toward neutral
  return s;
}

void save_classifier(const std::filesystem::path& path, const ClassifierModel& model) {
  json j;
  j["format"] = "senticast-scorer-v1";
  j["classes"] = {"bear", "neutral", "bull"};
  j["seed"] = model.seed;
  j["vocab"] = model.vocab.tokens;
  json w = json::array();
  for (int r = 0; r < 3; ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < model.weights.cols(); ++c) row.push_back(model.weights(r, c));
    w.push_back(std::move(row));
  }
  j["weights"] = std::move(w);
  j["bias"] = {model.bias[0], model.bias[1], model.bias[2]};
  csv::write_text_file(path, j.dump(2) + "\n");
}

ClassifierModel load_classifier(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(csv::read_text_file(path));
  } catch (const json::exception& e) {
    throw SchemaError("classifier file '" + path.string() + "': " + e.what());
  }
  if (j.value("format", "") != "senticast-scorer-v1")
    throw SchemaError("classifier file '" + path.string() + "' has unknown format");
  ClassifierModel m;
  for (const auto& tok : j.at("vocab")) m.vocab.add(tok.get<std::string>());
  m.weights.resize(3, Eigen::Index(m.vocab.size()));
  const auto& w = j.at("weights");
  if (w.size() != 3) throw SchemaError("classifier weights must have 3 rows");
  for (int r = 0; r < 3; ++r) {
    if (w[size_t(r)].size() != m.vocab.size())
      throw SchemaError("classifier weight row width does not match vocabulary");
    for (size_t c = 0; c < m.vocab.size(); ++c)
      m.weights(r, Eigen::Index(c)) = w[size_t(r)][c].get<double>();
  }
  const auto& b = j.at("bias");
  for (int r = 0; r < 3; ++r) m.bias[r] = b.at(size_t(r)).get<double>();
  m.seed = j.value("seed", uint64_t(0));
  return m;
}

std::vector<ScoredPost> score_posts(const ClassifierModel& model,
                                    std::span<const corpus::Post> posts) {
  std::vector<ScoredPost> out;
  out.reserve(posts.size());
  for (size_t i = 0; i < posts.size(); ++i) {
    Scored t = score_text(model, posts[i].title);
    Scored b = score_text(model, posts[i].body);
    out.push_back({i, posts[i].id, t.score, b.score, t.cls, b.cls});
  }
  return out;
}

ExternalScores load_external_scores(const std::filesystem::path& path) {
  csv::Table t = csv::read_file(path);
  int ci = t.column("post_id"), ct = t.column("title_score"), cb = t.column("body_score");
  if (ci < 0 || ct < 0 || cb < 0)
    throw SchemaError("external scores '" + path.string() +
                      "' must have columns post_id,title_score,body_score");
  ExternalScores out;
  for (size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    int64_t id = csv::parse_int(row[ci], "post_id");
    double ts = csv::parse_double(row[ct], "title_score");
    double bs = csv::parse_double(row[cb], "body_score");
    if (ts < -1 || ts > 1 || bs < -1 || bs > 1 || !std::isfinite(ts) || !std::isfinite(bs)) {
      ++out.rejected;
      continue;
    }
    if (!out.by_id.emplace(id, std::make_pair(ts, bs)).second)
      throw ValidationError("duplicate post_id " + std::to_string(id) + " in '" + path.string() + "'");
  }
  return out;
}

namespace {

int class_of_score(double s) { return s > 0 ? 1 : (s < 0 ? -1 : 0); }

std::string join_ids(const std::vector<int64_t>& ids) {
  std::string s;
  for (size_t i = 0; i < ids.size() && i < 20; ++i) {
    if (i) s += ",";
    s += std::to_string(ids[i]);
  }
  if (ids.size() > 20) s += ",...";
  return s;
}

}  // namespace

std::vector<ScoredPost> apply_external_scores(std::span<const corpus::Post> posts,
                                              const ExternalScores& scores) {
  std::vector<int64_t> missing;
  std::vector<ScoredPost> out;
  out.reserve(posts.size());
  std::unordered_map<int64_t, bool> used;
  for (size_t i = 0; i < posts.size(); ++i) {
    auto it = scores.by_id.find(posts[i].id);
    if (it == scores.by_id.end()) {
      missing.push_back(posts[i].id);
      continue;
    }
    used[posts[i].id] = true;
    auto [ts, bs] = it->second;
    out.push_back({i, posts[i].id, ts, bs, class_of_score(ts), class_of_score(bs)});
  }
  if (!missing.empty())
    throw ValidationError("external scores missing for post ids: " + join_ids(missing));
  std::vector<int64_t> unknown;
  for (const auto& [id, _] : scores.by_id)
    if (!used.count(id)) unknown.push_back(id);
  if (!unknown.empty()) {
    std::sort(unknown.begin(), unknown.end());
    throw ValidationError("external scores reference unknown post ids: " + join_ids(unknown));
  }
  return out;
}

void save_scores(const std::filesystem::path& path, std::span<const ScoredPost> scores) {
  csv::Writer w;
  w.row({"post_id", "title_score", "body_score"});
  for (const auto& s : scores)
    w.row({std::to_string(s.post_id), csv::format_fixed(s.title_score, 6),
           csv::format_fixed(s.body_score, 6)});
  w.save(path);
}

ClassificationReport classification_report(std::span<const int> predicted,
                                           std::span<const int> actual) {
  if (predicted.size() != actual.size())
    throw ValidationError("classification_report: length mismatch");
  if (predicted.empty()) throw ValidationError("classification_report: empty input");

  ClassificationReport rep;
  for (size_t i = 0; i < actual.size(); ++i) {
    int a = actual[i], p = predicted[i];
    if (a < -1 || a > 1 || p < -1 || p > 1)
      throw ValidationError("classification_report: label outside {-1,0,1}");
    ++rep.confusion[size_t(a + 1)][size_t(p + 1)];
  }

  int64_t correct = 0, total = int64_t(actual.size());
  for (int c = 0; c < 3; ++c) correct += rep.confusion[size_t(c)][size_t(c)];
  rep.accuracy = double(correct) / double(total);

  double psum = 0, rsum = 0;
  int present = 0;
  for (int c = 0; c < 3; ++c) {
    int64_t tp = rep.confusion[size_t(c)][size_t(c)];
    int64_t fp = 0, fn = 0;
    for (int o = 0; o < 3; ++o) {
      if (o == c) continue;
      fp += rep.confusion[size_t(o)][size_t(c)];
      fn += rep.confusion[size_t(c)][size_t(o)];
    }
    double prec = (tp + fp) > 0 ? double(tp) / double(tp + fp) : 0.0;
    double rec = (tp + fn) > 0 ? double(tp) / double(tp + fn) : 0.0;
    rep.per_class_precision[size_t(c)] = prec;
    rep.per_class_recall[size_t(c)] = rec;
    rep.per_class_f1[size_t(c)] = (prec + rec) > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
    if (tp + fp + fn > 0) {  // class appears in actual or predicted
      psum += prec;
      rsum += rec;
      ++present;
    }
  }
  rep.precision = present ? psum / present : 0.0;
  rep.recall = present ? rsum / present : 0.0;
  rep.f1 = (rep.precision + rep.recall) > 0
               ? 2 * rep.precision * rep.recall / (rep.precision + rep.recall)
               : 0.0;
  return rep;
}

}  // namespace senticast::scorer
