#pragma once

#include <Eigen/Core>
#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "senticast/corpus.hpp"

namespace senticast::scorer {

/// Unicode-aware tokenizer: contiguous ASCII letter/digit runs become one
/// lowercased token; every other non-separator codepoint (CJK in
/// particular) becomes its own token.
std::vector<std::string> tokenize(std::string_view text);

struct TokenVocabulary {
  std::vector<std::string> tokens;              // index -> token
  std::unordered_map<std::string, int> index;   // token -> index

  size_t size() const { return tokens.size(); }
  /// -1 for out-of-vocabulary tokens.
  int lookup(const std::string& token) const;
  int add(const std::string& token);
};

/// First-appearance ordering over the corpus: deterministic given the
/// corpus sequence.
TokenVocabulary build_vocabulary(std::span<const corpus::LabeledText> corpus);

struct TrainHyper {
  double lr = 0.5;
  int epochs = 200;
  int batch = 0;  // 0 = full batch
  uint64_t seed = 1;
};

/// Bag-of-words multinomial logistic regression over three classes.
/// Class order is fixed: row 0 bearish, row 1 neutral, row 2 bullish.
struct ClassifierModel {
  TokenVocabulary vocab;
  Eigen::MatrixXd weights;  // [3 x vocab]
  Eigen::Vector3d bias = Eigen::Vector3d::Zero();
  uint64_t seed = 0;
};

struct TrainOutcome {
  ClassifierModel model;
  /// Mean cross-entropy over the full corpus; entry 0 is the pre-training
  /// loss, entry e the loss after epoch e.
  std::vector<double> loss_history;
};

/// Mini-batch gradient descent on the cross-entropy loss. Deterministic
/// given the seed (it only drives the batch shuffle). Throws
/// ValidationError when a class is missing and DivergenceError on
/// non-finite loss.
TrainOutcome train_classifier(std::span<const corpus::LabeledText> corpus, const TrainHyper& hyper);

/// Mean cross-entropy of the model on the corpus.
double cross_entropy(const ClassifierModel& model, std::span<const corpus::LabeledText> corpus);
/// Loss plus analytic gradients (same reduction), exposed so tests can
/// check against finite differences.
double cross_entropy_with_grad(const ClassifierModel& model,
                               std::span<const corpus::LabeledText> corpus,
                               Eigen::MatrixXd& grad_weights, Eigen::Vector3d& grad_bias);

Eigen::Vector3d softmax3(const Eigen::Vector3d& logits);

struct Scored {
  double score = 0;  // p_bull - p_bear, in [-1, 1]
  int cls = 0;       // -1 / 0 / +1, ties resolved toward neutral
};

Scored score_text(const ClassifierModel& model, std::string_view text);

void save_classifier(const std::filesystem::path& path, const ClassifierModel& model);
ClassifierModel load_classifier(const std::filesystem::path& path);

struct ScoredPost {
  size_t post_index = 0;  // index into the scored post span
  int64_t post_id = 0;
  double title_score = 0;
  double body_score = 0;
  int title_class = 0;
  int body_class = 0;
};

std::vector<ScoredPost> score_posts(const ClassifierModel& model,
                                    std::span<const corpus::Post> posts);

struct ExternalScores {
  std::unordered_map<int64_t, std::pair<double, double>> by_id;  // id -> (title, body)
  size_t rejected = 0;  // rows with scores outside [-1, 1]
};

/// CSV `post_id,title_score,body_score`. Out-of-range rows are rejected and
/// counted; duplicate ids are an error.
ExternalScores load_external_scores(const std::filesystem::path& path);

/// Joins external scores onto posts; classes derive from the score sign.
/// Errors list ids present on one side only.
std::vector<ScoredPost> apply_external_scores(std::span<const corpus::Post> posts,
                                              const ExternalScores& scores);

void save_scores(const std::filesystem::path& path, std::span<const ScoredPost> scores);

/// Three-class report. Precision/recall are computed one-vs-rest per class
/// and macro-averaged over the classes present in actual or predicted
/// labels; F1 is the harmonic mean of the macro precision and macro recall.
struct ClassificationReport {
  double accuracy = 0;
  double precision = 0;  // macro
  double recall = 0;     // macro
  double f1 = 0;
  std::array<double, 3> per_class_precision{};  // bear, neutral, bull
  std::array<double, 3> per_class_recall{};
  std::array<double, 3> per_class_f1{};
  std::array<std::array<int64_t, 3>, 3> confusion{};  // [actual][predicted]
};

ClassificationReport classification_report(std::span<const int> predicted,
                                           std::span<const int> actual);

}  // namespace senticast::scorer
