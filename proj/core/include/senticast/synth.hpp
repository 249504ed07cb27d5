#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "senticast/corpus.hpp"
#include "senticast/index.hpp"

namespace senticast::synth {

/// Coupled forum/market world: a latent AR(1) sentiment process drives
/// next-day log-returns with strength `beta`, the per-day class mix of
/// posts, and (through `popularity_alignment`) how much attention posts
/// agreeing with the mood receive. `beta = 0` produces a null world with
/// no sentiment-price causality.
struct SynthParams {
  int days = 240;
  double phi = 0.6;                  // latent AR(1) coefficient, |phi| < 1
  double beta = 0.8;                 // return response to lagged sentiment
  double latent_noise = 0.002;       // innovation sigma of the latent process
  double return_noise = 0.0005;      // sigma of the return noise
  double posts_per_day = 60.0;       // Poisson mean
  int vocab_per_class = 12;          // token pool size per class
  double neutral_fraction = 0.3;     // share of neutral posts
  double class_tilt = 250.0;         // latent-to-class-imbalance gain
  double popularity_alignment = 0.7; // attention boost for mood-agreeing posts
  double base_price = 100.0;
  int labeled_per_class = 80;        // training corpus rows per class
  std::string stock_id = "SYN001";
  Date start_date{};                 // default 2022-06-01
  uint64_t seed = 1;
};

struct SynthData {
  std::vector<corpus::Post> posts;  // timestamp order, ids assigned
  corpus::MarketSeries market;
  std::vector<corpus::LabeledText> labeled;
  std::vector<double> latent;  // ground-truth sentiment per trading day
};

SynthData synth_generate(const SynthParams& params);

struct SynthFiles {
  std::filesystem::path posts, market, labeled, truth;
};

/// Writes posts.jsonl, market.csv, labeled.csv and truth_latent.csv under
/// `dir`. The truth file is named so downstream commands refuse it as an
/// input. Byte-identical for identical params.
SynthFiles write_synth(const SynthData& data, const std::filesystem::path& dir);

}  // namespace senticast::synth
