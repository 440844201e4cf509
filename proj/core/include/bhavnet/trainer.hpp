#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bhavnet/dataset.hpp"
#include "bhavnet/embeddings.hpp"
#include "bhavnet/hyperparams.hpp"
#include "bhavnet/metrics.hpp"
#include "bhavnet/params.hpp"
#include "bhavnet/rng.hpp"

namespace bhavnet {

// params -= lr * grads, every array. Throws InvalidInput when layouts differ.
void sgd_step(ModelParams& params, const ModelParams& grads, double lr);

// One language's data. The table must outlive the training call.
struct LanguageData {
  std::string language;
  const EmbeddingTable* table = nullptr;
  std::vector<LabeledPair> train;
  std::vector<LabeledPair> dev;
};

struct BatchRecord {
  std::size_t epoch = 0;  // 1-based
  std::size_t index = 0;  // position within the epoch
  std::string language;
  std::size_t size = 0;
  double bce = 0.0;
  double margin = 0.0;
  double total = 0.0;
};

struct SplitSummary {
  double loss = 0.0;
  EvalReport report;
};

struct EpochRecord {
  std::size_t epoch = 0;
  // Mean batch loss and train-mode predictions collected during the epoch.
  SplitSummary train;
  // Dev split of all languages pooled; absent without dev data.
  std::optional<SplitSummary> dev;
  bool improved = false;
};

struct TrainCallbacks {
  std::function<void(const BatchRecord&)> on_batch;
  // Receives the parameters as they stand after the epoch's last step.
  std::function<void(const EpochRecord&, const ModelParams&)> on_epoch;
};

struct TrainOptions {
  // When set, best.ckpt is rewritten on every dev improvement and last.ckpt after every epoch.
  std::optional<std::filesystem::path> checkpoint_dir;
  TrainCallbacks callbacks;
};

struct TrainState {
  HyperParams hp;  // resolved
  ModelParams params;
  std::size_t epoch = 0;
  std::vector<BatchRecord> loss_trace;
  std::vector<EpochRecord> epochs;
  Rng dropout_rng;
  Rng sampling_rng;

  double best_dev_macro_f1 = -1.0;
  std::size_t best_epoch = 0;
  // Float32-rounded parameters that scored best_dev_macro_f1.
  std::optional<ModelParams> best_params;
  std::optional<std::filesystem::path> best_checkpoint;
  bool stopped_early = false;

  // best_params when dev selection happened, otherwise params.
  const ModelParams& selected() const { return best_params ? *best_params : params; }
};

/// Trains for hp.epochs epochs (early stopping on pooled dev macro-F1 after
/// hp.patience epochs without improvement).
///
/// Each epoch walks every language's train split once. Batches are drawn by
/// a per-language shuffled partition and interleaved round-robin in the
/// order of `languages`; a language whose batches run out drops out of the
/// rotation. Every batch performs forward, loss, backward and one SGD step.
/// Dev scoring uses float32-rounded parameters, matching what a checkpoint
/// stores.
///
/// Throws TrainingError naming epoch, language and batch on a non-finite loss.
TrainState train(std::span<const LanguageData> languages, const HyperParams& hp, const TrainOptions& options = {});

/// Scores pairs in consecutive batches of hp.batch_size, input order, eval
/// mode. Throws InvalidInput on an empty list.
EvalReport evaluate(std::span<const LabeledPair> pairs, const EmbeddingTable& table, const ModelParams& params,
                    const HyperParams& hp);
SplitSummary evaluate_with_loss(std::span<const LabeledPair> pairs, const EmbeddingTable& table,
                                const ModelParams& params, const HyperParams& hp);
// Per-pair probabilities under the same batching as evaluate.
std::vector<double> predict_probabilities(std::span<const LabeledPair> pairs, const EmbeddingTable& table,
                                          const ModelParams& params, const HyperParams& hp);

struct Prediction {
  double probability = 0.0;
  double sim_syn = 0.0;
  double sim_ant = 0.0;
  int label = 0;
};

// Single pair, eval mode. Throws VocabularyError for an unknown token.
Prediction predict(std::string_view w1, std::string_view w2, const std::string& language,
                   const EmbeddingTable& table, const ModelParams& params, const HyperParams& hp);

// Run-directory formats.
std::string metrics_csv_header();
std::string metrics_csv_rows(const EpochRecord& record);
std::string format_final_report(const TrainState& state, const std::optional<EvalReport>& test);

}  // namespace bhavnet
