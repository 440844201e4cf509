#include "bhavnet/trainer.hpp"

#include <cmath>
#include <cstdio>

#include "bhavnet/autodiff.hpp"
#include "bhavnet/checkpoint.hpp"
#include "bhavnet/error.hpp"
#include "bhavnet/model.hpp"
#include "bhavnet/objective.hpp"

namespace bhavnet {
namespace {

struct BatchResult {
  ad::LossVars loss;
  std::vector<double> probs;
};

BatchResult run_batch(Tape& tape, const ParamVars& vars, std::span<const LabeledPair> batch,
                      const EmbeddingTable& table, const HyperParams& hp, Mode mode, Rng& rng) {
  const BatchForward f = forward_batch(tape, vars, batch, table, hp, mode, rng);
  BatchResult out;
  out.loss = ad::total_loss(tape, f, batch, hp);
  const Tensor& p = tape.value(f.probs);
  out.probs.assign(p.data().begin(), p.data().end());
  return out;
}

// A single-pair batch pools into one prediction; it is replicated so counts stay per pair.
void count_predictions(ConfusionCounts& counts, std::span<const double> probs, std::span<const LabeledPair> batch) {
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double p = probs.size() == batch.size() ? probs[i] : probs[0];
    counts.add(threshold_label(p), label_value(batch[i].label));
  }
}

std::size_t resolve_dim(std::span<const LanguageData> languages) {
  std::size_t dim = 0;
  for (const LanguageData& l : languages) {
    if (l.table == nullptr) throw InvalidInput("language '" + l.language + "' has no embedding table");
    if (dim != 0 && l.table->dim() != dim) {
      throw ConfigError("embedding tables disagree on dimension: " + std::to_string(dim) + " vs " +
                        std::to_string(l.table->dim()));
    }
    dim = l.table->dim();
  }
  return dim;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string csv_row(std::size_t epoch, const char* split, const SplitSummary& s) {
  const EvalReport& r = s.report;
  std::string row = std::to_string(epoch) + "," + split + "," + fmt(s.loss) + "," + fmt(r.macro_f1) + "," +
                    fmt(r.accuracy);
  for (const ClassMetrics& c : r.per_class) row += "," + fmt(c.precision) + "," + fmt(c.recall) + "," + fmt(c.f1);
  return row + "\n";
}

}  // namespace

void sgd_step(ModelParams& params, const ModelParams& grads, double lr) {
  const std::vector<Tensor> g = flatten(grads);
  std::size_t i = 0;
  params.for_each([&](const std::string& name, Tensor& p) {
    if (i >= g.size()) throw InvalidInput("sgd_step: no gradient for '" + name + "'");
    if (g[i].shape() != p.shape()) {
      throw InvalidInput("sgd_step: gradient for '" + name + "' has shape " + shape_string(g[i].shape()) +
                         ", parameter has " + shape_string(p.shape()));
    }
    auto pd = p.data();
    const auto gd = g[i].data();
    for (std::size_t k = 0; k < pd.size(); ++k) pd[k] -= lr * gd[k];
    ++i;
  });
  if (i != g.size()) throw InvalidInput("sgd_step: more gradient arrays than parameters");
}

TrainState train(std::span<const LanguageData> languages, const HyperParams& hp_in, const TrainOptions& options) {
  if (languages.empty()) throw InvalidInput("train: no languages");
  bool any_train = false;
  for (const LanguageData& l : languages) any_train = any_train || !l.train.empty();
  if (!any_train) throw InvalidInput("train: every train split is empty");

  const HyperParams hp = hp_in.resolved(resolve_dim(languages));
  hp.validate();

  Rng init_rng = Rng::stream(hp.seed, Stream::init);
  TrainState state;
  state.hp = hp;
  state.params = init_params(hp, init_rng);
  state.dropout_rng = Rng::stream(hp.seed, Stream::dropout);
  state.sampling_rng = Rng::stream(hp.seed, Stream::sampling);

  std::vector<BatchSampler> samplers;
  for (const LanguageData& l : languages) samplers.emplace_back(l.train.size(), hp.batch_size);

  bool has_dev = false;
  for (const LanguageData& l : languages) has_dev = has_dev || !l.dev.empty();

  if (options.checkpoint_dir) std::filesystem::create_directories(*options.checkpoint_dir);

  std::size_t stale = 0;
  for (std::size_t epoch = 1; epoch <= hp.epochs; ++epoch) {
    std::vector<std::vector<std::vector<std::size_t>>> plans;
    for (std::size_t l = 0; l < languages.size(); ++l) {
      plans.push_back(languages[l].train.empty() ? std::vector<std::vector<std::size_t>>{}
                                                 : samplers[l].epoch(state.sampling_rng));
    }

    EpochRecord record;
    record.epoch = epoch;
    ConfusionCounts train_counts;
    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t round = 0;; ++round) {
      bool any = false;
      for (std::size_t l = 0; l < languages.size(); ++l) {
        if (round >= plans[l].size()) continue;
        any = true;
        const LanguageData& lang = languages[l];
        std::vector<LabeledPair> batch;
        for (std::size_t idx : plans[l][round]) batch.push_back(lang.train[idx]);

        Tape tape;
        const ParamVars vars = bind(tape, state.params);
        const BatchResult r = run_batch(tape, vars, batch, *lang.table, hp, Mode::train, state.dropout_rng);
        BatchRecord br{.epoch = epoch,
                       .index = batch_index,
                       .language = lang.language,
                       .size = batch.size(),
                       .bce = tape.value(r.loss.bce)[0],
                       .margin = tape.value(r.loss.margin)[0],
                       .total = tape.value(r.loss.total)[0]};
        if (!std::isfinite(br.total)) {
          throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", language '" +
                              lang.language + "', batch " + std::to_string(batch_index) + " (bce " +
                              std::to_string(br.bce) + ", margin " + std::to_string(br.margin) + ")");
        }
        tape.backward(r.loss.total);
        sgd_step(state.params, gradients(tape, vars), hp.lr);

        count_predictions(train_counts, r.probs, batch);
        loss_sum += br.total;
        state.loss_trace.push_back(br);
        if (options.callbacks.on_batch) options.callbacks.on_batch(br);
        ++batch_index;
      }
      if (!any) break;
    }
    record.train.loss = loss_sum / static_cast<double>(batch_index);
    record.train.report = report_from_counts(train_counts);

    const ModelParams rounded = quantized(state.params);
    if (has_dev) {
      SplitSummary dev;
      ConfusionCounts counts;
      double loss_weighted = 0.0;
      std::size_t n = 0;
      for (const LanguageData& l : languages) {
        if (l.dev.empty()) continue;
        const SplitSummary s = evaluate_with_loss(l.dev, *l.table, rounded, hp);
        counts += s.report.counts;
        loss_weighted += s.loss * static_cast<double>(l.dev.size());
        n += l.dev.size();
      }
      dev.loss = loss_weighted / static_cast<double>(n);
      dev.report = report_from_counts(counts);
      record.dev = dev;
      if (dev.report.macro_f1 > state.best_dev_macro_f1) {
        record.improved = true;
        state.best_dev_macro_f1 = dev.report.macro_f1;
        state.best_epoch = epoch;
        state.best_params = rounded;
        if (options.checkpoint_dir) {
          const auto path = *options.checkpoint_dir / "best.ckpt";
          save_checkpoint(rounded, hp, path);
          state.best_checkpoint = path;
        }
        stale = 0;
      } else {
        ++stale;
      }
    }
    if (options.checkpoint_dir) save_checkpoint(rounded, hp, *options.checkpoint_dir / "last.ckpt");

    state.epoch = epoch;
    state.epochs.push_back(record);
    if (options.callbacks.on_epoch) options.callbacks.on_epoch(record, state.params);
    if (has_dev && hp.patience > 0 && stale >= hp.patience) {
      state.stopped_early = true;
      break;
    }
  }
  return state;
}

SplitSummary evaluate_with_loss(std::span<const LabeledPair> pairs, const EmbeddingTable& table,
                                const ModelParams& params, const HyperParams& hp) {
  if (pairs.empty()) throw InvalidInput("evaluate: empty pair list");
  Rng unused(0);
  ConfusionCounts counts;
  double loss_sum = 0.0;
  for (std::size_t start = 0; start < pairs.size(); start += hp.batch_size) {
    const auto batch = pairs.subspan(start, std::min(hp.batch_size, pairs.size() - start));
    Tape tape;
    const ParamVars vars = bind(tape, params);
    const BatchResult r = run_batch(tape, vars, batch, table, hp, Mode::eval, unused);
    loss_sum += tape.value(r.loss.total)[0] * static_cast<double>(batch.size());
    count_predictions(counts, r.probs, batch);
  }
  return {loss_sum / static_cast<double>(pairs.size()), report_from_counts(counts)};
}

EvalReport evaluate(std::span<const LabeledPair> pairs, const EmbeddingTable& table, const ModelParams& params,
                    const HyperParams& hp) {
  if (pairs.empty()) throw InvalidInput("evaluate: empty pair list");
  const std::vector<double> probs = predict_probabilities(pairs, table, params, hp);
  ConfusionCounts counts;
  for (std::size_t i = 0; i < pairs.size(); ++i) counts.add(threshold_label(probs[i]), label_value(pairs[i].label));
  return report_from_counts(counts);
}

std::vector<double> predict_probabilities(std::span<const LabeledPair> pairs, const EmbeddingTable& table,
                                          const ModelParams& params, const HyperParams& hp) {
  Rng unused(0);
  std::vector<double> out;
  out.reserve(pairs.size());
  for (std::size_t start = 0; start < pairs.size(); start += hp.batch_size) {
    const auto batch = pairs.subspan(start, std::min(hp.batch_size, pairs.size() - start));
    const BatchPrediction bp = predict_batch(batch, table, params, hp, Mode::eval, unused);
    for (std::size_t i = 0; i < batch.size(); ++i) out.push_back(bp.probs.size() == batch.size() ? bp.probs[i] : bp.probs[0]);
  }
  return out;
}

Prediction predict(std::string_view w1, std::string_view w2, const std::string& language,
                   const EmbeddingTable& table, const ModelParams& params, const HyperParams& hp) {
  const LabeledPair pair = make_labeled_pair(w1, w2, Relation::synonym, language);
  // Surface the vocabulary error before any shape work.
  table.lookup(pair.w1);
  table.lookup(pair.w2);
  Rng unused(0);
  const BatchPrediction bp = predict_batch(std::span(&pair, 1), table, params, hp, Mode::eval, unused);
  Prediction out;
  out.probability = bp.probs.at(0);
  out.sim_syn = bp.pairs.at(0).sim_syn;
  out.sim_ant = bp.pairs.at(0).sim_ant;
  out.label = threshold_label(out.probability);
  return out;
}

std::string metrics_csv_header() {
  return "epoch,split,loss,macro_f1,accuracy,precision_0,recall_0,f1_0,precision_1,recall_1,f1_1\n";
}

std::string metrics_csv_rows(const EpochRecord& record) {
  std::string out = csv_row(record.epoch, "train", record.train);
  if (record.dev) out += csv_row(record.epoch, "dev", *record.dev);
  return out;
}

std::string format_final_report(const TrainState& state, const std::optional<EvalReport>& test) {
  std::string out;
  out += "epochs_completed " + std::to_string(state.epoch) + "\n";
  out += "optimizer_steps " + std::to_string(state.loss_trace.size()) + "\n";
  out += std::string("stopped_early ") + (state.stopped_early ? "true" : "false") + "\n";
  if (!state.loss_trace.empty()) {
    const BatchRecord& last = state.loss_trace.back();
    out += "final_batch_loss " + fmt(last.total) + " bce " + fmt(last.bce) + " margin " + fmt(last.margin) + "\n";
  }
  if (state.best_params) {
    out += "best_epoch " + std::to_string(state.best_epoch) + "\n";
    out += "best_dev_macro_f1 " + fmt(state.best_dev_macro_f1) + "\n";
  }
  if (state.best_checkpoint) out += "best_checkpoint " + state.best_checkpoint->string() + "\n";
  if (test) {
    out += "[test]\n";
    out += format_report(*test);
  }
  return out;
}

}  // namespace bhavnet
