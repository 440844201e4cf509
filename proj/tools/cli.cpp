#include "cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "bhavnet/checkpoint.hpp"
#include "bhavnet/dataset.hpp"
#include "bhavnet/embeddings.hpp"
#include "bhavnet/error.hpp"
#include "bhavnet/grad_check.hpp"
#include "bhavnet/hyperparams.hpp"
#include "bhavnet/metrics.hpp"
#include "bhavnet/model.hpp"
#include "bhavnet/pair_graph.hpp"
#include "bhavnet/synthetic.hpp"
#include "bhavnet/trainer.hpp"

namespace bhavnet::cli {
namespace fs = std::filesystem;
namespace {

constexpr double kGradTolerance = 1e-4;

struct FieldFlag {
  const char* key;
  const char* names;
  const char* type;
  const char* help;
};

// One flag per HyperParams field; booleans are handled as switches.
const std::vector<FieldFlag>& field_flags() {
  static const std::vector<FieldFlag> flags = {
      {"d", "--d", "UINT", "input embedding width (0: take it from the embeddings)"},
      {"d_prime", "--d_prime", "UINT", "projection width"},
      {"fused_dim", "--fused_dim", "UINT", "fused node feature width (0: 2*d_prime)"},
      {"H", "--H", "UINT", "attention heads"},
      {"L_layers", "--L_layers", "UINT", "transformer layers"},
      {"tau", "--tau", "FLOAT", "similarity threshold for graph edges"},
      {"lambda_w", "--lambda_w,--lambda", "FLOAT", "weight of the margin loss"},
      {"m_syn", "--m_syn", "FLOAT", "synonym margin"},
      {"m_ant", "--m_ant", "FLOAT", "antonym margin"},
      {"dropout_rate", "--dropout_rate", "FLOAT", "dropout probability"},
      {"lr", "--lr", "FLOAT", "SGD learning rate"},
      {"seed", "--seed", "UINT", "run seed"},
      {"hidden", "--hidden", "UINT", "classifier hidden width (0: fused_dim/2)"},
      {"trans_weight", "--trans_weight", "FLOAT", "weight of transitive edges"},
      {"batch_size", "--batch_size", "UINT", "pairs per batch"},
      {"epochs", "--epochs", "UINT", "maximum epochs"},
      {"patience", "--patience", "UINT", "early-stopping patience in epochs (0: off)"},
  };
  return flags;
}

struct HyperFlags {
  std::string config_path;
  std::map<std::string, std::string> raw;
  bool single_space = false;
  bool no_graph = false;
  CLI::Option* single_space_opt = nullptr;
  CLI::Option* no_graph_opt = nullptr;
};

void add_hyper_flags(CLI::App& app, HyperFlags& flags) {
  app.add_option("--config", flags.config_path, "JSON file of hyperparameters; flags take precedence")
      ->check(CLI::ExistingFile);
  for (const FieldFlag& f : field_flags()) {
    app.add_option_function<std::string>(
        f.names, [&flags, key = std::string(f.key)](const std::string& v) { flags.raw[key] = v; },
        std::string(f.key) + ": " + f.help)
        ->type_name(f.type)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  }
  flags.single_space_opt =
      app.add_flag("--single_space,--single-space", flags.single_space, "single_space: drop the antonym space");
  flags.no_graph_opt = app.add_flag("--no_graph,--no-graph", flags.no_graph, "no_graph: skip the transformer layers");
}

HyperParams effective_hyperparams(const HyperFlags& flags, const HyperParams& defaults) {
  HyperParams base = flags.config_path.empty() ? defaults : load_hyperparams(flags.config_path, defaults);
  nlohmann::json overrides = nlohmann::json::object();
  for (const auto& [key, value] : flags.raw) {
    try {
      overrides[key] = nlohmann::json::parse(value);
    } catch (const nlohmann::json::parse_error&) {
      throw ConfigError("--" + key + ": not a number: '" + value + "'");
    }
  }
  if (flags.single_space_opt->count() > 0) overrides["single_space"] = flags.single_space;
  if (flags.no_graph_opt->count() > 0) overrides["no_graph"] = flags.no_graph;
  return hyperparams_from_json(overrides.dump(), base);
}

struct DataFlags {
  std::vector<std::string> languages;
  std::vector<std::string> embeddings;
  std::vector<std::string> pairs;
};

void add_data_flags(CLI::App& app, DataFlags& data, bool multi) {
  auto* emb = app.add_option("--embeddings", data.embeddings, "embedding file (token v1 ... vd per line)")->required();
  auto* prs = app.add_option("--pairs", data.pairs, "pair file (w1<TAB>w2<TAB>label per line)")->required();
  auto* lang = app.add_option("--language", data.languages, "language tag");
  if (!multi) {
    emb->expected(1);
    prs->expected(1);
    lang->expected(1);
  }
}

std::string language_at(const DataFlags& data, std::size_t i) {
  if (data.languages.empty()) return data.embeddings.size() == 1 ? "default" : "lang" + std::to_string(i);
  return data.languages.at(i);
}

void check_data_arity(const DataFlags& data) {
  const std::size_t n = data.embeddings.size();
  if (data.pairs.size() != n) throw ConfigError("--pairs must be given once per --embeddings");
  if (!data.languages.empty() && data.languages.size() != n) {
    throw ConfigError("--language must be given once per --embeddings, or not at all");
  }
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
}

fs::path run_directory(const std::string& out_dir, const std::string& run_name) {
  if (!out_dir.empty()) return out_dir;
  const char* root = std::getenv(kRunRootEnv);
  return fs::path(root && *root ? root : "runs") / run_name;
}

SplitFractions parse_split(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--split: bad fraction '" + item + "'");
    }
  }
  if (v.size() != 3) throw ConfigError("--split takes three comma-separated fractions");
  return {v[0], v[1], v[2]};
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  HyperFlags hyper;
  DataFlags data;
  std::string out_dir;
  std::string run_name;
  std::string split = "0.8,0.1,0.1";
  bool quiet = false;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  check_data_arity(a.data);
  const HyperParams hp = effective_hyperparams(a.hyper, HyperParams{});
  const SplitFractions fractions = parse_split(a.split);

  std::vector<EmbeddingTable> tables;
  std::vector<LanguageData> langs;
  std::vector<std::vector<LabeledPair>> tests;
  Rng data_rng = Rng::stream(hp.seed, Stream::data);
  tables.reserve(a.data.embeddings.size());
  for (std::size_t i = 0; i < a.data.embeddings.size(); ++i) {
    const std::string lang = language_at(a.data, i);
    tables.push_back(load_embeddings(a.data.embeddings[i], lang, hp.d ? std::optional(hp.d) : std::nullopt));
    const FilterResult kept = filter_resolvable(load_pairs(a.data.pairs[i], lang), tables.back());
    if (kept.dropped > 0) err << lang << ": dropped " << kept.dropped << " pairs with unknown tokens\n";
    DataSplit split = stratified_split(kept.kept, fractions, data_rng);
    langs.push_back({lang, nullptr, std::move(split.train), std::move(split.dev)});
    tests.push_back(std::move(split.test));
  }
  for (std::size_t i = 0; i < langs.size(); ++i) langs[i].table = &tables[i];
  hp.resolved(tables.front().dim()).validate();

  const fs::path dir = run_directory(a.out_dir, a.run_name.empty() ? "train-seed" + std::to_string(hp.seed) : a.run_name);
  fs::create_directories(dir);
  save_hyperparams(hp, dir / "config.json");
  std::ofstream metrics(dir / "metrics.csv", std::ios::trunc);
  metrics << metrics_csv_header();

  TrainOptions options;
  options.checkpoint_dir = dir / "checkpoints";
  options.callbacks.on_epoch = [&](const EpochRecord& r, const ModelParams&) {
    metrics << metrics_csv_rows(r) << std::flush;
    if (!a.quiet) {
      out << "epoch " << r.epoch << " train_loss " << r.train.loss;
      if (r.dev) out << " dev_loss " << r.dev->loss << " dev_macro_f1 " << r.dev->report.macro_f1;
      out << (r.improved ? " *" : "") << "\n";
    }
  };
  const TrainState state = train(langs, hp, options);
  if (!state.best_checkpoint) {
    save_checkpoint(quantized(state.params), state.hp, dir / "checkpoints" / "best.ckpt");
  }

  std::optional<EvalReport> test;
  ConfusionCounts counts;
  for (std::size_t i = 0; i < langs.size(); ++i) {
    if (!tests[i].empty()) counts += evaluate(tests[i], tables[i], state.selected(), state.hp).counts;
  }
  if (counts.total() > 0) test = report_from_counts(counts);

  double margin_contribution = 0.0;
  for (const BatchRecord& b : state.loss_trace) margin_contribution += state.hp.lambda_w * b.margin;
  if (!state.loss_trace.empty()) margin_contribution /= static_cast<double>(state.loss_trace.size());
  std::ostringstream report;
  report << format_final_report(state, test);
  report << "mean_margin_contribution " << margin_contribution << "\n";
  write_file(dir / "report.txt", report.str());
  out << report.str() << "run_directory " << dir.string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------- eval / predict

struct EvalArgs {
  std::string checkpoint;
  DataFlags data;
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  const std::string lang = language_at(a.data, 0);
  const EmbeddingTable table = load_embeddings(a.data.embeddings.at(0), lang, ck.hp.d);
  const FilterResult kept = filter_resolvable(load_pairs(a.data.pairs.at(0), lang), table);
  if (kept.dropped > 0) err << "dropped " << kept.dropped << " pairs with unknown tokens\n";
  out << format_report(evaluate(kept.kept, table, ck.params, ck.hp));
  return kOk;
}

struct PredictArgs {
  std::string checkpoint;
  std::string embeddings;
  std::string language;
  std::string w1, w2;
};

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  const EmbeddingTable table = load_embeddings(a.embeddings, a.language, ck.hp.d);
  const Prediction p = predict(a.w1, a.w2, a.language, table, ck.params, ck.hp);
  char line[160];
  std::snprintf(line, sizeof line, "%.6f %.6f %.6f %d\n", p.probability, p.sim_syn, p.sim_ant, p.label);
  out << line;
  return kOk;
}

// ---------------------------------------------------------------- graph-dump / gradcheck

struct GraphArgs {
  HyperFlags hyper;
  DataFlags data;
  std::string checkpoint;
};

int cmd_graph_dump(const GraphArgs& a, std::ostream& out) {
  const std::string lang = language_at(a.data, 0);
  ModelParams params;
  HyperParams hp;
  EmbeddingTable table(1);
  if (!a.checkpoint.empty()) {
    Checkpoint ck = load_checkpoint(a.checkpoint);
    hp = ck.hp;
    params = std::move(ck.params);
    table = load_embeddings(a.data.embeddings.at(0), lang, hp.d);
    hp.tau = effective_hyperparams(a.hyper, hp).tau;
    hp.trans_weight = effective_hyperparams(a.hyper, hp).trans_weight;
  } else {
    const HyperParams given = effective_hyperparams(a.hyper, HyperParams{});
    table = load_embeddings(a.data.embeddings.at(0), lang, given.d ? std::optional(given.d) : std::nullopt);
    hp = given.resolved(table.dim());
    hp.validate();
    Rng init = Rng::stream(hp.seed, Stream::init);
    params = init_params(hp, init);
  }
  const std::vector<LabeledPair> batch = load_pairs(a.data.pairs.at(0), lang);
  if (batch.empty()) throw InvalidInput("graph-dump: no pairs");
  Rng unused(0);
  const BatchPrediction bp = predict_batch(batch, table, params, hp, Mode::eval, unused);
  const PairGraph g = build_graph(batch, bp.pairs, hp.tau, hp.trans_weight);
  out << format_graph_dump(g);
  return kOk;
}

struct GradArgs {
  HyperFlags hyper;
};

int cmd_gradcheck(const GradArgs& a, std::ostream& out) {
  const HyperParams hp = effective_hyperparams(a.hyper, tiny_hyperparams());
  const GradCheckFixture fx = make_grad_check_fixture(hp, hp.seed);
  const GradCheckResult r = check_model_gradients(fx);
  out << "max_relative_error " << r.max_relative_error << "\n";
  out << "coordinates_checked " << r.checked << " skipped_at_kinks " << r.skipped_kinks << "\n";
  std::size_t i = 0;
  fx.params.for_each([&](const std::string& name, const Tensor&) {
    out << "  " << name << " " << r.per_param.at(i++) << "\n";
  });
  if (!(r.max_relative_error < kGradTolerance)) {
    out << "FAIL: above tolerance " << kGradTolerance << "\n";
    return kCheckFailed;
  }
  out << "OK\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synonym/antonym pair classifier with dual projection spaces and a pair graph", "bhavnet"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "train a model and write a run directory");
  add_hyper_flags(*train_cmd, train_args.hyper);
  add_data_flags(*train_cmd, train_args.data, true);
  train_cmd->add_option("--out", train_args.out_dir, "run directory (default: $BHAVNET_RUN_ROOT/<run-name>)");
  train_cmd->add_option("--run-name", train_args.run_name, "run directory name under the run root");
  train_cmd->add_option("--split", train_args.split, "train,dev,test fractions")->capture_default_str();
  train_cmd->add_flag("--quiet", train_args.quiet, "no per-epoch lines");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "score a checkpoint on a pair file");
  eval_cmd->add_option("--checkpoint", eval_args.checkpoint, "checkpoint file")->required();
  add_data_flags(*eval_cmd, eval_args.data, false);

  PredictArgs predict_args;
  auto* predict_cmd = app.add_subcommand("predict", "print probability, sim_syn, sim_ant and label for one pair");
  predict_cmd->add_option("--checkpoint", predict_args.checkpoint, "checkpoint file")->required();
  predict_cmd->add_option("--embeddings", predict_args.embeddings, "embedding file")->required();
  predict_cmd->add_option("--language", predict_args.language, "language tag");
  predict_cmd->add_option("w1", predict_args.w1, "first word")->required();
  predict_cmd->add_option("w2", predict_args.w2, "second word")->required();

  GraphArgs graph_args;
  auto* graph_cmd = app.add_subcommand("graph-dump", "print the pair graph of one batch");
  add_hyper_flags(*graph_cmd, graph_args.hyper);
  add_data_flags(*graph_cmd, graph_args.data, false);
  graph_cmd->add_option("--checkpoint", graph_args.checkpoint, "use trained projections (default: seeded init)");

  GradArgs grad_args;
  auto* grad_cmd = app.add_subcommand("gradcheck", "compare analytic gradients with finite differences");
  add_hyper_flags(*grad_cmd, grad_args.hyper);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*train_cmd) return cmd_train(train_args, out, err);
    if (*eval_cmd) return cmd_eval(eval_args, out, err);
    if (*predict_cmd) return cmd_predict(predict_args, out);
    if (*graph_cmd) return cmd_graph_dump(graph_args, out);
    if (*grad_cmd) return cmd_gradcheck(grad_args, out);
  } catch (const VocabularyError& e) {
    err << "error: " << e.what() << "\n";
    return kVocabularyError;
  } catch (const CheckpointError& e) {
    err << "error: " << e.what() << "\n";
    return kCheckpointError;
  } catch (const TrainingError& e) {
    err << "error: " << e.what() << "\n";
    return kCheckFailed;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }
  return kConfigError;
}

}  // namespace bhavnet::cli
