// Copyright 2026 The ChatIR Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line entry point. Exit codes: 0 success, 1 domain error, 2 usage.

#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "chatir/attribute_table.hpp"
#include "chatir/backend_config.hpp"
#include "chatir/backends.hpp"
#include "chatir/corpus.hpp"
#include "chatir/embedding_io.hpp"
#include "chatir/error.hpp"
#include "chatir/eval.hpp"
#include "chatir/index.hpp"
#include "chatir/service.hpp"
#include "chatir/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace chatir {
namespace {

constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

std::string backends_config(const std::string& path) {
  return path.empty() ? std::string("{}") : read_file(path);
}

std::shared_ptr<const AttributeTable> load_attributes(const std::string& path) {
  if (path.empty()) return nullptr;
  return std::make_shared<AttributeTable>(AttributeTable::from_json(read_file(path)));
}

void write_examples(const fs::path& path, const std::vector<DialogExample>& examples,
                    const std::string& format) {
  write_file(path, format == "visdial" ? format_visdial(examples) : format_jsonl(examples));
}

fs::path sibling_ids(const fs::path& embeddings) {
  auto p = embeddings;
  p.replace_extension(".ids");
  return p;
}

// index build ---------------------------------------------------------------

struct IndexBuildArgs {
  std::string embeddings;
  std::string ids;
  std::string texts;
  std::size_t dim = 256;
  std::uint64_t seed = 0;
  std::string out;
  std::string out_ids;
};

EmbeddingCorpus corpus_from_texts(const fs::path& path, std::size_t dim, std::uint64_t seed) {
  EmbeddingCorpusSource source;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected <id>\\t<description>");
    }
    source.ids.push_back(line.substr(0, tab));
    source.descriptions.push_back(line.substr(tab + 1));
  }
  return materialize(source, HashingEmbedder(dim, seed));
}

int run_index_build(const IndexBuildArgs& a) {
  const EmbeddingCorpus corpus = a.texts.empty()
                                     ? load_corpus(a.embeddings, a.ids)
                                     : corpus_from_texts(a.texts, a.dim, a.seed);
  const fs::path out_ids = a.out_ids.empty() ? sibling_ids(a.out) : fs::path(a.out_ids);
  save_corpus(corpus, a.out, out_ids);
  const ordered_json summary = {{"rows", corpus.size()},
                                {"dim", corpus.dim()},
                                {"memory_bytes", corpus.memory_bytes()},
                                {"embeddings", a.out},
                                {"ids", out_ids.string()}};
  std::cout << summary.dump() << "\n";
  return 0;
}

// eval run ------------------------------------------------------------------

struct EvalArgs {
  std::string dataset;
  std::string embeddings;
  std::string ids;
  std::size_t k = 10;
  std::size_t rounds = 10;
  std::string dialog_source = "recorded";
  std::string out;
  std::string curves;
  std::string backends;
  std::string attributes;
  std::size_t jobs = 1;
  std::string atr_mode;
  std::string mask = "none";
  double mask_rate = 0.2;
  std::uint64_t mask_seed = 0;
};

int run_eval(const EvalArgs& a) {
  auto examples = load_examples(a.dataset);
  if (a.mask != "none") {
    const MaskingPolicy policy{parse_mask_strategy(a.mask), a.mask_rate, a.mask_seed};
    for (auto& ex : examples) ex = apply_masking(ex, policy);
  }
  const auto corpus = load_corpus(a.embeddings, a.ids);

  BackendContext ctx;
  ctx.attributes = load_attributes(a.attributes);
  ctx.embedding_dim = corpus.dim();
  for (const auto& ex : examples) ctx.recorded.emplace(ex.image_id, ex.dialog);
  const auto backends = make_backends(backends_config(a.backends), ctx);

  BenchmarkOptions options;
  options.k = a.k;
  options.rounds = a.rounds;
  options.jobs = a.jobs;
  if (!a.atr_mode.empty()) options.atr_mode = parse_atr_mode(a.atr_mode);

  EvalReport report;
  if (a.dialog_source == "recorded") {
    report = run_benchmark(examples, corpus, *backends.embedder, RecordedSource{}, options);
  } else {
    if (!backends.questioner) {
      throw ParseError("live evaluation needs a questioner; pass --attributes or configure one");
    }
    if (!backends.answerer) {
      throw ParseError("live evaluation needs an answerer; pass --attributes or configure one");
    }
    report = run_benchmark(examples, corpus, *backends.embedder,
                           LiveSource{*backends.questioner, *backends.answerer}, options);
  }
  write_file(a.out, format_report_json(report));
  if (!a.curves.empty()) write_file(a.curves, format_curves_csv(report));

  std::fprintf(stderr, "evaluated %zu examples (%zu failed) against %zu images\n",
               report.n_examples, report.failures.size(), report.corpus_size);
  for (std::size_t r = 0; r < report.hits_curve.size(); ++r) {
    std::fprintf(stderr, "round %2zu  hits@%zu %.4f  atr %.2f\n", r, report.k,
                 report.hits_curve[r], report.atr_curve[r]);
  }
  return 0;
}

// train ---------------------------------------------------------------------

struct TrainArgs {
  std::size_t synthetic_pairs = 0;
  std::size_t d_in = 32;
  std::size_t d_out = 16;
  double noise = 0.1;
  std::string features;
  std::string positives;
  std::string embeddings;
  std::string ids;
  TrainerConfig config;
  std::string out;
  std::string history;
};

Matrix to_matrix(const EmbeddingMatrix& m) {
  Matrix out(m.rows, m.dim);
  for (std::size_t i = 0; i < m.values.size(); ++i) out.data()[i] = m.values[i];
  return out;
}

int run_train(const TrainArgs& a) {
  validate(a.config);
  std::optional<SyntheticPairs> synthetic;
  std::optional<EmbeddingCorpus> loaded;
  Matrix features;
  std::vector<std::string> positives;
  const EmbeddingCorpus* corpus = nullptr;
  if (a.synthetic_pairs > 0) {
    synthetic = make_synthetic_pairs(a.synthetic_pairs, a.d_in, a.d_out, a.noise, a.config.seed);
    features = synthetic->features;
    positives = synthetic->positives;
    corpus = &synthetic->images;
  } else {
    if (a.features.empty() || a.positives.empty() || a.embeddings.empty() || a.ids.empty()) {
      throw ParseError(
          "train needs --synthetic-pairs or all of --features --positives --embeddings --ids");
    }
    features = to_matrix(read_embedding_matrix(a.features));
    positives = read_ids(a.positives);
    loaded = load_corpus(a.embeddings, a.ids);
    corpus = &*loaded;
  }
  const auto result = train(features, positives, *corpus, a.config);
  if (!a.out.empty()) save_checkpoint(result.head, a.out);
  if (!a.history.empty()) write_file(a.history, format_history_csv(result.history));
  const auto& h = result.history;
  if (!h.empty()) {
    std::fprintf(stderr, "epochs %zu  loss %.6f -> %.6f\n", h.size(), h.front().mean_loss,
                 h.back().mean_loss);
  }
  const double recall = evaluate_in_batch_recall(result.head, features, positives, *corpus,
                                                 a.config.k, a.config.batch_size);
  std::printf("%s\n", ordered_json{{"epochs", h.size()},
                                   {"final_loss", h.empty() ? 0.0 : h.back().mean_loss},
                                   {"in_batch_recall", recall}}
                          .dump()
                          .c_str());
  return 0;
}

// serve ---------------------------------------------------------------------

int run_serve(const std::string& config_path) {
  const std::string text = read_file(config_path);
  const fs::path base = fs::path(config_path).parent_path();
  const auto config = parse_server_config(text, base);

  std::string attributes_path;
  if (const auto raw = nlohmann::json::parse(text); raw.contains("attributes")) {
    attributes_path = (base / raw.at("attributes").get<std::string>()).string();
  }

  std::vector<std::pair<std::string, std::shared_ptr<const EmbeddingCorpus>>> corpora;
  std::vector<std::unordered_map<std::string, std::string>> thumbnails;
  for (const auto& c : config.corpora) {
    corpora.emplace_back(c.name, std::make_shared<EmbeddingCorpus>(load_corpus(c.embeddings, c.ids)));
    thumbnails.push_back(c.thumbnails ? read_thumbnails(*c.thumbnails)
                                      : std::unordered_map<std::string, std::string>{});
  }

  BackendContext ctx;
  ctx.attributes = load_attributes(attributes_path);
  ctx.embedding_dim = corpora.front().second->dim();
  const auto backends = make_backends(config.backends_json, ctx);
  if (!backends.questioner) {
    throw ParseError("server needs a questioner; set backends.questioner or attributes");
  }

  ServiceOptions options;
  options.ttl = config.ttl;
  options.max_rounds = config.max_rounds;
  auto manager = std::make_shared<SessionManager>(backends.embedder, backends.questioner, options);
  for (std::size_t i = 0; i < corpora.size(); ++i) {
    manager->add_corpus(corpora[i].first, corpora[i].second, std::move(thumbnails[i]));
  }
  HttpService service(manager, config.static_dir);
  std::fprintf(stderr, "listening on %s:%d\n", config.host.c_str(), config.port);
  if (!service.listen(config.host, config.port)) {
    throw Error("could not listen on " + config.host + ":" + std::to_string(config.port));
  }
  return 0;
}

// stats / corpus / plot -----------------------------------------------------

int run_repetitions(const std::string& dataset, std::size_t rounds, const std::string& out) {
  const auto examples = load_examples(dataset);
  std::vector<Dialog> dialogs;
  dialogs.reserve(examples.size());
  for (const auto& ex : examples) dialogs.push_back(truncate(ex.dialog, std::min(rounds, ex.dialog.size())));
  const auto s = repetition_stats(dialogs);
  const ordered_json j = {{"dialogs", dialogs.size()},
                          {"avg_exact_repeats", s.avg_exact_repeats},
                          {"avg_unique_tokens_per_dialog", s.avg_unique_tokens_per_dialog},
                          {"avg_unique_tokens_per_answer", s.avg_unique_tokens_per_answer}};
  const std::string text = j.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    write_file(out, text);
  }
  return 0;
}

struct MaskArgs {
  std::string dataset;
  std::string strategy;
  double rate = 0.2;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "jsonl";
};

int run_mask(const MaskArgs& a) {
  const MaskingPolicy policy{parse_mask_strategy(a.strategy), a.rate, a.seed};
  auto examples = load_examples(a.dataset);
  for (auto& ex : examples) ex = apply_masking(ex, policy);
  write_examples(a.out, examples, a.format);
  return 0;
}

struct SynthArgs {
  SyntheticSpec spec;
  std::uint64_t seed = 0;
  std::size_t dim = 256;
  std::uint64_t embed_seed = 0;
  std::string out_dir;
};

int run_synth(const SynthArgs& a) {
  const auto data = generate_synthetic(a.spec, a.seed);
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  write_file(dir / "dialogs.jsonl", format_jsonl(data.examples));
  write_file(dir / "attributes.json", data.attributes.to_json());
  std::string tsv;
  for (std::size_t i = 0; i < data.source.ids.size(); ++i) {
    tsv += data.source.ids[i] + "\t" + data.source.descriptions[i] + "\n";
  }
  write_file(dir / "descriptions.tsv", tsv);
  const auto corpus = materialize(data.source, HashingEmbedder(a.dim, a.embed_seed));
  save_corpus(corpus, dir / "corpus.bin", dir / "corpus.ids");
  std::cout << ordered_json{{"items", corpus.size()}, {"dim", corpus.dim()}, {"dir", dir.string()}}.dump()
            << "\n";
  return 0;
}

struct AugmentArgs {
  std::string captions;
  std::size_t rounds = 10;
  std::string backends;
  std::string attributes;
  std::string out;
  std::string failures;
  std::size_t jobs = 1;
};

int run_augment(const AugmentArgs& a) {
  const auto examples = load_examples(a.captions);
  BackendContext ctx;
  ctx.attributes = load_attributes(a.attributes);
  ctx.embedding_dim = 1;
  for (const auto& ex : examples) ctx.recorded.emplace(ex.image_id, ex.dialog);
  const auto backends = make_backends(backends_config(a.backends), ctx);
  if (!backends.questioner || !backends.answerer) {
    throw ParseError("augmentation needs a questioner and an answerer; pass --attributes or --backends");
  }
  const auto seeds = seeds_from(examples);
  const auto result = augment_dialogues(seeds, *backends.questioner, *backends.answerer, a.rounds, a.jobs);
  write_file(a.out, format_jsonl(result.examples));
  if (!a.failures.empty()) write_file(a.failures, format_failures(result.failures));
  std::fprintf(stderr, "augmented %zu dialogs, %zu failures\n", result.examples.size(),
               result.failures.size());
  return 0;
}

int run_plot(const std::string& curves, const std::string& out, const std::string& title) {
  const auto points = parse_curves_csv(read_file(curves));
  write_file(out, render_curves_svg(points, title));
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"ChatIR: dialog-driven image retrieval"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  std::function<int()> action;

  auto* index = app.add_subcommand("index", "Embedding index utilities");
  index->require_subcommand(1);
  IndexBuildArgs ib;
  auto* build = index->add_subcommand("build", "Validate, normalize and write an embedding corpus");
  auto* emb_opt = build->add_option("--embeddings", ib.embeddings, "Raw embedding file")->check(CLI::ExistingFile);
  build->add_option("--ids", ib.ids, "Image id file, one per line")->check(CLI::ExistingFile);
  auto* texts_opt = build->add_option("--texts", ib.texts, "TSV of <id>\\t<description>, embedded with the stub")
                        ->check(CLI::ExistingFile);
  emb_opt->excludes(texts_opt);
  build->add_option("--dim", ib.dim, "Stub embedding dimension")->check(CLI::PositiveNumber);
  build->add_option("--seed", ib.seed, "Stub embedding seed");
  build->add_option("--out", ib.out, "Output embedding file")->required();
  build->add_option("--out-ids", ib.out_ids, "Output id file (default: --out with .ids)");
  build->callback([&] {
    if (ib.texts.empty() && (ib.embeddings.empty() || ib.ids.empty())) {
      throw CLI::RequiredError("--embeddings and --ids, or --texts");
    }
    action = [&] { return run_index_build(ib); };
  });

  auto* eval = app.add_subcommand("eval", "Benchmark evaluation");
  eval->require_subcommand(1);
  EvalArgs ev;
  auto* eval_run = eval->add_subcommand("run", "Evaluate dialogs against a corpus");
  eval_run->add_option("--dataset", ev.dataset, "VisDial JSON or JSONL dialogs")->required()->check(CLI::ExistingFile);
  eval_run->add_option("--embeddings", ev.embeddings, "Corpus embedding file")->required()->check(CLI::ExistingFile);
  eval_run->add_option("--ids", ev.ids, "Corpus id file")->required()->check(CLI::ExistingFile);
  eval_run->add_option("--k", ev.k, "Hits@K cutoff")->check(CLI::PositiveNumber);
  eval_run->add_option("--rounds", ev.rounds, "Number of dialog rounds");
  eval_run->add_option("--dialog-source", ev.dialog_source, "recorded or live")
      ->check(CLI::IsMember({"recorded", "live"}));
  eval_run->add_option("--out", ev.out, "Report JSON path")->required();
  eval_run->add_option("--curves", ev.curves, "Curve CSV path");
  eval_run->add_option("--backends", ev.backends, "Backend configuration JSON")->check(CLI::ExistingFile);
  eval_run->add_option("--attributes", ev.attributes, "Attribute table JSON")->check(CLI::ExistingFile);
  eval_run->add_option("--jobs", ev.jobs, "Concurrent examples")->check(CLI::PositiveNumber);
  eval_run->add_option("--atr-mode", ev.atr_mode, "continue or carry_forward")
      ->check(CLI::IsMember({"continue", "carry_forward"}));
  eval_run->add_option("--mask", ev.mask, "Masking strategy applied before evaluation")
      ->check(CLI::IsMember({"none", "captions", "questions", "answers", "rounds", "tokens"}));
  eval_run->add_option("--mask-rate", ev.mask_rate, "Masking rate")->check(CLI::Range(0.0, 1.0));
  eval_run->add_option("--mask-seed", ev.mask_seed, "Masking seed");
  eval_run->callback([&] { action = [&] { return run_eval(ev); }; });

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train the projection head with the recall surrogate");
  train_cmd->add_option("--synthetic-pairs", tr.synthetic_pairs, "Generate N synthetic pairs");
  train_cmd->add_option("--d-in", tr.d_in, "Synthetic feature dimension")->check(CLI::PositiveNumber);
  train_cmd->add_option("--d-out", tr.d_out, "Synthetic embedding dimension")->check(CLI::PositiveNumber);
  train_cmd->add_option("--noise", tr.noise, "Synthetic feature noise");
  train_cmd->add_option("--features", tr.features, "Query feature matrix (embedding file format)");
  train_cmd->add_option("--positives", tr.positives, "Positive image id per feature row");
  train_cmd->add_option("--embeddings", tr.embeddings, "Image embedding file");
  train_cmd->add_option("--ids", tr.ids, "Image id file");
  train_cmd->add_option("--epochs", tr.config.epochs, "Epochs");
  train_cmd->add_option("--batch-size", tr.config.batch_size, "Batch size");
  train_cmd->add_option("--lr", tr.config.learning_rate, "Initial learning rate");
  train_cmd->add_option("--lr-floor", tr.config.lr_floor, "Learning rate floor");
  train_cmd->add_option("--decay", tr.config.decay, "Per-epoch decay");
  train_cmd->add_option("--weight-decay", tr.config.weight_decay, "Decoupled weight decay");
  train_cmd->add_option("--k", tr.config.k, "Recall cutoff");
  train_cmd->add_option("--tau-rank", tr.config.tau_rank, "Rank temperature");
  train_cmd->add_option("--tau-recall", tr.config.tau_recall, "Recall temperature");
  train_cmd->add_option("--seed", tr.config.seed, "Seed");
  train_cmd->add_option("--out", tr.out, "Checkpoint path");
  train_cmd->add_option("--history", tr.history, "Per-epoch CSV path");
  train_cmd->callback([&] { action = [&] { return run_train(tr); }; });

  std::string serve_config;
  auto* serve = app.add_subcommand("serve", "Run the session HTTP service");
  serve->add_option("--config", serve_config, "Server configuration JSON")->required()->check(CLI::ExistingFile);
  serve->callback([&] { action = [&] { return run_serve(serve_config); }; });

  auto* stats = app.add_subcommand("stats", "Dialog statistics");
  stats->require_subcommand(1);
  std::string rep_dataset;
  std::string rep_out;
  std::size_t rep_rounds = kDefaultMaxRounds;
  auto* reps = stats->add_subcommand("repetitions", "Question repetition and token statistics");
  reps->add_option("--dataset", rep_dataset, "Dialog dataset")->required()->check(CLI::ExistingFile);
  reps->add_option("--rounds", rep_rounds, "Rounds considered per dialog");
  reps->add_option("--out", rep_out, "Output JSON (default stdout)");
  reps->callback([&] { action = [&] { return run_repetitions(rep_dataset, rep_rounds, rep_out); }; });

  auto* corpus = app.add_subcommand("corpus", "Dataset preparation");
  corpus->require_subcommand(1);
  MaskArgs mk;
  auto* mask = corpus->add_subcommand("mask", "Apply a masking policy to a dataset");
  mask->add_option("--dataset", mk.dataset, "Dialog dataset")->required()->check(CLI::ExistingFile);
  mask->add_option("--strategy", mk.strategy, "Masking strategy")
      ->required()
      ->check(CLI::IsMember({"none", "captions", "questions", "answers", "rounds", "tokens"}));
  mask->add_option("--rate", mk.rate, "Masking rate")->check(CLI::Range(0.0, 1.0));
  mask->add_option("--seed", mk.seed, "Seed");
  mask->add_option("--out", mk.out, "Output path")->required();
  mask->add_option("--format", mk.format, "jsonl or visdial")->check(CLI::IsMember({"jsonl", "visdial"}));
  mask->callback([&] { action = [&] { return run_mask(mk); }; });

  SynthArgs sy;
  auto* synth = corpus->add_subcommand("synth", "Generate a synthetic attribute corpus");
  synth->add_option("--items", sy.spec.n_items, "Number of items")->check(CLI::PositiveNumber);
  synth->add_option("--attributes", sy.spec.n_attributes, "Attributes per item")->check(CLI::PositiveNumber);
  synth->add_option("--vocab", sy.spec.attribute_vocab_size, "Values per attribute")->check(CLI::PositiveNumber);
  synth->add_option("--caption-attributes", sy.spec.caption_attributes, "Attributes revealed by the caption");
  synth->add_option("--seed", sy.seed, "Seed");
  synth->add_option("--dim", sy.dim, "Stub embedding dimension")->check(CLI::PositiveNumber);
  synth->add_option("--embed-seed", sy.embed_seed, "Stub embedding seed");
  synth->add_option("--out-dir", sy.out_dir, "Output directory")->required();
  synth->callback([&] { action = [&] { return run_synth(sy); }; });

  AugmentArgs au;
  auto* augment = corpus->add_subcommand("augment", "Generate dialogs from captions");
  augment->add_option("--captions", au.captions, "Dataset providing image ids and captions")
      ->required()
      ->check(CLI::ExistingFile);
  augment->add_option("--rounds", au.rounds, "Rounds per dialog")->check(CLI::PositiveNumber);
  augment->add_option("--backends", au.backends, "Backend configuration JSON")->check(CLI::ExistingFile);
  augment->add_option("--attributes", au.attributes, "Attribute table JSON")->check(CLI::ExistingFile);
  augment->add_option("--out", au.out, "Output JSONL")->required();
  augment->add_option("--failures", au.failures, "Failure manifest path");
  augment->add_option("--jobs", au.jobs, "Concurrent dialogs")->check(CLI::PositiveNumber);
  augment->callback([&] { action = [&] { return run_augment(au); }; });

  auto* plot = app.add_subcommand("plot", "Rendering");
  plot->require_subcommand(1);
  std::string plot_in;
  std::string plot_out;
  std::string plot_title;
  auto* curves = plot->add_subcommand("curves", "Render a curve CSV to SVG");
  curves->add_option("--curves", plot_in, "Curve CSV")->required()->check(CLI::ExistingFile);
  curves->add_option("--out", plot_out, "SVG path")->required();
  curves->add_option("--title", plot_title, "Chart title");
  curves->callback([&] { action = [&] { return run_plot(plot_in, plot_out, plot_title); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    return action();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitDomain;
  }
}

}  // namespace
}  // namespace chatir

int main(int argc, char** argv) { return chatir::run(argc, argv); }
