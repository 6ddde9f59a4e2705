// fam/tools/fam_cli.cc
// Single command-line entry point: data generation, training, prior
// estimation, decoding, scoring, grid search, experiment runs and the
// oracle / gradient self-checks.

// Copyright 2026  The factored-am authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "fam/harness.hh"

namespace fam {
namespace {

// Touches every key the toolkit understands so that check_all_consumed
// flags only genuine typos, regardless of which subcommand ran.
void validate_config(const Config &cfg) {
  GeneratorConfig::FromConfig(cfg);
  cfg.get_int("data", "train_utterances", 0);
  cfg.get_int("data", "dev_utterances", 0);
  cfg.get_int("data", "test_utterances", 0);
  ModelDims::FromConfig(cfg);
  cfg.get_string("model", "decomposition", "tri-forward");
  TrainConfig::FromConfig(cfg);
  StagePlan::FromConfig(cfg);
  DecoderConfig::FromConfig(cfg);
  GridSpec::FromConfig(cfg);
  cfg.get_string_list("comparison", "rows", {});
  cfg.check_all_consumed();
}

Config load_config(const std::string &path) {
  Config cfg = path.empty() ? Config() : Config::ReadFile(path);
  validate_config(cfg);
  std::cerr << "resolved config:\n" << cfg.to_string();
  return cfg;
}

std::string data_path(const std::string &dir, const std::string &name) {
  return (std::filesystem::path(dir) / name).string();
}

void check_tag_consistency(const Config &cfg, const FactoredNet &model,
                           const PriorTable &priors) {
  std::string requested =
      cfg.get_string("model", "decomposition", to_string(model.tag()));
  FAM_CHECK(decomp_from_string(requested) == model.tag())
      << "decomposition mismatch: config requests '" << requested
      << "' but the checkpoint was trained as '" << to_string(model.tag())
      << "'";
  for (const Factor &f : decomposition_factors(model.tag()))
    FAM_CHECK(priors.factor_index(f) >= 0)
        << "prior table lacks factor " << f.key() << " required by '"
        << to_string(model.tag()) << "'; was it estimated for a different "
        << "decomposition?";
}

std::vector<RowSpec> rows_from_config(const Config &cfg) {
  std::vector<std::string> descriptors = cfg.get_string_list(
      "comparison", "rows",
      {"monophone/mono", "diphone/mono+di", "tri-forward/mono+di+tri",
       "tri-symmetric/mono+di+tri", "tri-backward/mono+di+tri"});
  std::vector<RowSpec> rows;
  for (const std::string &d : descriptors) rows.push_back(parse_row_spec(d));
  return rows;
}

int cmd_gen_data(const std::string &config, const std::string &out_dir) {
  Config cfg = load_config(config);
  GeneratorConfig gen = GeneratorConfig::FromConfig(cfg);
  std::cerr << "seed: " << gen.seed << "\n";
  ExperimentSetup setup = ExperimentSetup::Build(cfg);
  std::filesystem::create_directories(out_dir);
  setup.train.inventory.Write(data_path(out_dir, "inventory.txt"));
  setup.lexicon.Write(data_path(out_dir, "lexicon.txt"),
                      setup.train.inventory);
  write_corpus(setup.train, data_path(out_dir, "train.corpus"));
  write_corpus(setup.dev, data_path(out_dir, "dev.corpus"));
  write_corpus(setup.test, data_path(out_dir, "test.corpus"));
  setup.lm.WriteArpa(data_path(out_dir, "lm.arpa"), setup.lexicon);
  std::cout << "wrote " << setup.train.utterances.size() << " train, "
            << setup.dev.utterances.size() << " dev, "
            << setup.test.utterances.size() << " test utterances to "
            << out_dir << "\n";
  return 0;
}

int cmd_train(const std::string &config, const std::string &data_dir,
              const std::string &out_model) {
  Config cfg = load_config(config);
  Corpus train = read_corpus(data_path(data_dir, "train.corpus"));
  Corpus dev = read_corpus(data_path(data_dir, "dev.corpus"));
  DecompTag tag = decomp_from_string(
      cfg.get_string("model", "decomposition", "tri-forward"));
  ModelDims dims = ModelDims::FromConfig(cfg);
  TrainConfig tcfg = TrainConfig::FromConfig(cfg);
  StagePlan plan = StagePlan::FromConfig(cfg);
  std::cerr << "seed: " << tcfg.seed << "\n";
  FactoredNet model = run_stage_plan(tag, plan, train, dev, dims, tcfg);
  save_checkpoint(model, out_model);
  std::cout << "trained " << to_string(tag) << " model -> " << out_model
            << "\n";
  return 0;
}

int cmd_priors(const std::string &config, const std::string &data_dir,
               const std::string &model_path, const std::string &out_priors) {
  Config cfg = load_config(config);
  (void)cfg;
  FactoredNet model = load_checkpoint(model_path);
  Corpus train = read_corpus(data_path(data_dir, "train.corpus"));
  PriorTable priors = estimate_priors(model, train);
  priors.Write(out_priors);
  std::cout << "estimated priors for " << priors.factors.size()
            << " factors -> " << out_priors << "\n";
  return 0;
}

int cmd_decode(const std::string &config, const std::string &data_dir,
               const std::string &model_path, const std::string &priors_path,
               const std::string &corpus_name, const std::string &out_hyp) {
  Config cfg = load_config(config);
  FactoredNet model = load_checkpoint(model_path);
  PriorTable priors = PriorTable::Read(priors_path);
  check_tag_consistency(cfg, model, priors);
  Corpus corpus = read_corpus(data_path(data_dir, corpus_name));
  Lexicon lexicon =
      Lexicon::Read(data_path(data_dir, "lexicon.txt"), model.inventory());
  NgramLM lm = NgramLM::ReadArpa(data_path(data_dir, "lm.arpa"), lexicon);
  PrefixTree tree = build_prefix_tree(lexicon);
  DecoderConfig dcfg = DecoderConfig::FromConfig(cfg);

  std::ofstream hyp_out;
  if (!out_hyp.empty()) {
    hyp_out.open(out_hyp);
    FAM_CHECK(hyp_out.good()) << "cannot write " << out_hyp;
  }
  WerReport total;
  for (const Utterance &utt : corpus.utterances) {
    DecodeResult res =
        decode_utterance(model, priors, utt.frames, tree, lm, dcfg);
    WerReport r = align_words(utt.words, res.words);
    total.substitutions += r.substitutions;
    total.deletions += r.deletions;
    total.insertions += r.insertions;
    total.reference_words += r.reference_words;
    if (hyp_out.is_open()) {
      hyp_out << utt.id;
      for (int w : res.words) hyp_out << " " << lexicon.names[w];
      hyp_out << "\n";
    }
  }
  std::cout << "decoded " << corpus.utterances.size() << " utterances: WER "
            << total.percent() << "% (S=" << total.substitutions
            << " D=" << total.deletions << " I=" << total.insertions
            << " N=" << total.reference_words << ")\n";
  return 0;
}

int cmd_score(const std::string &config, const std::string &data_dir,
              const std::string &model_path, const std::string &priors_path,
              const std::string &corpus_name) {
  Config cfg = load_config(config);
  FactoredNet model = load_checkpoint(model_path);
  PriorTable priors = PriorTable::Read(priors_path);
  check_tag_consistency(cfg, model, priors);
  Corpus corpus = read_corpus(data_path(data_dir, corpus_name));
  Lexicon lexicon =
      Lexicon::Read(data_path(data_dir, "lexicon.txt"), model.inventory());
  DecoderConfig dcfg = DecoderConfig::FromConfig(cfg);
  double total = 0;
  for (const Utterance &utt : corpus.utterances) {
    MatF emission = batch_context_scores(model, priors, utt.frames,
                                         all_context_ids(model.inventory()),
                                         dcfg.prior_scales);
    ForcedGraph graph = build_forced_graph(utt.words, lexicon,
                                           model.inventory(),
                                           dcfg.transitions);
    double s = forced_path_score(emission, graph);
    total += s;
    std::cout << utt.id << " " << s << "\n";
  }
  std::cout << "total forced-alignment score: " << total << "\n";
  return 0;
}

int cmd_grid_search(const std::string &config, const std::string &data_dir,
                    const std::string &model_path,
                    const std::string &priors_path) {
  Config cfg = load_config(config);
  FactoredNet model = load_checkpoint(model_path);
  PriorTable priors = PriorTable::Read(priors_path);
  check_tag_consistency(cfg, model, priors);
  Corpus dev = read_corpus(data_path(data_dir, "dev.corpus"));
  Lexicon lexicon =
      Lexicon::Read(data_path(data_dir, "lexicon.txt"), model.inventory());
  NgramLM lm = NgramLM::ReadArpa(data_path(data_dir, "lm.arpa"), lexicon);
  PrefixTree tree = build_prefix_tree(lexicon);
  GridResult best = grid_search(model, priors, dev, tree, lm,
                                GridSpec::FromConfig(cfg),
                                DecoderConfig::FromConfig(cfg));
  std::cout << "grid search over " << best.points << " points: prior scales";
  for (double s : best.prior_scales) std::cout << " " << s;
  std::cout << ", lm scale " << best.lm_scale << ", dev WER "
            << best.dev.percent() << "%\n";
  return 0;
}

int cmd_run_comparison(const std::string &config, const std::string &out) {
  Config cfg = load_config(config);
  ExperimentSetup setup = ExperimentSetup::Build(cfg);
  std::vector<RowResult> results = run_comparison(
      rows_from_config(cfg), setup, ModelDims::FromConfig(cfg),
      TrainConfig::FromConfig(cfg), GridSpec::FromConfig(cfg),
      DecoderConfig::FromConfig(cfg));
  std::string table = render_machine_table(results);
  if (!out.empty()) {
    std::ofstream f(out);
    FAM_CHECK(f.good()) << "cannot write " << out;
    f << table;
  }
  std::cout << render_text_table(results);
  for (const RowResult &r : results)
    if (!r.ok) return 1;
  return 0;
}

int cmd_oracle_check(std::uint64_t seed) {
  double max_chain_dev = 0;
  for (int i = 0; i < 5; ++i) {
    TabularTask task = TabularTask::Random(3, 6, seed + i);
    for (DecompTag tag : {DecompTag::kTriForward, DecompTag::kTriBackward})
      max_chain_dev =
          std::max(max_chain_dev, max_factorization_deviation(task, tag));
  }
  TabularTask indep = TabularTask::RandomIndependent(3, 6, seed + 100);
  double sym_indep =
      max_factorization_deviation(indep, DecompTag::kTriSymmetric);
  TabularTask corr = TabularTask::Random(3, 6, seed + 200);
  double sym_corr =
      max_factorization_deviation(corr, DecompTag::kTriSymmetric);
  std::cout << "max factorization deviation (tri-forward/backward): "
            << max_chain_dev << "\n"
            << "symmetric deviation, independent contexts: " << sym_indep
            << "\n"
            << "symmetric deviation, correlated contexts: " << sym_corr
            << "\n";
  bool ok = max_chain_dev < 1e-10 && sym_indep < 1e-10 && sym_corr > 0.01;
  std::cout << (ok ? "oracle-check OK\n" : "oracle-check FAILED\n");
  return ok ? 0 : 1;
}

int cmd_grad_check(std::uint64_t seed) {
  bool ok = true;
  for (const GradCheckReport &r : run_gradient_checks(seed)) {
    bool pass = r.max_rel_error < 1e-4;
    ok = ok && pass;
    std::cout << r.name << ": max relative error " << r.max_rel_error
              << (pass ? "" : "  FAILED") << "\n";
  }
  std::cout << (ok ? "grad-check OK\n" : "grad-check FAILED\n");
  return ok ? 0 : 1;
}

}  // namespace
}  // namespace fam

int main(int argc, char **argv) {
  CLI::App app{"clustering-free context-dependent acoustic modeling toolkit"};
  app.require_subcommand(1);

  std::string config, data_dir = "data", out, model_path = "model.ckpt";
  std::string priors_path = "priors.txt", corpus_name = "test.corpus";
  std::uint64_t seed = 1;

  auto *gen = app.add_subcommand("gen-data", "generate a synthetic corpus");
  gen->add_option("--config", config, "configuration file");
  gen->add_option("--out", out, "output directory")->required();

  auto *train = app.add_subcommand("train", "train an acoustic model");
  train->add_option("--config", config, "configuration file");
  train->add_option("--data", data_dir, "data directory");
  train->add_option("--out", out, "output checkpoint")->required();

  auto *priors = app.add_subcommand("priors", "estimate factor priors");
  priors->add_option("--config", config, "configuration file");
  priors->add_option("--data", data_dir, "data directory");
  priors->add_option("--model", model_path, "model checkpoint")->required();
  priors->add_option("--out", out, "output prior table")->required();

  auto *decode = app.add_subcommand("decode", "decode a corpus");
  decode->add_option("--config", config, "configuration file");
  decode->add_option("--data", data_dir, "data directory");
  decode->add_option("--model", model_path, "model checkpoint")->required();
  decode->add_option("--priors", priors_path, "prior table")->required();
  decode->add_option("--corpus", corpus_name, "corpus file name");
  decode->add_option("--out", out, "hypothesis output file");

  auto *score = app.add_subcommand("score",
                                   "forced-alignment scores of a corpus");
  score->add_option("--config", config, "configuration file");
  score->add_option("--data", data_dir, "data directory");
  score->add_option("--model", model_path, "model checkpoint")->required();
  score->add_option("--priors", priors_path, "prior table")->required();
  score->add_option("--corpus", corpus_name, "corpus file name");

  auto *grid = app.add_subcommand("grid-search",
                                  "tune prior and LM scales on dev");
  grid->add_option("--config", config, "configuration file");
  grid->add_option("--data", data_dir, "data directory");
  grid->add_option("--model", model_path, "model checkpoint")->required();
  grid->add_option("--priors", priors_path, "prior table")->required();

  auto *comparison =
      app.add_subcommand("run-comparison", "train and score a model set");
  comparison->add_option("--config", config, "configuration file");
  comparison->add_option("--out", out, "machine-readable report file");

  auto *oracle = app.add_subcommand("oracle-check",
                                    "exact factorization identities");
  oracle->add_option("--seed", seed, "random seed");

  auto *gradcheck =
      app.add_subcommand("grad-check", "finite-difference gradient checks");
  gradcheck->add_option("--seed", seed, "random seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return fam::cmd_gen_data(config, out);
    if (train->parsed()) return fam::cmd_train(config, data_dir, out);
    if (priors->parsed())
      return fam::cmd_priors(config, data_dir, model_path, out);
    if (decode->parsed())
      return fam::cmd_decode(config, data_dir, model_path, priors_path,
                             corpus_name, out);
    if (score->parsed())
      return fam::cmd_score(config, data_dir, model_path, priors_path,
                            corpus_name);
    if (grid->parsed())
      return fam::cmd_grid_search(config, data_dir, model_path, priors_path);
    if (comparison->parsed()) return fam::cmd_run_comparison(config, out);
    if (oracle->parsed()) return fam::cmd_oracle_check(seed);
    if (gradcheck->parsed()) return fam::cmd_grad_check(seed);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
