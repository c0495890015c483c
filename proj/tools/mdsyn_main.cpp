// mdsyn command-line interface: preprocessing, PPI embedding, training,
// cross-validation, evaluation, prediction and interpretability exports.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "mdsyn/dataset.hpp"
#include "mdsyn/errors.hpp"
#include "mdsyn/explain.hpp"
#include "mdsyn/harness.hpp"
#include "mdsyn/model.hpp"
#include "mdsyn/trainer.hpp"

namespace fs = std::filesystem;
using namespace mdsyn;

namespace {

struct CommonModelArgs {
  std::string bundle_dir;
  std::string config_path;
  std::string variant = "full";
  std::string drug_encoder;  // empty = config/auto
  std::uint64_t seed = 0;
  bool lenient = false;
};

ModelConfig load_config(const std::string& path) {
  return path.empty() ? ModelConfig{} : ModelConfig::from_file(path);
}

DatasetBundle open_bundle(const CommonModelArgs& args) {
  LoadSummary summary;
  DatasetBundle bundle = load_bundle(
      args.bundle_dir, args.lenient ? Strictness::lenient : Strictness::strict, &summary);
  for (const auto& msg : summary.messages) std::cerr << "note: " << msg << '\n';
  return bundle;
}

// --drug-encoder fallback | precomputed | precomputed:file.tsv
void apply_drug_encoder(const std::string& arg, ModelConfig& config, DatasetBundle& bundle) {
  if (arg.empty()) return;
  if (arg == "fallback") {
    config.drug_1d_encoder = "fallback";
    return;
  }
  if (arg == "precomputed") {
    config.drug_1d_encoder = "precomputed";
  } else if (arg.rfind("precomputed:", 0) == 0) {
    config.drug_1d_encoder = "precomputed";
    const std::string path = arg.substr(std::string("precomputed:").size());
    bundle.drug_embeddings = read_vector_table(path, kDrugEmbeddingDim, "embedding");
  } else {
    throw ConfigError("--drug-encoder must be fallback, precomputed or precomputed:file.tsv");
  }
  if (bundle.drug_embeddings.empty()) {
    throw DataGapError("precomputed encoder selected but no drug embedding table is available");
  }
}

void add_model_options(CLI::App* cmd, CommonModelArgs& args, bool with_config = true) {
  cmd->add_option("--bundle", args.bundle_dir, "bundle directory")->required();
  if (with_config) cmd->add_option("--config", args.config_path, "config.json (defaults if omitted)");
  cmd->add_option("--seed", args.seed, "random seed")->default_val(0);
  cmd->add_flag("--lenient", args.lenient, "drop unresolvable triplets instead of aborting");
}

std::string sibling_json(const std::string& csv_path) {
  fs::path p(csv_path);
  p.replace_extension(".json");
  return p.string();
}

int run(CLI::App& app, int argc, char** argv) {
  // ---- preprocess ----
  auto* cmd_pre = app.add_subcommand("preprocess", "average duplicate pairs and threshold labels");
  std::string pre_in, pre_out, pre_thresholds = "10,0";
  cmd_pre->add_option("--in", pre_in, "raw scores csv")->required();
  cmd_pre->add_option("--out", pre_out, "output triplets csv")->required();
  cmd_pre->add_option("--thresholds", pre_thresholds, "positive,negative score thresholds");

  // ---- embed-ppi ----
  auto* cmd_ppi = app.add_subcommand("embed-ppi", "train node2vec embeddings for the PPI network");
  std::string ppi_edges_path, ppi_genes_path, ppi_out;
  std::uint64_t ppi_seed = 0;
  Node2VecParams n2v;
  cmd_ppi->add_option("--ppi", ppi_edges_path, "edge list tsv")->required();
  cmd_ppi->add_option("--genes", ppi_genes_path, "gene manifest (node order)")->required();
  cmd_ppi->add_option("--out", ppi_out, "output embedding tsv")->required();
  cmd_ppi->add_option("--seed", ppi_seed, "random seed")->default_val(0);
  cmd_ppi->add_option("--p", n2v.p, "return parameter");
  cmd_ppi->add_option("--q", n2v.q, "in-out parameter");
  cmd_ppi->add_option("--walk-len", n2v.walk_length, "walk length");
  cmd_ppi->add_option("--walks", n2v.walks_per_node, "walks per node");
  cmd_ppi->add_option("--window", n2v.window, "skip-gram window");
  cmd_ppi->add_option("--negatives", n2v.negatives, "negative samples per pair");
  cmd_ppi->add_option("--epochs", n2v.epochs, "skip-gram epochs");

  // ---- train ----
  auto* cmd_train = app.add_subcommand("train", "train a model on the full bundle");
  CommonModelArgs train_args;
  std::string train_out;
  add_model_options(cmd_train, train_args);
  cmd_train->add_option("--out", train_out, "output checkpoint")->required();
  cmd_train->add_option("--variant", train_args.variant, "full|1d|2d|2d_no_trans");
  cmd_train->add_option("--drug-encoder", train_args.drug_encoder,
                        "fallback | precomputed | precomputed:file.tsv");

  // ---- cv ----
  auto* cmd_cv = app.add_subcommand("cv", "cross-validated evaluation under a split protocol");
  CommonModelArgs cv_args;
  std::string cv_protocol, cv_out, cv_tissue_map;
  add_model_options(cmd_cv, cv_args);
  cmd_cv->add_option("--protocol", cv_protocol, "kfold5|ldco|ldo|lclo|lto")->required();
  cmd_cv->add_option("--out", cv_out, "metrics csv (json written alongside)")->required();
  cmd_cv->add_option("--tissue-map", cv_tissue_map, "cell line -> tissue tsv");
  cmd_cv->add_option("--variant", cv_args.variant, "full|1d|2d|2d_no_trans");
  cmd_cv->add_option("--drug-encoder", cv_args.drug_encoder,
                     "fallback | precomputed | precomputed:file.tsv");

  // ---- eval ----
  auto* cmd_eval = app.add_subcommand("eval", "evaluate a trained model on an independent bundle");
  CommonModelArgs eval_args;
  std::string eval_model, eval_out;
  add_model_options(cmd_eval, eval_args, /*with_config=*/false);
  cmd_eval->add_option("--model", eval_model, "checkpoint")->required();
  cmd_eval->add_option("--out", eval_out, "metrics csv (json written alongside)")->required();

  // ---- predict ----
  auto* cmd_pred = app.add_subcommand("predict", "score drug pair / cell line rows");
  CommonModelArgs pred_args;
  std::string pred_model, pred_pairs, pred_out;
  add_model_options(cmd_pred, pred_args, /*with_config=*/false);
  cmd_pred->add_option("--model", pred_model, "checkpoint")->required();
  cmd_pred->add_option("--pairs", pred_pairs, "csv with drug_a,drug_b,cell_line")->required();
  cmd_pred->add_option("--out", pred_out, "predictions csv")->required();

  // ---- explain ----
  auto* cmd_explain = app.add_subcommand("explain", "attention interpretability exports");
  CommonModelArgs explain_args;
  std::string explain_model, explain_triplet_arg, explain_dir;
  ExplainOptions explain_opts;
  add_model_options(cmd_explain, explain_args, /*with_config=*/false);
  cmd_explain->add_option("--model", explain_model, "checkpoint")->required();
  cmd_explain->add_option("--triplet", explain_triplet_arg, "\"drugA,drugB,cellline\"")->required();
  cmd_explain->add_option("--out-dir", explain_dir, "export directory")->required();
  cmd_explain->add_option("--layer", explain_opts.layer, "encoder layer (-1 = last)");
  cmd_explain->add_option("--head", explain_opts.head, "attention head (-1 = mean)");
  cmd_explain->add_option("--atom-aggregation", explain_opts.atom_aggregation,
                          "col = attention received, row = attention given");

  // ---- export-embeddings ----
  auto* cmd_emb = app.add_subcommand("export-embeddings", "dump 512/32-dim hidden embeddings");
  CommonModelArgs emb_args;
  std::string emb_model, emb_dir;
  add_model_options(cmd_emb, emb_args, /*with_config=*/false);
  cmd_emb->add_option("--model", emb_model, "checkpoint")->required();
  cmd_emb->add_option("--out-dir", emb_dir, "export directory")->required();

  app.require_subcommand(1);
  app.parse(argc, argv);

  if (cmd_pre->parsed()) {
    double pos_thr = 10.0, neg_thr = 0.0;
    if (std::sscanf(pre_thresholds.c_str(), "%lf,%lf", &pos_thr, &neg_thr) != 2) {
      throw ConfigError("--thresholds must be 'pos,neg', e.g. 10,0");
    }
    PreprocessStats stats;
    const auto raw = read_raw_scores_csv(pre_in);
    const auto triplets = preprocess(raw, pos_thr, neg_thr, &stats);
    write_triplets_csv(pre_out, triplets);
    for (const auto& m : stats.messages) std::cerr << "note: " << m << '\n';
    std::cout << "rows=" << stats.rows_read << " malformed=" << stats.malformed
              << " self_pairs=" << stats.self_pairs << " groups=" << stats.groups
              << " dropped_midzone=" << stats.dropped_midzone << " positives=" << stats.positives
              << " negatives=" << stats.negatives << '\n';
    return 0;
  }

  if (cmd_ppi->parsed()) {
    const auto genes = read_gene_list(ppi_genes_path);
    std::size_t dropped = 0;
    const PpiNetwork net = read_ppi_edges(ppi_edges_path, genes, &dropped);
    if (dropped > 0) {
      std::cerr << "note: dropped " << dropped << " edges with genes outside the manifest\n";
    }
    n2v.dim = static_cast<int>(kNodeDim);
    const Tensor emb = node2vec_embedding(net, n2v, ppi_seed);
    write_embedding_tsv(ppi_out, genes, emb);
    std::cout << "embedded " << genes.size() << " genes (" << net.edges.size() << " edges) -> "
              << ppi_out << '\n';
    return 0;
  }

  if (cmd_train->parsed()) {
    ModelConfig config = load_config(train_args.config_path);
    DatasetBundle bundle = open_bundle(train_args);
    apply_drug_encoder(train_args.drug_encoder, config, bundle);
    const Variant variant = variant_from_string(train_args.variant);
    const EncoderMode1D mode = resolve_encoder_mode(config, bundle);
    if (variant != Variant::one_d) {
      ensure_ppi_embedding(bundle, config, train_args.seed, train_args.bundle_dir);
    }
    std::vector<std::size_t> all(bundle.triplets.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    TrainResult result = train_model(bundle, all, config, variant, mode, train_args.seed);
    result.state.save(train_out);
    write_train_log_csv(train_out + ".train_log.csv", result.log);
    std::cout << "trained " << variant_name(variant) << " (" << encoder_mode_name(mode)
              << " 1D encoder) for " << result.epochs_run << " epochs; initial loss "
              << result.initial_loss;
    if (result.best_epoch > 0) std::cout << "; best epoch " << result.best_epoch;
    std::cout << "; checkpoint " << train_out << '\n';
    if (result.aborted_nonfinite) {
      std::cerr << "error: " << result.abort_message << " (checkpoint holds the last good state)\n";
      return 3;
    }
    return 0;
  }

  if (cmd_cv->parsed()) {
    ModelConfig config = load_config(cv_args.config_path);
    DatasetBundle bundle = open_bundle(cv_args);
    apply_drug_encoder(cv_args.drug_encoder, config, bundle);
    if (!cv_tissue_map.empty()) bundle.tissue = read_tissue_map(cv_tissue_map);
    const Protocol protocol = protocol_from_string(cv_protocol);
    const Variant variant = variant_from_string(cv_args.variant);
    const CvResult result = run_cv(bundle, protocol, config, variant, cv_args.seed);
    write_metrics_csv(cv_out, result);
    write_metrics_json(sibling_json(cv_out), result);
    std::cout << protocol_name(protocol) << " mean AUROC " << result.mean.auroc << " +- "
              << result.stdev.auroc << " over " << result.folds.size() << " folds -> " << cv_out
              << '\n';
    return 0;
  }

  if (cmd_eval->parsed()) {
    ModelState state = ModelState::load(eval_model);
    DatasetBundle bundle = open_bundle(eval_args);
    if (bundle.panel_size() != state.panel_size) {
      throw ConfigError("bundle panel size " + std::to_string(bundle.panel_size()) +
                        " does not match the model's " + std::to_string(state.panel_size));
    }
    if (state.uses_2d()) ensure_ppi_embedding(bundle, state.config, state.seed, eval_args.bundle_dir);
    const auto preds = predict_batch(state, bundle, bundle.triplets);
    std::vector<double> scores;
    std::vector<int> labels;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      if (!preds[i].ok) throw DataGapError(preds[i].error);
      scores.push_back(preds[i].prob_synergy);
      labels.push_back(bundle.triplets[i].label);
    }
    const MetricsReport report = compute_metrics(scores, labels);
    write_single_metrics_csv(eval_out, report, "independent");
    write_single_metrics_json(sibling_json(eval_out), report, "independent");
    std::cout << "independent evaluation: AUROC "
              << (report.ranking_defined ? std::to_string(report.auroc) : std::string("NA"))
              << " ACC " << report.acc << " -> " << eval_out << '\n';
    return 0;
  }

  if (cmd_pred->parsed()) {
    ModelState state = ModelState::load(pred_model);
    DatasetBundle bundle = open_bundle(pred_args);
    if (state.uses_2d()) ensure_ppi_embedding(bundle, state.config, state.seed, pred_args.bundle_dir);
    // pairs.csv needs only the triplet columns
    std::vector<TripletRecord> rows;
    {
      std::ifstream in(pred_pairs);
      if (!in) throw FileError("cannot open '" + pred_pairs + "'");
      std::string line;
      bool header = true;
      while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (header) {
          header = false;
          continue;
        }
        TripletRecord t;
        std::size_t p1 = line.find(',');
        std::size_t p2 = p1 == std::string::npos ? std::string::npos : line.find(',', p1 + 1);
        if (p1 == std::string::npos || p2 == std::string::npos) {
          throw SchemaError("'" + pred_pairs + "': rows need drug_a,drug_b,cell_line");
        }
        t.drug_a = line.substr(0, p1);
        t.drug_b = line.substr(p1 + 1, p2 - p1 - 1);
        const std::size_t p3 = line.find(',', p2 + 1);
        t.cell_line = p3 == std::string::npos ? line.substr(p2 + 1)
                                              : line.substr(p2 + 1, p3 - p2 - 1);
        rows.push_back(std::move(t));
      }
    }
    const auto preds = predict_batch(state, bundle, rows);
    std::ofstream out(pred_out);
    if (!out) throw FileError("cannot write '" + pred_out + "'");
    out << "drug_a,drug_b,cell_line,prob_synergy,prob_antagonism,label,status\n";
    char buf[40];
    std::size_t failed = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      out << rows[i].drug_a << ',' << rows[i].drug_b << ',' << rows[i].cell_line << ',';
      if (preds[i].ok) {
        std::snprintf(buf, sizeof(buf), "%.17g", preds[i].prob_synergy);
        out << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", preds[i].prob_antagonism);
        out << buf << ',' << preds[i].predicted_label << ",ok\n";
      } else {
        out << ",,,missing: " << preds[i].error << '\n';
        ++failed;
      }
    }
    std::cout << "scored " << (preds.size() - failed) << "/" << preds.size() << " rows -> "
              << pred_out << '\n';
    return 0;
  }

  if (cmd_explain->parsed()) {
    ModelState state = ModelState::load(explain_model);
    DatasetBundle bundle = open_bundle(explain_args);
    if (state.uses_2d()) {
      ensure_ppi_embedding(bundle, state.config, state.seed, explain_args.bundle_dir);
    }
    const auto cells = [&] {
      std::vector<std::string> parts;
      std::string cur;
      for (char c : explain_triplet_arg) {
        if (c == ',') {
          parts.push_back(cur);
          cur.clear();
        } else {
          cur += c;
        }
      }
      parts.push_back(cur);
      return parts;
    }();
    if (cells.size() != 3) throw ConfigError("--triplet must be \"drugA,drugB,cellline\"");
    TripletRecord t;
    t.drug_a = cells[0];
    t.drug_b = cells[1];
    t.cell_line = cells[2];
    const ExplainResult result = explain_triplet(state, bundle, t, explain_opts);
    write_explain_exports(result, explain_dir);
    if (result.constant_columns > 0) {
      std::cerr << "note: " << result.constant_columns
                << " constant attention columns normalized to 0\n";
    }
    std::cout << "explained " << t.id() << " (" << result.block_a << "+" << result.block_b
              << " atoms, " << bundle.genes.size() << " genes) -> " << explain_dir << '\n';
    return 0;
  }

  if (cmd_emb->parsed()) {
    ModelState state = ModelState::load(emb_model);
    DatasetBundle bundle = open_bundle(emb_args);
    if (state.uses_2d()) ensure_ppi_embedding(bundle, state.config, state.seed, emb_args.bundle_dir);
    export_embeddings(state, bundle, bundle.triplets, emb_dir);
    std::cout << "exported " << bundle.triplets.size() << " embedding rows -> " << emb_dir << '\n';
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MD-Syn synergistic drug combination predictor"};
  try {
    return run(app, argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
