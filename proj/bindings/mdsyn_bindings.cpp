// Python bindings for the main operations: SMILES parsing, preprocessing,
// metrics, split protocols, PPI embedding, training and prediction.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mdsyn/dataset.hpp"
#include "mdsyn/errors.hpp"
#include "mdsyn/explain.hpp"
#include "mdsyn/harness.hpp"
#include "mdsyn/metrics.hpp"
#include "mdsyn/model.hpp"
#include "mdsyn/smiles.hpp"
#include "mdsyn/splits.hpp"
#include "mdsyn/trainer.hpp"

namespace py = pybind11;
using namespace mdsyn;

namespace {

py::array_t<double> tensor_to_array(const Tensor& t) {
  py::array_t<double> out({t.rows(), t.cols()});
  std::copy(t.data(), t.data() + t.size(), out.mutable_data());
  return out;
}

Tensor array_to_tensor(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw ShapeError("expected a 2-d array");
  Tensor t(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::copy(a.data(), a.data() + t.size(), t.data());
  return t;
}

std::vector<TripletRecord> records_from_tuples(
    const std::vector<std::tuple<std::string, std::string, std::string, int>>& rows) {
  std::vector<TripletRecord> out;
  out.reserve(rows.size());
  for (const auto& [a, b, c, label] : rows) {
    TripletRecord t;
    t.drug_a = a;
    t.drug_b = b;
    t.cell_line = c;
    t.label = label;
    out.push_back(std::move(t));
  }
  return out;
}

py::dict report_to_dict(const MetricsReport& r) {
  py::dict d;
  if (r.ranking_defined) {
    d["auroc"] = r.auroc;
    d["aupr"] = r.aupr;
  } else {
    d["auroc"] = py::none();
    d["aupr"] = py::none();
  }
  d["acc"] = r.acc;
  d["bacc"] = r.bacc;
  d["prec"] = r.prec;
  d["tpr"] = r.tpr;
  d["kappa"] = r.kappa;
  d["f1"] = r.f1;
  d["n_pos"] = r.n_pos;
  d["n_neg"] = r.n_neg;
  return d;
}

py::list plan_to_list(const SplitPlan& plan) {
  py::list folds;
  for (const SplitFold& f : plan.folds) {
    py::dict d;
    d["train"] = f.train;
    d["test"] = f.test;
    d["held_out"] = f.held_out;
    folds.append(d);
  }
  return folds;
}

}  // namespace

PYBIND11_MODULE(_mdsyn, m) {
  m.doc() = "MD-Syn synergistic drug combination predictor (C++ core)";

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<NumericError>(m, "NumericError");
  py::register_exception<DataError>(m, "DataError");

  py::class_<MolecularGraph>(m, "MolecularGraph")
      .def_property_readonly("num_atoms", &MolecularGraph::num_atoms)
      .def_property_readonly("num_edges", [](const MolecularGraph& g) { return g.edge_count; })
      .def_property_readonly("atom_symbols",
                             [](const MolecularGraph& g) { return g.atom_symbols; })
      .def_property_readonly("features",
                             [](const MolecularGraph& g) { return tensor_to_array(g.features); })
      .def_property_readonly("adjacency",
                             [](const MolecularGraph& g) { return tensor_to_array(g.adjacency); })
      .def("__repr__", [](const MolecularGraph& g) {
        return "<MolecularGraph atoms=" + std::to_string(g.num_atoms()) +
               " edges=" + std::to_string(g.edge_count) + ">";
      });

  m.def("parse_smiles", &parse_smiles, py::arg("smiles"),
        "Parse a SMILES string into a featurized molecular graph (78-dim atom rows).");

  m.def(
      "preprocess",
      [](const std::vector<std::tuple<std::string, std::string, std::string, double>>& rows,
         double pos_threshold, double neg_threshold) {
        std::vector<RawScoreRecord> raw;
        raw.reserve(rows.size());
        std::size_t line = 1;
        for (const auto& [a, b, c, score] : rows) {
          char buf[40];
          std::snprintf(buf, sizeof(buf), "%.17g", score);
          raw.push_back(RawScoreRecord{a, b, c, buf, line++});
        }
        PreprocessStats stats;
        const auto triplets = preprocess(raw, pos_threshold, neg_threshold, &stats);
        py::list out;
        for (const auto& t : triplets) {
          py::dict d;
          d["drug_a"] = t.drug_a;
          d["drug_b"] = t.drug_b;
          d["cell_line"] = t.cell_line;
          d["score"] = t.score;
          d["label"] = t.label;
          out.append(d);
        }
        py::dict st;
        st["rows"] = stats.rows_read;
        st["malformed"] = stats.malformed;
        st["self_pairs"] = stats.self_pairs;
        st["dropped_midzone"] = stats.dropped_midzone;
        st["positives"] = stats.positives;
        st["negatives"] = stats.negatives;
        return py::make_tuple(out, st);
      },
      py::arg("records"), py::arg("pos_threshold") = 10.0, py::arg("neg_threshold") = 0.0,
      "Average duplicate (unordered pair, cell line) groups and assign labels.");

  m.def(
      "compute_metrics",
      [](const std::vector<double>& scores, const std::vector<int>& labels, double threshold) {
        return report_to_dict(compute_metrics(scores, labels, threshold));
      },
      py::arg("scores"), py::arg("labels"), py::arg("threshold") = 0.5);

  m.def(
      "split_kfold5",
      [](const std::vector<std::tuple<std::string, std::string, std::string, int>>& rows,
         std::uint64_t seed) {
        const auto triplets = records_from_tuples(rows);
        const SplitPlan plan = split_kfold5(triplets, seed);
        validate_plan(plan, triplets);
        return plan_to_list(plan);
      },
      py::arg("triplets"), py::arg("seed") = 0);

  m.def("split_leave_drug_combo",
        [](const std::vector<std::tuple<std::string, std::string, std::string, int>>& rows) {
          const auto triplets = records_from_tuples(rows);
          const SplitPlan plan = split_leave_drug_combo(triplets);
          validate_plan(plan, triplets);
          return plan_to_list(plan);
        });

  m.def("split_leave_drug",
        [](const std::vector<std::tuple<std::string, std::string, std::string, int>>& rows) {
          const auto triplets = records_from_tuples(rows);
          const SplitPlan plan = split_leave_drug(triplets);
          validate_plan(plan, triplets);
          return plan_to_list(plan);
        });

  m.def("split_leave_cell_line",
        [](const std::vector<std::tuple<std::string, std::string, std::string, int>>& rows) {
          const auto triplets = records_from_tuples(rows);
          const SplitPlan plan = split_leave_cell_line(triplets);
          validate_plan(plan, triplets);
          return plan_to_list(plan);
        });

  m.def("split_leave_tissue",
        [](const std::vector<std::tuple<std::string, std::string, std::string, int>>& rows,
           const std::map<std::string, std::string>& tissue_map) {
          const auto triplets = records_from_tuples(rows);
          const SplitPlan plan = split_leave_tissue(triplets, tissue_map);
          validate_plan(plan, triplets, &tissue_map);
          return plan_to_list(plan);
        });

  m.def(
      "normalize_adjacency",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& adj,
         bool self_loops) { return tensor_to_array(normalize_adjacency(array_to_tensor(adj), self_loops)); },
      py::arg("adjacency"), py::arg("self_loops") = true);

  m.def(
      "node2vec_embedding",
      [](const std::vector<std::string>& nodes,
         const std::vector<std::pair<std::string, std::string>>& edges, int dim, double p, double q,
         int walk_length, int walks_per_node, int window, int negatives, int epochs,
         std::uint64_t seed) {
        PpiNetwork net;
        net.genes = nodes;
        std::map<std::string, int> index;
        for (std::size_t i = 0; i < nodes.size(); ++i) index[nodes[i]] = static_cast<int>(i);
        std::set<std::pair<int, int>> seen;
        for (const auto& [a, b] : edges) {
          const auto ia = index.find(a);
          const auto ib = index.find(b);
          if (ia == index.end() || ib == index.end() || ia->second == ib->second) continue;
          seen.insert(std::minmax(ia->second, ib->second));
        }
        net.edges.assign(seen.begin(), seen.end());
        net.build_neighbors();
        Node2VecParams params;
        params.dim = dim;
        params.p = p;
        params.q = q;
        params.walk_length = walk_length;
        params.walks_per_node = walks_per_node;
        params.window = window;
        params.negatives = negatives;
        params.epochs = epochs;
        return tensor_to_array(node2vec_embedding(net, params, seed));
      },
      py::arg("nodes"), py::arg("edges"), py::arg("dim") = 128, py::arg("p") = 1.0,
      py::arg("q") = 1.0, py::arg("walk_length") = 80, py::arg("walks_per_node") = 10,
      py::arg("window") = 10, py::arg("negatives") = 5, py::arg("epochs") = 5, py::arg("seed") = 0);

  m.def(
      "train",
      [](const std::string& bundle_dir, const std::string& out_ckpt, const std::string& config_json,
         const std::string& variant, std::uint64_t seed) {
        ModelConfig config =
            config_json.empty() ? ModelConfig{} : ModelConfig::from_json_text(config_json);
        DatasetBundle bundle = load_bundle(bundle_dir, Strictness::strict);
        const Variant v = variant_from_string(variant);
        const EncoderMode1D mode = resolve_encoder_mode(config, bundle);
        if (v != Variant::one_d) ensure_ppi_embedding(bundle, config, seed, bundle_dir);
        std::vector<std::size_t> all(bundle.triplets.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        const TrainResult result = train_model(bundle, all, config, v, mode, seed);
        if (result.aborted_nonfinite) throw NumericError(result.abort_message);
        result.state.save(out_ckpt);
        py::dict d;
        d["epochs_run"] = result.epochs_run;
        d["initial_loss"] = result.initial_loss;
        d["best_epoch"] = result.best_epoch;
        d["best_val_auroc"] = result.best_val_auroc;
        d["checkpoint"] = out_ckpt;
        return d;
      },
      py::arg("bundle_dir"), py::arg("out_ckpt"), py::arg("config_json") = std::string(),
      py::arg("variant") = "full", py::arg("seed") = 0);

  m.def(
      "predict",
      [](const std::string& ckpt, const std::string& bundle_dir,
         const std::vector<std::tuple<std::string, std::string, std::string>>& rows) {
        ModelState state = ModelState::load(ckpt);
        DatasetBundle bundle = load_bundle(bundle_dir, Strictness::strict);
        if (state.uses_2d()) ensure_ppi_embedding(bundle, state.config, state.seed, bundle_dir);
        std::vector<TripletRecord> triplets;
        for (const auto& [a, b, c] : rows) {
          TripletRecord t;
          t.drug_a = a;
          t.drug_b = b;
          t.cell_line = c;
          triplets.push_back(std::move(t));
        }
        const auto preds = predict_batch(state, bundle, triplets);
        py::list out;
        for (const auto& p : preds) {
          py::dict d;
          d["triplet_id"] = p.triplet_id;
          d["ok"] = p.ok;
          if (p.ok) {
            d["prob_synergy"] = p.prob_synergy;
            d["prob_antagonism"] = p.prob_antagonism;
            d["label"] = p.predicted_label;
          } else {
            d["error"] = p.error;
          }
          out.append(d);
        }
        return out;
      },
      py::arg("checkpoint"), py::arg("bundle_dir"), py::arg("rows"));

  m.def(
      "explain",
      [](const std::string& ckpt, const std::string& bundle_dir, const std::string& drug_a,
         const std::string& drug_b, const std::string& cell_line, const std::string& out_dir,
         int layer, int head) {
        ModelState state = ModelState::load(ckpt);
        DatasetBundle bundle = load_bundle(bundle_dir, Strictness::strict);
        ensure_ppi_embedding(bundle, state.config, state.seed, bundle_dir);
        TripletRecord t;
        t.drug_a = drug_a;
        t.drug_b = drug_b;
        t.cell_line = cell_line;
        ExplainOptions opts;
        opts.layer = layer;
        opts.head = head;
        const ExplainResult r = explain_triplet(state, bundle, t, opts);
        write_explain_exports(r, out_dir);
        py::dict d;
        d["tokens"] = r.token_labels.size();
        d["block_a"] = r.block_a;
        d["block_b"] = r.block_b;
        d["out_dir"] = out_dir;
        return d;
      },
      py::arg("checkpoint"), py::arg("bundle_dir"), py::arg("drug_a"), py::arg("drug_b"),
      py::arg("cell_line"), py::arg("out_dir"), py::arg("layer") = -1, py::arg("head") = -1);

  m.attr("ATOM_FEATURE_DIM") = static_cast<int>(kAtomFeatureDim);
  m.attr("DRUG_EMBEDDING_DIM") = static_cast<int>(kDrugEmbeddingDim);
  m.attr("CANONICAL_PANEL_SIZE") = static_cast<int>(kCanonicalPanelSize);
#ifdef MDSYN_VERSION
  m.attr("__version__") = MDSYN_VERSION;
#else
  m.attr("__version__") = "dev";
#endif
}
