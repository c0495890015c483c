#include "mdsyn/harness.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "mdsyn/errors.hpp"

namespace mdsyn {

namespace fs = std::filesystem;
using nlohmann::json;

void ensure_ppi_embedding(DatasetBundle& bundle, const ModelConfig& config, std::uint64_t seed,
                          const std::string& cache_dir) {
  if (bundle.has_ppi_embedding) return;
  std::string cache_path;
  if (!cache_dir.empty()) {
    cache_path = (fs::path(cache_dir) / ("ppi_embedding.seed" + std::to_string(seed) + ".tsv")).string();
    if (fs::exists(cache_path)) {
      bundle.ppi_embedding = read_embedding_tsv(cache_path, bundle.genes, kNodeDim);
      bundle.has_ppi_embedding = true;
      return;
    }
  }
  Node2VecParams params = config.node2vec;
  params.dim = static_cast<int>(kNodeDim);
  bundle.ppi_embedding = node2vec_embedding(bundle.ppi, params, seed);
  bundle.has_ppi_embedding = true;
  if (!cache_path.empty()) {
    write_embedding_tsv(cache_path, bundle.genes, bundle.ppi_embedding);
  }
}

CvResult run_cv(DatasetBundle& bundle, Protocol protocol, const ModelConfig& config,
                Variant variant, std::uint64_t seed) {
  SplitPlan plan;
  switch (protocol) {
    case Protocol::kfold5: plan = split_kfold5(bundle.triplets, seed); break;
    case Protocol::leave_drug_combo: plan = split_leave_drug_combo(bundle.triplets); break;
    case Protocol::leave_drug: plan = split_leave_drug(bundle.triplets); break;
    case Protocol::leave_cell_line: plan = split_leave_cell_line(bundle.triplets); break;
    case Protocol::leave_tissue:
      if (bundle.tissue.empty()) {
        throw MissingTissueError("leave-tissue-out needs a tissue map in the bundle");
      }
      plan = split_leave_tissue(bundle.triplets, bundle.tissue);
      break;
  }
  validate_plan(plan, bundle.triplets, bundle.tissue.empty() ? nullptr : &bundle.tissue);

  const EncoderMode1D mode = resolve_encoder_mode(config, bundle);
  if (variant != Variant::one_d) ensure_ppi_embedding(bundle, config, seed, "");

  CvResult result;
  result.protocol = protocol;
  for (std::size_t k = 0; k < plan.folds.size(); ++k) {
    const SplitFold& fold = plan.folds[k];
    TrainResult trained = train_model(bundle, fold.train, config, variant, mode, seed + k);
    if (trained.aborted_nonfinite) {
      throw NumericError("fold " + std::to_string(k) + ": " + trained.abort_message);
    }
    std::vector<TripletRecord> test;
    std::vector<int> labels;
    for (std::size_t i : fold.test) {
      test.push_back(bundle.triplets[i]);
      labels.push_back(bundle.triplets[i].label);
    }
    const auto preds = predict_batch(trained.state, bundle, test);
    std::vector<double> scores;
    scores.reserve(preds.size());
    for (const auto& p : preds) {
      if (!p.ok) throw DataGapError("prediction failed: " + p.error);
      scores.push_back(p.prob_synergy);
    }
    FoldOutcome outcome;
    outcome.held_out = fold.held_out;
    outcome.report = compute_metrics(scores, labels);
    outcome.best_epoch = trained.best_epoch;
    result.folds.push_back(std::move(outcome));
  }
  std::vector<MetricsReport> reports;
  for (const auto& f : result.folds) reports.push_back(f.report);
  result.mean = mean_of(reports);
  result.stdev = stdev_of(reports, result.mean);
  return result;
}

CvResult run_ablation(DatasetBundle& bundle, Variant variant, const ModelConfig& config,
                      std::uint64_t seed) {
  return run_cv(bundle, Protocol::kfold5, config, variant, seed);
}

namespace {

template <class Get>
double mean_field(const std::vector<MetricsReport>& reports, Get get) {
  double s = 0.0;
  for (const auto& r : reports) s += get(r);
  return s / static_cast<double>(reports.size());
}

template <class Get>
double stdev_field(const std::vector<MetricsReport>& reports, double mean, Get get) {
  if (reports.size() < 2) return 0.0;
  double s = 0.0;
  for (const auto& r : reports) {
    const double d = get(r) - mean;
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(reports.size()));
}

constexpr const char* kMetricNames[] = {"auroc", "aupr", "acc", "bacc",
                                        "prec",  "tpr",  "kappa", "f1"};

double get_metric(const MetricsReport& r, std::size_t i) {
  switch (i) {
    case 0: return r.auroc;
    case 1: return r.aupr;
    case 2: return r.acc;
    case 3: return r.bacc;
    case 4: return r.prec;
    case 5: return r.tpr;
    case 6: return r.kappa;
    default: return r.f1;
  }
}

void set_metric(MetricsReport& r, std::size_t i, double v) {
  switch (i) {
    case 0: r.auroc = v; break;
    case 1: r.aupr = v; break;
    case 2: r.acc = v; break;
    case 3: r.bacc = v; break;
    case 4: r.prec = v; break;
    case 5: r.tpr = v; break;
    case 6: r.kappa = v; break;
    default: r.f1 = v; break;
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

MetricsReport mean_of(const std::vector<MetricsReport>& reports) {
  if (reports.empty()) throw DataError("mean_of: no reports");
  MetricsReport m;
  m.ranking_defined = true;
  for (const auto& r : reports) {
    m.n_pos += r.n_pos;
    m.n_neg += r.n_neg;
    if (!r.ranking_defined) m.ranking_defined = false;
  }
  for (std::size_t i = 0; i < 8; ++i) {
    set_metric(m, i, mean_field(reports, [i](const MetricsReport& r) { return get_metric(r, i); }));
  }
  return m;
}

MetricsReport stdev_of(const std::vector<MetricsReport>& reports, const MetricsReport& mean) {
  MetricsReport s;
  s.ranking_defined = mean.ranking_defined;
  for (std::size_t i = 0; i < 8; ++i) {
    set_metric(s, i, stdev_field(reports, get_metric(mean, i),
                                 [i](const MetricsReport& r) { return get_metric(r, i); }));
  }
  return s;
}

void write_metrics_csv(const std::string& path, const CvResult& result) {
  std::ofstream out(path);
  if (!out) throw FileError("cannot write '" + path + "'");
  out << "fold,held_out,auroc,aupr,acc,bacc,prec,tpr,kappa,f1,n_pos,n_neg\n";
  for (std::size_t k = 0; k < result.folds.size(); ++k) {
    const auto& f = result.folds[k];
    out << k << ',' << f.held_out;
    if (f.report.ranking_defined) {
      out << ',' << fmt(f.report.auroc) << ',' << fmt(f.report.aupr);
    } else {
      out << ",NA,NA";
    }
    out << ',' << fmt(f.report.acc) << ',' << fmt(f.report.bacc) << ',' << fmt(f.report.prec)
        << ',' << fmt(f.report.tpr) << ',' << fmt(f.report.kappa) << ',' << fmt(f.report.f1)
        << ',' << f.report.n_pos << ',' << f.report.n_neg << '\n';
  }
  out << "mean_std,";
  for (std::size_t i = 0; i < 8; ++i) {
    out << ',' << fmt(get_metric(result.mean, i)) << "\xc2\xb1" << fmt(get_metric(result.stdev, i));
  }
  out << ",,\n";
}

namespace {

json report_to_json(const MetricsReport& r) {
  json j;
  if (r.ranking_defined) {
    j["auroc"] = r.auroc;
    j["aupr"] = r.aupr;
  } else {
    j["auroc"] = nullptr;
    j["aupr"] = nullptr;
  }
  j["acc"] = r.acc;
  j["bacc"] = r.bacc;
  j["prec"] = r.prec;
  j["tpr"] = r.tpr;
  j["kappa"] = r.kappa;
  j["f1"] = r.f1;
  j["n_pos"] = r.n_pos;
  j["n_neg"] = r.n_neg;
  return j;
}

}  // namespace

void write_metrics_json(const std::string& path, const CvResult& result) {
  json j;
  j["protocol"] = protocol_name(result.protocol);
  json folds = json::array();
  for (const auto& f : result.folds) {
    json fj = report_to_json(f.report);
    fj["held_out"] = f.held_out;
    fj["best_epoch"] = f.best_epoch;
    folds.push_back(fj);
  }
  j["folds"] = folds;
  j["mean"] = report_to_json(result.mean);
  j["std"] = report_to_json(result.stdev);
  std::ofstream out(path);
  if (!out) throw FileError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

void write_single_metrics_csv(const std::string& path, const MetricsReport& report,
                              const std::string& note) {
  std::ofstream out(path);
  if (!out) throw FileError("cannot write '" + path + "'");
  out << "fold,held_out,auroc,aupr,acc,bacc,prec,tpr,kappa,f1,n_pos,n_neg\n";
  out << "0," << note;
  if (report.ranking_defined) {
    out << ',' << fmt(report.auroc) << ',' << fmt(report.aupr);
  } else {
    out << ",NA,NA";
  }
  out << ',' << fmt(report.acc) << ',' << fmt(report.bacc) << ',' << fmt(report.prec) << ','
      << fmt(report.tpr) << ',' << fmt(report.kappa) << ',' << fmt(report.f1) << ','
      << report.n_pos << ',' << report.n_neg << '\n';
}

void write_single_metrics_json(const std::string& path, const MetricsReport& report,
                               const std::string& note) {
  json j = report_to_json(report);
  j["note"] = note;
  std::ofstream out(path);
  if (!out) throw FileError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

}  // namespace mdsyn
