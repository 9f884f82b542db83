#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "actens/dataset.hpp"
#include "actens/ensemble.hpp"
#include "actens/network.hpp"
#include "actens/registry.hpp"
#include "actens/rng.hpp"
#include "actens/scores.hpp"
#include "actens/text.hpp"

namespace actens {

struct ProtocolConfig {
  TrainConfig train;
  int folds = 5;
  std::vector<int> hidden = {32, 32};
  std::uint64_t master_seed = 1;
};

struct PerformanceTable {
  std::vector<std::string> models;
  std::vector<std::string> datasets;
  std::vector<std::vector<double>> cells;  // [model][dataset], accuracy in [0, 1]

  double avg(int m) const {
    const auto& row = cells[static_cast<std::size_t>(m)];
    double s = 0.0;
    for (const double v : row) s += v;
    return s / static_cast<double>(row.size());
  }

  const std::vector<double>& row(int m) const { return cells[static_cast<std::size_t>(m)]; }

  int model_index(const std::string& name) const {
    for (std::size_t i = 0; i < models.size(); ++i)
      if (models[i] == name) return static_cast<int>(i);
    return -1;
  }
};

struct ProtocolResult {
  PerformanceTable table;
  ScoreStore store;  // fused scores per (model, dataset), same order as the table
  nlohmann::json manifest;
};

namespace detail {

struct MemberCvResult {
  ScoreMatrix scores;
  bool diverged = false;
  int fold = -1;  // fold where training stopped being finite
};

// Trains one member once per fold (or once on a fixed split) and assembles its
// held-out scores. Scaling is fitted on the training rows of each fold only;
// the scaler mode follows the member's input regime.
inline MemberCvResult run_member(const MemberDef& m, const Dataset& ds, const FoldSplit& folds,
                                 const ProtocolConfig& cfg, const Rng& member_root) {
  MemberCvResult out;
  const int n = ds.samples();
  const int d = ds.dims();

  std::vector<int> dims;
  dims.push_back(d);
  for (const int h : cfg.hidden) dims.push_back(h);
  dims.push_back(ds.class_count);
  std::vector<ActivationSpec> specs;
  for (const auto& name : m.layer_acts) specs.push_back(spec_by_name(name, m.max_input));

  TrainConfig tc = cfg.train;
  if (m.epochs_override > 0) tc.epochs = m.epochs_override;
  const FeatureScaler::Mode mode =
      m.max_input > 1.0 ? FeatureScaler::Mode::to_range : FeatureScaler::Mode::standardize;

  AugmentHook hook;
  if (tc.augmentation && ds.is_image()) {
    const int h = ds.image_h;
    const int w = ds.image_w;
    hook = [h, w](std::span<double> img, Rng& rng) { augment(img, h, w, rng); };
  }

  const bool fixed = ds.has_fixed_split();
  const int rounds = fixed ? 1 : folds.k;
  std::vector<int> test_rows_all;  // original indices covered, in emission order

  for (int f = 0; f < rounds; ++f) {
    std::vector<int> train_rows, test_rows;
    for (int i = 0; i < n; ++i) {
      const bool is_test = fixed ? ds.fixed_test[static_cast<std::size_t>(i)] != 0
                                 : folds.assignment[static_cast<std::size_t>(i)] == f;
      (is_test ? test_rows : train_rows).push_back(i);
    }
    if (train_rows.empty() || test_rows.empty())
      throw std::runtime_error("run_member: empty train or test part on " + ds.name);

    Matrix xtr(static_cast<int>(train_rows.size()), d);
    std::vector<int> ytr(train_rows.size());
    for (std::size_t r = 0; r < train_rows.size(); ++r) {
      for (int c = 0; c < d; ++c) xtr(static_cast<int>(r), c) = ds.features(train_rows[r], c);
      ytr[r] = ds.labels[static_cast<std::size_t>(train_rows[r])];
    }
    Matrix xte(static_cast<int>(test_rows.size()), d);
    for (std::size_t r = 0; r < test_rows.size(); ++r)
      for (int c = 0; c < d; ++c) xte(static_cast<int>(r), c) = ds.features(test_rows[r], c);

    const FeatureScaler scaler = FeatureScaler::fit(xtr, mode, m.max_input);
    scaler.apply(xtr);
    scaler.apply(xte);

    Rng fr = member_root.child(static_cast<std::uint64_t>(f));
    Network net = build_mlp(dims, specs, fr.child(0).seed());
    tc.seed = fr.child(1).seed();
    try {
      train(net, xtr, ytr, tc, hook);
    } catch (const TrainingDiverged&) {
      out.diverged = true;
      out.fold = f;
      return out;
    }
    const Matrix probs = predict_proba(net, xte);

    if (out.scores.probs.rows == 0) {
      out.scores.probs = Matrix(fixed ? static_cast<int>(test_rows.size()) : n, ds.class_count);
      out.scores.labels.assign(static_cast<std::size_t>(out.scores.probs.rows), 0);
    }
    for (std::size_t r = 0; r < test_rows.size(); ++r) {
      const int dst = fixed ? static_cast<int>(r) : test_rows[r];
      for (int c = 0; c < ds.class_count; ++c) out.scores.probs(dst, c) = probs(static_cast<int>(r), c);
      out.scores.labels[static_cast<std::size_t>(dst)] =
          ds.labels[static_cast<std::size_t>(test_rows[r])];
      test_rows_all.push_back(test_rows[r]);
    }
  }
  if (!fixed && static_cast<int>(test_rows_all.size()) != n)
    throw std::logic_error("run_member: folds did not cover every sample exactly once");
  return out;
}

inline nlohmann::json member_to_json(const MemberDef& m, int resolved_epochs) {
  nlohmann::json j;
  j["layer_acts"] = m.layer_acts;
  j["maxInput"] = m.max_input;
  j["epochs"] = resolved_epochs;
  j["label"] = m.label;
  return j;
}

}  // namespace detail

// Runs every model over every dataset: stratified k-fold CV (or the dataset's
// fixed split), sum-rule fusion of member scores, one accuracy cell per pair.
// Fold assignments depend only on the master seed and the dataset position, so
// all models see identical splits. Models named by a selection definition are
// filled in afterward from the run's single-model rows.
inline ProtocolResult run_protocol(const std::vector<EnsembleDef>& defs,
                                   const std::vector<Dataset>& datasets, const ProtocolConfig& cfg) {
  if (defs.empty()) throw std::invalid_argument("run_protocol: no models");
  if (datasets.empty()) throw std::invalid_argument("run_protocol: no datasets");

  ProtocolResult res;
  for (const auto& def : defs) res.table.models.push_back(def.name);
  for (const auto& ds : datasets) res.table.datasets.push_back(ds.name);
  res.table.cells.assign(defs.size(), std::vector<double>(datasets.size(), 0.0));
  res.store.models = res.table.models;
  res.store.datasets = res.table.datasets;
  res.store.cells.assign(defs.size(), std::vector<ScoreMatrix>(datasets.size()));

  Rng root(cfg.master_seed);
  std::vector<FoldSplit> splits(datasets.size());
  for (std::size_t di = 0; di < datasets.size(); ++di) {
    if (!datasets[di].has_fixed_split())
      splits[di] = stratified_kfold(datasets[di], cfg.folds,
                                    root.child(500 + static_cast<std::uint64_t>(di)).seed());
  }

  nlohmann::json skipped = nlohmann::json::array();

  for (std::size_t mi = 0; mi < defs.size(); ++mi) {
    const EnsembleDef& def = defs[mi];
    if (def.selection) continue;
    if (def.members.empty()) throw std::invalid_argument("run_protocol: " + def.name + " has no members");
    for (std::size_t di = 0; di < datasets.size(); ++di) {
      const Dataset& ds = datasets[di];
      std::vector<ScoreMatrix> member_scores;
      int lost = 0;
      for (std::size_t me = 0; me < def.members.size(); ++me) {
        const Rng member_root = root.child(1000 + mi, di).child(me);
        detail::MemberCvResult r =
            detail::run_member(def.members[me], ds, splits[di], cfg, member_root);
        if (r.diverged) {
          if (def.members.size() == 1)
            throw std::runtime_error("run_protocol: training diverged (model " + def.name +
                                     ", dataset " + ds.name + ", fold " + std::to_string(r.fold) + ")");
          ++lost;
          skipped.push_back({{"model", def.name},
                             {"dataset", ds.name},
                             {"member", def.members[me].label},
                             {"fold", r.fold}});
          continue;
        }
        member_scores.push_back(std::move(r.scores));
      }
      if (5 * lost > static_cast<int>(def.members.size()))
        throw std::runtime_error("run_protocol: more than 20% of " + def.name +
                                 " members diverged on " + ds.name);
      ScoreMatrix fused = sum_rule(member_scores);
      res.table.cells[mi][di] = accuracy(fused);
      res.store.cells[mi][di] = std::move(fused);
    }
  }

  // Selection rows: floating search over this run's single-model candidates,
  // scored on every dataset except the target, then applied to the target.
  nlohmann::json selections = nlohmann::json::object();
  std::vector<int> candidates;
  for (std::size_t mi = 0; mi < defs.size(); ++mi)
    if (!defs[mi].selection && defs[mi].members.size() == 1) candidates.push_back(static_cast<int>(mi));
  for (std::size_t mi = 0; mi < defs.size(); ++mi) {
    if (!defs[mi].selection) continue;
    if (candidates.size() < 2)
      throw std::invalid_argument("run_protocol: selection needs at least 2 single-model candidates");
    if (datasets.size() < 2)
      throw std::invalid_argument("run_protocol: selection needs at least 2 datasets");
    ScoreStore sub;
    for (const int c : candidates) {
      sub.models.push_back(res.store.models[static_cast<std::size_t>(c)]);
      sub.cells.push_back(res.store.cells[static_cast<std::size_t>(c)]);
    }
    sub.datasets = res.store.datasets;
    for (std::size_t di = 0; di < datasets.size(); ++di) {
      const std::vector<int> picked = sffs_select(sub, static_cast<int>(di));
      std::vector<ScoreMatrix> chosen;
      nlohmann::json names = nlohmann::json::array();
      for (const int p : picked) {
        chosen.push_back(sub.cells[static_cast<std::size_t>(p)][di]);
        names.push_back(sub.models[static_cast<std::size_t>(p)]);
      }
      ScoreMatrix fused = sum_rule(chosen);
      res.table.cells[mi][di] = accuracy(fused);
      res.store.cells[mi][di] = std::move(fused);
      selections[datasets[di].name] = names;
    }
  }

  nlohmann::json& man = res.manifest;
  man["library_version"] = kLibraryVersion;
  man["master_seed"] = cfg.master_seed;
  man["folds"] = cfg.folds;
  man["hidden"] = cfg.hidden;
  man["train"] = {{"base_lr", cfg.train.base_lr},
                  {"batch_size", cfg.train.batch_size},
                  {"epochs", cfg.train.epochs},
                  {"last_layer_lr_mult", cfg.train.last_layer_lr_mult},
                  {"augmentation", cfg.train.augmentation}};
  man["datasets"] = nlohmann::json::array();
  for (const auto& ds : datasets)
    man["datasets"].push_back({{"name", ds.name},
                               {"samples", ds.samples()},
                               {"dims", ds.dims()},
                               {"classes", ds.class_count},
                               {"fixed_split", ds.has_fixed_split()}});
  man["models"] = nlohmann::json::array();
  for (const auto& def : defs) {
    nlohmann::json jm;
    jm["name"] = def.name;
    jm["fusion"] = def.fusion;
    if (def.selection) {
      jm["selection"] = true;
      jm["selected"] = selections;
    } else {
      jm["members"] = nlohmann::json::array();
      for (const auto& m : def.members)
        jm["members"].push_back(detail::member_to_json(
            m, m.epochs_override > 0 ? m.epochs_override : cfg.train.epochs));
    }
    man["models"].push_back(std::move(jm));
  }
  man["skipped_members"] = std::move(skipped);
  return res;
}

// ---------------------------------------------------------------------------
// Persistence: performance table as CSV and JSON, score store as CSV.
// ---------------------------------------------------------------------------

inline void write_performance_csv(const PerformanceTable& t, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_performance_csv: cannot open " + path);
  out << "model";
  for (const auto& d : t.datasets) out << "," << d;
  out << ",Avg\n";
  for (std::size_t m = 0; m < t.models.size(); ++m) {
    out << t.models[m];
    for (const double v : t.cells[m]) out << "," << fmt_double(v);
    out << "," << fmt_double(t.avg(static_cast<int>(m))) << "\n";
  }
}

inline PerformanceTable read_performance_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_performance_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_performance_csv: empty file " + path);
  auto header = split(line, ',');
  if (header.size() < 3 || header.front() != "model" || header.back() != "Avg")
    throw std::runtime_error("read_performance_csv: bad header in " + path);
  PerformanceTable t;
  t.datasets.assign(header.begin() + 1, header.end() - 1);
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != header.size())
      throw std::runtime_error("read_performance_csv: line " + std::to_string(lineno) +
                               ": column count mismatch");
    t.models.push_back(cells.front());
    std::vector<double> row;
    for (std::size_t c = 1; c + 1 < cells.size(); ++c) {
      double v;
      if (!parse_double(cells[c], v))
        throw std::runtime_error("read_performance_csv: line " + std::to_string(lineno) +
                                 ": bad cell '" + cells[c] + "'");
      row.push_back(v);
    }
    t.cells.push_back(std::move(row));
  }
  if (t.models.empty()) throw std::runtime_error("read_performance_csv: no rows in " + path);
  return t;
}

inline nlohmann::json performance_to_json(const PerformanceTable& t) {
  nlohmann::json j;
  j["models"] = t.models;
  j["datasets"] = t.datasets;
  j["cells"] = t.cells;
  std::vector<double> avg;
  for (std::size_t m = 0; m < t.models.size(); ++m) avg.push_back(t.avg(static_cast<int>(m)));
  j["avg"] = avg;
  return j;
}

inline void write_score_csv(const ScoreMatrix& s, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_score_csv: cannot open " + path);
  for (int c = 0; c < s.classes(); ++c) out << "p" << c << ",";
  out << "label\n";
  for (int r = 0; r < s.samples(); ++r) {
    for (int c = 0; c < s.classes(); ++c) out << fmt_double(s.probs(r, c)) << ",";
    out << s.labels[static_cast<std::size_t>(r)] << "\n";
  }
}

inline ScoreMatrix read_score_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_score_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_score_csv: empty file " + path);
  const auto header = split(line, ',');
  if (header.size() < 2 || header.back() != "label")
    throw std::runtime_error("read_score_csv: bad header in " + path);
  const int classes = static_cast<int>(header.size()) - 1;
  std::vector<double> probs;
  std::vector<int> labels;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    if (static_cast<int>(cells.size()) != classes + 1)
      throw std::runtime_error("read_score_csv: line " + std::to_string(lineno) +
                               ": column count mismatch");
    for (int c = 0; c < classes; ++c) {
      double v;
      if (!parse_double(cells[static_cast<std::size_t>(c)], v))
        throw std::runtime_error("read_score_csv: line " + std::to_string(lineno) + ": bad cell");
      probs.push_back(v);
    }
    long long lab;
    if (!parse_int(cells.back(), lab))
      throw std::runtime_error("read_score_csv: line " + std::to_string(lineno) + ": bad label");
    labels.push_back(static_cast<int>(lab));
  }
  ScoreMatrix s;
  s.probs = Matrix(static_cast<int>(labels.size()), classes);
  s.probs.data = std::move(probs);
  s.labels = std::move(labels);
  return s;
}

}  // namespace actens
