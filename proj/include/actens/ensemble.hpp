#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "actens/network.hpp"
#include "actens/registry.hpp"
#include "actens/rng.hpp"
#include "actens/scores.hpp"
#include "actens/text.hpp"

namespace actens {

// ---------------------------------------------------------------------------
// Activation pools
// ---------------------------------------------------------------------------

// "full" is every registered activation; "reduced" drops the pairwise,
// mirrored-hinge and root-sign entries that need wider layers or longer
// schedules than the smaller configuration tolerates.
inline std::vector<std::string> architecture_pool(const std::string& tag) {
  std::vector<std::string> names;
  for (const auto& e : activation_registry()) names.push_back(e.name);
  if (tag == "full") return names;
  if (tag == "reduced") {
    names.erase(std::remove_if(names.begin(), names.end(),
                               [](const std::string& n) {
                                 return n == "melu_2d" || n == "splash" || n == "srs";
                               }),
                names.end());
    return names;
  }
  throw std::invalid_argument("architecture_pool: unknown tag " + tag);
}

// Pools for stochastic layer substitution, in increasing breadth.
inline std::vector<std::string> stochastic_pool(int variant) {
  static const std::vector<std::string> pool1 = {"melu_k8", "leaky_relu", "elu",  "melu_k4", "prelu",
                                                 "srelu",   "aplu",       "galu", "sgalu"};
  static const std::vector<std::string> pool2_extra = {"relu",        "soft_learnable", "pdelu", "mish",
                                                       "srs",         "swish_learnable", "swish"};
  switch (variant) {
    case 1:
      return pool1;
    case 2: {
      std::vector<std::string> p = pool1;
      p.insert(p.end(), pool2_extra.begin(), pool2_extra.end());
      return p;
    }
    case 3: {
      std::vector<std::string> p = stochastic_pool(2);
      p.erase(std::remove_if(p.begin(), p.end(),
                             [](const std::string& n) {
                               return n == "melu_k8" || n == "melu_k4" || n == "galu" || n == "sgalu";
                             }),
              p.end());
      return p;
    }
    case 4:
      return architecture_pool("full");
    default:
      throw std::invalid_argument("stochastic_pool: variant must be 1..4");
  }
}

// One activation name drawn independently and uniformly per layer.
inline std::vector<std::string> sample_member_acts(const std::vector<std::string>& pool, int layers,
                                                   Rng& rng) {
  if (pool.empty()) throw std::invalid_argument("sample_member_acts: empty pool");
  std::vector<std::string> acts;
  acts.reserve(static_cast<std::size_t>(layers));
  for (int i = 0; i < layers; ++i)
    acts.push_back(pool[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(pool.size())))]);
  return acts;
}

// Alternative mode: a single draw assigns the same activation to every layer.
inline std::vector<std::string> sample_member_acts_per_network(const std::vector<std::string>& pool,
                                                               int layers, Rng& rng) {
  if (pool.empty()) throw std::invalid_argument("sample_member_acts: empty pool");
  const std::string name =
      pool[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(pool.size())))];
  return std::vector<std::string>(static_cast<std::size_t>(layers), name);
}

// ---------------------------------------------------------------------------
// Ensemble definitions
// ---------------------------------------------------------------------------

struct MemberDef {
  std::vector<std::string> layer_acts;  // one activation name per hidden layer
  double max_input = 1.0;
  int epochs_override = 0;  // 0 keeps the run-level epoch count
  std::string label;
};

struct EnsembleDef {
  std::string name;
  std::vector<MemberDef> members;
  std::string fusion = "sum";
  bool selection = false;  // members picked at run time by the floating search
};

namespace detail {

inline MemberDef uniform_member(const std::string& act, double max_input, int layers,
                                int epochs_override = 0) {
  MemberDef m;
  m.layer_acts.assign(static_cast<std::size_t>(layers), act);
  m.max_input = max_input;
  m.epochs_override = epochs_override;
  m.label = act + "@" + fmt_double(max_input);
  return m;
}

inline std::vector<std::string> fixed_recipe_names(const std::string& name, double max_input) {
  const bool wide = max_input > 1.0;
  if (name == "ENS") {
    if (!wide) return {"melu_k8", "leaky_relu", "elu", "melu_k4", "prelu", "srelu", "aplu", "relu"};
    return {"melu_k8", "melu_k4", "srelu", "aplu", "relu"};
  }
  if (name == "ENS_G") {
    auto v = fixed_recipe_names("ENS", max_input);
    v.push_back("sgalu");
    v.push_back("galu");
    return v;
  }
  if (name == "ALL") {
    if (!wide) return architecture_pool("full");
    return {"melu_k8", "melu_k4", "srelu",  "aplu",           "sgalu",          "galu", "flexible_melu",
            "melu_2d", "melu_galu", "splash", "symmetric_galu", "symmetric_melu", "relu"};
  }
  throw std::invalid_argument("fixed_recipe_names: unknown recipe " + name);
}

}  // namespace detail

inline bool is_recipe_name(const std::string& name) {
  static const char* names[] = {"ENS",  "eENS",   "ENS_G",  "eENS_G", "ALL",    "eALL",
                                "15ReLU", "Stoc_1", "Stoc_2", "Stoc_3", "Stoc_4", "Selection"};
  for (const char* n : names)
    if (name == n) return true;
  return false;
}

// Builds a named ensemble definition. max_input selects the input regime of
// the single-regime recipes; the e-prefixed recipes union both regimes.
// Stochastic recipes draw their per-layer assignments here, once per
// definition, from the supplied generator.
inline EnsembleDef recipe(const std::string& name, double max_input, int hidden_layers,
                          int stoc_members, Rng& rng, bool per_network = false) {
  if (hidden_layers < 1) throw std::invalid_argument("recipe: need at least one hidden layer");
  EnsembleDef def;
  def.name = name;

  auto add_uniform = [&def, hidden_layers](const std::vector<std::string>& names, double mi) {
    for (const auto& n : names) def.members.push_back(detail::uniform_member(n, mi, hidden_layers));
  };

  if (name == "ENS" || name == "ENS_G" || name == "ALL") {
    add_uniform(detail::fixed_recipe_names(name, max_input), max_input);
  } else if (name == "eENS" || name == "eENS_G" || name == "eALL") {
    const std::string base = name.substr(1);
    add_uniform(detail::fixed_recipe_names(base, 1.0), 1.0);
    add_uniform(detail::fixed_recipe_names(base, 255.0), 255.0);
  } else if (name == "15ReLU") {
    for (int i = 0; i < 15; ++i) {
      MemberDef m = detail::uniform_member("relu", max_input, hidden_layers);
      m.label = "relu#" + std::to_string(i) + "@" + fmt_double(max_input);
      def.members.push_back(std::move(m));
    }
  } else if (name.rfind("Stoc_", 0) == 0 && name.size() == 6) {
    const int variant = name[5] - '0';
    const auto pool = stochastic_pool(variant);
    const double mi = 255.0;
    for (int i = 0; i < stoc_members; ++i) {
      Rng mrng = rng.child(static_cast<std::uint64_t>(i));
      MemberDef m;
      m.layer_acts = per_network ? sample_member_acts_per_network(pool, hidden_layers, mrng)
                                 : sample_member_acts(pool, hidden_layers, mrng);
      m.max_input = mi;
      m.epochs_override = 30;
      m.label = "stoc#" + std::to_string(i);
      for (const auto& a : m.layer_acts) m.label += ":" + a;
      def.members.push_back(std::move(m));
    }
  } else if (name == "Selection") {
    def.selection = true;
  } else if (find_activation(name) != nullptr) {
    def.members.push_back(detail::uniform_member(name, max_input, hidden_layers));
  } else {
    throw std::invalid_argument("recipe: unknown model or recipe name " + name);
  }
  return def;
}

// ---------------------------------------------------------------------------
// Floating forward selection over a model/dataset grid of score matrices.
// ---------------------------------------------------------------------------

struct ScoreStore {
  std::vector<std::string> models;
  std::vector<std::string> datasets;
  std::vector<std::vector<ScoreMatrix>> cells;  // [model][dataset]
};

// Criterion: mean fused accuracy over every dataset except the target.
inline double sffs_criterion(const ScoreStore& store, const std::vector<int>& subset,
                             int target_dataset) {
  if (subset.empty()) throw std::invalid_argument("sffs_criterion: empty subset");
  double total = 0.0;
  int used = 0;
  for (int d = 0; d < static_cast<int>(store.datasets.size()); ++d) {
    if (d == target_dataset) continue;
    std::vector<ScoreMatrix> fused;
    fused.reserve(subset.size());
    for (const int m : subset) fused.push_back(store.cells[static_cast<std::size_t>(m)][static_cast<std::size_t>(d)]);
    total += accuracy(sum_rule(fused));
    ++used;
  }
  if (used == 0) throw std::invalid_argument("sffs_criterion: need at least one non-target dataset");
  return total / used;
}

// Floating forward selection. Forward passes add the candidate with the
// highest criterion; backtracking passes drop members whose removal strictly
// improves it. Moves count only above 1e-6; ties prefer the lowest model
// index. Every subset visited along the way is scored and the best one is
// returned, in insertion order, so the plain greedy-forward path is always a
// lower bound on the result.
inline std::vector<int> sffs_select(const ScoreStore& store, int target_dataset, int max_size = 0) {
  const int n_models = static_cast<int>(store.models.size());
  if (n_models < 2) throw std::invalid_argument("sffs_select: need at least 2 models");
  if (static_cast<int>(store.datasets.size()) < 2)
    throw std::invalid_argument("sffs_select: need at least 2 datasets");
  if (target_dataset < 0 || target_dataset >= static_cast<int>(store.datasets.size()))
    throw std::invalid_argument("sffs_select: target dataset out of range");
  if (max_size <= 0) max_size = n_models;
  constexpr double kGain = 1e-6;

  std::vector<int> cur;
  std::vector<char> in_cur(static_cast<std::size_t>(n_models), 0);
  double cur_j = -1.0;
  // best criterion seen at each subset size; -1 marks a size not yet visited
  std::vector<double> best_at(static_cast<std::size_t>(max_size) + 1, -1.0);
  std::vector<int> best_subset;
  double best_j = -1.0;
  const auto note = [&] {
    double& at = best_at[cur.size()];
    if (cur_j > at) at = cur_j;
    if (cur_j > best_j) {  // first visitor keeps ties, so smaller subsets win
      best_j = cur_j;
      best_subset = cur;
    }
  };

  // best candidate to add to cur; <0 when cur already holds every model
  const auto best_add = [&](double& out_j) {
    int pick = -1;
    double pick_j = 0.0;
    for (int m = 0; m < n_models; ++m) {
      if (in_cur[static_cast<std::size_t>(m)]) continue;
      cur.push_back(m);
      const double j = sffs_criterion(store, cur, target_dataset);
      cur.pop_back();
      if (pick < 0 || j > pick_j + kGain) {
        pick_j = j;
        pick = m;
      }
    }
    out_j = pick_j;
    return pick;
  };

  // best member to drop from cur; <0 when cur has a single member
  const auto best_drop = [&](double& out_j) {
    int drop_pos = -1;
    double drop_j = 0.0;
    for (std::size_t pos = 0; pos < cur.size(); ++pos) {
      std::vector<int> trial;
      trial.reserve(cur.size() - 1);
      for (std::size_t q = 0; q < cur.size(); ++q)
        if (q != pos) trial.push_back(cur[q]);
      const double j = sffs_criterion(store, trial, target_dataset);
      if (drop_pos < 0 || j > drop_j + kGain) {
        drop_j = j;
        drop_pos = static_cast<int>(pos);
      }
    }
    out_j = drop_j;
    return drop_pos;
  };

  // forward backbone: greedy additions until no strict improvement
  while (static_cast<int>(cur.size()) < max_size) {
    double add_j = 0.0;
    const int pick = best_add(add_j);
    if (pick < 0) break;
    if (!cur.empty() && add_j <= cur_j + kGain) break;
    cur.push_back(pick);
    in_cur[static_cast<std::size_t>(pick)] = 1;
    cur_j = add_j;
    note();
  }

  // floating refinement: accept an exclusion or inclusion whenever it beats
  // the best subset recorded at the destination size. Every accepted move
  // raises one best_at entry by more than the gain threshold, so this ends.
  bool moved = true;
  while (moved) {
    moved = false;
    while (cur.size() > 1) {
      double drop_j = 0.0;
      const int drop_pos = best_drop(drop_j);
      if (drop_pos < 0 || drop_j <= best_at[cur.size() - 1] + kGain) break;
      in_cur[static_cast<std::size_t>(cur[static_cast<std::size_t>(drop_pos)])] = 0;
      cur.erase(cur.begin() + drop_pos);
      cur_j = drop_j;
      moved = true;
      note();
    }
    if (static_cast<int>(cur.size()) < max_size) {
      double add_j = 0.0;
      const int pick = best_add(add_j);
      const double bar = best_at[cur.size() + 1] < 0.0 ? cur_j : best_at[cur.size() + 1];
      if (pick >= 0 && add_j > bar + kGain) {
        cur.push_back(pick);
        in_cur[static_cast<std::size_t>(pick)] = 1;
        cur_j = add_j;
        moved = true;
        note();
      }
    }
  }
  return best_subset;
}

// ---------------------------------------------------------------------------
// Stochastic ensemble construction on an explicit train/holdout split.
// ---------------------------------------------------------------------------

struct StochasticBuild {
  EnsembleDef def;
  std::vector<ScoreMatrix> member_scores;  // survivors only, holdout order
  std::vector<int> diverged;               // member indices that failed to train
  ScoreMatrix fused;
};

inline StochasticBuild build_stochastic_ensemble(const std::vector<std::string>& pool, int n_members,
                                                 const std::vector<int>& dims, const TrainConfig& cfg,
                                                 double max_input, const Matrix& x_train,
                                                 const std::vector<int>& y_train, const Matrix& x_test,
                                                 const std::vector<int>& y_test, Rng& rng,
                                                 bool per_network = false) {
  if (n_members < 1) throw std::invalid_argument("build_stochastic_ensemble: need members");
  const int hidden_layers = static_cast<int>(dims.size()) - 2;
  StochasticBuild out;
  out.def.name = "stochastic";
  for (int i = 0; i < n_members; ++i) {
    Rng mrng = rng.child(static_cast<std::uint64_t>(i));
    MemberDef m;
    m.layer_acts = per_network ? sample_member_acts_per_network(pool, hidden_layers, mrng)
                               : sample_member_acts(pool, hidden_layers, mrng);
    m.max_input = max_input;
    m.label = "stoc#" + std::to_string(i);
    out.def.members.push_back(m);

    std::vector<ActivationSpec> specs;
    for (const auto& n : m.layer_acts) specs.push_back(spec_by_name(n, max_input));
    Network net = build_mlp(dims, specs, mrng.child(1).next_u64());
    TrainConfig mcfg = cfg;
    mcfg.seed = mrng.child(2).next_u64();
    try {
      train(net, x_train, y_train, mcfg);
    } catch (const TrainingDiverged&) {
      out.diverged.push_back(i);
      continue;
    }
    ScoreMatrix sm;
    sm.probs = predict_proba(net, x_test);
    sm.labels = y_test;
    out.member_scores.push_back(std::move(sm));
  }
  if (5 * static_cast<int>(out.diverged.size()) > n_members)
    throw std::runtime_error("build_stochastic_ensemble: more than 20% of members diverged");
  out.fused = sum_rule(out.member_scores);
  return out;
}

}  // namespace actens
