#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "actens/activations.hpp"
#include "actens/matrix.hpp"
#include "actens/registry.hpp"
#include "actens/rng.hpp"
#include "actens/scores.hpp"

namespace actens {

struct TrainConfig {
  double base_lr = 1e-4;
  int batch_size = 30;
  int epochs = 20;
  double last_layer_lr_mult = 20.0;
  bool augmentation = false;
  std::uint64_t seed = 0;
};

struct EpochStats {
  double loss = 0.0;      // mean over batches, includes hinge weight decay
  double accuracy = 0.0;  // running accuracy over the epoch's training batches
};

// Thrown when a training loss stops being finite.
struct TrainingDiverged : std::runtime_error {
  int epoch;
  explicit TrainingDiverged(int e)
      : std::runtime_error("training diverged at epoch " + std::to_string(e)), epoch(e) {}
};

struct LayerSpec {
  bool is_dense = true;
  int in = 0;
  int out = 0;
  ActivationSpec act;
};

struct DenseParams {
  Matrix w;  // in x out
  std::vector<double> b;
};

struct Network {
  std::vector<LayerSpec> layers;
  std::vector<DenseParams> dense;            // indexed by dense-layer position
  std::vector<ActivationState> act_states;   // indexed by activation-layer position
  std::uint64_t seed = 0;

  int input_dim() const { return layers.front().in; }
  int output_dim() const {
    for (auto it = layers.rbegin(); it != layers.rend(); ++it)
      if (it->is_dense) return it->out;
    throw std::logic_error("network has no dense layer");
  }
};

// Fully connected stack dims[0] -> ... -> dims.back() with the given
// activation after every hidden dense layer. Weights start uniform in
// +-sqrt(6 / (fan_in + fan_out)), biases at zero.
inline Network build_mlp(const std::vector<int>& dims, const std::vector<ActivationSpec>& acts,
                         std::uint64_t seed) {
  if (dims.size() < 2) throw std::invalid_argument("build_mlp: need at least input and output dims");
  const std::size_t hidden = dims.size() - 2;
  if (acts.size() != hidden)
    throw std::invalid_argument("build_mlp: need one activation per hidden layer");
  Network net;
  net.seed = seed;
  Rng root(seed);
  for (std::size_t li = 0; li + 1 < dims.size(); ++li) {
    LayerSpec dl;
    dl.is_dense = true;
    dl.in = dims[li];
    dl.out = dims[li + 1];
    net.layers.push_back(dl);

    DenseParams p;
    p.w = Matrix(dl.in, dl.out);
    p.b.assign(static_cast<std::size_t>(dl.out), 0.0);
    const double limit = std::sqrt(6.0 / (dl.in + dl.out));
    Rng wr = root.child(0, li);
    for (auto& v : p.w.data) v = wr.uniform(-limit, limit);
    net.dense.push_back(std::move(p));

    if (li + 2 < dims.size()) {
      LayerSpec al;
      al.is_dense = false;
      al.in = al.out = dl.out;
      al.act = acts[li];
      net.layers.push_back(al);
      Rng ar = root.child(1, li);
      net.act_states.push_back(init_state(acts[li], dl.out, ar));
    }
  }
  return net;
}

struct ForwardCache {
  std::vector<Matrix> inputs;  // input batch of every layer, in layer order
  Matrix logits;
};

inline Matrix forward(const Network& net, const Matrix& x, ForwardCache* cache = nullptr) {
  if (x.cols != net.input_dim())
    throw std::invalid_argument("forward: input width does not match network");
  Matrix cur = x;
  if (cache != nullptr) cache->inputs.clear();
  std::size_t di = 0;
  std::size_t ai = 0;
  for (const auto& layer : net.layers) {
    if (cache != nullptr) cache->inputs.push_back(cur);
    if (layer.is_dense) {
      const DenseParams& p = net.dense[di++];
      Matrix nxt;
      matmul(cur, p.w, nxt);
      for (int r = 0; r < nxt.rows; ++r)
        for (int c = 0; c < nxt.cols; ++c) nxt(r, c) += p.b[static_cast<std::size_t>(c)];
      cur = std::move(nxt);
    } else {
      const ActivationState& st = net.act_states[ai++];
      Matrix nxt(cur.rows, cur.cols);
      for (int r = 0; r < cur.rows; ++r)
        act_forward(layer.act, st, std::span<const double>(cur.row(r), cur.cols),
                    std::span<double>(nxt.row(r), cur.cols));
      cur = std::move(nxt);
    }
  }
  if (cache != nullptr) cache->logits = cur;
  return cur;
}

// Mean cross-entropy of softmax(logits) against integer labels, plus the
// logit gradient (softmax - onehot) / batch.
inline std::pair<double, Matrix> softmax_xent(const Matrix& logits, const std::vector<int>& labels) {
  if (static_cast<int>(labels.size()) != logits.rows)
    throw std::invalid_argument("softmax_xent: label count mismatch");
  Matrix grad(logits.rows, logits.cols);
  double loss = 0.0;
  const double invb = 1.0 / logits.rows;
  for (int r = 0; r < logits.rows; ++r) {
    const double* z = logits.row(r);
    double m = z[0];
    for (int c = 1; c < logits.cols; ++c) m = std::max(m, z[c]);
    double sum = 0.0;
    for (int c = 0; c < logits.cols; ++c) sum += std::exp(z[c] - m);
    const double lse = m + std::log(sum);
    const int y = labels[static_cast<std::size_t>(r)];
    if (y < 0 || y >= logits.cols) throw std::invalid_argument("softmax_xent: label out of range");
    loss += lse - z[y];
    for (int c = 0; c < logits.cols; ++c) {
      const double p = std::exp(z[c] - lse);
      grad(r, c) = (p - (c == y ? 1.0 : 0.0)) * invb;
    }
  }
  return {loss * invb, std::move(grad)};
}

struct Gradients {
  std::vector<DenseParams> dense;
  std::vector<ActivationState> act;
};

inline Gradients make_zero_gradients(const Network& net) {
  Gradients g;
  for (const auto& p : net.dense) {
    DenseParams z;
    z.w = Matrix(p.w.rows, p.w.cols);
    z.b.assign(p.b.size(), 0.0);
    g.dense.push_back(std::move(z));
  }
  for (const auto& st : net.act_states) g.act.push_back(zeros_like(st));
  return g;
}

// Reverse pass from the logit gradient. Hinge weight decay gradients are
// folded into the matching activation parameter gradients.
inline Gradients backward(const Network& net, const ForwardCache& cache, const Matrix& dlogits) {
  Gradients g = make_zero_gradients(net);
  Matrix delta = dlogits;
  std::size_t di = net.dense.size();
  std::size_t ai = net.act_states.size();
  thread_local ActivationState scratch;
  for (std::size_t li = net.layers.size(); li-- > 0;) {
    const LayerSpec& layer = net.layers[li];
    const Matrix& input = cache.inputs[li];
    if (layer.is_dense) {
      --di;
      matmul_at_b(input, delta, g.dense[di].w);
      for (int r = 0; r < delta.rows; ++r)
        for (int c = 0; c < delta.cols; ++c) g.dense[di].b[static_cast<std::size_t>(c)] += delta(r, c);
      Matrix prev;
      matmul_a_bt(delta, net.dense[di].w, prev);
      delta = std::move(prev);
    } else {
      --ai;
      const ActivationState& st = net.act_states[ai];
      if (!congruent_states(scratch, st)) scratch = zeros_like(st);
      Matrix prev(delta.rows, delta.cols);
      for (int r = 0; r < delta.rows; ++r) {
        act_backward(layer.act, st, std::span<const double>(input.row(r), input.cols),
                     std::span<const double>(delta.row(r), delta.cols),
                     std::span<double>(prev.row(r), prev.cols),
                     has_learnable_params(layer.act.kind) ? &g.act[ai] : nullptr, scratch);
      }
      delta = std::move(prev);
    }
  }
  std::size_t ai2 = 0;
  for (const auto& layer : net.layers) {
    if (layer.is_dense) continue;
    regularization(layer.act, net.act_states[ai2], &g.act[ai2]);
    ++ai2;
  }
  return g;
}

// Total hinge weight decay over all activation layers.
inline double regularization_total(const Network& net) {
  double total = 0.0;
  std::size_t ai = 0;
  for (const auto& layer : net.layers) {
    if (layer.is_dense) continue;
    total += regularization(layer.act, net.act_states[ai++]);
  }
  return total;
}

// One SGD step. The final dense layer takes last_layer_lr_mult times the base
// rate; activation parameters take base_lr * param_lr_scale. Positive-scale
// parameters are clamped afterward.
inline void sgd_step(Network& net, const Gradients& g, const TrainConfig& cfg) {
  const std::size_t last = net.dense.size() - 1;
  for (std::size_t di = 0; di < net.dense.size(); ++di) {
    const double lr = cfg.base_lr * (di == last ? cfg.last_layer_lr_mult : 1.0);
    DenseParams& p = net.dense[di];
    for (std::size_t i = 0; i < p.w.data.size(); ++i) p.w.data[i] -= lr * g.dense[di].w.data[i];
    for (std::size_t i = 0; i < p.b.size(); ++i) p.b[i] -= lr * g.dense[di].b[i];
  }
  std::size_t ai = 0;
  for (const auto& layer : net.layers) {
    if (layer.is_dense) continue;
    ActivationState& st = net.act_states[ai];
    const double lr = cfg.base_lr * param_lr_scale(layer.act);
    for (std::size_t gi = 0; gi < st.groups.size(); ++gi)
      for (std::size_t i = 0; i < st.groups[gi].values.size(); ++i)
        st.groups[gi].values[i] -= lr * g.act[ai].groups[gi].values[i];
    clamp_positive_params(layer.act, st);
    ++ai;
  }
}

// Optional per-sample input transform applied before each forward pass while
// training (used for raster augmentation).
using AugmentHook = std::function<void(std::span<double>, Rng&)>;

inline std::vector<EpochStats> train(Network& net, const Matrix& x, const std::vector<int>& labels,
                                     const TrainConfig& cfg, const AugmentHook& augment_hook = {}) {
  if (x.rows == 0) throw std::invalid_argument("train: empty training set");
  if (static_cast<int>(labels.size()) != x.rows)
    throw std::invalid_argument("train: label count mismatch");
  std::vector<EpochStats> history;
  Rng shuffle_rng = Rng(cfg.seed).child(101);
  Rng augment_rng = Rng(cfg.seed).child(102);
  std::vector<int> order(static_cast<std::size_t>(x.rows));
  for (int i = 0; i < x.rows; ++i) order[static_cast<std::size_t>(i)] = i;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    int batches = 0;
    int correct = 0;
    for (int start = 0; start < x.rows; start += cfg.batch_size) {
      const int bs = std::min(cfg.batch_size, x.rows - start);
      Matrix xb(bs, x.cols);
      std::vector<int> yb(static_cast<std::size_t>(bs));
      for (int r = 0; r < bs; ++r) {
        const int src = order[static_cast<std::size_t>(start + r)];
        for (int c = 0; c < x.cols; ++c) xb(r, c) = x(src, c);
        if (augment_hook) augment_hook(std::span<double>(xb.row(r), xb.cols), augment_rng);
        yb[static_cast<std::size_t>(r)] = labels[static_cast<std::size_t>(src)];
      }
      ForwardCache cache;
      const Matrix logits = forward(net, xb, &cache);
      auto [loss, dlogits] = softmax_xent(logits, yb);
      loss += regularization_total(net);
      if (!std::isfinite(loss)) throw TrainingDiverged(epoch);
      for (int r = 0; r < bs; ++r) {
        const double* row = logits.row(r);
        int arg = 0;
        for (int c = 1; c < logits.cols; ++c)
          if (row[c] > row[arg]) arg = c;
        if (arg == yb[static_cast<std::size_t>(r)]) ++correct;
      }
      const Gradients g = backward(net, cache, dlogits);
      sgd_step(net, g, cfg);
      loss_sum += loss;
      ++batches;
    }
    history.push_back({loss_sum / batches, static_cast<double>(correct) / x.rows});
  }
  return history;
}

inline Matrix predict_proba(const Network& net, const Matrix& x) {
  const Matrix logits = forward(net, x);
  Matrix probs(logits.rows, logits.cols);
  for (int r = 0; r < logits.rows; ++r) {
    const double* z = logits.row(r);
    double m = z[0];
    for (int c = 1; c < logits.cols; ++c) m = std::max(m, z[c]);
    double sum = 0.0;
    for (int c = 0; c < logits.cols; ++c) sum += std::exp(z[c] - m);
    for (int c = 0; c < logits.cols; ++c) probs(r, c) = std::exp(z[c] - m) / sum;
  }
  return probs;
}

// ---------------------------------------------------------------------------
// JSON round trip
// ---------------------------------------------------------------------------

inline nlohmann::json network_to_json(const Network& net) {
  nlohmann::json j;
  j["seed"] = net.seed;
  j["layers"] = nlohmann::json::array();
  for (const auto& layer : net.layers) {
    if (layer.is_dense) {
      j["layers"].push_back({{"type", "dense"}, {"in", layer.in}, {"out", layer.out}});
    } else {
      nlohmann::json a = {{"type", "act"},
                          {"name", activation_name(layer.act.kind, layer.act.k)},
                          {"max_input", layer.act.max_input}};
      if (layer.act.kind == Act::aplu || layer.act.kind == Act::splash)
        a["hinges"] = layer.act.hinges;
      j["layers"].push_back(std::move(a));
    }
  }
  j["weights"] = nlohmann::json::array();
  for (const auto& p : net.dense) {
    std::vector<double> flat = p.w.data;
    flat.insert(flat.end(), p.b.begin(), p.b.end());
    j["weights"].push_back(std::move(flat));
  }
  j["act_states"] = nlohmann::json::array();
  for (const auto& st : net.act_states) {
    nlohmann::json s = nlohmann::json::object();
    for (const auto& g : st.groups) s[g.name] = g.values;
    j["act_states"].push_back(std::move(s));
  }
  return j;
}

inline Network network_from_json(const nlohmann::json& j) {
  Network net;
  net.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& jl : j.at("layers")) {
    LayerSpec layer;
    if (jl.at("type") == "dense") {
      layer.is_dense = true;
      layer.in = jl.at("in").get<int>();
      layer.out = jl.at("out").get<int>();
    } else {
      layer.is_dense = false;
      layer.act = spec_by_name(jl.at("name").get<std::string>(),
                               jl.at("max_input").get<double>());
      if (jl.contains("hinges")) layer.act.hinges = jl.at("hinges").get<int>();
      if (!net.layers.empty()) layer.in = layer.out = net.layers.back().out;
    }
    net.layers.push_back(layer);
  }
  std::size_t wi = 0;
  Rng dummy(0);
  for (const auto& layer : net.layers) {
    if (layer.is_dense) {
      DenseParams p;
      p.w = Matrix(layer.in, layer.out);
      p.b.assign(static_cast<std::size_t>(layer.out), 0.0);
      const auto flat = j.at("weights").at(wi++).get<std::vector<double>>();
      if (flat.size() != p.w.data.size() + p.b.size())
        throw std::invalid_argument("network_from_json: weight blob size mismatch");
      std::copy(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(p.w.data.size()),
                p.w.data.begin());
      std::copy(flat.begin() + static_cast<std::ptrdiff_t>(p.w.data.size()), flat.end(),
                p.b.begin());
      net.dense.push_back(std::move(p));
    }
  }
  std::size_t si = 0;
  for (const auto& layer : net.layers) {
    if (layer.is_dense) continue;
    ActivationState st = init_state(layer.act, layer.out, dummy);
    const nlohmann::json& s = j.at("act_states").at(si++);
    for (auto& g : st.groups) {
      const auto vals = s.at(g.name).get<std::vector<double>>();
      if (vals.size() != g.values.size())
        throw std::invalid_argument("network_from_json: state size mismatch for " + g.name);
      g.values = vals;
    }
    net.act_states.push_back(std::move(st));
  }
  return net;
}

}  // namespace actens
