#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "actens/activations.hpp"
#include "actens/network.hpp"
#include "actens/registry.hpp"
#include "actens/rng.hpp"

namespace actens {

struct GradCheckOptions {
  int points = 100;
  double step = 1e-6;
  double tol = 1e-5;
  std::uint64_t seed = 1;
  double kink_margin = 1e-3;
  int channels = 3;
};

struct GradCheckIssue {
  std::string param;  // "input" or group name with indices
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_err = 0.0;
};

struct GradCheckReport {
  std::string name;
  int checks = 0;
  double max_rel_err = 0.0;
  std::vector<GradCheckIssue> issues;
  bool ok() const { return issues.empty(); }
};

inline double relative_gradient_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic));
}

// Draws a plausible random state: additive noise on unconstrained parameters,
// multiplicative jitter on scales that must stay positive.
inline ActivationState random_state(const ActivationSpec& spec, int channels, Rng& rng) {
  ActivationState st = init_state(spec, channels, rng);
  for (auto& g : st.groups) {
    const bool positive = g.name == "alpha" || g.name == "beta";
    for (auto& v : g.values) {
      if (positive)
        v *= rng.uniform(0.7, 1.3);
      else if (g.name == "b")
        ;  // hinge offsets already drawn uniformly in (0, max_input]
      else if (g.name == "a" && spec.kind == Act::flexible_melu)
        v += rng.uniform(-0.1, 0.1) * spec.max_input;
      else
        v += rng.uniform(-0.5, 0.5);
    }
  }
  return st;
}

namespace detail {

inline void record(GradCheckReport& rep, const GradCheckOptions& opts, const std::string& what,
                   double analytic, double numeric) {
  const double err = relative_gradient_error(analytic, numeric);
  ++rep.checks;
  rep.max_rel_err = std::max(rep.max_rel_err, err);
  if (!(err < opts.tol)) rep.issues.push_back({what, analytic, numeric, err});
}

}  // namespace detail

// Central finite differences against the analytic input and parameter
// gradients at random non-kink points.
inline GradCheckReport check_activation_gradients(const ActivationSpec& spec,
                                                  const GradCheckOptions& opts) {
  GradCheckReport rep;
  rep.name = activation_name(spec.kind, spec.k);
  Rng rng(opts.seed);
  const int ch = std::max(opts.channels, spec.kind == Act::melu_2d ? 2 : 1);
  const double lo = -3.0 * spec.max_input;
  const double hi = 5.0 * spec.max_input;
  const double h = opts.step * std::max(1.0, spec.max_input);

  std::vector<double> x(static_cast<std::size_t>(ch));
  std::vector<double> yp(x.size()), ym(x.size()), diag(x.size());
  ActivationState pgrads, scratch;

  for (int pt = 0; pt < opts.points; ++pt) {
    Rng prng = rng.child(static_cast<std::uint64_t>(pt));
    ActivationState st = random_state(spec, ch, prng);
    int tries = 0;
    do {
      for (auto& v : x) v = prng.uniform(lo, hi);
    } while (kink_distance(spec, st, x) < opts.kink_margin && ++tries < 200);

    // input gradient, one channel at a time
    act_grad_input(spec, st, x, diag);
    for (int c = 0; c < ch; ++c) {
      const double keep = x[static_cast<std::size_t>(c)];
      x[static_cast<std::size_t>(c)] = keep + h;
      act_forward(spec, st, x, yp);
      x[static_cast<std::size_t>(c)] = keep - h;
      act_forward(spec, st, x, ym);
      x[static_cast<std::size_t>(c)] = keep;
      const double fd =
          (yp[static_cast<std::size_t>(c)] - ym[static_cast<std::size_t>(c)]) / (2.0 * h);
      detail::record(rep, opts, "input[" + std::to_string(c) + "]",
                     diag[static_cast<std::size_t>(c)], fd);
      if (spec.kind == Act::melu_2d) {
        // the pairwise activation also feeds the previous output channel
        const int prev = (c + ch - 1) % ch;
        std::vector<double> dy(x.size(), 0.0), dx(x.size(), 0.0);
        dy[static_cast<std::size_t>(prev)] = 1.0;
        if (!congruent_states(scratch, st)) scratch = zeros_like(st);
        act_backward(spec, st, x, dy, dx, nullptr, scratch);
        const double fd_off =
            (yp[static_cast<std::size_t>(prev)] - ym[static_cast<std::size_t>(prev)]) / (2.0 * h);
        detail::record(rep, opts, "input[" + std::to_string(c) + "]->out[" + std::to_string(prev) + "]",
                       dx[static_cast<std::size_t>(c)], fd_off);
      }
    }

    // parameter gradients
    if (has_learnable_params(spec.kind)) {
      act_grad_params(spec, st, x, pgrads);
      for (auto& g : st.groups) {
        for (int c = 0; c < ch; ++c) {
          for (int j = 0; j < g.per_channel; ++j) {
            const double keep = g.at(c, j);
            g.at(c, j) = keep + h;
            act_forward(spec, st, x, yp);
            g.at(c, j) = keep - h;
            act_forward(spec, st, x, ym);
            g.at(c, j) = keep;
            const double fd =
                (yp[static_cast<std::size_t>(c)] - ym[static_cast<std::size_t>(c)]) / (2.0 * h);
            detail::record(rep, opts,
                           g.name + "[" + std::to_string(c) + "," + std::to_string(j) + "]",
                           pgrads.group(g.name).at(c, j), fd);
          }
        }
      }
    }
  }
  return rep;
}

struct NetGradCheckOptions {
  int batches = 10;
  int batch_size = 4;
  double step = 1e-6;
  double tol = 1e-4;
  std::uint64_t seed = 1;
  double kink_margin = 1e-3;
};

namespace detail {

inline double net_loss(Network& net, const Matrix& x, const std::vector<int>& y) {
  const Matrix logits = forward(net, x);
  auto [loss, grad] = softmax_xent(logits, y);
  (void)grad;
  return loss + regularization_total(net);
}

inline bool batch_clears_kinks(const Network& net, const Matrix& x, double margin) {
  ForwardCache cache;
  forward(net, x, &cache);
  std::size_t ai = 0;
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    if (net.layers[li].is_dense) continue;
    const Matrix& input = cache.inputs[li];
    for (int r = 0; r < input.rows; ++r) {
      if (kink_distance(net.layers[li].act, net.act_states[ai],
                        std::span<const double>(input.row(r), input.cols)) < margin)
        return false;
    }
    ++ai;
  }
  return true;
}

}  // namespace detail

// End-to-end check on a small (2,3,3,2) network: every dense weight, bias and
// activation parameter against central differences of the total loss.
inline GradCheckReport check_network_gradients(const ActivationSpec& spec,
                                               const NetGradCheckOptions& opts) {
  GradCheckReport rep;
  rep.name = activation_name(spec.kind, spec.k);
  GradCheckOptions rec_opts;
  rec_opts.tol = opts.tol;
  Rng rng(opts.seed);

  for (int bi = 0; bi < opts.batches; ++bi) {
    Rng brng = rng.child(static_cast<std::uint64_t>(bi));
    Network net = build_mlp({2, 3, 3, 2}, {spec, spec}, brng.next_u64());
    // jitter the learnable activation parameters so their gradients are live
    for (auto& st : net.act_states) {
      Rng jr = brng.child(7);
      for (auto& g : st.groups) {
        const bool positive = g.name == "alpha" || g.name == "beta";
        for (auto& v : g.values) {
          if (positive)
            v *= jr.uniform(0.8, 1.2);
          else if (g.name != "b")
            v += jr.uniform(-0.3, 0.3);
        }
      }
    }

    Matrix x(opts.batch_size, 2);
    std::vector<int> y(static_cast<std::size_t>(opts.batch_size));
    int tries = 0;
    do {
      for (auto& v : x.data) v = brng.uniform(-1.5 * spec.max_input, 2.0 * spec.max_input);
      for (auto& l : y) l = brng.uniform_int(2);
    } while (!detail::batch_clears_kinks(net, x, opts.kink_margin) && ++tries < 100);

    ForwardCache cache;
    const Matrix logits = forward(net, x, &cache);
    auto [loss0, dlogits] = softmax_xent(logits, y);
    (void)loss0;
    const Gradients g = backward(net, cache, dlogits);

    const double h = opts.step;
    auto fd_at = [&](double* slot) {
      const double keep = *slot;
      *slot = keep + h;
      const double lp = detail::net_loss(net, x, y);
      *slot = keep - h;
      const double lm = detail::net_loss(net, x, y);
      *slot = keep;
      return (lp - lm) / (2.0 * h);
    };

    for (std::size_t di = 0; di < net.dense.size(); ++di) {
      for (std::size_t i = 0; i < net.dense[di].w.data.size(); ++i)
        detail::record(rep, rec_opts, "w" + std::to_string(di) + "[" + std::to_string(i) + "]",
                       g.dense[di].w.data[i], fd_at(&net.dense[di].w.data[i]));
      for (std::size_t i = 0; i < net.dense[di].b.size(); ++i)
        detail::record(rep, rec_opts, "b" + std::to_string(di) + "[" + std::to_string(i) + "]",
                       g.dense[di].b[i], fd_at(&net.dense[di].b[i]));
    }
    for (std::size_t ai = 0; ai < net.act_states.size(); ++ai) {
      for (std::size_t gi = 0; gi < net.act_states[ai].groups.size(); ++gi) {
        auto& pg = net.act_states[ai].groups[gi];
        for (std::size_t i = 0; i < pg.values.size(); ++i)
          detail::record(rep, rec_opts,
                         "act" + std::to_string(ai) + "." + pg.name + "[" + std::to_string(i) + "]",
                         g.act[ai].groups[gi].values[i], fd_at(&pg.values[i]));
      }
    }
  }
  return rep;
}

}  // namespace actens
