#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "actens/rng.hpp"

namespace actens {

enum class Act {
  relu,
  leaky_relu,
  elu,
  prelu,
  srelu,
  aplu,
  melu,
  small_galu,
  galu,
  pdelu,
  swish,
  swish_learnable,
  mish,
  srs,
  soft_learnable,
  soft_learnable2,
  splash,
  melu_2d,
  tanelu,
  melu_galu,
  symmetric_melu,
  symmetric_galu,
  flexible_melu
};

struct ActivationSpec {
  Act kind = Act::relu;
  double max_input = 1.0;  // scale of the expected input range [0, max_input]
  int k = 0;               // basis size for the hat families (c0 plus k-1 hats)
  int hinges = 3;          // hinge count for the piecewise-linear hinge families
  double leaky_slope = 0.01;
  double elu_alpha = 1.0;
  double swish_beta = 1.0;  // fixed variant only
  double pdelu_t = 0.9;
};

inline ActivationSpec make_spec(Act kind, double max_input = 1.0) {
  ActivationSpec s;
  s.kind = kind;
  s.max_input = max_input;
  switch (kind) {
    case Act::melu: s.k = 8; break;
    case Act::small_galu: s.k = 2; break;
    case Act::galu: s.k = 4; break;
    case Act::symmetric_melu: s.k = 8; break;
    case Act::symmetric_galu: s.k = 4; break;
    case Act::flexible_melu: s.k = 8; break;
    case Act::melu_2d: s.k = 4; break;
    default: break;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Fixed hat grids. Centers and half-widths scale linearly with max_input; the
// base tables below are the max_input = 1 rows.
// ---------------------------------------------------------------------------

struct FixedGrid {
  std::vector<double> center;
  std::vector<double> half_width;
  std::size_t size() const { return center.size(); }
};

namespace detail {
inline const double kTriCenters[7] = {2.0, 1.0, 3.0, 0.5, 1.5, 2.5, 3.5};
inline const double kTriWidths[7] = {2.0, 1.0, 1.0, 0.5, 0.5, 0.5, 0.5};
inline const double kBiCenters[7] = {1.0, 0.5, 2.5, 0.25, 1.25, 2.25, 3.25};
inline const double kBiWidths[7] = {1.0, 0.5, 0.5, 0.25, 0.25, 0.25, 0.25};
}  // namespace detail

inline bool uses_triangular_grid(Act kind) {
  return kind == Act::melu || kind == Act::flexible_melu || kind == Act::symmetric_melu ||
         kind == Act::melu_2d || kind == Act::melu_galu;
}

inline bool uses_biphasic_grid(Act kind) {
  return kind == Act::small_galu || kind == Act::galu || kind == Act::symmetric_galu;
}

inline FixedGrid build_grid(Act kind, double max_input) {
  if (!(max_input > 0.0)) throw std::invalid_argument("build_grid: max_input must be positive");
  const double* c;
  const double* w;
  if (uses_triangular_grid(kind)) {
    c = detail::kTriCenters;
    w = detail::kTriWidths;
  } else if (uses_biphasic_grid(kind)) {
    c = detail::kBiCenters;
    w = detail::kBiWidths;
  } else {
    throw std::invalid_argument("build_grid: no fixed grid is defined for this activation");
  }
  FixedGrid g;
  g.center.resize(7);
  g.half_width.resize(7);
  for (int i = 0; i < 7; ++i) {
    g.center[static_cast<std::size_t>(i)] = c[i] * max_input;
    g.half_width[static_cast<std::size_t>(i)] = w[i] * max_input;
  }
  return g;
}

// ---------------------------------------------------------------------------
// Learnable state: named parameter groups, one row of values per channel.
// ---------------------------------------------------------------------------

struct ParamGroup {
  std::string name;
  int per_channel = 0;
  int channels = 0;
  std::vector<double> values;  // channels x per_channel, row-major

  ParamGroup() = default;
  ParamGroup(std::string n, int ch, int per, double fill = 0.0)
      : name(std::move(n)),
        per_channel(per),
        channels(ch),
        values(static_cast<std::size_t>(ch) * per, fill) {}

  double& at(int c, int j) { return values[static_cast<std::size_t>(c) * per_channel + j]; }
  double at(int c, int j) const { return values[static_cast<std::size_t>(c) * per_channel + j]; }
  double* row(int c) { return values.data() + static_cast<std::size_t>(c) * per_channel; }
  const double* row(int c) const {
    return values.data() + static_cast<std::size_t>(c) * per_channel;
  }
};

struct ActivationState {
  int channels = 0;
  std::vector<ParamGroup> groups;

  bool empty() const { return groups.empty(); }

  ParamGroup& group(const std::string& name) {
    for (auto& g : groups)
      if (g.name == name) return g;
    throw std::invalid_argument("ActivationState: no parameter group named " + name);
  }
  const ParamGroup& group(const std::string& name) const {
    for (const auto& g : groups)
      if (g.name == name) return g;
    throw std::invalid_argument("ActivationState: no parameter group named " + name);
  }

  void fill(double v) {
    for (auto& g : groups) std::fill(g.values.begin(), g.values.end(), v);
  }
};

inline ActivationState zeros_like(const ActivationState& s) {
  ActivationState z = s;
  z.fill(0.0);
  return z;
}

// True when both states have identical group layouts (names and sizes), so
// one can be written with gradients for the other.
inline bool congruent_states(const ActivationState& a, const ActivationState& b) {
  if (a.channels != b.channels || a.groups.size() != b.groups.size()) return false;
  for (std::size_t i = 0; i < a.groups.size(); ++i) {
    if (a.groups[i].name != b.groups[i].name) return false;
    if (a.groups[i].values.size() != b.groups[i].values.size()) return false;
    if (a.groups[i].per_channel != b.groups[i].per_channel) return false;
  }
  return true;
}

inline bool has_learnable_params(Act kind) {
  switch (kind) {
    case Act::relu:
    case Act::leaky_relu:
    case Act::elu:
    case Act::swish:
      return false;
    default:
      return true;
  }
}

// learnable values per channel
inline int param_count(const ActivationSpec& s) {
  switch (s.kind) {
    case Act::relu:
    case Act::leaky_relu:
    case Act::elu:
    case Act::swish:
      return 0;
    case Act::prelu:
    case Act::pdelu:
    case Act::swish_learnable:
    case Act::mish:
    case Act::soft_learnable:
    case Act::tanelu:
      return 1;
    case Act::srs:
    case Act::soft_learnable2:
      return 2;
    case Act::srelu:
      return 4;
    case Act::aplu:
      return 2 * s.hinges;
    case Act::splash:
      return 3 * s.hinges;
    case Act::melu:
    case Act::symmetric_melu:
    case Act::small_galu:
    case Act::galu:
    case Act::symmetric_galu:
      return s.k;
    case Act::flexible_melu:
      return 2 * s.k - 1;
    case Act::melu_2d:
      return 1 + (s.k - 1) * (s.k - 1);
    case Act::melu_galu:
      return 13;  // 8 triangular coefficients, 4 biphasic coefficients, 1 mix
  }
  return 0;
}

inline ActivationState init_state(const ActivationSpec& s, int channels, Rng& rng) {
  if (channels <= 0) throw std::invalid_argument("init_state: channels must be positive");
  if (s.kind == Act::melu_2d && channels < 2)
    throw std::invalid_argument("init_state: the pairwise activation needs at least 2 channels");
  ActivationState st;
  st.channels = channels;
  switch (s.kind) {
    case Act::relu:
    case Act::leaky_relu:
    case Act::elu:
    case Act::swish:
      break;
    case Act::prelu:
      st.groups.emplace_back("a", channels, 1, 0.0);
      break;
    case Act::srelu:
      st.groups.emplace_back("al", channels, 1, 0.5);
      st.groups.emplace_back("ar", channels, 1, 0.2);
      st.groups.emplace_back("tl", channels, 1, -2.0);
      st.groups.emplace_back("tr", channels, 1, 1.5);
      break;
    case Act::aplu: {
      st.groups.emplace_back("a", channels, s.hinges, 0.0);
      ParamGroup b("b", channels, s.hinges, 0.0);
      for (auto& v : b.values) v = rng.uniform_pos(s.max_input);
      st.groups.push_back(std::move(b));
      break;
    }
    case Act::splash: {
      st.groups.emplace_back("a_pos", channels, s.hinges, 0.0);
      st.groups.emplace_back("a_neg", channels, s.hinges, 0.0);
      ParamGroup b("b", channels, s.hinges, 0.0);
      for (auto& v : b.values) v = rng.uniform_pos(s.max_input);
      st.groups.push_back(std::move(b));
      break;
    }
    case Act::melu:
    case Act::small_galu:
    case Act::galu:
    case Act::symmetric_melu:
    case Act::symmetric_galu:
      st.groups.emplace_back("c", channels, s.k, 0.0);
      break;
    case Act::flexible_melu: {
      st.groups.emplace_back("c", channels, s.k, 0.0);
      const FixedGrid g = build_grid(s.kind, s.max_input);
      ParamGroup a("a", channels, s.k - 1, 0.0);
      for (int c = 0; c < channels; ++c)
        for (int j = 0; j < s.k - 1; ++j) a.at(c, j) = g.center[static_cast<std::size_t>(j)];
      st.groups.push_back(std::move(a));
      break;
    }
    case Act::melu_2d:
      st.groups.emplace_back("c0", channels, 1, 0.0);
      st.groups.emplace_back("c", channels, (s.k - 1) * (s.k - 1), 0.0);
      break;
    case Act::melu_galu:
      st.groups.emplace_back("mc", channels, 8, 0.0);
      st.groups.emplace_back("gc", channels, 4, 0.0);
      st.groups.emplace_back("mix", channels, 1, 0.5);
      break;
    case Act::pdelu:
      st.groups.emplace_back("a", channels, 1, 1.0);
      break;
    case Act::swish_learnable:
      st.groups.emplace_back("beta", channels, 1, 1.0);
      break;
    case Act::mish:
      st.groups.emplace_back("alpha", channels, 1, 1.0);
      break;
    case Act::srs:
      st.groups.emplace_back("alpha", channels, 1, 5.0);
      st.groups.emplace_back("beta", channels, 1, 3.0);
      break;
    case Act::soft_learnable:
      st.groups.emplace_back("alpha", channels, 1, 1.0);
      break;
    case Act::soft_learnable2:
      st.groups.emplace_back("alpha", channels, 1, 1.0);
      st.groups.emplace_back("beta", channels, 1, 1.0);
      break;
    case Act::tanelu:
      st.groups.emplace_back("a", channels, 1, 0.0);
      break;
  }
  return st;
}

// ---------------------------------------------------------------------------
// Scalar pieces
// ---------------------------------------------------------------------------

namespace detail {

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double softplus(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

// triangular hat: peak half_width at center, support [center-hw, center+hw]
inline double tri_hat(double x, double a, double hw) {
  const double t = hw - std::abs(x - a);
  return t > 0.0 ? t : 0.0;
}

// right-hand slope of the triangular hat
inline double tri_hat_dx(double x, double a, double hw) {
  if (x < a - hw || x >= a + hw) return 0.0;
  return x < a ? 1.0 : -1.0;
}

// biphasic hat: triangular bump on [a-hw, a+hw] followed by a mirrored dip on
// [a+hw, a+3hw]; range [-hw, hw]
inline double bi_hat(double x, double a, double hw) {
  const double up = tri_hat(x, a, hw);
  const double d = std::abs(x - a - 2.0 * hw) - hw;
  return d < 0.0 ? up + d : up;
}

inline double bi_hat_dx(double x, double a, double hw) {
  double g = tri_hat_dx(x, a, hw);
  if (x >= a + hw && x < a + 3.0 * hw) g += (x < a + 2.0 * hw) ? -1.0 : 1.0;
  return g;
}

inline double prelu_scalar(double x, double a) { return x >= 0.0 ? x : a * x; }
inline double prelu_dx(double x, double a) { return x >= 0.0 ? 1.0 : a; }
inline double prelu_da(double x) { return x >= 0.0 ? 0.0 : x; }

// shared evaluation for the hat-sum families: prelu(c[0]) + sum c[j] * hat_j
struct HatSum {
  const FixedGrid* grid;
  int k;
  bool biphasic;

  double hat(double x, int j) const {
    const double a = grid->center[static_cast<std::size_t>(j)];
    const double hw = grid->half_width[static_cast<std::size_t>(j)];
    return biphasic ? bi_hat(x, a, hw) : tri_hat(x, a, hw);
  }
  double hat_dx(double x, int j) const {
    const double a = grid->center[static_cast<std::size_t>(j)];
    const double hw = grid->half_width[static_cast<std::size_t>(j)];
    return biphasic ? bi_hat_dx(x, a, hw) : tri_hat_dx(x, a, hw);
  }
  double value(const double* c, double x) const {
    double y = prelu_scalar(x, c[0]);
    for (int j = 1; j < k; ++j) y += c[j] * hat(x, j - 1);
    return y;
  }
  double dx(const double* c, double x) const {
    double g = prelu_dx(x, c[0]);
    for (int j = 1; j < k; ++j) g += c[j] * hat_dx(x, j - 1);
    return g;
  }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Forward
// ---------------------------------------------------------------------------

namespace detail {

// caches the grids an evaluation needs; built once per call site
struct GridPack {
  FixedGrid tri;
  FixedGrid bi;
  bool has_tri = false;
  bool has_bi = false;

  static GridPack for_spec(const ActivationSpec& s) {
    GridPack p;
    if (uses_triangular_grid(s.kind)) {
      p.tri = build_grid(Act::melu, s.max_input);
      p.has_tri = true;
    }
    if (uses_biphasic_grid(s.kind) || s.kind == Act::melu_galu) {
      p.bi = build_grid(Act::galu, s.max_input);
      p.has_bi = true;
    }
    return p;
  }
};

inline void check_shapes(const ActivationSpec& s, const ActivationState& st,
                         std::span<const double> x) {
  if (has_learnable_params(s.kind) && st.channels == 0)
    throw std::invalid_argument("activation: state not initialized");
  const int ch = has_learnable_params(s.kind) ? st.channels : static_cast<int>(x.size());
  if (static_cast<int>(x.size()) != ch)
    throw std::invalid_argument("activation: input size does not match channel count");
  if (s.kind == Act::melu_2d && x.size() < 2)
    throw std::invalid_argument("activation: the pairwise activation needs at least 2 channels");
}

}  // namespace detail

inline void act_forward(const ActivationSpec& s, const ActivationState& st,
                        std::span<const double> x, std::span<double> y) {
  detail::check_shapes(s, st, x);
  if (y.size() != x.size()) throw std::invalid_argument("act_forward: output size mismatch");
  const int n = static_cast<int>(x.size());
  const detail::GridPack gp = detail::GridPack::for_spec(s);

  auto nan_guard = [](double v, double& out) {
    if (std::isnan(v)) {
      out = v;
      return true;
    }
    return false;
  };

  switch (s.kind) {
    case Act::relu:
      for (int i = 0; i < n; ++i) y[i] = x[i] >= 0.0 ? x[i] : 0.0;
      return;
    case Act::leaky_relu:
      for (int i = 0; i < n; ++i) y[i] = x[i] >= 0.0 ? x[i] : s.leaky_slope * x[i];
      return;
    case Act::elu:
      for (int i = 0; i < n; ++i) y[i] = x[i] >= 0.0 ? x[i] : s.elu_alpha * std::expm1(x[i]);
      return;
    case Act::prelu: {
      const ParamGroup& a = st.group("a");
      for (int i = 0; i < n; ++i) y[i] = detail::prelu_scalar(x[i], a.at(i, 0));
      return;
    }
    case Act::srelu: {
      const ParamGroup& al = st.group("al");
      const ParamGroup& ar = st.group("ar");
      const ParamGroup& tl = st.group("tl");
      const ParamGroup& tr = st.group("tr");
      for (int i = 0; i < n; ++i) {
        const double v = x[i];
        if (nan_guard(v, y[i])) continue;
        if (v <= tl.at(i, 0))
          y[i] = tl.at(i, 0) + al.at(i, 0) * (v - tl.at(i, 0));
        else if (v >= tr.at(i, 0))
          y[i] = tr.at(i, 0) + ar.at(i, 0) * (v - tr.at(i, 0));
        else
          y[i] = v;
      }
      return;
    }
    case Act::aplu: {
      const ParamGroup& a = st.group("a");
      const ParamGroup& b = st.group("b");
      for (int i = 0; i < n; ++i) {
        const double v = x[i];
        if (nan_guard(v, y[i])) continue;
        double r = v >= 0.0 ? v : 0.0;
        for (int h = 0; h < s.hinges; ++h) {
          const double z = b.at(i, h) - v;
          if (z > 0.0) r += a.at(i, h) * z;
        }
        y[i] = r;
      }
      return;
    }
    case Act::splash: {
      const ParamGroup& ap = st.group("a_pos");
      const ParamGroup& an = st.group("a_neg");
      const ParamGroup& b = st.group("b");
      for (int i = 0; i < n; ++i) {
        const double v = x[i];
        if (nan_guard(v, y[i])) continue;
        double r = (v >= 0.0 ? v : 0.0) + (-v >= 0.0 ? -v : 0.0);
        for (int h = 0; h < s.hinges; ++h) {
          const double zp = b.at(i, h) - v;
          if (zp > 0.0) r += ap.at(i, h) * zp;
          const double zn = b.at(i, h) + v;
          if (zn > 0.0) r += an.at(i, h) * zn;
        }
        y[i] = r;
      }
      return;
    }
    case Act::melu:
    case Act::small_galu:
    case Act::galu: {
      const ParamGroup& c = st.group("c");
      const detail::HatSum hs{uses_biphasic_grid(s.kind) ? &gp.bi : &gp.tri, s.k,
                              uses_biphasic_grid(s.kind)};
      for (int i = 0; i < n; ++i) y[i] = hs.value(c.row(i), x[i]);
      return;
    }
    case Act::symmetric_melu:
    case Act::symmetric_galu: {
      const ParamGroup& c = st.group("c");
      const detail::HatSum hs{s.kind == Act::symmetric_galu ? &gp.bi : &gp.tri, s.k,
                              s.kind == Act::symmetric_galu};
      for (int i = 0; i < n; ++i) y[i] = hs.value(c.row(i), x[i]) + hs.value(c.row(i), -x[i]);
      return;
    }
    case Act::flexible_melu: {
      const ParamGroup& c = st.group("c");
      const ParamGroup& a = st.group("a");
      for (int i = 0; i < n; ++i) {
        const double v = x[i];
        if (nan_guard(v, y[i])) continue;
        double r = detail::prelu_scalar(v, c.at(i, 0));
        for (int j = 1; j < s.k; ++j)
          r += c.at(i, j) *
               detail::tri_hat(v, a.at(i, j - 1), gp.tri.half_width[static_cast<std::size_t>(j - 1)]);
        y[i] = r;
      }
      return;
    }
    case Act::melu_galu: {
      const ParamGroup& mc = st.group("mc");
      const ParamGroup& gc = st.group("gc");
      const ParamGroup& mix = st.group("mix");
      const detail::HatSum hm{&gp.tri, 8, false};
      const detail::HatSum hg{&gp.bi, 4, true};
      for (int i = 0; i < n; ++i) {
        const double m = hm.value(mc.row(i), x[i]);
        const double g = hg.value(gc.row(i), x[i]);
        const double a = mix.at(i, 0);
        y[i] = (1.0 - a) * m + a * g;
      }
      return;
    }
    case Act::melu_2d: {
      const ParamGroup& c0 = st.group("c0");
      const ParamGroup& c = st.group("c");
      const int kk = s.k - 1;
      for (int i = 0; i < n; ++i) {
        const double x1 = x[i];
        const double x2 = x[(i + 1) % n];
        if (std::isnan(x1) || std::isnan(x2)) {
          y[i] = std::isnan(x1) ? x1 : x2;
          continue;
        }
        double r = detail::prelu_scalar(x1, c0.at(i, 0)) + detail::prelu_scalar(x2, c0.at(i, 0));
        for (int u = 1; u <= kk; ++u) {
          for (int v = 1; v <= kk; ++v) {
            const double au = gp.tri.center[static_cast<std::size_t>(u - 1)];
            const double av = gp.tri.center[static_cast<std::size_t>(v - 1)];
            const double hw = gp.tri.half_width[static_cast<std::size_t>(std::max(u, v) - 1)];
            const double d = std::hypot(x1 - au, x2 - av);
            const double t = hw - d;
            if (t > 0.0) r += c.at(i, (u - 1) * kk + (v - 1)) * t;
          }
        }
        y[i] = r;
      }
      return;
    }
    case Act::pdelu: {
      const ParamGroup& a = st.group("a");
      const double p = 1.0 / (1.0 - s.pdelu_t);
      for (int i = 0; i < n; ++i) {
        const double v = x[i];
        if (nan_guard(v, y[i])) continue;
        if (v > 0.0) {
          y[i] = v;
        } else {
          const double u = 1.0 + (1.0 - s.pdelu_t) * v;
          y[i] = a.at(i, 0) * ((u > 0.0 ? std::pow(u, p) : 0.0) - 1.0);
        }
      }
      return;
    }
    case Act::swish:
      for (int i = 0; i < n; ++i) y[i] = x[i] * detail::sigmoid(s.swish_beta * x[i]);
      return;
    case Act::swish_learnable: {
      const ParamGroup& b = st.group("beta");
      for (int i = 0; i < n; ++i) y[i] = x[i] * detail::sigmoid(b.at(i, 0) * x[i]);
      return;
    }
    case Act::mish: {
      const ParamGroup& al = st.group("alpha");
      for (int i = 0; i < n; ++i)
        y[i] = x[i] * std::tanh(detail::softplus(al.at(i, 0) * x[i]));
      return;
    }
    case Act::srs: {
      const ParamGroup& al = st.group("alpha");
      const ParamGroup& be = st.group("beta");
      for (int i = 0; i < n; ++i) {
        const double v = x[i];
        y[i] = v / (v / al.at(i, 0) + std::exp(-v / be.at(i, 0)));
      }
      return;
    }
    case Act::soft_learnable:
    case Act::soft_learnable2: {
      const ParamGroup& al = st.group("alpha");
      const double ln2 = 0.6931471805599453094172321;
      for (int i = 0; i < n; ++i) {
        const double v = x[i];
        if (nan_guard(v, y[i])) continue;
        if (v > 0.0) {
          y[i] = v;
        } else {
          const double beta =
              s.kind == Act::soft_learnable2 ? st.group("beta").at(i, 0) : 1.0;
          y[i] = al.at(i, 0) * (detail::softplus(beta * v) - ln2);
        }
      }
      return;
    }
    case Act::tanelu: {
      const ParamGroup& a = st.group("a");
      for (int i = 0; i < n; ++i)
        y[i] = (x[i] >= 0.0 ? x[i] : 0.0) + a.at(i, 0) * std::tanh(x[i]);
      return;
    }
  }
  throw std::logic_error("act_forward: unhandled activation kind");
}

// ---------------------------------------------------------------------------
// d(output_i)/d(input_i). The off-diagonal terms of the pairwise activation
// are handled by act_backward.
// ---------------------------------------------------------------------------

inline void act_grad_input(const ActivationSpec& s, const ActivationState& st,
                           std::span<const double> x, std::span<double> g) {
  detail::check_shapes(s, st, x);
  if (g.size() != x.size()) throw std::invalid_argument("act_grad_input: output size mismatch");
  const int n = static_cast<int>(x.size());
  const detail::GridPack gp = detail::GridPack::for_spec(s);

  switch (s.kind) {
    case Act::relu:
      for (int i = 0; i < n; ++i) g[i] = x[i] != x[i] ? x[i] : (x[i] >= 0.0 ? 1.0 : 0.0);
      return;
    case Act::leaky_relu:
      for (int i = 0; i < n; ++i)
        g[i] = x[i] != x[i] ? x[i] : (x[i] >= 0.0 ? 1.0 : s.leaky_slope);
      return;
    case Act::elu:
      for (int i = 0; i < n; ++i)
        g[i] = x[i] >= 0.0 ? 1.0 : s.elu_alpha * std::exp(x[i]);
      return;
    case Act::prelu: {
      const ParamGroup& a = st.group("a");
      for (int i = 0; i < n; ++i)
        g[i] = x[i] != x[i] ? x[i] : detail::prelu_dx(x[i], a.at(i, 0));
      return;
    }
    case Act::srelu: {
      const ParamGroup& al = st.group("al");
      const ParamGroup& ar = st.group("ar");
      const ParamGroup& tl = st.group("tl");
      const ParamGroup& tr = st.group("tr");
      for (int i = 0; i < n; ++i) {
        const double v = x[i];
        if (v != v) {
          g[i] = v;
        } else if (v <= tl.at(i, 0)) {
          g[i] = al.at(i, 0);
        } else if (v >= tr.at(i, 0)) {
          g[i] = ar.at(i, 0);
        } else {
          g[i] = 1.0;
        }
      }
      return;
    }
    case Act::aplu: {
      const ParamGroup& a = st.group("a");
      const ParamGroup& b = st.group("b");
      for (int i = 0; i < n; ++i) {
        const double v = x[i];
        if (v != v) {
          g[i] = v;
          continue;
        }
        double r = v >= 0.0 ? 1.0 : 0.0;
        for (int h = 0; h < s.hinges; ++h)
          if (v < b.at(i, h)) r -= a.at(i, h);
        g[i] = r;
      }
      return;
    }
    case Act::splash: {
      const ParamGroup& ap = st.group("a_pos");
      const ParamGroup& an = st.group("a_neg");
      const ParamGroup& b = st.group("b");
      for (int i = 0; i < n; ++i) {
        const double v = x[i];
        if (v != v) {
          g[i] = v;
          continue;
        }
        double r = (v >= 0.0 ? 1.0 : 0.0) + (v < 0.0 ? -1.0 : 0.0);
        for (int h = 0; h < s.hinges; ++h) {
          if (v < b.at(i, h)) r -= ap.at(i, h);
          if (v >= -b.at(i, h)) r += an.at(i, h);
        }
        g[i] = r;
      }
      return;
    }
    case Act::melu:
    case Act::small_galu:
    case Act::galu: {
      const ParamGroup& c = st.group("c");
      const detail::HatSum hs{uses_biphasic_grid(s.kind) ? &gp.bi : &gp.tri, s.k,
                              uses_biphasic_grid(s.kind)};
      for (int i = 0; i < n; ++i)
        g[i] = x[i] != x[i] ? x[i] : hs.dx(c.row(i), x[i]);
      return;
    }
    case Act::symmetric_melu:
    case Act::symmetric_galu: {
      const ParamGroup& c = st.group("c");
      const detail::HatSum hs{s.kind == Act::symmetric_galu ? &gp.bi : &gp.tri, s.k,
                              s.kind == Act::symmetric_galu};
      for (int i = 0; i < n; ++i)
        g[i] = x[i] != x[i] ? x[i] : hs.dx(c.row(i), x[i]) - hs.dx(c.row(i), -x[i]);
      return;
    }
    case Act::flexible_melu: {
      const ParamGroup& c = st.group("c");
      const ParamGroup& a = st.group("a");
      for (int i = 0; i < n; ++i) {
        const double v = x[i];
        if (v != v) {
          g[i] = v;
          continue;
        }
        double r = detail::prelu_dx(v, c.at(i, 0));
        for (int j = 1; j < s.k; ++j)
          r += c.at(i, j) * detail::tri_hat_dx(v, a.at(i, j - 1),
                                               gp.tri.half_width[static_cast<std::size_t>(j - 1)]);
        g[i] = r;
      }
      return;
    }
    case Act::melu_galu: {
      const ParamGroup& mc = st.group("mc");
      const ParamGroup& gc = st.group("gc");
      const ParamGroup& mix = st.group("mix");
      const detail::HatSum hm{&gp.tri, 8, false};
      const detail::HatSum hg{&gp.bi, 4, true};
      for (int i = 0; i < n; ++i) {
        if (x[i] != x[i]) {
          g[i] = x[i];
          continue;
        }
        const double a = mix.at(i, 0);
        g[i] = (1.0 - a) * hm.dx(mc.row(i), x[i]) + a * hg.dx(gc.row(i), x[i]);
      }
      return;
    }
    case Act::melu_2d: {
      const ParamGroup& c0 = st.group("c0");
      const ParamGroup& c = st.group("c");
      const int kk = s.k - 1;
      for (int i = 0; i < n; ++i) {
        const double x1 = x[i];
        const double x2 = x[(i + 1) % n];
        if (x1 != x1) {
          g[i] = x1;
          continue;
        }
        double r = detail::prelu_dx(x1, c0.at(i, 0));
        for (int u = 1; u <= kk; ++u) {
          for (int v = 1; v <= kk; ++v) {
            const double au = gp.tri.center[static_cast<std::size_t>(u - 1)];
            const double av = gp.tri.center[static_cast<std::size_t>(v - 1)];
            const double hw = gp.tri.half_width[static_cast<std::size_t>(std::max(u, v) - 1)];
            const double d = std::hypot(x1 - au, x2 - av);
            if (d > 0.0 && d < hw) r += c.at(i, (u - 1) * kk + (v - 1)) * (-(x1 - au) / d);
          }
        }
        g[i] = r;
      }
      return;
    }
    case Act::pdelu: {
      const ParamGroup& a = st.group("a");
      const double p = 1.0 / (1.0 - s.pdelu_t);
      for (int i = 0; i < n; ++i) {
        const double v = x[i];
        if (v != v) {
          g[i] = v;
        } else if (v > 0.0) {
          g[i] = 1.0;
        } else {
          const double u = 1.0 + (1.0 - s.pdelu_t) * v;
          g[i] = u > 0.0 ? a.at(i, 0) * p * std::pow(u, p - 1.0) * (1.0 - s.pdelu_t) : 0.0;
        }
      }
      return;
    }
    case Act::swish:
    case Act::swish_learnable: {
      for (int i = 0; i < n; ++i) {
        const double beta =
            s.kind == Act::swish ? s.swish_beta : st.group("beta").at(i, 0);
        const double sg = detail::sigmoid(beta * x[i]);
        g[i] = sg + x[i] * beta * sg * (1.0 - sg);
      }
      return;
    }
    case Act::mish: {
      const ParamGroup& al = st.group("alpha");
      for (int i = 0; i < n; ++i) {
        const double a = al.at(i, 0);
        const double t = std::tanh(detail::softplus(a * x[i]));
        g[i] = t + x[i] * (1.0 - t * t) * a * detail::sigmoid(a * x[i]);
      }
      return;
    }
    case Act::srs: {
      const ParamGroup& al = st.group("alpha");
      const ParamGroup& be = st.group("beta");
      for (int i = 0; i < n; ++i) {
        const double v = x[i];
        const double a = al.at(i, 0);
        const double b = be.at(i, 0);
        const double e = std::exp(-v / b);
        const double D = v / a + e;
        g[i] = (D - v * (1.0 / a - e / b)) / (D * D);
      }
      return;
    }
    case Act::soft_learnable:
    case Act::soft_learnable2: {
      const ParamGroup& al = st.group("alpha");
      for (int i = 0; i < n; ++i) {
        const double v = x[i];
        if (v != v) {
          g[i] = v;
        } else if (v > 0.0) {
          g[i] = 1.0;
        } else {
          const double beta =
              s.kind == Act::soft_learnable2 ? st.group("beta").at(i, 0) : 1.0;
          g[i] = al.at(i, 0) * beta * detail::sigmoid(beta * v);
        }
      }
      return;
    }
    case Act::tanelu: {
      const ParamGroup& a = st.group("a");
      for (int i = 0; i < n; ++i) {
        if (x[i] != x[i]) {
          g[i] = x[i];
          continue;
        }
        const double t = std::tanh(x[i]);
        g[i] = (x[i] >= 0.0 ? 1.0 : 0.0) + a.at(i, 0) * (1.0 - t * t);
      }
      return;
    }
  }
  throw std::logic_error("act_grad_input: unhandled activation kind");
}

// ---------------------------------------------------------------------------
// d(output_c)/d(param_{c,j}), written into a state-shaped container.
// ---------------------------------------------------------------------------

inline void act_grad_params(const ActivationSpec& s, const ActivationState& st,
                            std::span<const double> x, ActivationState& out) {
  if (!has_learnable_params(s.kind))
    throw std::invalid_argument("act_grad_params: activation has no learnable parameters");
  detail::check_shapes(s, st, x);
  if (!congruent_states(out, st)) out = zeros_like(st);
  const int n = static_cast<int>(x.size());
  const detail::GridPack gp = detail::GridPack::for_spec(s);

  switch (s.kind) {
    case Act::prelu: {
      ParamGroup& da = out.group("a");
      for (int i = 0; i < n; ++i) da.at(i, 0) = detail::prelu_da(x[i]);
      return;
    }
    case Act::srelu: {
      const ParamGroup& al = st.group("al");
      const ParamGroup& ar = st.group("ar");
      const ParamGroup& tl = st.group("tl");
      const ParamGroup& tr = st.group("tr");
      ParamGroup& dal = out.group("al");
      ParamGroup& dar = out.group("ar");
      ParamGroup& dtl = out.group("tl");
      ParamGroup& dtr = out.group("tr");
      for (int i = 0; i < n; ++i) {
        const double v = x[i];
        dal.at(i, 0) = dar.at(i, 0) = dtl.at(i, 0) = dtr.at(i, 0) = 0.0;
        if (v <= tl.at(i, 0)) {
          dal.at(i, 0) = v - tl.at(i, 0);
          dtl.at(i, 0) = 1.0 - al.at(i, 0);
        } else if (v >= tr.at(i, 0)) {
          dar.at(i, 0) = v - tr.at(i, 0);
          dtr.at(i, 0) = 1.0 - ar.at(i, 0);
        }
      }
      return;
    }
    case Act::aplu: {
      const ParamGroup& a = st.group("a");
      const ParamGroup& b = st.group("b");
      ParamGroup& da = out.group("a");
      ParamGroup& db = out.group("b");
      for (int i = 0; i < n; ++i) {
        for (int h = 0; h < s.hinges; ++h) {
          const double z = b.at(i, h) - x[i];
          da.at(i, h) = z > 0.0 ? z : 0.0;
          db.at(i, h) = z > 0.0 ? a.at(i, h) : 0.0;
        }
      }
      return;
    }
    case Act::splash: {
      const ParamGroup& ap = st.group("a_pos");
      const ParamGroup& an = st.group("a_neg");
      const ParamGroup& b = st.group("b");
      ParamGroup& dap = out.group("a_pos");
      ParamGroup& dan = out.group("a_neg");
      ParamGroup& db = out.group("b");
      for (int i = 0; i < n; ++i) {
        for (int h = 0; h < s.hinges; ++h) {
          const double zp = b.at(i, h) - x[i];
          const double zn = b.at(i, h) + x[i];
          dap.at(i, h) = zp > 0.0 ? zp : 0.0;
          dan.at(i, h) = zn > 0.0 ? zn : 0.0;
          db.at(i, h) = (zp > 0.0 ? ap.at(i, h) : 0.0) + (zn > 0.0 ? an.at(i, h) : 0.0);
        }
      }
      return;
    }
    case Act::melu:
    case Act::small_galu:
    case Act::galu: {
      const detail::HatSum hs{uses_biphasic_grid(s.kind) ? &gp.bi : &gp.tri, s.k,
                              uses_biphasic_grid(s.kind)};
      ParamGroup& dc = out.group("c");
      for (int i = 0; i < n; ++i) {
        dc.at(i, 0) = detail::prelu_da(x[i]);
        for (int j = 1; j < s.k; ++j) dc.at(i, j) = hs.hat(x[i], j - 1);
      }
      return;
    }
    case Act::symmetric_melu:
    case Act::symmetric_galu: {
      const detail::HatSum hs{s.kind == Act::symmetric_galu ? &gp.bi : &gp.tri, s.k,
                              s.kind == Act::symmetric_galu};
      ParamGroup& dc = out.group("c");
      for (int i = 0; i < n; ++i) {
        dc.at(i, 0) = detail::prelu_da(x[i]) + detail::prelu_da(-x[i]);
        for (int j = 1; j < s.k; ++j) dc.at(i, j) = hs.hat(x[i], j - 1) + hs.hat(-x[i], j - 1);
      }
      return;
    }
    case Act::flexible_melu: {
      const ParamGroup& c = st.group("c");
      const ParamGroup& a = st.group("a");
      ParamGroup& dc = out.group("c");
      ParamGroup& da = out.group("a");
      for (int i = 0; i < n; ++i) {
        const double v = x[i];
        dc.at(i, 0) = detail::prelu_da(v);
        for (int j = 1; j < s.k; ++j) {
          const double hw = gp.tri.half_width[static_cast<std::size_t>(j - 1)];
          const double aj = a.at(i, j - 1);
          dc.at(i, j) = detail::tri_hat(v, aj, hw);
          const double d = v - aj;
          da.at(i, j - 1) =
              std::abs(d) < hw ? c.at(i, j) * (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0)) : 0.0;
        }
      }
      return;
    }
    case Act::melu_galu: {
      const ParamGroup& mc = st.group("mc");
      const ParamGroup& gc = st.group("gc");
      const ParamGroup& mix = st.group("mix");
      const detail::HatSum hm{&gp.tri, 8, false};
      const detail::HatSum hg{&gp.bi, 4, true};
      ParamGroup& dmc = out.group("mc");
      ParamGroup& dgc = out.group("gc");
      ParamGroup& dmix = out.group("mix");
      for (int i = 0; i < n; ++i) {
        const double a = mix.at(i, 0);
        const double v = x[i];
        dmc.at(i, 0) = (1.0 - a) * detail::prelu_da(v);
        for (int j = 1; j < 8; ++j) dmc.at(i, j) = (1.0 - a) * hm.hat(v, j - 1);
        dgc.at(i, 0) = a * detail::prelu_da(v);
        for (int j = 1; j < 4; ++j) dgc.at(i, j) = a * hg.hat(v, j - 1);
        dmix.at(i, 0) = hg.value(gc.row(i), v) - hm.value(mc.row(i), v);
      }
      return;
    }
    case Act::melu_2d: {
      ParamGroup& dc0 = out.group("c0");
      ParamGroup& dc = out.group("c");
      const int kk = s.k - 1;
      for (int i = 0; i < n; ++i) {
        const double x1 = x[i];
        const double x2 = x[(i + 1) % n];
        dc0.at(i, 0) = detail::prelu_da(x1) + detail::prelu_da(x2);
        for (int u = 1; u <= kk; ++u) {
          for (int v = 1; v <= kk; ++v) {
            const double au = gp.tri.center[static_cast<std::size_t>(u - 1)];
            const double av = gp.tri.center[static_cast<std::size_t>(v - 1)];
            const double hw = gp.tri.half_width[static_cast<std::size_t>(std::max(u, v) - 1)];
            const double t = hw - std::hypot(x1 - au, x2 - av);
            dc.at(i, (u - 1) * kk + (v - 1)) = t > 0.0 ? t : 0.0;
          }
        }
      }
      return;
    }
    case Act::pdelu: {
      const double p = 1.0 / (1.0 - s.pdelu_t);
      ParamGroup& da = out.group("a");
      for (int i = 0; i < n; ++i) {
        const double v = x[i];
        if (v > 0.0) {
          da.at(i, 0) = 0.0;
        } else {
          const double u = 1.0 + (1.0 - s.pdelu_t) * v;
          da.at(i, 0) = (u > 0.0 ? std::pow(u, p) : 0.0) - 1.0;
        }
      }
      return;
    }
    case Act::swish_learnable: {
      const ParamGroup& be = st.group("beta");
      ParamGroup& db = out.group("beta");
      for (int i = 0; i < n; ++i) {
        const double sg = detail::sigmoid(be.at(i, 0) * x[i]);
        db.at(i, 0) = x[i] * x[i] * sg * (1.0 - sg);
      }
      return;
    }
    case Act::mish: {
      const ParamGroup& al = st.group("alpha");
      ParamGroup& da = out.group("alpha");
      for (int i = 0; i < n; ++i) {
        const double a = al.at(i, 0);
        const double t = std::tanh(detail::softplus(a * x[i]));
        da.at(i, 0) = x[i] * x[i] * (1.0 - t * t) * detail::sigmoid(a * x[i]);
      }
      return;
    }
    case Act::srs: {
      const ParamGroup& al = st.group("alpha");
      const ParamGroup& be = st.group("beta");
      ParamGroup& da = out.group("alpha");
      ParamGroup& db = out.group("beta");
      for (int i = 0; i < n; ++i) {
        const double v = x[i];
        const double a = al.at(i, 0);
        const double b = be.at(i, 0);
        const double e = std::exp(-v / b);
        const double D = v / a + e;
        da.at(i, 0) = v * v / (a * a * D * D);
        db.at(i, 0) = -v * v * e / (b * b * D * D);
      }
      return;
    }
    case Act::soft_learnable:
    case Act::soft_learnable2: {
      const ParamGroup& al = st.group("alpha");
      ParamGroup& da = out.group("alpha");
      const double ln2 = 0.6931471805599453094172321;
      for (int i = 0; i < n; ++i) {
        const double v = x[i];
        const double beta =
            s.kind == Act::soft_learnable2 ? st.group("beta").at(i, 0) : 1.0;
        da.at(i, 0) = v > 0.0 ? 0.0 : detail::softplus(beta * v) - ln2;
        if (s.kind == Act::soft_learnable2) {
          out.group("beta").at(i, 0) =
              v > 0.0 ? 0.0 : al.at(i, 0) * v * detail::sigmoid(beta * v);
        }
      }
      return;
    }
    case Act::tanelu: {
      ParamGroup& da = out.group("a");
      for (int i = 0; i < n; ++i) da.at(i, 0) = std::tanh(x[i]);
      return;
    }
    default:
      throw std::invalid_argument("act_grad_params: activation has no learnable parameters");
  }
}

// ---------------------------------------------------------------------------
// Reverse-mode step: accumulates upstream-weighted input and parameter
// gradients. Handles the pairwise activation's coupling between neighboring
// channels, which the diagonal act_grad_input cannot express.
// ---------------------------------------------------------------------------

inline void act_backward(const ActivationSpec& s, const ActivationState& st,
                         std::span<const double> x, std::span<const double> dy,
                         std::span<double> dx_accum, ActivationState* grad_accum,
                         ActivationState& scratch) {
  const int n = static_cast<int>(x.size());
  if (dy.size() != x.size() || dx_accum.size() != x.size())
    throw std::invalid_argument("act_backward: shape mismatch");

  if (s.kind == Act::melu_2d) {
    const detail::GridPack gp = detail::GridPack::for_spec(s);
    const ParamGroup& c0 = st.group("c0");
    const ParamGroup& c = st.group("c");
    const int kk = s.k - 1;
    for (int i = 0; i < n; ++i) {
      const int inext = (i + 1) % n;
      const double x1 = x[i];
      const double x2 = x[inext];
      double d1 = detail::prelu_dx(x1, c0.at(i, 0));
      double d2 = detail::prelu_dx(x2, c0.at(i, 0));
      for (int u = 1; u <= kk; ++u) {
        for (int v = 1; v <= kk; ++v) {
          const double au = gp.tri.center[static_cast<std::size_t>(u - 1)];
          const double av = gp.tri.center[static_cast<std::size_t>(v - 1)];
          const double hw = gp.tri.half_width[static_cast<std::size_t>(std::max(u, v) - 1)];
          const double dd = std::hypot(x1 - au, x2 - av);
          if (dd > 0.0 && dd < hw) {
            const double cv = c.at(i, (u - 1) * kk + (v - 1));
            d1 -= cv * (x1 - au) / dd;
            d2 -= cv * (x2 - av) / dd;
          }
        }
      }
      dx_accum[i] += dy[i] * d1;
      dx_accum[inext] += dy[i] * d2;
    }
  } else {
    thread_local std::vector<double> diag;
    diag.resize(static_cast<std::size_t>(n));
    act_grad_input(s, st, x, diag);
    for (int i = 0; i < n; ++i) dx_accum[i] += dy[i] * diag[static_cast<std::size_t>(i)];
  }

  if (grad_accum != nullptr && has_learnable_params(s.kind)) {
    act_grad_params(s, st, x, scratch);
    for (std::size_t gi = 0; gi < scratch.groups.size(); ++gi) {
      ParamGroup& dst = grad_accum->groups[gi];
      const ParamGroup& src = scratch.groups[gi];
      for (int ch = 0; ch < st.channels; ++ch)
        for (int j = 0; j < src.per_channel; ++j) dst.at(ch, j) += dy[ch] * src.at(ch, j);
    }
  }
}

// ---------------------------------------------------------------------------
// Non-differentiable points per channel (finite sets only; the pairwise
// activation's circular kink manifolds are covered by kink_distance).
// ---------------------------------------------------------------------------

inline std::vector<double> kink_points(const ActivationSpec& s, const ActivationState& st,
                                       int channel) {
  std::vector<double> pts;
  auto add_hats = [&pts](const FixedGrid& g, int count, bool biphasic, bool mirrored) {
    for (int j = 0; j < count; ++j) {
      const double a = g.center[static_cast<std::size_t>(j)];
      const double hw = g.half_width[static_cast<std::size_t>(j)];
      pts.push_back(a - hw);
      pts.push_back(a);
      pts.push_back(a + hw);
      if (biphasic) {
        pts.push_back(a + 2.0 * hw);
        pts.push_back(a + 3.0 * hw);
      }
      if (mirrored) {
        pts.push_back(-(a - hw));
        pts.push_back(-a);
        pts.push_back(-(a + hw));
        if (biphasic) {
          pts.push_back(-(a + 2.0 * hw));
          pts.push_back(-(a + 3.0 * hw));
        }
      }
    }
  };

  switch (s.kind) {
    case Act::relu:
    case Act::leaky_relu:
    case Act::prelu:
    case Act::tanelu:
    case Act::soft_learnable:
    case Act::soft_learnable2:
    case Act::melu_2d:
      pts.push_back(0.0);
      break;
    case Act::elu:
      if (s.elu_alpha != 1.0) pts.push_back(0.0);
      break;
    case Act::srelu:
      pts.push_back(st.group("tl").at(channel, 0));
      pts.push_back(st.group("tr").at(channel, 0));
      break;
    case Act::aplu: {
      pts.push_back(0.0);
      const ParamGroup& b = st.group("b");
      for (int h = 0; h < s.hinges; ++h) pts.push_back(b.at(channel, h));
      break;
    }
    case Act::splash: {
      pts.push_back(0.0);
      const ParamGroup& b = st.group("b");
      for (int h = 0; h < s.hinges; ++h) {
        pts.push_back(b.at(channel, h));
        pts.push_back(-b.at(channel, h));
      }
      break;
    }
    case Act::melu:
    case Act::small_galu:
    case Act::galu:
      pts.push_back(0.0);
      add_hats(build_grid(s.kind, s.max_input), s.k - 1, uses_biphasic_grid(s.kind), false);
      break;
    case Act::symmetric_melu:
    case Act::symmetric_galu:
      pts.push_back(0.0);
      add_hats(build_grid(s.kind, s.max_input), s.k - 1, s.kind == Act::symmetric_galu, true);
      break;
    case Act::flexible_melu: {
      pts.push_back(0.0);
      const FixedGrid g = build_grid(s.kind, s.max_input);
      const ParamGroup& a = st.group("a");
      for (int j = 0; j < s.k - 1; ++j) {
        const double aj = a.at(channel, j);
        const double hw = g.half_width[static_cast<std::size_t>(j)];
        pts.push_back(aj - hw);
        pts.push_back(aj);
        pts.push_back(aj + hw);
      }
      break;
    }
    case Act::melu_galu:
      pts.push_back(0.0);
      add_hats(build_grid(Act::melu, s.max_input), 7, false, false);
      add_hats(build_grid(Act::galu, s.max_input), 3, true, false);
      break;
    case Act::pdelu:
      pts.push_back(0.0);
      pts.push_back(-1.0 / (1.0 - s.pdelu_t));
      break;
    case Act::swish:
    case Act::swish_learnable:
    case Act::mish:
    case Act::srs:
      break;
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

// Minimum distance from the sample to any non-differentiable locus.
inline double kink_distance(const ActivationSpec& s, const ActivationState& st,
                            std::span<const double> x) {
  double best = std::numeric_limits<double>::infinity();
  const int n = static_cast<int>(x.size());
  if (s.kind == Act::melu_2d) {
    const FixedGrid g = build_grid(s.kind, s.max_input);
    const int kk = s.k - 1;
    for (int i = 0; i < n; ++i) {
      const double x1 = x[i];
      const double x2 = x[(i + 1) % n];
      best = std::min(best, std::abs(x1));
      for (int u = 1; u <= kk; ++u) {
        for (int v = 1; v <= kk; ++v) {
          const double au = g.center[static_cast<std::size_t>(u - 1)];
          const double av = g.center[static_cast<std::size_t>(v - 1)];
          const double hw = g.half_width[static_cast<std::size_t>(std::max(u, v) - 1)];
          const double d = std::hypot(x1 - au, x2 - av);
          best = std::min(best, std::min(d, std::abs(d - hw)));
        }
      }
    }
    return best;
  }
  for (int i = 0; i < n; ++i) {
    for (const double p : kink_points(s, st, i)) best = std::min(best, std::abs(x[i] - p));
  }
  return best;
}

// ---------------------------------------------------------------------------
// Hinge-coefficient weight decay: 0.001 * sum a^2, gradient 0.002 * a.
// ---------------------------------------------------------------------------

inline double regularization(const ActivationSpec& s, const ActivationState& st,
                             ActivationState* grad_accum = nullptr) {
  if (s.kind != Act::aplu && s.kind != Act::splash) return 0.0;
  const char* names_aplu[] = {"a"};
  const char* names_splash[] = {"a_pos", "a_neg"};
  const char** names = s.kind == Act::aplu ? names_aplu : names_splash;
  const int count = s.kind == Act::aplu ? 1 : 2;
  double loss = 0.0;
  for (int gi = 0; gi < count; ++gi) {
    const ParamGroup& g = st.group(names[gi]);
    for (const double v : g.values) loss += v * v;
    if (grad_accum != nullptr) {
      ParamGroup& dg = grad_accum->group(names[gi]);
      for (std::size_t i = 0; i < g.values.size(); ++i) dg.values[i] += 0.002 * g.values[i];
    }
  }
  return 0.001 * loss;
}

// Learning-rate multiplier for activation parameters.
inline double param_lr_scale(const ActivationSpec& s) {
  if (s.kind == Act::aplu || s.kind == Act::splash) return 1.0 / s.max_input;
  return 1.0;
}

// Lower clamp applied to scale parameters that must stay positive.
inline void clamp_positive_params(const ActivationSpec& s, ActivationState& st) {
  static constexpr double kFloor = 1e-3;
  auto clamp_group = [&st](const char* name) {
    ParamGroup& g = st.group(name);
    for (auto& v : g.values) v = std::max(v, kFloor);
  };
  switch (s.kind) {
    case Act::srs:
      clamp_group("alpha");
      clamp_group("beta");
      break;
    case Act::soft_learnable:
      clamp_group("alpha");
      break;
    case Act::soft_learnable2:
      clamp_group("alpha");
      clamp_group("beta");
      break;
    default:
      break;
  }
}

}  // namespace actens
