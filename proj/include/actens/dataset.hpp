#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "actens/matrix.hpp"
#include "actens/rng.hpp"
#include "actens/text.hpp"

namespace actens {

struct Dataset {
  std::string name;
  Matrix features;  // n x d
  std::vector<int> labels;
  int class_count = 0;
  int image_h = 0;  // nonzero for raster data; then d == image_h * image_w
  int image_w = 0;
  std::vector<char> fixed_test;  // optional: 1 marks held-out samples; empty means use CV

  int samples() const { return features.rows; }
  int dims() const { return features.cols; }
  bool is_image() const { return image_h > 0 && image_w > 0; }
  bool has_fixed_split() const { return !fixed_test.empty(); }
};

namespace detail {

inline std::vector<int> balanced_labels(int n, int classes) {
  std::vector<int> counts(static_cast<std::size_t>(classes), n / classes);
  for (int i = 0; i < n % classes; ++i) ++counts[static_cast<std::size_t>(i)];
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(n));
  for (int c = 0; c < classes; ++c)
    for (int i = 0; i < counts[static_cast<std::size_t>(c)]; ++i) labels.push_back(c);
  return labels;
}

}  // namespace detail

// Deterministic 2-d point sets with balanced classes. noise is the standard
// deviation of the additive jitter (blobs: within-cluster spread).
inline Dataset make_synthetic(const std::string& kind, int n, double noise, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("make_synthetic: need at least 2 samples");
  Dataset ds;
  ds.name = kind;
  Rng rng = Rng(seed).child(fnv1a(kind));
  const double tau = 6.283185307179586476925287;

  if (kind == "two_moons") {
    ds.class_count = 2;
    ds.labels = detail::balanced_labels(n, 2);
    ds.features = Matrix(n, 2);
    for (int i = 0; i < n; ++i) {
      const double t = rng.uniform() * 3.141592653589793238463;
      double x, y;
      if (ds.labels[static_cast<std::size_t>(i)] == 0) {
        x = std::cos(t);
        y = std::sin(t);
      } else {
        x = 1.0 - std::cos(t);
        y = 0.5 - std::sin(t);
      }
      ds.features(i, 0) = x + noise * rng.normal();
      ds.features(i, 1) = y + noise * rng.normal();
    }
  } else if (kind == "spirals") {
    ds.class_count = 2;
    ds.labels = detail::balanced_labels(n, 2);
    ds.features = Matrix(n, 2);
    for (int i = 0; i < n; ++i) {
      const double t = 0.25 + 0.75 * rng.uniform();
      const double ang = t * 3.0 * 3.141592653589793238463 +
                         (ds.labels[static_cast<std::size_t>(i)] == 0 ? 0.0 : 3.141592653589793238463);
      ds.features(i, 0) = t * std::cos(ang) + noise * rng.normal();
      ds.features(i, 1) = t * std::sin(ang) + noise * rng.normal();
    }
  } else if (kind == "blobs") {
    ds.class_count = 3;
    ds.labels = detail::balanced_labels(n, 3);
    ds.features = Matrix(n, 2);
    const double cx[3] = {2.0, -1.0, -1.0};
    const double cy[3] = {0.0, 1.8, -1.8};
    for (int i = 0; i < n; ++i) {
      const int c = ds.labels[static_cast<std::size_t>(i)];
      ds.features(i, 0) = cx[c] + noise * rng.normal();
      ds.features(i, 1) = cy[c] + noise * rng.normal();
    }
  } else if (kind == "rings") {
    ds.class_count = 2;
    ds.labels = detail::balanced_labels(n, 2);
    ds.features = Matrix(n, 2);
    for (int i = 0; i < n; ++i) {
      const double r0 = ds.labels[static_cast<std::size_t>(i)] == 0 ? 0.6 : 1.2;
      const double ang = tau * rng.uniform();
      const double r = r0 + noise * rng.normal();
      ds.features(i, 0) = r * std::cos(ang);
      ds.features(i, 1) = r * std::sin(ang);
    }
  } else {
    throw std::invalid_argument("make_synthetic: unknown kind " + kind);
  }
  return ds;
}

// ---------------------------------------------------------------------------
// CSV: header f1,...,fd,label; '.' decimal separator.
// ---------------------------------------------------------------------------

inline Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("load_csv: empty file " + path);
  const auto header = split(line, ',');
  if (header.size() < 2 || header.back() != "label")
    throw std::runtime_error("load_csv: bad header in " + path +
                             " (expected f1,...,fd,label)");
  const int d = static_cast<int>(header.size()) - 1;

  std::vector<double> values;
  std::vector<int> labels;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    if (static_cast<int>(cells.size()) != d + 1)
      throw std::runtime_error("load_csv: line " + std::to_string(lineno) + ": expected " +
                               std::to_string(d + 1) + " columns, got " +
                               std::to_string(cells.size()));
    for (int c = 0; c < d; ++c) {
      double v;
      if (!parse_double(cells[static_cast<std::size_t>(c)], v))
        throw std::runtime_error("load_csv: line " + std::to_string(lineno) +
                                 ": non-numeric feature '" + cells[static_cast<std::size_t>(c)] + "'");
      if (!std::isfinite(v))
        throw std::runtime_error("load_csv: line " + std::to_string(lineno) +
                                 ": non-finite feature value");
      values.push_back(v);
    }
    long long lab;
    if (!parse_int(cells.back(), lab) || lab < 0)
      throw std::runtime_error("load_csv: line " + std::to_string(lineno) +
                               ": label must be a non-negative integer, got '" + cells.back() + "'");
    labels.push_back(static_cast<int>(lab));
  }
  if (labels.empty()) throw std::runtime_error("load_csv: no data rows in " + path);

  Dataset ds;
  ds.name = path;
  ds.features = Matrix(static_cast<int>(labels.size()), d);
  ds.features.data = std::move(values);
  ds.labels = std::move(labels);
  ds.class_count = *std::max_element(ds.labels.begin(), ds.labels.end()) + 1;
  return ds;
}

inline void save_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_csv: cannot open " + path);
  for (int c = 0; c < ds.dims(); ++c) out << "f" << (c + 1) << ",";
  out << "label\n";
  for (int i = 0; i < ds.samples(); ++i) {
    for (int c = 0; c < ds.dims(); ++c) out << fmt_double(ds.features(i, c)) << ",";
    out << ds.labels[static_cast<std::size_t>(i)] << "\n";
  }
}

// ---------------------------------------------------------------------------
// Stratified k-fold assignment: per class, fold sizes differ by at most one.
// ---------------------------------------------------------------------------

struct FoldSplit {
  int k = 0;
  std::vector<int> assignment;  // fold index per sample
};

inline FoldSplit stratified_kfold(const Dataset& ds, int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("stratified_kfold: k must be at least 2");
  std::vector<std::vector<int>> per_class(static_cast<std::size_t>(ds.class_count));
  for (int i = 0; i < ds.samples(); ++i)
    per_class[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)])].push_back(i);
  for (int c = 0; c < ds.class_count; ++c) {
    if (static_cast<int>(per_class[static_cast<std::size_t>(c)].size()) < k)
      throw std::invalid_argument("stratified_kfold: class " + std::to_string(c) + " has fewer than " +
                                  std::to_string(k) + " samples");
  }
  FoldSplit fs;
  fs.k = k;
  fs.assignment.assign(static_cast<std::size_t>(ds.samples()), 0);
  int offset = 0;  // rotates the starting fold between classes to even out sizes
  for (int c = 0; c < ds.class_count; ++c) {
    auto& idx = per_class[static_cast<std::size_t>(c)];
    Rng crng = Rng(seed).child(static_cast<std::uint64_t>(c));
    crng.shuffle(idx);
    for (std::size_t i = 0; i < idx.size(); ++i)
      fs.assignment[static_cast<std::size_t>(idx[i])] = static_cast<int>((i + offset) % k);
    offset = static_cast<int>((offset + idx.size()) % k);
  }
  return fs;
}

// ---------------------------------------------------------------------------
// Feature scaling, fitted on training rows only.
// ---------------------------------------------------------------------------

struct FeatureScaler {
  enum class Mode { standardize, to_range };
  Mode mode = Mode::standardize;
  std::vector<double> offset;  // value subtracted
  std::vector<double> scale;   // multiplier applied afterward

  static FeatureScaler fit(const Matrix& x, Mode mode, double max_input = 1.0) {
    if (x.rows == 0) throw std::invalid_argument("FeatureScaler: empty fit matrix");
    FeatureScaler f;
    f.mode = mode;
    f.offset.assign(static_cast<std::size_t>(x.cols), 0.0);
    f.scale.assign(static_cast<std::size_t>(x.cols), 1.0);
    for (int c = 0; c < x.cols; ++c) {
      if (mode == Mode::standardize) {
        double mean = 0.0;
        for (int r = 0; r < x.rows; ++r) mean += x(r, c);
        mean /= x.rows;
        double var = 0.0;
        for (int r = 0; r < x.rows; ++r) var += (x(r, c) - mean) * (x(r, c) - mean);
        var /= x.rows;
        f.offset[static_cast<std::size_t>(c)] = mean;
        f.scale[static_cast<std::size_t>(c)] = 1.0 / std::sqrt(std::max(var, 1e-12));
      } else {
        double lo = x(0, c), hi = x(0, c);
        for (int r = 1; r < x.rows; ++r) {
          lo = std::min(lo, x(r, c));
          hi = std::max(hi, x(r, c));
        }
        f.offset[static_cast<std::size_t>(c)] = lo;
        f.scale[static_cast<std::size_t>(c)] = max_input / std::max(hi - lo, 1e-12);
      }
    }
    return f;
  }

  void apply(Matrix& x) const {
    for (int r = 0; r < x.rows; ++r)
      for (int c = 0; c < x.cols; ++c)
        x(r, c) = (x(r, c) - offset[static_cast<std::size_t>(c)]) * scale[static_cast<std::size_t>(c)];
  }
};

// ---------------------------------------------------------------------------
// Raster augmentation: optional flips, two independent upscales in [1, 2]
// with bilinear interpolation, then a center crop back to the input size.
// ---------------------------------------------------------------------------

inline void augment_apply(std::span<const double> src, int h, int w, bool flip_h, bool flip_v,
                          double scale_h, double scale_w, std::span<double> dst) {
  if (static_cast<int>(src.size()) != h * w || dst.size() != src.size())
    throw std::invalid_argument("augment_apply: buffer size mismatch");
  if (scale_h < 1.0 || scale_w < 1.0)
    throw std::invalid_argument("augment_apply: scales must be at least 1");
  auto pixel = [&](int r, int c) {
    if (flip_v) r = h - 1 - r;
    if (flip_h) c = w - 1 - c;
    return src[static_cast<std::size_t>(r) * w + c];
  };
  const double off_r = 0.5 * (h * scale_h - h);
  const double off_c = 0.5 * (w * scale_w - w);
  for (int r = 0; r < h; ++r) {
    const double sr = (r + off_r) / scale_h;
    const int r0 = std::clamp(static_cast<int>(std::floor(sr)), 0, h - 1);
    const int r1 = std::min(r0 + 1, h - 1);
    const double fr = std::clamp(sr - r0, 0.0, 1.0);
    for (int c = 0; c < w; ++c) {
      const double sc = (c + off_c) / scale_w;
      const int c0 = std::clamp(static_cast<int>(std::floor(sc)), 0, w - 1);
      const int c1 = std::min(c0 + 1, w - 1);
      const double fc = std::clamp(sc - c0, 0.0, 1.0);
      dst[static_cast<std::size_t>(r) * w + c] =
          (1.0 - fr) * ((1.0 - fc) * pixel(r0, c0) + fc * pixel(r0, c1)) +
          fr * ((1.0 - fc) * pixel(r1, c0) + fc * pixel(r1, c1));
    }
  }
}

// Draw order: horizontal flip, vertical flip, height scale, width scale.
inline void augment(std::span<double> img, int h, int w, Rng& rng) {
  const bool fh = rng.uniform() < 0.5;
  const bool fv = rng.uniform() < 0.5;
  const double sh = rng.uniform(1.0, 2.0);
  const double sw = rng.uniform(1.0, 2.0);
  thread_local std::vector<double> tmp;
  tmp.assign(img.begin(), img.end());
  augment_apply(tmp, h, w, fh, fv, sh, sw, img);
}

}  // namespace actens
