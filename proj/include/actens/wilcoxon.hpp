#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace actens {

struct WilcoxonResult {
  double w = 0.0;        // min(w_plus, w_minus)
  double w_plus = 0.0;   // rank sum of positive differences
  double w_minus = 0.0;  // rank sum of negative differences
  int n_effective = 0;   // pairs remaining after zero differences are dropped
  double p_two_sided = 1.0;
  double p_one_sided = 1.0;  // H1: the first sample exceeds the second
  int direction = 0;         // sign of the median nonzero difference
  bool defined = true;       // false when every difference is zero
  bool exact = false;        // exact enumeration (small n) vs normal approximation
};

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / 1.4142135623730950488017); }

// Paired signed-rank test. Zero differences are dropped; tied magnitudes get
// average ranks. Exact sign enumeration up to 12 effective pairs, normal
// approximation with tie and continuity corrections beyond.
inline WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("wilcoxon: sample sizes differ");
  if (a.empty()) throw std::invalid_argument("wilcoxon: empty samples");

  std::vector<double> diffs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (d != 0.0) diffs.push_back(d);
  }
  WilcoxonResult res;
  res.n_effective = static_cast<int>(diffs.size());
  if (diffs.empty()) {
    res.defined = false;
    res.direction = 0;
    res.p_two_sided = 1.0;
    res.p_one_sided = 1.0;
    return res;
  }

  {
    std::vector<double> sorted = diffs;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    const double median =
        m % 2 == 1 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
    res.direction = median > 0.0 ? 1 : (median < 0.0 ? -1 : 0);
  }

  // average ranks over |d|
  const int n = res.n_effective;
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  std::sort(idx.begin(), idx.end(), [&diffs](int x, int y) {
    return std::abs(diffs[static_cast<std::size_t>(x)]) < std::abs(diffs[static_cast<std::size_t>(y)]);
  });
  std::vector<double> rank(static_cast<std::size_t>(n), 0.0);
  std::vector<int> tie_sizes;
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && std::abs(diffs[static_cast<std::size_t>(idx[static_cast<std::size_t>(j + 1)])]) ==
                            std::abs(diffs[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])]))
      ++j;
    const double avg = 0.5 * (i + j) + 1.0;  // ranks are 1-based
    for (int t = i; t <= j; ++t) rank[static_cast<std::size_t>(idx[static_cast<std::size_t>(t)])] = avg;
    tie_sizes.push_back(j - i + 1);
    i = j + 1;
  }

  for (int t = 0; t < n; ++t) {
    if (diffs[static_cast<std::size_t>(t)] > 0.0)
      res.w_plus += rank[static_cast<std::size_t>(t)];
    else
      res.w_minus += rank[static_cast<std::size_t>(t)];
  }
  res.w = std::min(res.w_plus, res.w_minus);

  if (n <= 12) {
    res.exact = true;
    const std::uint64_t total = 1ull << n;
    const double s = 0.5 * n * (n + 1);
    std::uint64_t count_two = 0;
    std::uint64_t count_one = 0;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
      double t = 0.0;
      for (int bit = 0; bit < n; ++bit)
        if (mask & (1ull << bit)) t += rank[static_cast<std::size_t>(bit)];
      if (std::min(t, s - t) <= res.w + 1e-9) ++count_two;
      if (t <= res.w_minus + 1e-9) ++count_one;  // mask read as the negative-sign set
    }
    res.p_two_sided = static_cast<double>(count_two) / static_cast<double>(total);
    res.p_one_sided = static_cast<double>(count_one) / static_cast<double>(total);
  } else {
    const double mu = n * (n + 1) / 4.0;
    double sigma2 = n * (n + 1) * (2.0 * n + 1.0) / 24.0;
    for (const int t : tie_sizes)
      sigma2 -= (static_cast<double>(t) * t * t - t) / 48.0;
    const double sigma = std::sqrt(sigma2);
    res.p_two_sided = std::min(1.0, 2.0 * normal_cdf((res.w - mu + 0.5) / sigma));
    res.p_one_sided = normal_cdf((res.w_minus - mu + 0.5) / sigma);
  }
  return res;
}

}  // namespace actens
