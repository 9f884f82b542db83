#pragma once

#include <stdexcept>
#include <vector>

#include "actens/matrix.hpp"

namespace actens {

// Per-sample class probabilities paired with ground-truth labels.
struct ScoreMatrix {
  Matrix probs;  // n x classes, rows on the simplex
  std::vector<int> labels;

  int samples() const { return probs.rows; }
  int classes() const { return probs.cols; }
};

// Fraction of rows whose argmax matches the label; argmax ties resolve to the
// lowest class index.
inline double accuracy(const ScoreMatrix& s) {
  if (s.probs.rows == 0) throw std::invalid_argument("accuracy: empty score matrix");
  if (static_cast<int>(s.labels.size()) != s.probs.rows)
    throw std::invalid_argument("accuracy: label count does not match row count");
  int hits = 0;
  for (int i = 0; i < s.probs.rows; ++i) {
    const double* row = s.probs.row(i);
    int arg = 0;
    for (int c = 1; c < s.probs.cols; ++c)
      if (row[c] > row[arg]) arg = c;
    if (arg == s.labels[static_cast<std::size_t>(i)]) ++hits;
  }
  return static_cast<double>(hits) / s.probs.rows;
}

// Sum-rule fusion: elementwise mean of the member score matrices. All members
// must agree on shape and sample order.
inline ScoreMatrix sum_rule(const std::vector<ScoreMatrix>& members) {
  if (members.empty()) throw std::invalid_argument("sum_rule: no members");
  const ScoreMatrix& first = members.front();
  ScoreMatrix out;
  out.probs = Matrix(first.probs.rows, first.probs.cols);
  out.labels = first.labels;
  for (const auto& m : members) {
    if (!m.probs.same_shape(first.probs))
      throw std::invalid_argument("sum_rule: member score shapes differ");
    if (m.labels != first.labels)
      throw std::invalid_argument("sum_rule: member sample orders differ");
    for (std::size_t i = 0; i < m.probs.data.size(); ++i) out.probs.data[i] += m.probs.data[i];
  }
  const double inv = 1.0 / static_cast<double>(members.size());
  for (auto& v : out.probs.data) v *= inv;
  return out;
}

}  // namespace actens
