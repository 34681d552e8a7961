#pragma once

#include <string>
#include <vector>

#include "oclust/linalg.h"

namespace oclust {

// One time-stamped frame. An empty speaker means unlabeled.
struct StreamRecord {
  double t_start = 0.0;
  double t_end = 0.0;
  std::string speaker;
  Vec features;
};

struct EmbeddingStream {
  std::vector<StreamRecord> records;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
  std::size_t dim() const { return records.empty() ? 0 : records.front().features.size(); }
  bool labeled() const;
  std::vector<Vec> features() const;
};

// Speaker names mapped to dense ids by order of first appearance.
struct DenseLabels {
  std::vector<int> labels;
  std::vector<std::string> names;  // names[id]
};

// Throws std::invalid_argument if any record lacks a speaker.
DenseLabels dense_labels(const EmbeddingStream& stream);

// Renumbers labels densely by order of first appearance.
std::vector<int> canonicalize(const std::vector<int>& labels);

}  // namespace oclust
