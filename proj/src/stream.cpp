#include "oclust/stream.h"

#include <stdexcept>
#include <unordered_map>

namespace oclust {

bool EmbeddingStream::labeled() const {
  for (const auto& r : records) {
    if (r.speaker.empty()) return false;
  }
  return true;
}

std::vector<Vec> EmbeddingStream::features() const {
  std::vector<Vec> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.features);
  return out;
}

DenseLabels dense_labels(const EmbeddingStream& stream) {
  DenseLabels out;
  std::unordered_map<std::string, int> ids;
  out.labels.reserve(stream.size());
  for (std::size_t n = 0; n < stream.size(); ++n) {
    const std::string& name = stream.records[n].speaker;
    if (name.empty()) {
      throw std::invalid_argument("record " + std::to_string(n) + " has no speaker label");
    }
    auto [it, inserted] = ids.emplace(name, static_cast<int>(out.names.size()));
    if (inserted) out.names.push_back(name);
    out.labels.push_back(it->second);
  }
  return out;
}

std::vector<int> canonicalize(const std::vector<int>& labels) {
  std::unordered_map<int, int> remap;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int v : labels) {
    auto [it, inserted] = remap.emplace(v, static_cast<int>(remap.size()));
    out.push_back(it->second);
  }
  return out;
}

}  // namespace oclust
