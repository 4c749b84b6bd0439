#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>

#include "ken/errors.hpp"

namespace ken {

// A set of embedding vectors, one per row. All values finite, count >= 1,
// dim >= 1; validate() is called by every loader and generator.
struct EmbeddingSet {
  Eigen::MatrixXd vectors;  // count x dim
  std::string label;

  Eigen::Index count() const { return vectors.rows(); }
  Eigen::Index dim() const { return vectors.cols(); }
};

inline void validate(const EmbeddingSet& set) {
  if (set.count() < 1)
    throw format_error("embedding set '" + set.label + "' is empty");
  if (set.dim() < 1)
    throw format_error("embedding set '" + set.label + "' has zero-width rows");
  if (!set.vectors.allFinite())
    throw format_error("embedding set '" + set.label +
                       "' contains non-finite values");
}

inline EmbeddingSet make_embedding_set(Eigen::MatrixXd vectors,
                                       std::string label = {}) {
  EmbeddingSet set{std::move(vectors), std::move(label)};
  validate(set);
  return set;
}

}  // namespace ken
