#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "primer/classmetrics.hpp"

namespace primer {

enum class Strategy { interleaved, block, random };

std::string strategy_name(Strategy s);
std::optional<Strategy> parse_strategy(const std::string& name);

struct ClassOrder {
  std::vector<int> sequence;  // permutation of class ids
  Strategy strategy = Strategy::random;
  std::optional<std::string> source_metric;
  std::optional<std::uint64_t> seed;
};

/// Similarity matrices map x -> 1-x with the diagonal forced to 0 and the
/// kind flipped; dissimilarity matrices pass through unchanged.
AdjacencyMatrix to_dissimilarity(const AdjacencyMatrix& m);

/// Greedy most-different-next order: start with the pair attaining the
/// maximum dissimilarity (lower class index emitted first), then repeatedly
/// append the remaining class farthest from the last one added. Ties always
/// go to the lowest class index.
ClassOrder interleaved_order(const AdjacencyMatrix& m);

/// Same greedy scheme with argmin: most-similar pair first, then the
/// remaining class closest to the last one added.
ClassOrder block_order(const AdjacencyMatrix& m);

/// Continues a fixed prefix with the greedy rule of `strategy` (argmax for
/// interleaved, argmin for block) over the classes not in the prefix.
/// Extending interleaved_order's own first k classes reproduces the full
/// interleaved order.
ClassOrder extend_order(const AdjacencyMatrix& m, const std::vector<int>& prefix,
                        Strategy strategy);

/// fixed_prefix followed by a seeded Fisher-Yates shuffle of the rest.
ClassOrder random_order(const std::vector<int>& class_ids,
                        const std::vector<int>& fixed_prefix,
                        std::uint64_t seed);

nlohmann::json order_to_json(const ClassOrder& order,
                             const std::vector<std::string>& class_names);

ClassOrder order_from_json(const nlohmann::json& j,
                           const std::vector<std::string>& class_names);

}  // namespace primer
