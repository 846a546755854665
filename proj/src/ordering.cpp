#include "primer/ordering.hpp"

#include <algorithm>
#include <limits>

#include "primer/error.hpp"
#include "primer/rng.hpp"

namespace primer {

std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::interleaved:
      return "interleaved";
    case Strategy::block:
      return "block";
    case Strategy::random:
      return "random";
  }
  return "random";
}

std::optional<Strategy> parse_strategy(const std::string& name) {
  if (name == "interleaved") return Strategy::interleaved;
  if (name == "block") return Strategy::block;
  if (name == "random") return Strategy::random;
  return std::nullopt;
}

AdjacencyMatrix to_dissimilarity(const AdjacencyMatrix& m) {
  validate_adjacency(m);
  if (m.kind == AdjacencyMatrix::Kind::dissimilarity) return m;
  AdjacencyMatrix out = m;
  out.kind = AdjacencyMatrix::Kind::dissimilarity;
  out.values = (1.0 - m.values.array()).matrix();
  out.values.diagonal().setZero();
  return out;
}

namespace {

// Shared greedy walk: pick the seed pair optimizing d(i,j), then repeatedly
// append the remaining class optimizing d(last, c).  `better(a, b)` returns
// true when a strictly improves on b (max for interleaved, min for block);
// ties fall to the lowest class index because we scan indices in order and
// only replace on strict improvement.
std::vector<int> greedy_walk(const Matrix& d, bool maximize) {
  const int k = static_cast<int>(d.rows());
  auto better = [&](double a, double b) { return maximize ? a > b : a < b; };

  int best_i = 0, best_j = 1;
  double best = d(0, 1);
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      if (better(d(i, j), best)) {
        best = d(i, j);
        best_i = i;
        best_j = j;
      }
    }
  }

  std::vector<int> seq = {best_i, best_j};
  std::vector<bool> used(k, false);
  used[best_i] = used[best_j] = true;
  while (static_cast<int>(seq.size()) < k) {
    const int last = seq.back();
    int pick = -1;
    double pick_val = 0.0;
    for (int c = 0; c < k; ++c) {
      if (used[c]) continue;
      if (pick < 0 || better(d(last, c), pick_val)) {
        pick = c;
        pick_val = d(last, c);
      }
    }
    used[pick] = true;
    seq.push_back(pick);
  }
  return seq;
}

ClassOrder greedy_order(const AdjacencyMatrix& m, bool maximize) {
  const AdjacencyMatrix d = to_dissimilarity(m);
  ClassOrder order;
  order.strategy = maximize ? Strategy::interleaved : Strategy::block;
  order.source_metric = d.metric;
  std::vector<int> positions = greedy_walk(d.values, maximize);
  order.sequence.reserve(positions.size());
  for (int p : positions) order.sequence.push_back(d.class_ids[p]);
  return order;
}

}  // namespace

ClassOrder interleaved_order(const AdjacencyMatrix& m) {
  return greedy_order(m, /*maximize=*/true);
}

ClassOrder block_order(const AdjacencyMatrix& m) {
  return greedy_order(m, /*maximize=*/false);
}

ClassOrder extend_order(const AdjacencyMatrix& m, const std::vector<int>& prefix,
                        Strategy strategy) {
  if (strategy != Strategy::interleaved && strategy != Strategy::block) {
    throw ValidationError("extend_order: strategy must be interleaved or block");
  }
  const AdjacencyMatrix d = to_dissimilarity(m);
  if (prefix.size() < 1) {
    throw ValidationError("extend_order: prefix must not be empty");
  }
  const int k = static_cast<int>(d.values.rows());
  const bool maximize = strategy == Strategy::interleaved;
  auto better = [&](double a, double b) { return maximize ? a > b : a < b; };

  // class id -> row position
  std::vector<int> pos_of_id;
  int max_id = 0;
  for (int id : d.class_ids) max_id = std::max(max_id, id);
  pos_of_id.assign(static_cast<std::size_t>(max_id) + 1, -1);
  for (int p = 0; p < k; ++p) pos_of_id[static_cast<std::size_t>(d.class_ids[p])] = p;

  std::vector<bool> used(static_cast<std::size_t>(k), false);
  ClassOrder order;
  order.strategy = strategy;
  order.source_metric = d.metric;
  for (int id : prefix) {
    int p = (id >= 0 && id <= max_id) ? pos_of_id[static_cast<std::size_t>(id)] : -1;
    if (p < 0) {
      throw ValidationError("extend_order: prefix class " + std::to_string(id) +
                            " not in matrix");
    }
    if (used[static_cast<std::size_t>(p)]) {
      throw ValidationError("extend_order: duplicate prefix class " +
                            std::to_string(id));
    }
    used[static_cast<std::size_t>(p)] = true;
    order.sequence.push_back(id);
  }
  int last = pos_of_id[static_cast<std::size_t>(prefix.back())];
  while (static_cast<int>(order.sequence.size()) < k) {
    int pick = -1;
    double pick_val = 0.0;
    for (int c = 0; c < k; ++c) {
      if (used[static_cast<std::size_t>(c)]) continue;
      if (pick < 0 || better(d.values(last, c), pick_val)) {
        pick = c;
        pick_val = d.values(last, c);
      }
    }
    used[static_cast<std::size_t>(pick)] = true;
    order.sequence.push_back(d.class_ids[static_cast<std::size_t>(pick)]);
    last = pick;
  }
  return order;
}

ClassOrder random_order(const std::vector<int>& class_ids,
                        const std::vector<int>& fixed_prefix,
                        std::uint64_t seed) {
  if (class_ids.size() < 2) {
    throw ValidationError("random_order: need at least 2 classes");
  }
  std::vector<bool> in_prefix_seen(class_ids.size(), false);
  std::vector<int> rest;
  ClassOrder order;
  order.strategy = Strategy::random;
  order.seed = seed;
  for (int p : fixed_prefix) {
    auto it = std::find(class_ids.begin(), class_ids.end(), p);
    if (it == class_ids.end()) {
      throw ValidationError("random_order: prefix class " + std::to_string(p) +
                            " not in class list");
    }
    const auto idx = static_cast<std::size_t>(it - class_ids.begin());
    if (in_prefix_seen[idx]) {
      throw ValidationError("random_order: duplicate prefix class " +
                            std::to_string(p));
    }
    in_prefix_seen[idx] = true;
    order.sequence.push_back(p);
  }
  for (std::size_t i = 0; i < class_ids.size(); ++i) {
    if (!in_prefix_seen[i]) rest.push_back(class_ids[i]);
  }
  Rng rng(seed);
  rng.shuffle(rest);
  order.sequence.insert(order.sequence.end(), rest.begin(), rest.end());
  return order;
}

nlohmann::json order_to_json(const ClassOrder& order,
                             const std::vector<std::string>& class_names) {
  nlohmann::json j;
  j["strategy"] = strategy_name(order.strategy);
  if (order.source_metric) j["metric"] = *order.source_metric;
  if (order.seed) j["seed"] = *order.seed;
  nlohmann::json seq = nlohmann::json::array();
  for (int id : order.sequence) {
    if (id < 0 || id >= static_cast<int>(class_names.size())) {
      throw ValidationError("order_to_json: class id " + std::to_string(id) +
                            " out of range");
    }
    seq.push_back(class_names[static_cast<std::size_t>(id)]);
  }
  j["sequence"] = std::move(seq);
  return j;
}

ClassOrder order_from_json(const nlohmann::json& j,
                           const std::vector<std::string>& class_names) {
  ClassOrder order;
  if (!j.contains("strategy") || !j["strategy"].is_string()) {
    throw FormatError("class order json: missing string field 'strategy'");
  }
  auto strat = parse_strategy(j["strategy"].get<std::string>());
  if (!strat) {
    throw FormatError("class order json: unknown strategy '" +
                      j["strategy"].get<std::string>() + "'");
  }
  order.strategy = *strat;
  if (j.contains("metric")) order.source_metric = j["metric"].get<std::string>();
  if (j.contains("seed")) order.seed = j["seed"].get<std::uint64_t>();
  if (!j.contains("sequence") || !j["sequence"].is_array()) {
    throw FormatError("class order json: missing array field 'sequence'");
  }
  std::vector<bool> seen(class_names.size(), false);
  for (const auto& item : j["sequence"]) {
    if (!item.is_string()) {
      throw FormatError("class order json: sequence entries must be strings");
    }
    const std::string name = item.get<std::string>();
    auto it = std::find(class_names.begin(), class_names.end(), name);
    if (it == class_names.end()) {
      throw ValidationError("class order json: unknown class '" + name + "'");
    }
    const auto id = static_cast<std::size_t>(it - class_names.begin());
    if (seen[id]) {
      throw ValidationError("class order json: duplicate class '" + name + "'");
    }
    seen[id] = true;
    order.sequence.push_back(static_cast<int>(id));
  }
  if (order.sequence.size() != class_names.size()) {
    throw ValidationError("class order json: sequence omits some classes");
  }
  return order;
}

}  // namespace primer
