#include "qeii/question.hpp"

#include <algorithm>
#include <unordered_set>

namespace qeii {

DefectSubgraph sample_subgraph(const KnowledgeGraph& kg, std::size_t size,
                               RngStream& rng, const SamplingLimits& limits) {
  if (size < 2) throw std::invalid_argument("sample_subgraph: size must be >= 2");
  if (kg.entity_count() < size) {
    throw std::invalid_argument("sample_subgraph: graph smaller than requested size");
  }

  const std::size_t max_steps = limits.walk_step_factor * size;
  for (std::size_t attempt = 0; attempt < limits.subgraph_attempts; ++attempt) {
    EntityId current = static_cast<EntityId>(rng.below(kg.entity_count()));
    std::vector<EntityId> visit_order{current};
    std::unordered_set<EntityId> visited{current};

    for (std::size_t step = 0; step < max_steps && visited.size() < size; ++step) {
      const auto& edges = kg.neighbors(current);
      if (edges.empty()) break;  // isolated start, restart the walk
      const AdjacencyEdge& e = edges[rng.index(edges.size())];
      if (visited.insert(e.neighbor).second) visit_order.push_back(e.neighbor);
      current = e.neighbor;
    }
    if (visited.size() < size) continue;

    DefectSubgraph sg;
    sg.nodes = visit_order;
    std::unordered_map<EntityId, std::size_t> node_index;
    for (std::size_t i = 0; i < sg.nodes.size(); ++i) node_index.emplace(sg.nodes[i], i);

    // Induced edges: every triple with both endpoints collected, once each.
    for (std::size_t i = 0; i < sg.nodes.size(); ++i) {
      for (const AdjacencyEdge& e : kg.neighbors(sg.nodes[i])) {
        if (!e.outgoing) continue;
        auto it = node_index.find(e.neighbor);
        if (it == node_index.end()) continue;
        sg.edges.push_back({i, e.relation, it->second});
      }
    }

    sg.blank_index = rng.index(sg.nodes.size());
    sg.removed_entity = sg.nodes[sg.blank_index];
    sg.nodes[sg.blank_index] = kBlankEntity;
    return sg;
  }
  throw std::runtime_error("sample_subgraph: could not collect enough nodes");
}

bool is_accidentally_correct(const KnowledgeGraph& kg, const DefectSubgraph& sg,
                             EntityId candidate) {
  bool any = false;
  for (const SubgraphEdge& e : sg.edges) {
    if (!sg.edge_touches_blank(e)) continue;
    any = true;
    const EntityId s = e.from == sg.blank_index ? candidate : sg.nodes[e.from];
    const EntityId o = e.to == sg.blank_index ? candidate : sg.nodes[e.to];
    if (!kg.contains({s, e.relation, o})) return false;
  }
  return any;
}

namespace {

/// Uniform entity that is neither the ground truth, nor an existing
/// candidate, nor accidentally correct.
EntityId sample_wrong_candidate(const KnowledgeGraph& kg, const DefectSubgraph& sg,
                                const std::vector<EntityId>& taken, RngStream& rng,
                                const SamplingLimits& limits) {
  for (std::size_t attempt = 0; attempt < limits.candidate_attempts; ++attempt) {
    const EntityId e = static_cast<EntityId>(rng.below(kg.entity_count()));
    if (e == sg.removed_entity) continue;
    if (std::find(taken.begin(), taken.end(), e) != taken.end()) continue;
    if (is_accidentally_correct(kg, sg, e)) continue;
    return e;
  }
  throw std::runtime_error("make_question: no admissible wrong candidate found");
}

}  // namespace

Question make_question(const KnowledgeGraph& kg, DefectSubgraph sg,
                       std::size_t n_candidates, std::uint64_t qid, RngStream& rng,
                       const SamplingLimits& limits) {
  if (n_candidates == 0) {
    throw std::invalid_argument("make_question: need at least one candidate");
  }
  Question q;
  q.qid = qid;
  q.subgraph = std::move(sg);

  if (n_candidates == 1) {
    q.kind = QuestionKind::judgment;
    q.judgment_truth = rng.uniform01() < 0.5;
    if (q.judgment_truth) {
      q.candidates.push_back(q.subgraph.removed_entity);
    } else {
      q.candidates.push_back(sample_wrong_candidate(kg, q.subgraph, {}, rng, limits));
    }
    return q;
  }

  q.kind = QuestionKind::choice;
  q.candidates.push_back(q.subgraph.removed_entity);
  while (q.candidates.size() < n_candidates) {
    q.candidates.push_back(
        sample_wrong_candidate(kg, q.subgraph, q.candidates, rng, limits));
  }
  rng.shuffle(q.candidates);
  q.choice_truth_index = static_cast<std::size_t>(
      std::find(q.candidates.begin(), q.candidates.end(), q.subgraph.removed_entity) -
      q.candidates.begin());
  return q;
}

std::vector<EntityId> subgraph_entities(const DefectSubgraph& sg) {
  std::vector<EntityId> out;
  out.reserve(sg.nodes.size());
  for (std::size_t i = 0; i < sg.nodes.size(); ++i) {
    if (i == sg.blank_index) continue;
    out.push_back(sg.nodes[i]);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int candidate_relevance(const KnowledgeGraph& kg, const DefectSubgraph& sg,
                        EntityId entity) {
  const std::vector<EntityId> visible = subgraph_entities(sg);
  if (std::binary_search(visible.begin(), visible.end(), entity)) return 2;
  for (const AdjacencyEdge& e : kg.neighbors(entity)) {
    if (std::binary_search(visible.begin(), visible.end(), e.neighbor)) return 1;
  }
  return 0;
}

std::vector<std::size_t> wrong_candidate_indices(const Question& q) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < q.candidates.size(); ++i) {
    if (q.kind == QuestionKind::judgment) {
      if (!q.judgment_truth) out.push_back(i);
    } else if (i != q.choice_truth_index) {
      out.push_back(i);
    }
  }
  return out;
}

DifficultyVector difficulty_features(const KnowledgeGraph& kg, const Question& q) {
  DifficultyVector d;
  const DefectSubgraph& sg = q.subgraph;

  std::size_t incident = 0;
  for (const SubgraphEdge& e : sg.edges) {
    if (sg.edge_touches_blank(e)) ++incident;
  }
  d.answer_information =
      static_cast<double>(incident) / static_cast<double>(sg.edges.size());
  d.candidate_count = static_cast<double>(q.candidates.size());

  const std::vector<std::size_t> wrongs = wrong_candidate_indices(q);
  if (!wrongs.empty()) {
    double total = 0.0;
    for (std::size_t i : wrongs) total += candidate_relevance(kg, sg, q.candidates[i]);
    d.candidate_relevance = total / static_cast<double>(wrongs.size());
  }
  return d;
}

std::vector<Question> sample_question_set(const KnowledgeGraph& kg, std::size_t n,
                                          const std::vector<std::size_t>& candidate_pool,
                                          const std::vector<std::size_t>& size_pool,
                                          RngStream& rng, std::uint64_t first_qid,
                                          const SamplingLimits& limits) {
  if (candidate_pool.empty() || size_pool.empty()) {
    throw std::invalid_argument("sample_question_set: empty pool");
  }
  std::vector<Question> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t size = rng.pick(size_pool);
    const std::size_t n_candidates = rng.pick(candidate_pool);
    DefectSubgraph sg = sample_subgraph(kg, size, rng, limits);
    out.push_back(make_question(kg, std::move(sg), n_candidates, first_qid + i, rng, limits));
  }
  return out;
}

namespace {

bool subgraph_connected(const DefectSubgraph& sg) {
  if (sg.nodes.empty()) return false;
  std::vector<char> seen(sg.nodes.size(), 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (const SubgraphEdge& e : sg.edges) {
      std::size_t v;
      if (e.from == u) {
        v = e.to;
      } else if (e.to == u) {
        v = e.from;
      } else {
        continue;
      }
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        stack.push_back(v);
      }
    }
  }
  return reached == sg.nodes.size();
}

}  // namespace

bool validate_question(const KnowledgeGraph& kg, const Question& q) {
  const DefectSubgraph& sg = q.subgraph;
  if (sg.nodes.size() < 2 || sg.blank_index >= sg.nodes.size()) return false;
  if (sg.nodes[sg.blank_index] != kBlankEntity) return false;
  if (sg.removed_entity >= kg.entity_count()) return false;
  for (std::size_t i = 0; i < sg.nodes.size(); ++i) {
    if (i == sg.blank_index) continue;
    if (sg.nodes[i] == kBlankEntity || sg.nodes[i] >= kg.entity_count()) return false;
  }
  if (sg.edges.empty() || !subgraph_connected(sg)) return false;

  // Every edge must be a true triple once the blank is filled back in.
  for (const SubgraphEdge& e : sg.edges) {
    if (e.from >= sg.nodes.size() || e.to >= sg.nodes.size()) return false;
    const EntityId s = e.from == sg.blank_index ? sg.removed_entity : sg.nodes[e.from];
    const EntityId o = e.to == sg.blank_index ? sg.removed_entity : sg.nodes[e.to];
    if (!kg.contains({s, e.relation, o})) return false;
  }

  if (q.candidates.empty()) return false;
  if (q.kind == QuestionKind::judgment) {
    if (q.candidates.size() != 1) return false;
    if (q.judgment_truth != (q.candidates[0] == sg.removed_entity)) return false;
  } else {
    if (q.candidates.size() < 2) return false;
    if (q.choice_truth_index >= q.candidates.size()) return false;
    if (q.candidates[q.choice_truth_index] != sg.removed_entity) return false;
    std::size_t matches = 0;
    for (EntityId c : q.candidates) {
      if (c == sg.removed_entity) ++matches;
    }
    if (matches != 1) return false;
  }
  for (std::size_t i : wrong_candidate_indices(q)) {
    if (is_accidentally_correct(kg, sg, q.candidates[i])) return false;
  }
  return true;
}

}  // namespace qeii
