#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "qeii/kg.hpp"
#include "qeii/rng.hpp"

namespace qeii {

/// Sentinel stored at the blanked node slot.
inline constexpr EntityId kBlankEntity = std::numeric_limits<EntityId>::max();

struct SubgraphEdge {
  std::size_t from = 0;
  RelationId relation = 0;
  std::size_t to = 0;

  friend auto operator<=>(const SubgraphEdge&, const SubgraphEdge&) = default;
};

// A connected subgraph with one node's identity erased. `nodes[blank_index]`
// holds kBlankEntity; the erased identity lives only in `removed_entity`,
// which is the question owner's private ground truth.
struct DefectSubgraph {
  std::vector<EntityId> nodes;
  std::vector<SubgraphEdge> edges;
  std::size_t blank_index = 0;
  EntityId removed_entity = 0;

  bool edge_touches_blank(const SubgraphEdge& e) const {
    return e.from == blank_index || e.to == blank_index;
  }
};

enum class QuestionKind { judgment, choice };

struct Question {
  std::uint64_t qid = 0;
  DefectSubgraph subgraph;
  std::vector<EntityId> candidates;
  QuestionKind kind = QuestionKind::judgment;
  bool judgment_truth = false;         // kind == judgment
  std::size_t choice_truth_index = 0;  // kind == choice
};

/// (mu1, mu2, mu3): blank-incident edge fraction, candidate count, mean
/// wrong-candidate relevance on the 0/1/2 scale.
struct DifficultyVector {
  double answer_information = 0.0;
  double candidate_count = 0.0;
  double candidate_relevance = 0.0;
};

struct SamplingLimits {
  std::size_t walk_step_factor = 50;   // max walk steps = factor * size
  std::size_t subgraph_attempts = 64;  // fresh starts before giving up
  std::size_t candidate_attempts = 200;
};

/// Random walk (direction-blind) from a random start until `size` distinct
/// nodes are collected; induced edges kept; a uniformly random node blanked.
DefectSubgraph sample_subgraph(const KnowledgeGraph& kg, std::size_t size,
                               RngStream& rng, const SamplingLimits& limits = {});

/// True iff substituting the candidate for the blank makes every blank-incident
/// edge a true triple of kg. Guards against 1-N relations making "wrong"
/// candidates correct.
bool is_accidentally_correct(const KnowledgeGraph& kg, const DefectSubgraph& sg,
                             EntityId candidate);

/// Choice (n>=2): ground truth plus n-1 distinct filtered wrong entities,
/// shuffled. Judgment (n==1): fair coin between the true entity and a filtered
/// wrong one.
Question make_question(const KnowledgeGraph& kg, DefectSubgraph sg,
                       std::size_t n_candidates, std::uint64_t qid, RngStream& rng,
                       const SamplingLimits& limits = {});

/// 0 = unrelated, 1 = one-hop neighbor of a visible subgraph node, 2 = visible
/// subgraph node.
int candidate_relevance(const KnowledgeGraph& kg, const DefectSubgraph& sg,
                        EntityId entity);

DifficultyVector difficulty_features(const KnowledgeGraph& kg, const Question& q);

/// Sorted unique visible (non-blank) node entities; these double as the
/// question's knowledge points.
std::vector<EntityId> subgraph_entities(const DefectSubgraph& sg);

/// Indices of q.candidates that are wrong answers.
std::vector<std::size_t> wrong_candidate_indices(const Question& q);

std::vector<Question> sample_question_set(const KnowledgeGraph& kg, std::size_t n,
                                          const std::vector<std::size_t>& candidate_pool,
                                          const std::vector<std::size_t>& size_pool,
                                          RngStream& rng, std::uint64_t first_qid = 0,
                                          const SamplingLimits& limits = {});

/// Invariant check used by tests and the tuners: one blank, valid indices,
/// connectivity, every edge true under the ground truth, candidate bookkeeping.
bool validate_question(const KnowledgeGraph& kg, const Question& q);

}  // namespace qeii
