#pragma once

#include <array>
#include <map>
#include <set>
#include <unordered_map>

#include "qeii/kg.hpp"
#include "qeii/question.hpp"
#include "qeii/rng.hpp"

namespace qeii {

struct EtaRange {
  double lo = 0.5;
  double hi = 0.52;

  bool contains(double x) const { return x >= lo && x <= hi; }
  double midpoint() const { return (lo + hi) / 2.0; }
};

enum class TunerKind { rule, bayes, retrieval };

/// One round's answered questions, partitioned by correctness.
struct RoundOutcome {
  std::vector<Question> correct;
  std::vector<Question> wrong;

  std::size_t size() const { return correct.size() + wrong.size(); }
};

double accuracy(const RoundOutcome& outcome);

struct RuleResult {
  Question question;
  bool changed = false;
};

/// Hardening rules, first applicable in order:
///   swap the least relevant wrong candidate for a more relevant one;
///   add a wrong candidate at least as relevant as the current mean (capped);
///   drop one blank-incident, non-bridging subgraph edge.
/// Ground truth and blank position never change.
RuleResult rule_harden(const KnowledgeGraph& kg, const Question& q,
                       std::size_t max_candidates, RngStream& rng,
                       const SamplingLimits& limits = {});

/// Easing rules, first applicable in order:
///   attach one more true edge at the blank; drop a wrong candidate (floor 1);
///   swap a relevant wrong candidate for a uniform entity.
RuleResult rule_ease(const KnowledgeGraph& kg, const Question& q, RngStream& rng,
                     const SamplingLimits& limits = {});

/// Above the band: harden what was answered correctly. Below: ease what was
/// missed. Inside: unchanged. Output always has |Q_t| questions.
std::vector<Question> rule_tune(const KnowledgeGraph& kg, const RoundOutcome& outcome,
                                const EtaRange& eta, std::size_t max_candidates,
                                RngStream& rng, const SamplingLimits& limits = {});

struct GaussianParams {
  double mean = 0.0;
  double stdev = 1.0;  // maximum-likelihood (divide by n), floored at kStdevFloor
};

inline constexpr double kStdevFloor = 1e-9;

double gaussian_pdf(double x, const GaussianParams& g);

/// Class-conditional Naive Bayes over the three difficulty features:
/// candidate count is categorical with add-one smoothing over the observed
/// domain, the two continuous features are Gaussian (MLE).
struct NaiveBayesModel {
  double prior_correct = 0.5;
  double prior_wrong = 0.5;
  std::map<int, std::size_t> count_correct;  // candidate-count histogram
  std::map<int, std::size_t> count_wrong;
  std::size_t n_correct = 0;
  std::size_t n_wrong = 0;
  std::set<int> count_domain;
  GaussianParams info_correct, info_wrong;            // mu1
  GaussianParams relevance_correct, relevance_wrong;  // mu3

  double conditional_count(int value, bool correct_class) const;
};

enum class RoundLabel { correct, wrong };

NaiveBayesModel bayes_fit(const std::vector<DifficultyVector>& correct_feats,
                          const std::vector<DifficultyVector>& wrong_feats);

/// (score for correct, score for wrong) = prior times the three conditionals.
std::pair<double, double> bayes_scores(const NaiveBayesModel& model,
                                       const DifficultyVector& feat);

/// Ties resolve to wrong, which keeps a question available as "hard".
RoundLabel bayes_predict(const NaiveBayesModel& model, const DifficultyVector& feat);

/// Question base shared by the Bayes and retrieval tuners, plus the per-round
/// outcomes accumulated so far. Feature and knowledge-point caches are built
/// once; qids index into `base`.
class TunerHistory {
 public:
  TunerHistory() = default;
  static TunerHistory build(const KnowledgeGraph& kg, std::vector<Question> base);

  const std::vector<Question>& base() const { return base_; }
  const DifficultyVector& features(std::uint64_t qid) const;
  const std::vector<EntityId>& points(std::uint64_t qid) const;
  std::size_t base_contain_count(EntityId point) const;

  void record_round(RoundOutcome outcome);
  const std::vector<RoundOutcome>& rounds() const { return rounds_; }

  /// Difficulty vectors of all pooled signed questions, multiplicity included.
  std::vector<DifficultyVector> pooled_features(RoundLabel sign) const;
  /// Distinct qids that ever landed in the signed partition.
  std::vector<std::uint64_t> distinct_signed_qids(RoundLabel sign) const;
  std::size_t pooled_count(RoundLabel sign) const;

 private:
  std::vector<Question> base_;
  std::vector<DifficultyVector> features_;
  std::vector<std::vector<EntityId>> points_;
  std::unordered_map<EntityId, std::size_t> contain_counts_;
  std::vector<RoundOutcome> rounds_;
};

/// Per-feature Gaussian fit of the pooled signed difficulty vectors; the mean
/// vector doubles as the difficulty query.
struct GaussianQuery {
  std::array<GaussianParams, 3> feature;

  Vec mean_vector() const {
    return {feature[0].mean, feature[1].mean, feature[2].mean};
  }
};

GaussianQuery fit_gaussian_query(const TunerHistory& history, RoundLabel sign);

/// Knowledge points whose pooled frequency is strictly higher on this sign
/// than on the other; sorted.
std::vector<EntityId> knowledge_point_query(const TunerHistory& history, RoundLabel sign);

/// Contingency counts behind the probabilistic ranking: N = |base|, R =
/// distinct signed questions, n_i / r_i = containment counts over those sets.
struct PointStats {
  std::size_t total = 0;     // N
  std::size_t relevant = 0;  // R
  std::unordered_map<EntityId, std::size_t> contain;           // n_i
  std::unordered_map<EntityId, std::size_t> relevant_contain;  // r_i
};

PointStats compute_point_stats(const TunerHistory& history, RoundLabel sign);

/// Cosine similarity between the query mean vector and a difficulty vector;
/// defined as 0 when either vector is zero.
double sim_l(const Vec& query, const DifficultyVector& feat);

/// Closed-form score (R/N)^(1-k) * prod r_i(R-r_i) / (n_i(N-n_i)) over the
/// query-active points present in the question (k of them). Degenerate counts
/// (r in {0,R} or n in {0,N}) get add-half smoothing, keeping every term
/// positive.
double sim_v(const std::vector<EntityId>& active_points,
             const std::vector<EntityId>& question_points, const PointStats& stats);

/// Selects round(n*eta_mid) questions predicted answerable and the remainder
/// predicted hard, uniformly within class, from the base minus the current
/// round; shortfalls fill from the other class by smallest score margin.
std::vector<Question> bayes_tune(const TunerHistory& history, const NaiveBayesModel& model,
                                 const std::set<std::uint64_t>& current_qids,
                                 const EtaRange& eta, std::size_t n, RngStream& rng);

/// Ranks the whole base by gamma * sim_l + (1-gamma) * normalized sim_v for
/// the positive and negative queries; takes the eta-split top slices with
/// next-ranked fill on overlap. Deterministic: ties break on qid.
std::vector<Question> retrieval_tune(const TunerHistory& history, const EtaRange& eta,
                                     double gamma, std::size_t n);

}  // namespace qeii
