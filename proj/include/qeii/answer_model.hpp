#pragma once

#include <cstdint>
#include <vector>

#include "qeii/gcn.hpp"
#include "qeii/linalg.hpp"
#include "qeii/question.hpp"
#include "qeii/rng.hpp"
#include "qeii/transe.hpp"

namespace qeii {

struct AnswerModelConfig {
  std::size_t n_filters = 8;
  std::size_t kernel_width = 3;
  double leaky_slope = 0.01;
  double learning_rate = 0.01;
  std::size_t joint_epochs = 30;
  std::size_t adversarial_epochs = 5;
  std::size_t extra_negatives = 3;
};

// Scores one (question vector, candidate vector) pair. The two vectors stack
// into a 2 x dim grid; n_filters 1 x w kernels slide over each row separately
// (local features) and n_filters 2 x w kernels over both rows jointly (global
// features). Each LeakyReLU feature map mean-pools to a scalar; the 3*n_filters
// pooled values feed a sigmoid head.
struct AnswerModel {
  std::size_t n_filters = 0;
  std::size_t kernel_width = 0;
  double leaky_slope = 0.01;
  std::vector<Vec> local_kernels;   // n_filters x width
  Vec local_biases;                 // n_filters
  std::vector<Vec> global_kernels;  // n_filters x (2*width), row-major
  Vec global_biases;                // n_filters
  Vec head_weights;                 // 3*n_filters
  double head_bias = 0.0;

  static AnswerModel init(const AnswerModelConfig& cfg, RngStream& rng);
  static AnswerModel zeros(const AnswerModelConfig& cfg);

  friend bool operator==(const AnswerModel&, const AnswerModel&) = default;
};

struct AmTrace {
  std::vector<Vec> local_pre;   // 2*n_filters maps (kernel k row r at 2k+r)
  std::vector<Vec> global_pre;  // n_filters maps
  Vec pooled;                   // 3*n_filters
  double logit = 0.0;
  double prob = 0.5;
};

AmTrace score_forward(const AnswerModel& am, const Vec& question_vec, const Vec& candidate_vec);

/// Probability that the candidate answers the question; always in (0, 1).
inline double score_candidate(const AnswerModel& am, const Vec& question_vec,
                              const Vec& candidate_vec) {
  return score_forward(am, question_vec, candidate_vec).prob;
}

struct AmGradients {
  std::vector<Vec> local_kernels;
  Vec local_biases;
  std::vector<Vec> global_kernels;
  Vec global_biases;
  Vec head_weights;
  double head_bias = 0.0;

  void init_like(const AnswerModel& am);
};

/// Backpropagates d(loss)/d(logit). Pass prob*(1-prob) to get gradients of the
/// probability itself. d_question / d_candidate may be null when the caller
/// does not need input gradients.
void score_backward(const AnswerModel& am, const Vec& question_vec,
                    const Vec& candidate_vec, const AmTrace& trace, double d_logit,
                    AmGradients& grads, Vec* d_question, Vec* d_candidate);

void apply_gradients(AnswerModel& am, const AmGradients& grads, double lr);

/// Binary cross entropy with clamped probabilities.
double bce_loss(double prob, double label);

/// Wire form of a question: no surface strings, no subgraph structure.
struct EncodedQuestion {
  std::uint64_t qid = 0;
  QuestionKind kind = QuestionKind::judgment;
  Vec question_vec;
  std::vector<Vec> candidate_vecs;
};

struct Answer {
  std::uint64_t qid = 0;
  QuestionKind kind = QuestionKind::judgment;
  bool judgment = false;
  std::size_t choice = 0;
};

/// Judgment: accept iff prob > 0.5. Choice: argmax probability, lowest index
/// on exact ties.
Answer answer(const AnswerModel& am, const EncodedQuestion& q);

/// Inference-side bridge: encode a raw question through the given encoder and
/// translation tables.
EncodedQuestion encode_question(const TranslationEmbedding& tm,
                                const PartyVocabulary& vocab, const KnowledgeGraph& kg,
                                const GcnEncoder& em, const Question& q,
                                bool add_self_loops = false);

struct TrainHistory {
  std::vector<double> train_loss;    // mean pair BCE per epoch
  std::vector<double> val_accuracy;  // question-level accuracy per epoch
  double test_accuracy = 0.0;
  std::size_t best_epoch = 0;
};

/// Joint 80/10/10 training of encoder and scorer with per-candidate BCE.
/// Translation vectors stay frozen; the best-validation snapshot is restored
/// before measuring test accuracy.
TrainHistory train_joint(AnswerModel& am, GcnEncoder& em, const TranslationEmbedding& tm,
                         const PartyVocabulary& vocab, const KnowledgeGraph& kg,
                         const std::vector<Question>& questions,
                         const AnswerModelConfig& cfg, RngStream& rng,
                         bool add_self_loops = false);

/// One adversarial refinement pass: candidates of the answered set plus
/// extra_negatives fresh filtered wrong entities per question, scorer-only
/// updates (the encoder is frozen because it has been exchanged).
void train_adversarial_round(AnswerModel& am, const GcnEncoder& em,
                             const TranslationEmbedding& tm, const PartyVocabulary& vocab,
                             const KnowledgeGraph& kg, const std::vector<Question>& questions,
                             std::size_t extra_negatives, std::size_t epochs, double lr,
                             RngStream& rng, bool add_self_loops = false,
                             const SamplingLimits& limits = {});

}  // namespace qeii
