#include "qeii/answer_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qeii {

AnswerModel AnswerModel::init(const AnswerModelConfig& cfg, RngStream& rng) {
  AnswerModel am = zeros(cfg);
  const double lb = 1.0 / std::sqrt(static_cast<double>(cfg.kernel_width));
  for (Vec& k : am.local_kernels) {
    for (double& x : k) x = rng.uniform(-lb, lb);
  }
  const double gb = 1.0 / std::sqrt(static_cast<double>(2 * cfg.kernel_width));
  for (Vec& k : am.global_kernels) {
    for (double& x : k) x = rng.uniform(-gb, gb);
  }
  const double hb = 1.0 / std::sqrt(static_cast<double>(3 * cfg.n_filters));
  for (double& x : am.head_weights) x = rng.uniform(-hb, hb);
  return am;
}

AnswerModel AnswerModel::zeros(const AnswerModelConfig& cfg) {
  AnswerModel am;
  am.n_filters = cfg.n_filters;
  am.kernel_width = cfg.kernel_width;
  am.leaky_slope = cfg.leaky_slope;
  am.local_kernels.assign(cfg.n_filters, Vec(cfg.kernel_width, 0.0));
  am.local_biases.assign(cfg.n_filters, 0.0);
  am.global_kernels.assign(cfg.n_filters, Vec(2 * cfg.kernel_width, 0.0));
  am.global_biases.assign(cfg.n_filters, 0.0);
  am.head_weights.assign(3 * cfg.n_filters, 0.0);
  am.head_bias = 0.0;
  return am;
}

namespace {

double leaky(double x, double slope) { return x > 0.0 ? x : slope * x; }
double leaky_grad(double x, double slope) { return x > 0.0 ? 1.0 : slope; }

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

AmTrace score_forward(const AnswerModel& am, const Vec& question_vec,
                      const Vec& candidate_vec) {
  const std::size_t dim = question_vec.size();
  if (candidate_vec.size() != dim) {
    throw std::invalid_argument("score_forward: vector dims differ");
  }
  if (dim < am.kernel_width) {
    throw std::invalid_argument("score_forward: vectors shorter than kernel width");
  }
  const std::size_t w = am.kernel_width;
  const std::size_t map_len = dim - w + 1;
  const Vec* rows[2] = {&question_vec, &candidate_vec};

  AmTrace t;
  t.local_pre.assign(2 * am.n_filters, Vec(map_len, 0.0));
  t.global_pre.assign(am.n_filters, Vec(map_len, 0.0));
  t.pooled.assign(3 * am.n_filters, 0.0);

  for (std::size_t k = 0; k < am.n_filters; ++k) {
    for (std::size_t r = 0; r < 2; ++r) {
      Vec& pre = t.local_pre[2 * k + r];
      double pooled = 0.0;
      for (std::size_t p = 0; p < map_len; ++p) {
        double acc = am.local_biases[k];
        for (std::size_t j = 0; j < w; ++j) acc += (*rows[r])[p + j] * am.local_kernels[k][j];
        pre[p] = acc;
        pooled += leaky(acc, am.leaky_slope);
      }
      t.pooled[2 * k + r] = pooled / static_cast<double>(map_len);
    }
  }
  for (std::size_t k = 0; k < am.n_filters; ++k) {
    Vec& pre = t.global_pre[k];
    double pooled = 0.0;
    for (std::size_t p = 0; p < map_len; ++p) {
      double acc = am.global_biases[k];
      for (std::size_t r = 0; r < 2; ++r) {
        for (std::size_t j = 0; j < w; ++j) {
          acc += (*rows[r])[p + j] * am.global_kernels[k][r * w + j];
        }
      }
      pre[p] = acc;
      pooled += leaky(acc, am.leaky_slope);
    }
    t.pooled[2 * am.n_filters + k] = pooled / static_cast<double>(map_len);
  }

  t.logit = am.head_bias + dot(am.head_weights, t.pooled);
  t.prob = sigmoid(t.logit);
  return t;
}

void AmGradients::init_like(const AnswerModel& am) {
  local_kernels.assign(am.n_filters, Vec(am.kernel_width, 0.0));
  local_biases.assign(am.n_filters, 0.0);
  global_kernels.assign(am.n_filters, Vec(2 * am.kernel_width, 0.0));
  global_biases.assign(am.n_filters, 0.0);
  head_weights.assign(3 * am.n_filters, 0.0);
  head_bias = 0.0;
}

void score_backward(const AnswerModel& am, const Vec& question_vec,
                    const Vec& candidate_vec, const AmTrace& trace, double d_logit,
                    AmGradients& grads, Vec* d_question, Vec* d_candidate) {
  if (grads.head_weights.empty()) grads.init_like(am);
  const std::size_t dim = question_vec.size();
  const std::size_t w = am.kernel_width;
  const std::size_t map_len = dim - w + 1;
  const double inv_len = 1.0 / static_cast<double>(map_len);
  const Vec* rows[2] = {&question_vec, &candidate_vec};
  Vec* d_rows[2] = {d_question, d_candidate};

  grads.head_bias += d_logit;
  for (std::size_t i = 0; i < trace.pooled.size(); ++i) {
    grads.head_weights[i] += d_logit * trace.pooled[i];
  }

  for (std::size_t k = 0; k < am.n_filters; ++k) {
    for (std::size_t r = 0; r < 2; ++r) {
      const double d_pool = d_logit * am.head_weights[2 * k + r] * inv_len;
      const Vec& pre = trace.local_pre[2 * k + r];
      for (std::size_t p = 0; p < map_len; ++p) {
        const double d_pre = d_pool * leaky_grad(pre[p], am.leaky_slope);
        grads.local_biases[k] += d_pre;
        for (std::size_t j = 0; j < w; ++j) {
          grads.local_kernels[k][j] += d_pre * (*rows[r])[p + j];
          if (d_rows[r]) (*d_rows[r])[p + j] += d_pre * am.local_kernels[k][j];
        }
      }
    }
  }
  for (std::size_t k = 0; k < am.n_filters; ++k) {
    const double d_pool = d_logit * am.head_weights[2 * am.n_filters + k] * inv_len;
    const Vec& pre = trace.global_pre[k];
    for (std::size_t p = 0; p < map_len; ++p) {
      const double d_pre = d_pool * leaky_grad(pre[p], am.leaky_slope);
      grads.global_biases[k] += d_pre;
      for (std::size_t r = 0; r < 2; ++r) {
        for (std::size_t j = 0; j < w; ++j) {
          grads.global_kernels[k][r * w + j] += d_pre * (*rows[r])[p + j];
          if (d_rows[r]) (*d_rows[r])[p + j] += d_pre * am.global_kernels[k][r * w + j];
        }
      }
    }
  }
}

void apply_gradients(AnswerModel& am, const AmGradients& grads, double lr) {
  for (std::size_t k = 0; k < am.n_filters; ++k) {
    for (std::size_t j = 0; j < am.kernel_width; ++j) {
      am.local_kernels[k][j] -= lr * grads.local_kernels[k][j];
    }
    am.local_biases[k] -= lr * grads.local_biases[k];
    for (std::size_t j = 0; j < 2 * am.kernel_width; ++j) {
      am.global_kernels[k][j] -= lr * grads.global_kernels[k][j];
    }
    am.global_biases[k] -= lr * grads.global_biases[k];
  }
  for (std::size_t i = 0; i < am.head_weights.size(); ++i) {
    am.head_weights[i] -= lr * grads.head_weights[i];
  }
  am.head_bias -= lr * grads.head_bias;
}

double bce_loss(double prob, double label) {
  constexpr double kEps = 1e-12;
  const double p = std::clamp(prob, kEps, 1.0 - kEps);
  return -(label * std::log(p) + (1.0 - label) * std::log(1.0 - p));
}

Answer answer(const AnswerModel& am, const EncodedQuestion& q) {
  Answer a;
  a.qid = q.qid;
  a.kind = q.kind;
  if (q.candidate_vecs.empty()) {
    throw std::invalid_argument("answer: question has no candidates");
  }
  if (q.kind == QuestionKind::judgment) {
    if (q.candidate_vecs.size() != 1) {
      throw std::invalid_argument("answer: judgment question needs exactly 1 candidate");
    }
    a.judgment = score_candidate(am, q.question_vec, q.candidate_vecs[0]) > 0.5;
    return a;
  }
  std::size_t best = 0;
  double best_prob = score_candidate(am, q.question_vec, q.candidate_vecs[0]);
  for (std::size_t i = 1; i < q.candidate_vecs.size(); ++i) {
    const double p = score_candidate(am, q.question_vec, q.candidate_vecs[i]);
    if (p > best_prob) {
      best = i;
      best_prob = p;
    }
  }
  a.choice = best;
  return a;
}

EncodedQuestion encode_question(const TranslationEmbedding& tm,
                                const PartyVocabulary& vocab, const KnowledgeGraph& kg,
                                const GcnEncoder& em, const Question& q,
                                bool add_self_loops) {
  EncodedQuestion out;
  out.qid = q.qid;
  out.kind = q.kind;
  out.question_vec = encode(em, build_matrices(tm, vocab, kg, q.subgraph, add_self_loops));
  out.candidate_vecs.reserve(q.candidates.size());
  for (EntityId c : q.candidates) {
    out.candidate_vecs.push_back(embed_entity(tm, vocab, kg.entity_name(c)));
  }
  return out;
}

namespace {

struct PreparedQuestion {
  SubgraphMatrices matrices;
  std::vector<Vec> candidate_vecs;
  Vec labels;
  QuestionKind kind = QuestionKind::judgment;
  bool judgment_truth = false;
  std::size_t choice_truth_index = 0;
};

PreparedQuestion prepare_question(const TranslationEmbedding& tm,
                                  const PartyVocabulary& vocab, const KnowledgeGraph& kg,
                                  const Question& q, bool add_self_loops) {
  PreparedQuestion p;
  p.matrices = build_matrices(tm, vocab, kg, q.subgraph, add_self_loops);
  p.kind = q.kind;
  p.judgment_truth = q.judgment_truth;
  p.choice_truth_index = q.choice_truth_index;
  for (std::size_t i = 0; i < q.candidates.size(); ++i) {
    p.candidate_vecs.push_back(embed_entity(tm, vocab, kg.entity_name(q.candidates[i])));
    double label;
    if (q.kind == QuestionKind::judgment) {
      label = q.judgment_truth ? 1.0 : 0.0;
    } else {
      label = i == q.choice_truth_index ? 1.0 : 0.0;
    }
    p.labels.push_back(label);
  }
  return p;
}

bool question_answered_correctly(const AnswerModel& am, const GcnEncoder& em,
                                 const PreparedQuestion& p) {
  const Vec fsg = encode(em, p.matrices);
  if (p.kind == QuestionKind::judgment) {
    const bool said_true = score_candidate(am, fsg, p.candidate_vecs[0]) > 0.5;
    return said_true == p.judgment_truth;
  }
  std::size_t best = 0;
  double best_prob = score_candidate(am, fsg, p.candidate_vecs[0]);
  for (std::size_t i = 1; i < p.candidate_vecs.size(); ++i) {
    const double prob = score_candidate(am, fsg, p.candidate_vecs[i]);
    if (prob > best_prob) {
      best = i;
      best_prob = prob;
    }
  }
  return best == p.choice_truth_index;
}

}  // namespace

TrainHistory train_joint(AnswerModel& am, GcnEncoder& em, const TranslationEmbedding& tm,
                         const PartyVocabulary& vocab, const KnowledgeGraph& kg,
                         const std::vector<Question>& questions,
                         const AnswerModelConfig& cfg, RngStream& rng,
                         bool add_self_loops) {
  if (questions.empty()) throw std::invalid_argument("train_joint: no questions");

  std::vector<PreparedQuestion> prepared;
  prepared.reserve(questions.size());
  for (const Question& q : questions) {
    prepared.push_back(prepare_question(tm, vocab, kg, q, add_self_loops));
  }

  std::vector<std::size_t> order(prepared.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  const std::size_t n = order.size();
  const std::size_t n_train = n * 8 / 10;
  const std::size_t n_val = n / 10;
  std::vector<std::size_t> train_set(order.begin(), order.begin() + n_train);
  std::vector<std::size_t> val_set(order.begin() + n_train, order.begin() + n_train + n_val);
  std::vector<std::size_t> test_set(order.begin() + n_train + n_val, order.end());

  auto accuracy_on = [&](const std::vector<std::size_t>& set) {
    if (set.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i : set) {
      if (question_answered_correctly(am, em, prepared[i])) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(set.size());
  };

  TrainHistory history;
  AnswerModel best_am = am;
  GcnEncoder best_em = em;
  double best_val = -1.0;

  for (std::size_t epoch = 0; epoch < cfg.joint_epochs; ++epoch) {
    rng.shuffle(train_set);
    double epoch_loss = 0.0;
    std::size_t pair_count = 0;

    for (std::size_t qi : train_set) {
      const PreparedQuestion& p = prepared[qi];
      const GcnTrace trace = encode_forward(em, p.matrices);

      AmGradients am_grads;
      am_grads.init_like(am);
      Vec d_fsg(trace.output.size(), 0.0);
      for (std::size_t c = 0; c < p.candidate_vecs.size(); ++c) {
        const AmTrace t = score_forward(am, trace.output, p.candidate_vecs[c]);
        const double loss = bce_loss(t.prob, p.labels[c]);
        if (!std::isfinite(loss)) throw std::runtime_error("train_joint: non-finite loss");
        epoch_loss += loss;
        ++pair_count;
        score_backward(am, trace.output, p.candidate_vecs[c], t, t.prob - p.labels[c],
                       am_grads, &d_fsg, nullptr);
      }
      GcnGradients em_grads;
      em_grads.init_like(em);
      encode_backward(em, trace, d_fsg, em_grads);

      apply_gradients(am, am_grads, cfg.learning_rate);
      apply_gradients(em, em_grads, cfg.learning_rate);
    }

    history.train_loss.push_back(pair_count ? epoch_loss / pair_count : 0.0);
    const double val_acc = accuracy_on(val_set);
    history.val_accuracy.push_back(val_acc);
    if (val_acc > best_val) {
      best_val = val_acc;
      best_am = am;
      best_em = em;
      history.best_epoch = epoch;
    }
  }

  am = best_am;
  em = best_em;
  history.test_accuracy = accuracy_on(test_set);
  return history;
}

void train_adversarial_round(AnswerModel& am, const GcnEncoder& em,
                             const TranslationEmbedding& tm, const PartyVocabulary& vocab,
                             const KnowledgeGraph& kg, const std::vector<Question>& questions,
                             std::size_t extra_negatives, std::size_t epochs, double lr,
                             RngStream& rng, bool add_self_loops,
                             const SamplingLimits& limits) {
  struct Pair {
    std::size_t question = 0;
    Vec candidate;
    double label = 0.0;
  };

  std::vector<Vec> question_vecs;
  std::vector<Pair> pairs;
  question_vecs.reserve(questions.size());

  for (std::size_t qi = 0; qi < questions.size(); ++qi) {
    const Question& q = questions[qi];
    question_vecs.push_back(
        encode(em, build_matrices(tm, vocab, kg, q.subgraph, add_self_loops)));
    std::vector<EntityId> taken = q.candidates;
    for (std::size_t c = 0; c < q.candidates.size(); ++c) {
      double label;
      if (q.kind == QuestionKind::judgment) {
        label = q.judgment_truth ? 1.0 : 0.0;
      } else {
        label = c == q.choice_truth_index ? 1.0 : 0.0;
      }
      pairs.push_back({qi, embed_entity(tm, vocab, kg.entity_name(q.candidates[c])), label});
    }
    // Extra negatives go through the same filter as question candidates so
    // they are genuinely wrong answers.
    for (std::size_t extra = 0; extra < extra_negatives; ++extra) {
      EntityId cand = kBlankEntity;
      for (std::size_t attempt = 0; attempt < limits.candidate_attempts; ++attempt) {
        const EntityId e = static_cast<EntityId>(rng.below(kg.entity_count()));
        if (e == q.subgraph.removed_entity) continue;
        if (std::find(taken.begin(), taken.end(), e) != taken.end()) continue;
        if (is_accidentally_correct(kg, q.subgraph, e)) continue;
        cand = e;
        break;
      }
      if (cand == kBlankEntity) break;  // pool exhausted; train with what we have
      taken.push_back(cand);
      pairs.push_back({qi, embed_entity(tm, vocab, kg.entity_name(cand)), 0.0});
    }
  }

  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t idx : order) {
      const Pair& pair = pairs[idx];
      const Vec& fsg = question_vecs[pair.question];
      const AmTrace t = score_forward(am, fsg, pair.candidate);
      const double loss = bce_loss(t.prob, pair.label);
      if (!std::isfinite(loss)) {
        throw std::runtime_error("train_adversarial_round: non-finite loss");
      }
      AmGradients grads;
      grads.init_like(am);
      score_backward(am, fsg, pair.candidate, t, t.prob - pair.label, grads, nullptr,
                     nullptr);
      apply_gradients(am, grads, lr);
    }
  }
}

}  // namespace qeii
