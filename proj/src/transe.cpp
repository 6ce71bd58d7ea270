#include "qeii/transe.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <unordered_map>

namespace qeii {

const Vec& TranslationEmbedding::entity_vector(Token token) const {
  auto it = entities.find(token);
  if (it == entities.end()) throw std::runtime_error("unknown entity token");
  return it->second;
}

const Vec& TranslationEmbedding::relation_vector(Token token) const {
  auto it = relations.find(token);
  if (it == relations.end()) throw std::runtime_error("unknown relation token");
  return it->second;
}

Triple corrupt_triple(const Triple& t, const KnowledgeGraph& kg, double p_head_tail,
                      RngStream& rng, std::size_t retry_limit) {
  if (kg.entity_count() < 2) {
    throw std::invalid_argument("corrupt_triple: need at least 2 entities");
  }
  const bool replace_head = p_head_tail > 0.5;
  for (std::size_t attempt = 0; attempt < retry_limit; ++attempt) {
    const EntityId candidate = static_cast<EntityId>(rng.below(kg.entity_count()));
    Triple corrupted = t;
    if (replace_head) {
      corrupted.subject = candidate;
    } else {
      corrupted.object = candidate;
    }
    if (!kg.contains(corrupted)) return corrupted;
  }
  throw std::runtime_error("corrupt_triple: retry limit exhausted (graph too dense)");
}

Triple negative_sample(const Triple& t, const KnowledgeGraph& kg, RngStream& rng,
                       std::size_t retry_limit) {
  const double p = rng.uniform01_open_closed();
  return corrupt_triple(t, kg, p, rng, retry_limit);
}

double hinge_pair_loss(double margin, const Vec& s, const Vec& p, const Vec& o,
                       const Vec& ns, const Vec& np, const Vec& no) {
  Vec pos(s.size()), neg(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    pos[i] = s[i] + p[i] - o[i];
    neg[i] = ns[i] + np[i] - no[i];
  }
  const double d_pos = dot(pos, pos);
  const double d_neg = dot(neg, neg);
  const double raw = margin + d_pos - d_neg;
  return raw > 0.0 ? raw : 0.0;
}

PairGradients pair_loss_gradients(double margin, const Vec& s, const Vec& p,
                                  const Vec& o, const Vec& ns, const Vec& np,
                                  const Vec& no) {
  const std::size_t dim = s.size();
  PairGradients g;
  g.subject.assign(dim, 0.0);
  g.predicate.assign(dim, 0.0);
  g.object.assign(dim, 0.0);
  g.neg_subject.assign(dim, 0.0);
  g.neg_predicate.assign(dim, 0.0);
  g.neg_object.assign(dim, 0.0);

  Vec pos(dim), neg(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    pos[i] = s[i] + p[i] - o[i];
    neg[i] = ns[i] + np[i] - no[i];
  }
  const double raw = margin + dot(pos, pos) - dot(neg, neg);
  if (raw <= 0.0) return g;

  g.loss = raw;
  for (std::size_t i = 0; i < dim; ++i) {
    const double dp = 2.0 * pos[i];
    const double dn = 2.0 * neg[i];
    g.subject[i] = dp;
    g.predicate[i] = dp;
    g.object[i] = -dp;
    g.neg_subject[i] = -dn;
    g.neg_predicate[i] = -dn;
    g.neg_object[i] = dn;
  }
  return g;
}

namespace {

Vec init_vector(std::size_t dim, RngStream& rng) {
  const double bound = 6.0 / std::sqrt(static_cast<double>(dim));
  Vec v(dim);
  for (double& x : v) x = rng.uniform(-bound, bound);
  return v;
}

void renormalize(Vec& v) {
  const double norm = std::sqrt(dot(v, v));
  if (norm > 0.0) {
    for (double& x : v) x /= norm;
  }
}

}  // namespace

void register_graph(TranslationEmbedding& tm, const KnowledgeGraph& kg,
                    PartyVocabulary& vocab, RngStream& rng) {
  if (tm.dim == 0) throw std::invalid_argument("register_graph: model dim is 0");
  for (std::size_t e = 0; e < kg.entity_count(); ++e) {
    const Token token = vocab.entity_token(kg.entity_name(static_cast<EntityId>(e)));
    if (!tm.entities.count(token)) tm.entities.emplace(token, init_vector(tm.dim, rng));
  }
  for (std::size_t r = 0; r < kg.relation_count(); ++r) {
    const Token token = vocab.relation_token(kg.relation_name(static_cast<RelationId>(r)));
    if (!tm.relations.count(token)) tm.relations.emplace(token, init_vector(tm.dim, rng));
  }
}

double transe_epoch(TranslationEmbedding& tm, const KnowledgeGraph& kg,
                    PartyVocabulary& vocab, const TransEConfig& cfg, double lr,
                    RngStream& rng) {
  register_graph(tm, kg, vocab, rng);

  std::vector<std::size_t> order(kg.triple_count());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  double total_loss = 0.0;
  for (std::size_t idx : order) {
    const Triple& pos = kg.triples()[idx];
    const Triple neg = negative_sample(pos, kg, rng, cfg.corrupt_retry_limit);

    const Token s_tok = vocab.entity_token(kg.entity_name(pos.subject));
    const Token p_tok = vocab.relation_token(kg.relation_name(pos.predicate));
    const Token o_tok = vocab.entity_token(kg.entity_name(pos.object));
    const Token ns_tok = vocab.entity_token(kg.entity_name(neg.subject));
    const Token no_tok = vocab.entity_token(kg.entity_name(neg.object));

    const PairGradients g = pair_loss_gradients(
        tm.margin, tm.entities.at(s_tok), tm.relations.at(p_tok), tm.entities.at(o_tok),
        tm.entities.at(ns_tok), tm.relations.at(p_tok), tm.entities.at(no_tok));
    if (!std::isfinite(g.loss)) {
      throw std::runtime_error("transe_epoch: non-finite loss (learning rate too high?)");
    }
    total_loss += g.loss;
    if (g.loss <= 0.0) continue;

    // Merge per-slot gradients by token: the predicate is always shared and
    // the uncorrupted entity slot coincides with its positive counterpart.
    std::unordered_map<Token, Vec> entity_grads;
    auto add = [&](Token token, const Vec& grad) {
      auto it = entity_grads.try_emplace(token, Vec(tm.dim, 0.0)).first;
      axpy(1.0, grad, it->second);
    };
    add(s_tok, g.subject);
    add(o_tok, g.object);
    add(ns_tok, g.neg_subject);
    add(no_tok, g.neg_object);

    Vec p_grad = g.predicate;
    axpy(1.0, g.neg_predicate, p_grad);

    for (auto& [token, grad] : entity_grads) {
      Vec& v = tm.entities.at(token);
      axpy(-lr, grad, v);
      if (cfg.normalize_entities) renormalize(v);
    }
    axpy(-lr, p_grad, tm.relations.at(p_tok));
  }
  return total_loss / static_cast<double>(kg.triple_count());
}

void incremental_train(TranslationEmbedding& tm, std::vector<TrainingParty> parties,
                       const TransEConfig& cfg, RngStream& rng,
                       const std::function<void(const TranslationEmbedding&)>& on_handoff) {
  if (cfg.alternations < 1) {
    throw std::invalid_argument("incremental_train: alternations must be >= 1");
  }
  for (const TrainingParty& party : parties) {
    if (party.kg == nullptr || party.vocab == nullptr) {
      throw std::invalid_argument("incremental_train: null party");
    }
  }
  for (std::size_t round = 0; round < cfg.alternations; ++round) {
    for (TrainingParty& party : parties) {
      for (std::size_t epoch = 0; epoch < cfg.epochs_per_segment; ++epoch) {
        transe_epoch(tm, *party.kg, *party.vocab, cfg, cfg.learning_rate, rng);
      }
      if (on_handoff) on_handoff(tm);
    }
  }
}

const Vec& embed_entity(const TranslationEmbedding& tm, const PartyVocabulary& vocab,
                        const std::string& name) {
  const auto token = vocab.find_entity_token(name);
  if (!token) throw std::runtime_error("embed_entity: unknown entity name: " + name);
  return tm.entity_vector(*token);
}

}  // namespace qeii
