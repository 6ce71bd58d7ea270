#pragma once

#include <functional>
#include <map>

#include "qeii/kg.hpp"
#include "qeii/linalg.hpp"
#include "qeii/rng.hpp"
#include "qeii/vocab.hpp"

namespace qeii {

struct TransEConfig {
  std::size_t dim = 64;
  double margin = 1.0;
  double learning_rate = 0.01;
  std::size_t alternations = 5;
  std::size_t epochs_per_segment = 20;
  std::size_t corrupt_retry_limit = 100;
  // Optional L2 renormalisation of entity vectors after each update. Off by
  // default: the plain hinge objective has no norm constraint.
  bool normalize_entities = false;
};

/// Shared translation model. Tables are keyed by opaque tokens only, so the
/// serialized form carries no surface names. Training is single-writer; the
/// incremental handoff serialises segments.
struct TranslationEmbedding {
  std::size_t dim = 0;
  double margin = 1.0;
  std::map<Token, Vec> entities;
  std::map<Token, Vec> relations;

  const Vec& entity_vector(Token token) const;
  const Vec& relation_vector(Token token) const;

  friend bool operator==(const TranslationEmbedding&, const TranslationEmbedding&) = default;
};

/// Head-or-tail corruption with the replacement side fixed by p_head_tail
/// (> 0.5 replaces the head). Resamples until the corrupted triple is absent
/// from the graph; throws after retry_limit failures.
Triple corrupt_triple(const Triple& t, const KnowledgeGraph& kg, double p_head_tail,
                      RngStream& rng, std::size_t retry_limit = 100);

/// Draws the side uniformly on (0,1] and corrupts accordingly.
Triple negative_sample(const Triple& t, const KnowledgeGraph& kg, RngStream& rng,
                       std::size_t retry_limit = 100);

/// Hinge pair loss: [margin + d(s+p, o) - d(s'+p', o')]+ with squared
/// Euclidean d.
double hinge_pair_loss(double margin, const Vec& s, const Vec& p, const Vec& o,
                       const Vec& ns, const Vec& np, const Vec& no);

struct PairGradients {
  double loss = 0.0;
  Vec subject, predicate, object;
  Vec neg_subject, neg_predicate, neg_object;
};

/// Loss plus per-slot gradients. Zero-loss pairs return zero gradients.
PairGradients pair_loss_gradients(double margin, const Vec& s, const Vec& p,
                                  const Vec& o, const Vec& ns, const Vec& np,
                                  const Vec& no);

/// Initialises vectors for any entity/relation of kg missing from the tables;
/// coordinates are uniform on [-6/sqrt(dim), 6/sqrt(dim)].
void register_graph(TranslationEmbedding& tm, const KnowledgeGraph& kg,
                    PartyVocabulary& vocab, RngStream& rng);

/// One SGD pass over the shuffled triples (one negative per positive).
/// Returns the mean pair loss. Throws on non-finite loss.
double transe_epoch(TranslationEmbedding& tm, const KnowledgeGraph& kg,
                    PartyVocabulary& vocab, const TransEConfig& cfg, double lr,
                    RngStream& rng);

struct TrainingParty {
  const KnowledgeGraph* kg = nullptr;
  PartyVocabulary* vocab = nullptr;
};

/// Alternating segments: each party trains epochs_per_segment epochs on its
/// own triples, then hands the model over. The TM is the only state crossing
/// the boundary. Optional per-segment observer (used for handoff
/// serialization by the orchestrator).
void incremental_train(TranslationEmbedding& tm, std::vector<TrainingParty> parties,
                       const TransEConfig& cfg, RngStream& rng,
                       const std::function<void(const TranslationEmbedding&)>& on_handoff = {});

/// Table lookup by registered name; throws on unknown names.
const Vec& embed_entity(const TranslationEmbedding& tm, const PartyVocabulary& vocab,
                        const std::string& name);

}  // namespace qeii
