#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "qeii/rng.hpp"

namespace qeii {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

struct Triple {
  EntityId subject = 0;
  RelationId predicate = 0;
  EntityId object = 0;

  friend auto operator<=>(const Triple&, const Triple&) = default;
};

/// One incident triple as seen from an entity. `outgoing` is true when the
/// entity is the subject.
struct AdjacencyEdge {
  RelationId relation = 0;
  EntityId neighbor = 0;
  bool outgoing = true;

  friend auto operator<=>(const AdjacencyEdge&, const AdjacencyEdge&) = default;
};

// Immutable after construction; ids are dense and assigned by first
// appearance. Safe to share read-only across tasks.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  const std::string& name() const { return name_; }
  std::size_t entity_count() const { return entity_names_.size(); }
  std::size_t relation_count() const { return relation_names_.size(); }
  std::size_t triple_count() const { return triples_.size(); }
  bool empty() const { return triples_.empty(); }

  const std::vector<Triple>& triples() const { return triples_; }
  const std::string& entity_name(EntityId id) const;
  const std::string& relation_name(RelationId id) const;
  std::optional<EntityId> find_entity(const std::string& name) const;
  std::optional<RelationId> find_relation(const std::string& name) const;

  bool contains(const Triple& t) const;
  /// Objects o with (s, p, o) in the graph, sorted; nullptr when none.
  const std::vector<EntityId>* objects_of(EntityId subject, RelationId predicate) const;
  const std::vector<AdjacencyEdge>& neighbors(EntityId entity) const;

  /// Loads a 3-column TSV (subject, predicate, object per line, UTF-8).
  /// Duplicate lines collapse to one triple. Throws ConfigError on malformed
  /// lines (with line number) and on empty files.
  static KnowledgeGraph load(const std::filesystem::path& path, std::string name);

 private:
  friend class KgBuilder;

  std::string name_;
  std::vector<std::string> entity_names_;
  std::vector<std::string> relation_names_;
  std::unordered_map<std::string, EntityId> entity_ids_;
  std::unordered_map<std::string, RelationId> relation_ids_;
  std::vector<Triple> triples_;
  std::unordered_map<std::uint64_t, std::vector<EntityId>> index_sp_;
  std::vector<std::vector<AdjacencyEdge>> adjacency_;
};

/// Accumulates name triples, then finalises indexes. Ids are assigned in
/// insertion order; duplicate triples are dropped.
class KgBuilder {
 public:
  explicit KgBuilder(std::string name);

  void add(const std::string& subject, const std::string& predicate,
           const std::string& object);
  std::size_t triple_count() const { return kg_.triples_.size(); }

  KnowledgeGraph build();

 private:
  EntityId entity_id(const std::string& name);
  RelationId relation_id(const std::string& name);

  KnowledgeGraph kg_;
  std::unordered_set<std::uint64_t> seen_;  // mixed triple hash, collision-checked below
  std::unordered_map<std::uint64_t, std::vector<Triple>> seen_triples_;
};

// Scale metrics. Entropies are base-2; densities follow
//   entity density = 2|T| / |E|,  relation density = |T| / |R|.
double entity_entropy(const KnowledgeGraph& kg);
double relation_entropy(const KnowledgeGraph& kg);
double entity_density(const KnowledgeGraph& kg);
double relation_density(const KnowledgeGraph& kg);

/// Triples present in both graphs, compared by surface names; ids re-densified.
/// An empty intersection yields an empty graph (callers that need questions
/// must treat that as unusable).
KnowledgeGraph common_subgraph(const KnowledgeGraph& a, const KnowledgeGraph& b,
                               std::string name = "common");

/// Removes n triples without replacement: round(n*ratio/(ratio+1)) from the
/// triples unique to `kg` versus `other` (by name), the remainder from the
/// common pool. A short pool spills its deficit to the other pool.
KnowledgeGraph ablate_triples(const KnowledgeGraph& kg, const KnowledgeGraph& other,
                              std::size_t n, double ratio_unique_to_common,
                              RngStream& rng);

void save_tsv(const KnowledgeGraph& kg, const std::filesystem::path& path);

/// round-half-up helper shared by the ablation and tuner split rules.
std::size_t round_half_up(double x);

}  // namespace qeii
