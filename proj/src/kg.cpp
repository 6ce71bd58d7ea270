#include "qeii/kg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qeii/errors.hpp"

namespace qeii {

namespace {

std::uint64_t sp_key(EntityId s, RelationId p) {
  return (static_cast<std::uint64_t>(s) << 32) | p;
}

std::uint64_t triple_hash(const Triple& t) {
  std::uint64_t h = mix64(t.subject);
  h = mix64(h ^ t.predicate);
  h = mix64(h ^ t.object);
  return h;
}

}  // namespace

const std::string& KnowledgeGraph::entity_name(EntityId id) const {
  if (id >= entity_names_.size()) throw std::out_of_range("entity id out of range");
  return entity_names_[id];
}

const std::string& KnowledgeGraph::relation_name(RelationId id) const {
  if (id >= relation_names_.size()) throw std::out_of_range("relation id out of range");
  return relation_names_[id];
}

std::optional<EntityId> KnowledgeGraph::find_entity(const std::string& name) const {
  auto it = entity_ids_.find(name);
  if (it == entity_ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<RelationId> KnowledgeGraph::find_relation(const std::string& name) const {
  auto it = relation_ids_.find(name);
  if (it == relation_ids_.end()) return std::nullopt;
  return it->second;
}

bool KnowledgeGraph::contains(const Triple& t) const {
  auto it = index_sp_.find(sp_key(t.subject, t.predicate));
  if (it == index_sp_.end()) return false;
  return std::binary_search(it->second.begin(), it->second.end(), t.object);
}

const std::vector<EntityId>* KnowledgeGraph::objects_of(EntityId subject,
                                                        RelationId predicate) const {
  auto it = index_sp_.find(sp_key(subject, predicate));
  if (it == index_sp_.end()) return nullptr;
  return &it->second;
}

const std::vector<AdjacencyEdge>& KnowledgeGraph::neighbors(EntityId entity) const {
  if (entity >= adjacency_.size()) throw std::out_of_range("entity id out of range");
  return adjacency_[entity];
}

KnowledgeGraph KnowledgeGraph::load(const std::filesystem::path& path, std::string name) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open KG file: " + path.string());

  KgBuilder builder(std::move(name));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first_tab = line.find('\t');
    const auto second_tab = first_tab == std::string::npos
                                ? std::string::npos
                                : line.find('\t', first_tab + 1);
    const bool extra_tab = second_tab != std::string::npos &&
                           line.find('\t', second_tab + 1) != std::string::npos;
    if (first_tab == std::string::npos || second_tab == std::string::npos || extra_tab) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": expected 3 tab-separated fields");
    }
    std::string s = line.substr(0, first_tab);
    std::string p = line.substr(first_tab + 1, second_tab - first_tab - 1);
    std::string o = line.substr(second_tab + 1);
    if (s.empty() || p.empty() || o.empty()) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": empty field");
    }
    builder.add(s, p, o);
  }
  if (builder.triple_count() == 0) {
    throw ConfigError(path.string() + ": no triples found");
  }
  return builder.build();
}

KgBuilder::KgBuilder(std::string name) { kg_.name_ = std::move(name); }

EntityId KgBuilder::entity_id(const std::string& name) {
  auto it = kg_.entity_ids_.find(name);
  if (it != kg_.entity_ids_.end()) return it->second;
  const EntityId id = static_cast<EntityId>(kg_.entity_names_.size());
  kg_.entity_names_.push_back(name);
  kg_.entity_ids_.emplace(name, id);
  return id;
}

RelationId KgBuilder::relation_id(const std::string& name) {
  auto it = kg_.relation_ids_.find(name);
  if (it != kg_.relation_ids_.end()) return it->second;
  const RelationId id = static_cast<RelationId>(kg_.relation_names_.size());
  kg_.relation_names_.push_back(name);
  kg_.relation_ids_.emplace(name, id);
  return id;
}

void KgBuilder::add(const std::string& subject, const std::string& predicate,
                    const std::string& object) {
  Triple t{entity_id(subject), relation_id(predicate), entity_id(object)};
  const std::uint64_t h = triple_hash(t);
  auto& bucket = seen_triples_[h];
  if (std::find(bucket.begin(), bucket.end(), t) != bucket.end()) return;
  bucket.push_back(t);
  kg_.triples_.push_back(t);
}

KnowledgeGraph KgBuilder::build() {
  KnowledgeGraph out = std::move(kg_);
  out.adjacency_.assign(out.entity_names_.size(), {});
  for (const Triple& t : out.triples_) {
    out.index_sp_[sp_key(t.subject, t.predicate)].push_back(t.object);
    out.adjacency_[t.subject].push_back({t.predicate, t.object, true});
    out.adjacency_[t.object].push_back({t.predicate, t.subject, false});
  }
  for (auto& [key, objects] : out.index_sp_) {
    std::sort(objects.begin(), objects.end());
  }
  for (auto& edges : out.adjacency_) {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  }
  kg_ = KnowledgeGraph{};
  seen_triples_.clear();
  return out;
}

double entity_entropy(const KnowledgeGraph& kg) {
  if (kg.triple_count() == 0) throw std::invalid_argument("entity_entropy: empty triple set");
  std::vector<std::size_t> counts(kg.entity_count(), 0);
  for (const Triple& t : kg.triples()) {
    ++counts[t.subject];
    ++counts[t.object];
  }
  const double total = static_cast<double>(kg.triple_count());
  double entropy = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    entropy -= p * std::log2(p);
  }
  return entropy;
}

double relation_entropy(const KnowledgeGraph& kg) {
  if (kg.triple_count() == 0) throw std::invalid_argument("relation_entropy: empty triple set");
  std::vector<std::size_t> counts(kg.relation_count(), 0);
  for (const Triple& t : kg.triples()) ++counts[t.predicate];
  const double total = static_cast<double>(kg.triple_count());
  double entropy = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    entropy -= p * std::log2(p);
  }
  return entropy;
}

double entity_density(const KnowledgeGraph& kg) {
  if (kg.entity_count() == 0) throw std::invalid_argument("entity_density: no entities");
  return 2.0 * static_cast<double>(kg.triple_count()) /
         static_cast<double>(kg.entity_count());
}

double relation_density(const KnowledgeGraph& kg) {
  if (kg.relation_count() == 0) throw std::invalid_argument("relation_density: no relations");
  return static_cast<double>(kg.triple_count()) /
         static_cast<double>(kg.relation_count());
}

namespace {

std::string name_key(const KnowledgeGraph& kg, const Triple& t) {
  return kg.entity_name(t.subject) + '\t' + kg.relation_name(t.predicate) + '\t' +
         kg.entity_name(t.object);
}

}  // namespace

KnowledgeGraph common_subgraph(const KnowledgeGraph& a, const KnowledgeGraph& b,
                               std::string name) {
  std::unordered_set<std::string> in_b;
  in_b.reserve(b.triple_count());
  for (const Triple& t : b.triples()) in_b.insert(name_key(b, t));

  KgBuilder builder(std::move(name));
  for (const Triple& t : a.triples()) {
    if (in_b.count(name_key(a, t))) {
      builder.add(a.entity_name(t.subject), a.relation_name(t.predicate),
                  a.entity_name(t.object));
    }
  }
  return builder.build();
}

std::size_t round_half_up(double x) {
  return static_cast<std::size_t>(std::floor(x + 0.5));
}

KnowledgeGraph ablate_triples(const KnowledgeGraph& kg, const KnowledgeGraph& other,
                              std::size_t n, double ratio_unique_to_common,
                              RngStream& rng) {
  if (n > kg.triple_count()) {
    throw std::invalid_argument("ablate_triples: n exceeds triple count");
  }
  if (!(ratio_unique_to_common > 0.0)) {
    throw std::invalid_argument("ablate_triples: ratio must be positive");
  }

  std::unordered_set<std::string> in_other;
  in_other.reserve(other.triple_count());
  for (const Triple& t : other.triples()) in_other.insert(name_key(other, t));

  std::vector<std::size_t> unique_pool;
  std::vector<std::size_t> common_pool;
  for (std::size_t i = 0; i < kg.triples().size(); ++i) {
    if (in_other.count(name_key(kg, kg.triples()[i]))) {
      common_pool.push_back(i);
    } else {
      unique_pool.push_back(i);
    }
  }

  std::size_t want_unique =
      round_half_up(static_cast<double>(n) * ratio_unique_to_common /
                    (ratio_unique_to_common + 1.0));
  if (want_unique > n) want_unique = n;
  std::size_t want_common = n - want_unique;
  if (want_unique > unique_pool.size()) {
    want_common += want_unique - unique_pool.size();
    want_unique = unique_pool.size();
  }
  if (want_common > common_pool.size()) {
    want_unique += want_common - common_pool.size();
    want_common = common_pool.size();
  }

  std::vector<bool> removed(kg.triple_count(), false);
  rng.shuffle(unique_pool);
  rng.shuffle(common_pool);
  for (std::size_t i = 0; i < want_unique; ++i) removed[unique_pool[i]] = true;
  for (std::size_t i = 0; i < want_common; ++i) removed[common_pool[i]] = true;

  KgBuilder builder(kg.name() + "-ablated");
  for (std::size_t i = 0; i < kg.triples().size(); ++i) {
    if (removed[i]) continue;
    const Triple& t = kg.triples()[i];
    builder.add(kg.entity_name(t.subject), kg.relation_name(t.predicate),
                kg.entity_name(t.object));
  }
  return builder.build();
}

void save_tsv(const KnowledgeGraph& kg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write KG file: " + path.string());
  for (const Triple& t : kg.triples()) {
    out << kg.entity_name(t.subject) << '\t' << kg.relation_name(t.predicate) << '\t'
        << kg.entity_name(t.object) << '\n';
  }
}

}  // namespace qeii
