#include "qeii/vocab.hpp"

#include <vector>

#include "qeii/rng.hpp"

namespace qeii {

PartyVocabulary::PartyVocabulary(std::uint64_t salt_seed)
    : salt_seed_(salt_seed), salt_(mix64(salt_seed)) {}

Token PartyVocabulary::keyed_hash(char domain, const std::string& name) const {
  // FNV-1a over (salt, domain, name) with a splitmix finisher.
  std::uint64_t h = 0xcbf29ce484222325ULL ^ salt_;
  constexpr std::uint64_t kPrime = 0x100000001b3ULL;
  h = (h ^ static_cast<unsigned char>(domain)) * kPrime;
  for (unsigned char c : name) h = (h ^ c) * kPrime;
  return mix64(h);
}

Token PartyVocabulary::insert(char domain, const std::string& name,
                              std::unordered_map<std::string, Token>& names,
                              std::unordered_map<Token, std::string>& tokens) {
  auto it = names.find(name);
  if (it != names.end()) return it->second;
  for (;;) {
    const Token token = keyed_hash(domain, name);
    auto [pos, inserted] = tokens.emplace(token, name);
    if (inserted) {
      names.emplace(name, token);
      return token;
    }
    // 64-bit collision within the party: pick a fresh salt and rebuild.
    resalt();
  }
}

void PartyVocabulary::resalt() {
  ++resalt_count_;
  salt_ = mix64(salt_seed_ ^ (0x51ed2701a3c59f1bULL + resalt_count_));

  std::vector<std::string> entities;
  entities.reserve(entity_tokens_.size());
  for (auto& [name, token] : entity_tokens_) entities.push_back(name);
  std::vector<std::string> relations;
  relations.reserve(relation_tokens_.size());
  for (auto& [name, token] : relation_tokens_) relations.push_back(name);

  entity_tokens_.clear();
  relation_tokens_.clear();
  entity_by_token_.clear();
  relation_by_token_.clear();
  for (const auto& name : entities) {
    const Token token = keyed_hash('e', name);
    if (!entity_by_token_.emplace(token, name).second) {
      resalt();  // new salt collided again; try the next one
      return;
    }
    entity_tokens_.emplace(name, token);
  }
  for (const auto& name : relations) {
    const Token token = keyed_hash('r', name);
    if (!relation_by_token_.emplace(token, name).second) {
      resalt();
      return;
    }
    relation_tokens_.emplace(name, token);
  }
}

Token PartyVocabulary::entity_token(const std::string& name) {
  return insert('e', name, entity_tokens_, entity_by_token_);
}

Token PartyVocabulary::relation_token(const std::string& name) {
  return insert('r', name, relation_tokens_, relation_by_token_);
}

std::optional<Token> PartyVocabulary::find_entity_token(const std::string& name) const {
  auto it = entity_tokens_.find(name);
  if (it == entity_tokens_.end()) return std::nullopt;
  return it->second;
}

std::optional<Token> PartyVocabulary::find_relation_token(const std::string& name) const {
  auto it = relation_tokens_.find(name);
  if (it == relation_tokens_.end()) return std::nullopt;
  return it->second;
}

void PartyVocabulary::register_graph(const KnowledgeGraph& kg) {
  for (std::size_t e = 0; e < kg.entity_count(); ++e) {
    entity_token(kg.entity_name(static_cast<EntityId>(e)));
  }
  for (std::size_t r = 0; r < kg.relation_count(); ++r) {
    relation_token(kg.relation_name(static_cast<RelationId>(r)));
  }
}

}  // namespace qeii
