#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>

#include "qeii/kg.hpp"

namespace qeii {

using Token = std::uint64_t;

// Party-private mapping from surface names to opaque 64-bit tokens. Only
// tokens ever cross the party boundary; the name tables stay local. Entity
// and relation names hash in separate domains, so a shared surface string
// cannot link the two tables.
class PartyVocabulary {
 public:
  explicit PartyVocabulary(std::uint64_t salt_seed);

  /// Registers the name on first use and returns its token.
  Token entity_token(const std::string& name);
  Token relation_token(const std::string& name);

  std::optional<Token> find_entity_token(const std::string& name) const;
  std::optional<Token> find_relation_token(const std::string& name) const;

  /// Registers every entity and relation of the graph, in id order.
  void register_graph(const KnowledgeGraph& kg);

  std::size_t entity_count() const { return entity_tokens_.size(); }
  std::size_t relation_count() const { return relation_tokens_.size(); }
  std::uint64_t salt() const { return salt_; }

 private:
  Token keyed_hash(char domain, const std::string& name) const;
  Token insert(char domain, const std::string& name,
               std::unordered_map<std::string, Token>& names,
               std::unordered_map<Token, std::string>& tokens);
  void resalt();

  std::uint64_t salt_seed_;
  std::uint64_t salt_;
  std::uint32_t resalt_count_ = 0;
  std::unordered_map<std::string, Token> entity_tokens_;
  std::unordered_map<std::string, Token> relation_tokens_;
  std::unordered_map<Token, std::string> entity_by_token_;
  std::unordered_map<Token, std::string> relation_by_token_;
};

}  // namespace qeii
