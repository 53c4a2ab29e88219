#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace facetnav {

struct Token {
  std::string text;
  bool ws = false;  // trailing whitespace after the token
  std::string pos;
  std::string ner = "NONE";

  bool operator==(const Token &) const = default;
};

struct Sentence {
  int sent_index = 0;
  std::string text;
  std::vector<Token> tokens;

  bool operator==(const Sentence &) const = default;
};

struct Document {
  std::string doc_id;
  std::string title;
  std::vector<Sentence> sentences;

  bool operator==(const Document &) const = default;
};

struct SentenceRef {
  std::string doc_id;
  int sent_index = 0;

  auto operator<=>(const SentenceRef &) const = default;
  bool operator==(const SentenceRef &) const = default;
};

enum class MentionKind { kEvent, kEntity, kProposition };

const char *MentionKindName(MentionKind kind);

// A token span; token_end is inclusive.
struct Mention {
  std::string mention_id;
  SentenceRef sentence;
  int token_start = 0;
  int token_end = 0;
  std::string surface;
  MentionKind kind = MentionKind::kEntity;

  bool operator==(const Mention &) const = default;
};

// Sorts documents by byte-wise comparison of doc_id. Throws ValidationError
// on duplicate ids.
std::vector<Document> CanonicalDocOrder(std::vector<Document> docs);

// Dense sentence number: position of a sentence when all documents are laid
// out in canonical order.
using SentenceId = std::uint32_t;

// Immutable, validated collection of documents of one topic. Documents are
// held in canonical order.
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<Document> docs);

  static Corpus LoadJsonl(const std::filesystem::path &path);
  static Corpus FromJsonl(std::istream &in, const std::string &source_name);

  void WriteJsonl(std::ostream &out) const;

  std::span<const Document> documents() const { return docs_; }
  std::size_t sentence_count() const { return refs_.size(); }

  const Document *FindDocument(std::string_view doc_id) const;
  const Sentence *FindSentence(const SentenceRef &ref) const;
  const Sentence &sentence(SentenceId id) const;

  std::optional<SentenceId> IdOf(const SentenceRef &ref) const;
  const SentenceRef &RefOf(SentenceId id) const { return refs_[id]; }

  // Exact source text of [token_start, token_end] including interior
  // whitespace. Throws ValidationError naming the mention when out of range.
  std::string MentionSurface(const Mention &mention) const;
  bool SpanInRange(const Mention &mention) const;

 private:
  void Index();

  std::vector<Document> docs_;
  std::unordered_map<std::string, std::size_t> doc_pos_;
  std::vector<SentenceId> first_sentence_;  // per document
  std::vector<SentenceRef> refs_;
};

// Reconstructs sentence text from tokens and their whitespace flags.
std::string JoinTokens(std::span<const Token> tokens);

// Whitespace-delimited token count, used by budgets.
std::size_t WhitespaceTokenCount(std::string_view text);

nlohmann::json ToJson(const Document &doc);
Document DocumentFromJson(const nlohmann::json &j);

}  // namespace facetnav
