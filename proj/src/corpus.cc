#include "facetnav/corpus.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>
#include <unordered_set>

#include "facetnav/errors.h"

namespace facetnav {

const char *ValidationError::CodeName(Code code) {
  switch (code) {
    case Code::kParse: return "parse error";
    case Code::kDuplicateDocId: return "duplicate doc_id";
    case Code::kEmptyDocId: return "empty doc_id";
    case Code::kEmptySentence: return "sentence without tokens";
    case Code::kTextMismatch: return "sentence text does not match tokens";
    case Code::kUnknownDocId: return "unknown doc_id";
    case Code::kSpanOutOfRange: return "span out of range";
    case Code::kDuplicateMentionId: return "duplicate mention_id";
    case Code::kUnknownMentionId: return "unknown mention_id";
    case Code::kScoreOutOfRange: return "score out of range";
    case Code::kSelfPair: return "pair links a mention to itself";
    case Code::kDuplicatePair: return "duplicate pair";
    case Code::kEmptyCluster: return "empty cluster";
    case Code::kCrossDocumentCluster:
      return "within-document cluster crosses documents";
    case Code::kSurfaceMismatch: return "surface mismatch";
    case Code::kBadIndex: return "bad index file";
  }
  return "validation error";
}

std::string ValidationError::Format(Code code, const std::string &message,
                                    const std::string &file, int line) {
  std::string out;
  if (!file.empty()) {
    out += file;
    if (line > 0) out += ":" + std::to_string(line);
    out += ": ";
  }
  out += CodeName(code);
  if (!message.empty()) out += ": " + message;
  return out;
}

const char *MentionKindName(MentionKind kind) {
  switch (kind) {
    case MentionKind::kEvent: return "EVENT";
    case MentionKind::kEntity: return "ENTITY";
    case MentionKind::kProposition: return "PROPOSITION";
  }
  return "?";
}

std::vector<Document> CanonicalDocOrder(std::vector<Document> docs) {
  std::stable_sort(docs.begin(), docs.end(),
                   [](const Document &a, const Document &b) {
                     return a.doc_id < b.doc_id;
                   });
  for (std::size_t i = 1; i < docs.size(); ++i) {
    if (docs[i].doc_id == docs[i - 1].doc_id) {
      throw ValidationError(ValidationError::Code::kDuplicateDocId,
                            docs[i].doc_id);
    }
  }
  return docs;
}

std::string JoinTokens(std::span<const Token> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    out += tokens[i].text;
    if (tokens[i].ws && i + 1 < tokens.size()) out += ' ';
  }
  return out;
}

std::size_t WhitespaceTokenCount(std::string_view text) {
  std::size_t count = 0;
  bool in_token = false;
  for (char c : text) {
    bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r' ||
                 c == '\f' || c == '\v';
    if (!space && !in_token) ++count;
    in_token = !space;
  }
  return count;
}

namespace {

std::string SentenceText(const Sentence &s) {
  std::string out;
  for (const Token &t : s.tokens) {
    out += t.text;
    if (t.ws) out += ' ';
  }
  return out;
}

}  // namespace

Corpus::Corpus(std::vector<Document> docs) : docs_(CanonicalDocOrder(std::move(docs))) {
  for (const Document &doc : docs_) {
    if (doc.doc_id.empty()) {
      throw ValidationError(ValidationError::Code::kEmptyDocId, "");
    }
    for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
      const Sentence &s = doc.sentences[i];
      std::string where = doc.doc_id + ":" + std::to_string(i);
      if (s.tokens.empty()) {
        throw ValidationError(ValidationError::Code::kEmptySentence, where);
      }
      if (SentenceText(s) != s.text) {
        throw ValidationError(ValidationError::Code::kTextMismatch, where);
      }
    }
  }
  for (Document &doc : docs_) {
    for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
      doc.sentences[i].sent_index = static_cast<int>(i);
    }
  }
  Index();
}

void Corpus::Index() {
  doc_pos_.clear();
  first_sentence_.clear();
  refs_.clear();
  for (std::size_t d = 0; d < docs_.size(); ++d) {
    doc_pos_.emplace(docs_[d].doc_id, d);
    first_sentence_.push_back(static_cast<SentenceId>(refs_.size()));
    for (std::size_t i = 0; i < docs_[d].sentences.size(); ++i) {
      refs_.push_back({docs_[d].doc_id, static_cast<int>(i)});
    }
  }
}

const Document *Corpus::FindDocument(std::string_view doc_id) const {
  auto it = doc_pos_.find(std::string(doc_id));
  return it == doc_pos_.end() ? nullptr : &docs_[it->second];
}

const Sentence *Corpus::FindSentence(const SentenceRef &ref) const {
  const Document *doc = FindDocument(ref.doc_id);
  if (doc == nullptr || ref.sent_index < 0 ||
      ref.sent_index >= static_cast<int>(doc->sentences.size())) {
    return nullptr;
  }
  return &doc->sentences[ref.sent_index];
}

const Sentence &Corpus::sentence(SentenceId id) const {
  const SentenceRef &ref = refs_.at(id);
  return *FindSentence(ref);
}

std::optional<SentenceId> Corpus::IdOf(const SentenceRef &ref) const {
  auto it = doc_pos_.find(ref.doc_id);
  if (it == doc_pos_.end()) return std::nullopt;
  const Document &doc = docs_[it->second];
  if (ref.sent_index < 0 ||
      ref.sent_index >= static_cast<int>(doc.sentences.size())) {
    return std::nullopt;
  }
  return first_sentence_[it->second] + static_cast<SentenceId>(ref.sent_index);
}

bool Corpus::SpanInRange(const Mention &mention) const {
  const Sentence *s = FindSentence(mention.sentence);
  return s != nullptr && mention.token_start >= 0 &&
         mention.token_start <= mention.token_end &&
         mention.token_end < static_cast<int>(s->tokens.size());
}

std::string Corpus::MentionSurface(const Mention &mention) const {
  if (!SpanInRange(mention)) {
    throw ValidationError(ValidationError::Code::kSpanOutOfRange,
                          mention.mention_id);
  }
  const Sentence &s = *FindSentence(mention.sentence);
  std::span<const Token> tokens(s.tokens);
  return JoinTokens(tokens.subspan(mention.token_start,
                                   mention.token_end - mention.token_start + 1));
}

nlohmann::json ToJson(const Document &doc) {
  nlohmann::json sentences = nlohmann::json::array();
  for (const Sentence &s : doc.sentences) {
    nlohmann::json tokens = nlohmann::json::array();
    for (const Token &t : s.tokens) {
      tokens.push_back(
          {{"text", t.text}, {"ws", t.ws}, {"pos", t.pos}, {"ner", t.ner}});
    }
    sentences.push_back({{"text", s.text}, {"tokens", std::move(tokens)}});
  }
  return {{"doc_id", doc.doc_id},
          {"title", doc.title},
          {"sentences", std::move(sentences)}};
}

Document DocumentFromJson(const nlohmann::json &j) {
  Document doc;
  doc.doc_id = j.at("doc_id").get<std::string>();
  doc.title = j.value("title", std::string());
  int index = 0;
  for (const auto &js : j.at("sentences")) {
    Sentence s;
    s.sent_index = index++;
    s.text = js.at("text").get<std::string>();
    for (const auto &jt : js.at("tokens")) {
      Token t;
      t.text = jt.at("text").get<std::string>();
      t.ws = jt.value("ws", false);
      t.pos = jt.at("pos").get<std::string>();
      t.ner = jt.value("ner", std::string("NONE"));
      if (t.ner.empty()) t.ner = "NONE";
      s.tokens.push_back(std::move(t));
    }
    doc.sentences.push_back(std::move(s));
  }
  return doc;
}

Corpus Corpus::FromJsonl(std::istream &in, const std::string &source_name) {
  std::vector<Document> docs;
  std::unordered_set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Document doc;
    try {
      doc = DocumentFromJson(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception &e) {
      throw ValidationError(ValidationError::Code::kParse, e.what(),
                            source_name, line_no);
    }
    if (doc.doc_id.empty()) {
      throw ValidationError(ValidationError::Code::kEmptyDocId, "",
                            source_name, line_no);
    }
    if (!seen.insert(doc.doc_id).second) {
      throw ValidationError(ValidationError::Code::kDuplicateDocId, doc.doc_id,
                            source_name, line_no);
    }
    for (const Sentence &s : doc.sentences) {
      std::string where = doc.doc_id + ":" + std::to_string(s.sent_index);
      if (s.tokens.empty()) {
        throw ValidationError(ValidationError::Code::kEmptySentence, where,
                              source_name, line_no);
      }
      if (SentenceText(s) != s.text) {
        throw ValidationError(ValidationError::Code::kTextMismatch, where,
                              source_name, line_no);
      }
    }
    docs.push_back(std::move(doc));
  }
  return Corpus(std::move(docs));
}

Corpus Corpus::LoadJsonl(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError(ValidationError::Code::kParse, "cannot open file",
                          path.string());
  }
  return FromJsonl(in, path.filename().string());
}

void Corpus::WriteJsonl(std::ostream &out) const {
  for (const Document &doc : docs_) out << ToJson(doc).dump() << '\n';
}

}  // namespace facetnav
