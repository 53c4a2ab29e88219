#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "facetnav/exploration.h"
#include "facetnav/summarization.h"
#include "facetnav/topic.h"
#include "json.hpp"

namespace httplib {
class Server;
}

namespace facetnav {

// Topics served by one process, in topic_id order.
class TopicRegistry {
 public:
  void Add(std::shared_ptr<const Topic> topic);

  // Loads every subdirectory of data_dir: a prebuilt "facets.bin" when
  // present, otherwise the raw topic files.
  static TopicRegistry LoadDataDir(const std::filesystem::path &data_dir,
                                   const ClusteringConfig &config);

  // Throws NotFoundError.
  const Topic &Get(std::string_view topic_id) const;
  std::vector<std::shared_ptr<const Topic>> topics() const;

 private:
  std::map<std::string, std::shared_ptr<const Topic>, std::less<>> topics_;
};

inline constexpr const char *kIndexFileName = "facets.bin";

struct QueryResult {
  Selection selection;
  FacetView facets;
  std::vector<SentenceRef> sentence_refs;
  std::optional<Summary> summary;  // absent for the empty selection
};

// Refreshes facets for the selection and summarizes its intersection.
// With a session, repeated sentences are flagged against its history and
// the result is appended to it; the caller must hold the session mutex.
QueryResult RunQuery(const Topic &topic, Summarizer &summarizer,
                     const Selection &selection, Session *session);

// Resolves a value id, or else a case-insensitive label, to a value id.
// Throws NotFoundError("facet value") when nothing matches and
// std::invalid_argument when a label is ambiguous.
std::string ResolveValue(const Topic &topic, std::string_view id_or_label);

nlohmann::json TopicDescriptorJson(const Topic &topic);
nlohmann::json FacetViewJson(const FacetView &view);
nlohmann::json SummaryJson(const Summary &summary);
nlohmann::json QueryResultJson(const Topic &topic, const QueryResult &result);
nlohmann::json RefJson(const SentenceRef &ref);

// Parses "DOC:IDX,DOC:IDX"; the index follows the last colon.
std::vector<SentenceRef> ParseRefs(std::string_view text);

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

// Request handlers, independent of the HTTP transport.
class Service {
 public:
  Service(TopicRegistry topics, std::shared_ptr<Summarizer> summarizer);

  ApiResponse ListTopics() const;
  ApiResponse Query(std::string_view topic_id, std::string_view body);
  ApiResponse Mentions(std::string_view topic_id, std::string_view value_id) const;
  ApiResponse Sentences(std::string_view topic_id, std::string_view refs,
                        std::string_view selected) const;
  ApiResponse DocumentView(std::string_view topic_id, std::string_view doc_id,
                           std::string_view flagged,
                           std::string_view selected) const;
  ApiResponse History(std::string_view session) const;

  // Registers the API routes, and static assets under "/" when static_dir
  // is set.
  void Mount(httplib::Server &server,
             const std::optional<std::filesystem::path> &static_dir);

  SessionStore &sessions() { return sessions_; }
  Summarizer &summarizer() { return *summarizer_; }

 private:
  template <typename Fn>
  ApiResponse Guard(Fn &&fn) const;

  TopicRegistry topics_;
  std::shared_ptr<Summarizer> summarizer_;
  SessionStore sessions_;
};

}  // namespace facetnav
