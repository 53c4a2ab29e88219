#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "facetnav/topic.h"

namespace facetnav {

// Facet values picked by the user, in click order.
class Selection {
 public:
  Selection() = default;
  explicit Selection(std::string topic_id) : topic_id_(std::move(topic_id)) {}

  // Validates every id against the topic and rejects duplicates
  // (std::invalid_argument). Throws NotFoundError on unknown ids.
  static Selection FromIds(const Topic &topic, std::vector<std::string> ids);

  const std::string &topic_id() const { return topic_id_; }
  std::span<const std::string> ids() const { return ids_; }
  bool empty() const { return ids_.empty(); }
  bool Contains(std::string_view value_id) const;

  // Sorted copy of the ids, the order-insensitive identity of a selection.
  std::vector<std::string> CanonicalIds() const;

  bool operator==(const Selection &) const = default;

 private:
  std::string topic_id_;
  std::vector<std::string> ids_;

  friend Selection Toggle(const Topic &, const Selection &, std::string_view);
};

// Adds the value if absent, removes it if present; other values keep their
// order. Throws NotFoundError for ids the topic does not define.
Selection Toggle(const Topic &topic, const Selection &selection,
                 std::string_view value_id);

// Sentence set of one value, in canonical order. Throws NotFoundError.
std::vector<SentenceRef> SentenceSetOf(const Topic &topic,
                                       std::string_view value_id);

// Sentences containing mentions of every selected value; all sentences of
// the topic for an empty selection. Sorted by sentence id.
std::vector<SentenceId> Intersect(const Topic &topic,
                                  std::span<const std::string> value_ids);
std::vector<SentenceRef> IntersectRefs(const Topic &topic,
                                       std::span<const std::string> value_ids);

struct FacetViewEntry {
  std::string value_id;
  std::string label;
  int restricted_frequency = 0;
  EntityCategory category = EntityCategory::kNone;
  bool selected = false;

  bool operator==(const FacetViewEntry &) const = default;
};

struct FacetView {
  std::array<std::vector<FacetViewEntry>, 3> facets;
  std::array<int, 3> global_totals = {0, 0, 0};
  std::size_t sentence_count = 0;

  const std::vector<FacetViewEntry> &of(FacetKind kind) const {
    return facets[static_cast<int>(kind)];
  }
};

// Facet values restricted to the selection's intersected sentence set, with
// frequencies recounted inside it. Ordered by restricted frequency, then
// label.
FacetView RefreshFacets(const Topic &topic,
                        std::span<const std::string> value_ids);

struct MentionForm {
  std::string surface;
  int count = 0;

  bool operator==(const MentionForm &) const = default;
};

// Distinct surfaces (case-insensitive, shown with the casing of the earliest
// mention) with counts, most frequent first.
std::vector<MentionForm> MentionForms(const Topic &topic,
                                      std::string_view value_id);

struct HistoryEntry {
  Selection selection;
  std::string summary_text;
  std::vector<std::string> summary_sentences;
  std::vector<SentenceRef> sentence_refs;
  std::int64_t timestamp_ms = 0;
};

class Session {
 public:
  static constexpr std::size_t kMaxHistory = 200;

  Session(std::string token, std::int64_t created_ms)
      : token_(std::move(token)), created_ms_(created_ms) {}

  const std::string &token() const { return token_; }
  std::int64_t created_ms() const { return created_ms_; }

  // Per-session lock; callers hold it across read-modify-write sequences.
  std::mutex &mutex() const { return mutex_; }

  // Appends an entry, evicting the oldest past kMaxHistory. Caller holds
  // mutex().
  void RecordLocked(HistoryEntry entry);
  // Newest first. Caller holds mutex().
  std::vector<HistoryEntry> HistoryLocked() const;

  void Record(HistoryEntry entry);
  std::vector<HistoryEntry> History() const;

  Selection &current_selection() { return selection_; }

 private:
  std::string token_;
  std::int64_t created_ms_;
  mutable std::mutex mutex_;
  std::deque<HistoryEntry> history_;
  Selection selection_;
};

// Owns sessions keyed by an unguessable 128-bit token.
class SessionStore {
 public:
  explicit SessionStore(std::size_t max_sessions = 10000)
      : max_sessions_(max_sessions) {}

  std::shared_ptr<Session> Create();
  // Throws NotFoundError.
  std::shared_ptr<Session> Find(std::string_view token) const;
  // Returns the named session, creating a fresh one for an empty token.
  // Unknown non-empty tokens throw NotFoundError.
  std::shared_ptr<Session> GetOrCreate(std::string_view token);

  std::size_t size() const;

 private:
  std::size_t max_sessions_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::shared_ptr<Session>> sessions_;
  std::deque<std::string> order_;  // creation order for eviction
};

std::string NewSessionToken();
std::int64_t NowMillis();

}  // namespace facetnav
