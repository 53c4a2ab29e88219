#include "facetnav/exploration.h"

#include <algorithm>
#include <map>
#include <random>
#include <stdexcept>

#include "facetnav/errors.h"

namespace facetnav {

Selection Selection::FromIds(const Topic &topic, std::vector<std::string> ids) {
  Selection s(topic.id());
  for (std::string &id : ids) {
    topic.Value(id);
    if (s.Contains(id)) {
      throw std::invalid_argument("duplicate value in selection: " + id);
    }
    s.ids_.push_back(std::move(id));
  }
  return s;
}

bool Selection::Contains(std::string_view value_id) const {
  return std::find(ids_.begin(), ids_.end(), value_id) != ids_.end();
}

std::vector<std::string> Selection::CanonicalIds() const {
  std::vector<std::string> out = ids_;
  std::sort(out.begin(), out.end());
  return out;
}

Selection Toggle(const Topic &topic, const Selection &selection,
                 std::string_view value_id) {
  topic.Value(value_id);
  Selection out = selection;
  if (out.topic_id_.empty()) out.topic_id_ = topic.id();
  auto it = std::find(out.ids_.begin(), out.ids_.end(), value_id);
  if (it == out.ids_.end()) {
    out.ids_.emplace_back(value_id);
  } else {
    out.ids_.erase(it);
  }
  return out;
}

std::vector<SentenceRef> SentenceSetOf(const Topic &topic,
                                       std::string_view value_id) {
  std::vector<SentenceRef> out;
  for (SentenceId id : topic.SentenceIds(value_id)) {
    out.push_back(topic.corpus().RefOf(id));
  }
  return out;
}

std::vector<SentenceId> Intersect(const Topic &topic,
                                  std::span<const std::string> value_ids) {
  std::vector<SentenceId> result;
  if (value_ids.empty()) {
    result.resize(topic.corpus().sentence_count());
    for (std::size_t i = 0; i < result.size(); ++i) {
      result[i] = static_cast<SentenceId>(i);
    }
    return result;
  }
  // Start from the smallest set.
  std::vector<std::span<const SentenceId>> sets;
  for (const std::string &id : value_ids) sets.push_back(topic.SentenceIds(id));
  std::sort(sets.begin(), sets.end(),
            [](auto a, auto b) { return a.size() < b.size(); });
  result.assign(sets.front().begin(), sets.front().end());
  std::vector<SentenceId> scratch;
  for (std::size_t i = 1; i < sets.size() && !result.empty(); ++i) {
    scratch.clear();
    std::set_intersection(result.begin(), result.end(), sets[i].begin(),
                          sets[i].end(), std::back_inserter(scratch));
    result.swap(scratch);
  }
  return result;
}

std::vector<SentenceRef> IntersectRefs(const Topic &topic,
                                       std::span<const std::string> value_ids) {
  std::vector<SentenceRef> out;
  for (SentenceId id : Intersect(topic, value_ids)) {
    out.push_back(topic.corpus().RefOf(id));
  }
  return out;
}

FacetView RefreshFacets(const Topic &topic,
                        std::span<const std::string> value_ids) {
  std::vector<SentenceId> current = Intersect(topic, value_ids);
  std::vector<bool> in_set(topic.corpus().sentence_count(), false);
  for (SentenceId id : current) in_set[id] = true;

  FacetView view;
  view.sentence_count = current.size();
  for (FacetKind kind : kAllFacets) {
    auto &entries = view.facets[static_cast<int>(kind)];
    const auto &values = topic.facets().of(kind);
    view.global_totals[static_cast<int>(kind)] = static_cast<int>(values.size());
    for (const FacetValue &v : values) {
      int restricted = 0;
      for (SentenceId id : topic.MentionSentenceIds(v.value_id)) {
        if (in_set[id]) ++restricted;
      }
      if (restricted == 0) continue;
      bool selected = std::find(value_ids.begin(), value_ids.end(),
                                v.value_id) != value_ids.end();
      entries.push_back({v.value_id, v.label, restricted, v.category, selected});
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const FacetViewEntry &a, const FacetViewEntry &b) {
                       if (a.restricted_frequency != b.restricted_frequency) {
                         return a.restricted_frequency > b.restricted_frequency;
                       }
                       std::string fa = FoldCase(a.label), fb = FoldCase(b.label);
                       if (fa != fb) return fa < fb;
                       return a.label < b.label;
                     });
  }
  return view;
}

std::vector<MentionForm> MentionForms(const Topic &topic,
                                      std::string_view value_id) {
  const FacetValue &value = topic.Value(value_id);
  // Mentions are stored in corpus order, so the first surface seen for a
  // folded key is the earliest.
  std::map<std::string, MentionForm> forms;
  for (const Mention &m : value.mentions) {
    auto [it, inserted] = forms.try_emplace(FoldCase(m.surface));
    if (inserted) it->second.surface = m.surface;
    ++it->second.count;
  }
  std::vector<MentionForm> out;
  for (auto &[key, form] : forms) out.push_back(std::move(form));
  // forms is keyed by folded surface, so a stable sort by count keeps the
  // folded-ascending tie order.
  std::stable_sort(out.begin(), out.end(),
                   [](const MentionForm &a, const MentionForm &b) {
                     return a.count > b.count;
                   });
  return out;
}

void Session::RecordLocked(HistoryEntry entry) {
  history_.push_back(std::move(entry));
  while (history_.size() > kMaxHistory) history_.pop_front();
}

std::vector<HistoryEntry> Session::HistoryLocked() const {
  return {history_.rbegin(), history_.rend()};
}

void Session::Record(HistoryEntry entry) {
  std::lock_guard lock(mutex_);
  RecordLocked(std::move(entry));
}

std::vector<HistoryEntry> Session::History() const {
  std::lock_guard lock(mutex_);
  return HistoryLocked();
}

std::string NewSessionToken() {
  static constexpr char kHex[] = "0123456789abcdef";
  std::random_device device;
  std::string token;
  for (int i = 0; i < 4; ++i) {
    std::uint32_t word = device();
    for (int b = 0; b < 8; ++b) {
      token += kHex[word & 0xF];
      word >>= 4;
    }
  }
  return token;
}

std::int64_t NowMillis() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::shared_ptr<Session> SessionStore::Create() {
  std::lock_guard lock(mutex_);
  std::string token;
  do {
    token = NewSessionToken();
  } while (sessions_.contains(token));
  while (sessions_.size() >= max_sessions_ && !order_.empty()) {
    sessions_.erase(order_.front());
    order_.pop_front();
  }
  auto session = std::make_shared<Session>(token, NowMillis());
  sessions_.emplace(token, session);
  order_.push_back(token);
  return session;
}

std::shared_ptr<Session> SessionStore::Find(std::string_view token) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(std::string(token));
  if (it == sessions_.end()) throw NotFoundError("session", std::string(token));
  return it->second;
}

std::shared_ptr<Session> SessionStore::GetOrCreate(std::string_view token) {
  if (token.empty()) return Create();
  return Find(token);
}

std::size_t SessionStore::size() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

}  // namespace facetnav
