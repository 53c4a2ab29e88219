#include "facetnav/service.h"

#include <algorithm>
#include <charconv>
#include <set>
#include <stdexcept>

#include "facetnav/errors.h"
#include "httplib.h"

namespace facetnav {

using nlohmann::json;

void TopicRegistry::Add(std::shared_ptr<const Topic> topic) {
  std::string id = topic->id();
  if (!topics_.emplace(id, std::move(topic)).second) {
    throw std::invalid_argument("duplicate topic " + id);
  }
}

TopicRegistry TopicRegistry::LoadDataDir(const std::filesystem::path &data_dir,
                                         const ClusteringConfig &config) {
  TopicRegistry registry;
  if (!std::filesystem::is_directory(data_dir)) {
    throw std::invalid_argument("data directory not found: " + data_dir.string());
  }
  std::vector<std::filesystem::path> dirs;
  for (const auto &entry : std::filesystem::directory_iterator(data_dir)) {
    if (entry.is_directory()) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto &dir : dirs) {
    if (std::filesystem::exists(dir / kIndexFileName)) {
      registry.Add(LoadIndex(dir / kIndexFileName));
    } else if (std::filesystem::exists(dir / kDocumentsFile)) {
      registry.Add(BuildTopic(dir, config));
    }
  }
  return registry;
}

const Topic &TopicRegistry::Get(std::string_view topic_id) const {
  auto it = topics_.find(topic_id);
  if (it == topics_.end()) throw NotFoundError("topic", std::string(topic_id));
  return *it->second;
}

std::vector<std::shared_ptr<const Topic>> TopicRegistry::topics() const {
  std::vector<std::shared_ptr<const Topic>> out;
  for (const auto &[id, topic] : topics_) out.push_back(topic);
  return out;
}

QueryResult RunQuery(const Topic &topic, Summarizer &summarizer,
                     const Selection &selection, Session *session) {
  QueryResult result;
  result.selection = selection;
  result.facets = RefreshFacets(topic, selection.ids());
  result.sentence_refs = IntersectRefs(topic, selection.ids());
  if (selection.empty()) return result;

  SummaryRequest request =
      SummaryRequest::For(topic, selection, result.sentence_refs,
                          summarizer.options().token_budget);
  Summary summary = summarizer.Summarize(topic, request);
  if (session != nullptr) {
    std::vector<HistoryEntry> history = session->HistoryLocked();
    summary.repeated_flags = MarkRepeated(summary.sentences, history);
    session->RecordLocked({selection, summary.text, summary.sentences,
                           result.sentence_refs, NowMillis()});
  }
  result.summary = std::move(summary);
  return result;
}

std::string ResolveValue(const Topic &topic, std::string_view id_or_label) {
  if (topic.FindValue(id_or_label) != nullptr) return std::string(id_or_label);
  std::string folded = FoldCase(id_or_label);
  std::vector<const FacetValue *> hits;
  for (const FacetValue *v : topic.AllValues()) {
    if (FoldCase(v->label) == folded) hits.push_back(v);
  }
  if (hits.empty()) throw NotFoundError("facet value", std::string(id_or_label));
  if (hits.size() > 1) {
    std::string ids;
    for (const FacetValue *v : hits) ids += (ids.empty() ? "" : ",") + v->value_id;
    throw std::invalid_argument("ambiguous facet value: " +
                                std::string(id_or_label) + " (" + ids + ")");
  }
  return hits.front()->value_id;
}

json RefJson(const SentenceRef &ref) {
  return {{"doc_id", ref.doc_id}, {"sent_index", ref.sent_index}};
}

json TopicDescriptorJson(const Topic &topic) {
  json counts = json::object();
  for (FacetKind kind : kAllFacets) {
    counts[FacetKindName(kind)] = topic.facets().of(kind).size();
  }
  return {{"topic_id", topic.id()},
          {"display_name", topic.display_name()},
          {"document_count", topic.corpus().documents().size()},
          {"facet_counts", std::move(counts)}};
}

json FacetViewJson(const FacetView &view) {
  json facets = json::object();
  json totals = json::object();
  for (FacetKind kind : kAllFacets) {
    json values = json::array();
    for (const FacetViewEntry &e : view.of(kind)) {
      json v = {{"value_id", e.value_id},
                {"label", e.label},
                {"frequency", e.restricted_frequency},
                {"selected", e.selected}};
      if (kind == FacetKind::kEntities) {
        v["category"] = EntityCategoryName(e.category);
      }
      values.push_back(std::move(v));
    }
    facets[FacetKindName(kind)] = std::move(values);
    totals[FacetKindName(kind)] = {
        {"shown", view.of(kind).size()},
        {"global", view.global_totals[static_cast<int>(kind)]}};
  }
  return {{"values", std::move(facets)}, {"totals", std::move(totals)}};
}

json SummaryJson(const Summary &summary) {
  json sentences = json::array();
  for (std::size_t i = 0; i < summary.sentences.size(); ++i) {
    bool repeated = i < summary.repeated_flags.size() && summary.repeated_flags[i];
    sentences.push_back({{"text", summary.sentences[i]}, {"repeated", repeated}});
  }
  json refs = json::array();
  for (const SentenceRef &r : summary.source_refs) refs.push_back(RefJson(r));
  return {{"text", summary.text},
          {"sentences", std::move(sentences)},
          {"source_refs", std::move(refs)},
          {"truncated", summary.truncated},
          {"backend", BackendKindName(summary.backend)},
          {"empty_result", summary.empty_result}};
}

json QueryResultJson(const Topic &topic, const QueryResult &result) {
  json refs = json::array();
  for (const SentenceRef &r : result.sentence_refs) refs.push_back(RefJson(r));
  json selected = json::array();
  for (const std::string &id : result.selection.ids()) {
    const FacetValue &v = topic.Value(id);
    selected.push_back({{"value_id", id},
                        {"label", v.label},
                        {"facet", FacetKindName(v.facet)}});
  }
  return {{"topic_id", topic.id()},
          {"selected", std::move(selected)},
          {"sentence_count", result.sentence_refs.size()},
          {"sentence_refs", std::move(refs)},
          {"truncated", result.summary ? result.summary->truncated : false},
          {"facets", FacetViewJson(result.facets)},
          {"summary", result.summary ? SummaryJson(*result.summary) : json()}};
}

namespace {

std::vector<std::string> SplitList(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    std::string_view item = text.substr(start, comma - start);
    if (!item.empty()) out.emplace_back(item);
    start = comma + 1;
  }
  return out;
}

int ParseIndex(std::string_view text) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value < 0) {
    throw std::invalid_argument("bad sentence index: " + std::string(text));
  }
  return value;
}

json TokensJson(const Sentence &s) {
  json tokens = json::array();
  for (const Token &t : s.tokens) tokens.push_back({{"text", t.text}, {"ws", t.ws}});
  return tokens;
}

json SpansJson(const Topic &topic, const SentenceRef &ref,
               const std::vector<std::string> &selected) {
  json spans = json::array();
  for (const std::string &id : selected) {
    for (const Mention &m : topic.Value(id).mentions) {
      if (m.sentence == ref) {
        spans.push_back({{"value_id", id},
                         {"mention_id", m.mention_id},
                         {"token_start", m.token_start},
                         {"token_end", m.token_end}});
      }
    }
  }
  return spans;
}

std::vector<std::string> ResolveSelected(const Topic &topic,
                                         std::string_view selected) {
  std::vector<std::string> ids = SplitList(selected);
  for (const std::string &id : ids) topic.Value(id);
  return ids;
}

json ErrorBody(std::string_view message) {
  return {{"error", std::string(message)}};
}

}  // namespace

std::vector<SentenceRef> ParseRefs(std::string_view text) {
  std::vector<SentenceRef> refs;
  for (const std::string &item : SplitList(text)) {
    std::size_t colon = item.rfind(':');
    if (colon == std::string::npos || colon == 0) {
      throw std::invalid_argument("bad sentence ref: " + item);
    }
    refs.push_back({item.substr(0, colon),
                    ParseIndex(std::string_view(item).substr(colon + 1))});
  }
  return refs;
}

Service::Service(TopicRegistry topics, std::shared_ptr<Summarizer> summarizer)
    : topics_(std::move(topics)), summarizer_(std::move(summarizer)) {}

template <typename Fn>
ApiResponse Service::Guard(Fn &&fn) const {
  try {
    return fn();
  } catch (const NotFoundError &e) {
    return {404, ErrorBody(e.what())};
  } catch (const json::exception &e) {
    return {400, ErrorBody(std::string("malformed request: ") + e.what())};
  } catch (const std::invalid_argument &e) {
    return {400, ErrorBody(e.what())};
  } catch (const std::exception &e) {
    return {503, ErrorBody(e.what())};
  }
}

ApiResponse Service::ListTopics() const {
  json out = json::array();
  for (const auto &topic : topics_.topics()) out.push_back(TopicDescriptorJson(*topic));
  return {200, out};
}

ApiResponse Service::Query(std::string_view topic_id, std::string_view body) {
  return Guard([&]() -> ApiResponse {
    const Topic &topic = topics_.Get(topic_id);
    json request = json::parse(body);
    if (!request.is_object()) throw std::invalid_argument("body must be an object");
    std::vector<std::string> ids;
    if (request.contains("selected")) {
      const json &selected = request.at("selected");
      if (!selected.is_array()) throw std::invalid_argument("selected must be an array");
      for (const json &id : selected) {
        if (!id.is_string()) throw std::invalid_argument("value ids must be strings");
        ids.push_back(id.get<std::string>());
      }
    }
    std::string token;
    if (request.contains("session") && !request.at("session").is_null()) {
      token = request.at("session").get<std::string>();
    }
    Selection selection = Selection::FromIds(topic, std::move(ids));

    std::shared_ptr<Session> session;
    try {
      session = sessions_.GetOrCreate(token);
    } catch (const NotFoundError &) {
      session = sessions_.Create();
    }
    std::lock_guard lock(session->mutex());
    QueryResult result = RunQuery(topic, *summarizer_, selection, session.get());
    session->current_selection() = selection;
    json out = QueryResultJson(topic, result);
    out["session"] = session->token();
    return {200, std::move(out)};
  });
}

ApiResponse Service::Mentions(std::string_view topic_id,
                              std::string_view value_id) const {
  return Guard([&]() -> ApiResponse {
    const Topic &topic = topics_.Get(topic_id);
    const FacetValue &value = topic.Value(value_id);
    json forms = json::array();
    for (const MentionForm &f : MentionForms(topic, value_id)) {
      forms.push_back({{"surface", f.surface}, {"count", f.count}});
    }
    json mentions = json::array();
    for (const Mention &m : value.mentions) {
      mentions.push_back({{"mention_id", m.mention_id},
                          {"doc_id", m.sentence.doc_id},
                          {"sent_index", m.sentence.sent_index},
                          {"token_start", m.token_start},
                          {"token_end", m.token_end},
                          {"surface", m.surface}});
    }
    return {200,
            {{"value_id", value.value_id},
             {"label", value.label},
             {"facet", FacetKindName(value.facet)},
             {"category", EntityCategoryName(value.category)},
             {"frequency", value.frequency()},
             {"forms", std::move(forms)},
             {"mentions", std::move(mentions)}}};
  });
}

ApiResponse Service::Sentences(std::string_view topic_id, std::string_view refs,
                               std::string_view selected) const {
  return Guard([&]() -> ApiResponse {
    const Topic &topic = topics_.Get(topic_id);
    std::vector<std::string> ids = ResolveSelected(topic, selected);
    std::vector<SentenceRef> parsed = ParseRefs(refs);
    std::sort(parsed.begin(), parsed.end());
    parsed.erase(std::unique(parsed.begin(), parsed.end()), parsed.end());

    json groups = json::array();
    for (const SentenceRef &ref : parsed) {
      const Sentence *s = topic.corpus().FindSentence(ref);
      if (s == nullptr) {
        throw std::invalid_argument("bad sentence ref: " + ref.doc_id + ":" +
                                    std::to_string(ref.sent_index));
      }
      if (groups.empty() || groups.back()["doc_id"] != ref.doc_id) {
        groups.push_back({{"doc_id", ref.doc_id},
                          {"title", topic.corpus().FindDocument(ref.doc_id)->title},
                          {"sentences", json::array()}});
      }
      groups.back()["sentences"].push_back({{"sent_index", ref.sent_index},
                                            {"text", s->text},
                                            {"tokens", TokensJson(*s)},
                                            {"spans", SpansJson(topic, ref, ids)}});
    }
    return {200, {{"groups", std::move(groups)}}};
  });
}

ApiResponse Service::DocumentView(std::string_view topic_id,
                                  std::string_view doc_id,
                                  std::string_view flagged,
                                  std::string_view selected) const {
  return Guard([&]() -> ApiResponse {
    const Topic &topic = topics_.Get(topic_id);
    const Document *doc = topic.corpus().FindDocument(doc_id);
    if (doc == nullptr) throw NotFoundError("document", std::string(doc_id));
    std::vector<std::string> ids = ResolveSelected(topic, selected);
    std::set<int> flags;
    for (const std::string &item : SplitList(flagged)) {
      int index = ParseIndex(item);
      if (index >= static_cast<int>(doc->sentences.size())) {
        throw std::invalid_argument("bad sentence index: " + item);
      }
      flags.insert(index);
    }
    json sentences = json::array();
    for (const Sentence &s : doc->sentences) {
      SentenceRef ref{doc->doc_id, s.sent_index};
      sentences.push_back({{"sent_index", s.sent_index},
                           {"text", s.text},
                           {"tokens", TokensJson(s)},
                           {"flagged", flags.contains(s.sent_index)},
                           {"spans", SpansJson(topic, ref, ids)}});
    }
    return {200,
            {{"doc_id", doc->doc_id},
             {"title", doc->title},
             {"sentences", std::move(sentences)}}};
  });
}

ApiResponse Service::History(std::string_view session_token) const {
  return Guard([&]() -> ApiResponse {
    std::shared_ptr<Session> session = sessions_.Find(session_token);
    json entries = json::array();
    for (const HistoryEntry &e : session->History()) {
      json selected = json::array();
      for (const std::string &id : e.selection.ids()) {
        json item = {{"value_id", id}};
        try {
          item["label"] = topics_.Get(e.selection.topic_id()).Value(id).label;
        } catch (const NotFoundError &) {
        }
        selected.push_back(std::move(item));
      }
      json refs = json::array();
      for (const SentenceRef &r : e.sentence_refs) refs.push_back(RefJson(r));
      entries.push_back({{"topic_id", e.selection.topic_id()},
                         {"selected", std::move(selected)},
                         {"summary_text", e.summary_text},
                         {"summary_sentences", e.summary_sentences},
                         {"sentence_refs", std::move(refs)},
                         {"timestamp_ms", e.timestamp_ms}});
    }
    return {200, {{"session", session->token()}, {"entries", std::move(entries)}}};
  });
}

namespace {

void Reply(httplib::Response &res, const ApiResponse &api) {
  res.status = api.status;
  res.set_content(api.body.dump(), "application/json; charset=utf-8");
}

constexpr const char *kPlaceholderPage =
    "<!doctype html><html><head><meta charset=\"utf-8\"><title>facetnav</title>"
    "</head><body><h1>facetnav</h1><p>API under <code>/api/topics</code>. "
    "Start the server with <code>--static DIR</code> to serve the web UI."
    "</p></body></html>";

}  // namespace

void Service::Mount(httplib::Server &server,
                    const std::optional<std::filesystem::path> &static_dir) {
  server.Get("/api/topics", [this](const httplib::Request &, httplib::Response &res) {
    Reply(res, ListTopics());
  });
  server.Post(R"(/api/topics/([^/]+)/query)",
              [this](const httplib::Request &req, httplib::Response &res) {
                Reply(res, Query(req.matches[1].str(), req.body));
              });
  server.Get(R"(/api/topics/([^/]+)/values/([^/]+)/mentions)",
             [this](const httplib::Request &req, httplib::Response &res) {
               Reply(res, Mentions(req.matches[1].str(), req.matches[2].str()));
             });
  server.Get(R"(/api/topics/([^/]+)/sentences)",
             [this](const httplib::Request &req, httplib::Response &res) {
               Reply(res, Sentences(req.matches[1].str(),
                                    req.get_param_value("refs"),
                                    req.get_param_value("selected")));
             });
  server.Get(R"(/api/topics/([^/]+)/documents/([^/]+))",
             [this](const httplib::Request &req, httplib::Response &res) {
               Reply(res, DocumentView(req.matches[1].str(), req.matches[2].str(),
                                       req.get_param_value("flag"),
                                       req.get_param_value("selected")));
             });
  server.Get(R"(/api/sessions/([^/]+)/history)",
             [this](const httplib::Request &req, httplib::Response &res) {
               Reply(res, History(req.matches[1].str()));
             });
  if (static_dir) {
    server.set_mount_point("/", static_dir->string());
  } else {
    server.Get("/", [](const httplib::Request &, httplib::Response &res) {
      res.set_content(kPlaceholderPage, "text/html; charset=utf-8");
    });
  }
}

}  // namespace facetnav
