#include "facetnav/summarization.h"

#include <algorithm>
#include <numeric>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "httplib.h"
#include "json.hpp"

namespace facetnav {

const char *SentenceOrderName(SentenceOrder order) {
  return order == SentenceOrder::kPositionMajor ? "position" : "document";
}

const char *BackendKindName(BackendKind kind) {
  return kind == BackendKind::kExternal ? "EXTERNAL" : "FALLBACK";
}

BudgetedRefs OrderAndBudget(const Corpus &corpus,
                            std::span<const SentenceRef> refs,
                            std::size_t token_budget, SentenceOrder order,
                            TokenCounter count) {
  BudgetedRefs out;
  out.refs.assign(refs.begin(), refs.end());
  if (order == SentenceOrder::kPositionMajor) {
    std::sort(out.refs.begin(), out.refs.end(),
              [](const SentenceRef &a, const SentenceRef &b) {
                return std::tie(a.sent_index, a.doc_id) <
                       std::tie(b.sent_index, b.doc_id);
              });
  } else {
    std::sort(out.refs.begin(), out.refs.end());
  }
  out.refs.erase(std::unique(out.refs.begin(), out.refs.end()), out.refs.end());

  std::size_t used = 0;
  for (std::size_t i = 0; i < out.refs.size(); ++i) {
    const Sentence *s = corpus.FindSentence(out.refs[i]);
    std::size_t tokens = s == nullptr ? 0 : count(s->text);
    if (used + tokens > token_budget) {
      out.refs.resize(i);
      out.truncated = true;
      break;
    }
    used += tokens;
  }
  return out;
}

SummaryRequest SummaryRequest::For(const Topic &topic,
                                   const Selection &selection,
                                   std::vector<SentenceRef> refs,
                                   std::size_t token_budget) {
  return {topic.id(), selection.CanonicalIds(), std::move(refs), token_budget};
}

HttpSummarizerBackend::HttpSummarizerBackend(std::string base_url,
                                             std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

std::string HttpSummarizerBackend::Summarize(const std::string &text,
                                             std::size_t max_tokens) {
  httplib::Client client(base_url_);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);
  nlohmann::json body = {{"text", text}, {"max_tokens", max_tokens}};
  auto res = client.Post("/summarize", body.dump(), "application/json");
  if (!res) {
    throw BackendError("summarizer unreachable: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw BackendError("summarizer returned HTTP " + std::to_string(res->status));
  }
  try {
    return nlohmann::json::parse(res->body).at("summary").get<std::string>();
  } catch (const nlohmann::json::exception &e) {
    throw BackendError(std::string("bad summarizer response: ") + e.what());
  }
}

namespace {

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && IsSpace(s.front())) s.remove_prefix(1);
  while (!s.empty() && IsSpace(s.back())) s.remove_suffix(1);
  return s;
}

}  // namespace

std::vector<std::string> SplitSentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    std::size_t end = i + 1;
    while (end < text.size() &&
           (text[end] == '"' || text[end] == '\'' || text[end] == ')')) {
      ++end;
    }
    if (end < text.size() && !IsSpace(text[end])) continue;
    std::string_view piece = Trim(text.substr(start, end - start));
    if (!piece.empty()) out.emplace_back(piece);
    start = end;
    i = end;
  }
  std::string_view rest = Trim(text.substr(std::min(start, text.size())));
  if (!rest.empty()) out.emplace_back(rest);
  return out;
}

std::string NormalizeSentence(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : Trim(text)) {
    if (IsSpace(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
  }
  return out;
}

Summary ExtractiveSummary(const Topic &topic,
                          std::span<const std::string> selection,
                          const BudgetedRefs &input, std::size_t output_tokens) {
  Summary summary;
  summary.backend = BackendKind::kFallback;
  summary.source_refs = input.refs;
  summary.truncated = input.truncated;
  if (input.refs.empty()) {
    summary.empty_result = true;
    return summary;
  }

  const Corpus &corpus = topic.corpus();
  std::unordered_map<SentenceId, int> mention_counts;
  for (const std::string &id : selection) {
    for (SentenceId s : topic.MentionSentenceIds(id)) ++mention_counts[s];
  }

  struct Ranked {
    std::size_t position;
    int mentions;
    std::size_t tokens;
  };
  std::vector<Ranked> ranked;
  for (std::size_t i = 0; i < input.refs.size(); ++i) {
    auto id = corpus.IdOf(input.refs[i]);
    const Sentence &s = corpus.sentence(*id);
    auto it = mention_counts.find(*id);
    ranked.push_back({i, it == mention_counts.end() ? 0 : it->second,
                      WhitespaceTokenCount(s.text)});
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked &a, const Ranked &b) {
    if (a.mentions != b.mentions) return a.mentions > b.mentions;
    if (a.tokens != b.tokens) return a.tokens < b.tokens;
    return a.position < b.position;
  });

  std::vector<std::size_t> picked;
  std::size_t used = 0;
  for (const Ranked &r : ranked) {
    if (!picked.empty() && used + r.tokens > output_tokens) continue;
    picked.push_back(r.position);
    used += r.tokens;
  }
  std::sort(picked.begin(), picked.end());

  for (std::size_t position : picked) {
    const Sentence &s = *corpus.FindSentence(input.refs[position]);
    summary.sentences.emplace_back(Trim(s.text));
  }
  for (std::size_t i = 0; i < summary.sentences.size(); ++i) {
    if (i > 0) summary.text += ' ';
    summary.text += summary.sentences[i];
  }
  summary.repeated_flags.assign(summary.sentences.size(), false);
  return summary;
}

std::vector<bool> MarkRepeated(std::span<const std::string> sentences,
                               std::span<const HistoryEntry> history) {
  std::unordered_set<std::string> seen;
  for (const HistoryEntry &entry : history) {
    for (const std::string &s : entry.summary_sentences) {
      seen.insert(NormalizeSentence(s));
    }
  }
  std::vector<bool> flags;
  flags.reserve(sentences.size());
  for (const std::string &s : sentences) {
    flags.push_back(seen.contains(NormalizeSentence(s)));
  }
  return flags;
}

Summarizer::Summarizer(SummarizerOptions options,
                       std::shared_ptr<SummarizerBackend> external)
    : options_(options),
      external_(std::move(external)),
      cache_(options.cache_capacity) {}

std::string Summarizer::backend_id() const {
  return external_ ? external_->id() : "fallback";
}

std::size_t Summarizer::cache_size() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

std::string Summarizer::CacheKey(const SummaryRequest &request) const {
  std::vector<std::string> ids = request.selection;
  std::sort(ids.begin(), ids.end());
  nlohmann::json key = {{"topic", request.topic_id},
                        {"selection", ids},
                        {"backend", backend_id()},
                        {"budget", request.token_budget}};
  return key.dump();
}

Summary Summarizer::Compute(const Topic &topic, const SummaryRequest &request,
                            bool *cacheable) {
  *cacheable = true;
  if (!external_) {
    BudgetedRefs input = OrderAndBudget(topic.corpus(), request.sentence_refs,
                                        request.token_budget, options_.order);
    return ExtractiveSummary(topic, request.selection, input,
                             options_.output_tokens);
  }

  SummarizerBackend *backend = external_.get();
  BudgetedRefs input = OrderAndBudget(
      topic.corpus(), request.sentence_refs, request.token_budget,
      options_.order,
      [backend](std::string_view text) { return backend->CountTokens(text); });
  if (input.refs.empty()) {
    return ExtractiveSummary(topic, request.selection, input,
                             options_.output_tokens);
  }

  std::string text;
  for (const SentenceRef &ref : input.refs) {
    if (!text.empty()) text += ' ';
    text += Trim(topic.corpus().FindSentence(ref)->text);
  }
  try {
    ++backend_calls_;
    std::string output = backend->Summarize(text, request.token_budget);
    Summary summary;
    summary.backend = BackendKind::kExternal;
    summary.text = std::string(Trim(output));
    summary.sentences = SplitSentences(summary.text);
    summary.source_refs = input.refs;
    summary.truncated = input.truncated;
    summary.repeated_flags.assign(summary.sentences.size(), false);
    return summary;
  } catch (const BackendError &) {
    // Degraded answers are not cached so a recovered backend gets retried.
    *cacheable = false;
    return ExtractiveSummary(topic, request.selection, input,
                             options_.output_tokens);
  }
}

Summary Summarizer::Summarize(const Topic &topic, const SummaryRequest &request) {
  std::string key = CacheKey(request);
  std::promise<Summary> promise;
  {
    std::unique_lock lock(mutex_);
    if (auto hit = cache_.Get(key)) return *hit;
    auto it = inflight_.find(key);
    if (it != inflight_.end()) {
      std::shared_future<Summary> pending = it->second;
      lock.unlock();
      return pending.get();
    }
    inflight_.emplace(key, promise.get_future().share());
  }

  bool cacheable = false;
  Summary summary;
  try {
    summary = Compute(topic, request, &cacheable);
  } catch (...) {
    std::lock_guard lock(mutex_);
    promise.set_exception(std::current_exception());
    inflight_.erase(key);
    throw;
  }
  std::lock_guard lock(mutex_);
  if (cacheable) cache_.Put(key, summary);
  promise.set_value(summary);
  inflight_.erase(key);
  return summary;
}

}  // namespace facetnav
