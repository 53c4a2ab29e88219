#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <cstddef>
#include <future>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "facetnav/exploration.h"
#include "facetnav/lru_cache.h"
#include "facetnav/topic.h"

namespace facetnav {

// How budgeted summarizer input is ordered. Position-major interleaves
// documents (all first sentences, then all second sentences, ...) with
// documents in doc_id order inside each position; document-major keeps
// each document's sentences together.
enum class SentenceOrder { kPositionMajor, kDocumentMajor };

const char *SentenceOrderName(SentenceOrder order);

using TokenCounter = std::function<std::size_t(std::string_view)>;

struct BudgetedRefs {
  std::vector<SentenceRef> refs;
  bool truncated = false;
};

// Sorts the refs and keeps the longest prefix whose total token count fits
// the budget.
BudgetedRefs OrderAndBudget(const Corpus &corpus,
                            std::span<const SentenceRef> refs,
                            std::size_t token_budget,
                            SentenceOrder order = SentenceOrder::kPositionMajor,
                            TokenCounter count = WhitespaceTokenCount);

enum class BackendKind { kExternal, kFallback };
const char *BackendKindName(BackendKind kind);

struct SummaryRequest {
  std::string topic_id;
  std::vector<std::string> selection;  // canonical: sorted
  std::vector<SentenceRef> sentence_refs;
  std::size_t token_budget = 1024;

  static SummaryRequest For(const Topic &topic, const Selection &selection,
                            std::vector<SentenceRef> refs,
                            std::size_t token_budget = 1024);
};

struct Summary {
  std::string text;
  std::vector<std::string> sentences;
  std::vector<SentenceRef> source_refs;  // budgeted input
  bool truncated = false;
  BackendKind backend = BackendKind::kFallback;
  std::vector<bool> repeated_flags;
  bool empty_result = false;  // nothing to summarize

  bool operator==(const Summary &) const = default;
};

class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An abstractive summarizer reached over some transport.
class SummarizerBackend {
 public:
  virtual ~SummarizerBackend() = default;

  // Stable identity used in cache keys.
  virtual std::string id() const = 0;

  // Throws BackendError when the backend is unreachable or answers badly.
  virtual std::string Summarize(const std::string &text,
                                std::size_t max_tokens) = 0;

  virtual std::size_t CountTokens(std::string_view text) const {
    return WhitespaceTokenCount(text);
  }
};

// POST {url}/summarize with {"text", "max_tokens"}; expects {"summary"}.
class HttpSummarizerBackend : public SummarizerBackend {
 public:
  HttpSummarizerBackend(std::string base_url, std::chrono::milliseconds timeout);

  std::string id() const override { return "external:" + base_url_; }
  std::string Summarize(const std::string &text,
                        std::size_t max_tokens) override;

 private:
  std::string base_url_;
  std::chrono::milliseconds timeout_;
};

// Splits on sentence-final punctuation followed by whitespace.
std::vector<std::string> SplitSentences(std::string_view text);

// Case-folded, whitespace-collapsed, trimmed.
std::string NormalizeSentence(std::string_view text);

// Extractive summary: ranks budgeted sentences by selected-value mention
// count, then fewer tokens, then earlier input position; takes ranked
// sentences while they fit output_tokens (the top one always) and emits the
// picks in input order.
Summary ExtractiveSummary(const Topic &topic,
                          std::span<const std::string> selection,
                          const BudgetedRefs &input, std::size_t output_tokens);

// Flags summary sentences already present in an earlier summary.
std::vector<bool> MarkRepeated(std::span<const std::string> sentences,
                               std::span<const HistoryEntry> history);

struct SummarizerOptions {
  std::size_t token_budget = 1024;
  std::size_t output_tokens = 100;
  std::size_t cache_capacity = 1024;
  SentenceOrder order = SentenceOrder::kPositionMajor;
};

// Produces summaries through the external backend when configured, falling
// back to the extractive summary when it fails. Results are cached by
// (topic, sorted selection, backend, budget). Thread-safe; concurrent
// identical requests share one backend call.
class Summarizer {
 public:
  explicit Summarizer(SummarizerOptions options,
                      std::shared_ptr<SummarizerBackend> external = nullptr);

  Summary Summarize(const Topic &topic, const SummaryRequest &request);

  const SummarizerOptions &options() const { return options_; }
  std::string backend_id() const;
  std::size_t backend_calls() const { return backend_calls_; }
  std::size_t cache_size() const;

 private:
  Summary Compute(const Topic &topic, const SummaryRequest &request,
                  bool *cacheable);
  std::string CacheKey(const SummaryRequest &request) const;

  SummarizerOptions options_;
  std::shared_ptr<SummarizerBackend> external_;
  std::atomic<std::size_t> backend_calls_{0};

  mutable std::mutex mutex_;
  LruCache<std::string, Summary> cache_;
  std::unordered_map<std::string, std::shared_future<Summary>> inflight_;
};

}  // namespace facetnav
