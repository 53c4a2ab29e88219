// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any
// criterion fails.
//
//   facetnav_acceptance --cli PATH --fixture DIR --expected DIR

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "facetnav/annotations.h"
#include "facetnav/exploration.h"
#include "facetnav/facets.h"
#include "facetnav/summarization.h"
#include "facetnav/topic.h"
#include "support/fixture.h"
#include "support/oracles.h"

using namespace facetnav;
using namespace facetnav::testing;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects failures; the first few are kept for the report.
class Checker {
 public:
  void Expect(bool ok, const std::string &what) {
    ++checks_;
    if (ok) return;
    ++failures_;
    if (first_.empty()) first_ = what;
  }
  Outcome Result(const std::string &detail) const {
    if (failures_ == 0) return {true, detail};
    return {false, std::to_string(failures_) + "/" + std::to_string(checks_) +
                       " checks failed; first: " + first_};
  }

 private:
  std::size_t checks_ = 0, failures_ = 0;
  std::string first_;
};

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string Fixed(double v, int digits = 2) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(digits);
  out << v;
  return out.str();
}

struct Options {
  std::string cli;
  fs::path fixture;
  fs::path expected;
};

struct Run {
  int code = -1;
  std::string out;
};

Run Shell(const std::string &command) {
  Run run;
  FILE *pipe = popen(command.c_str(), "r");
  if (pipe == nullptr) return run;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) run.out.append(buf, n);
  int status = pclose(pipe);
  run.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return run;
}

std::string Quote(const std::string &s) { return "'" + s + "'"; }

// --- criteria ---------------------------------------------------------------

Outcome PropositionOracle() {
  auto start = Clock::now();
  Checker check;
  ClusteringConfig config;
  std::vector<Mention> example;
  for (const char *id : {"P1", "P2", "P3"}) {
    example.push_back({id, {"d", 0}, 0, 0, "p", MentionKind::kProposition});
  }
  std::vector<PairScore> edges = {{"P1", "P2", 0.9}, {"P1", "P3", 0.7}};
  check.Expect(ToPartition(PropositionClusters(example, edges, config)) ==
                   IdPartition{{"P1", "P2", "P3"}},
               "worked example {P1,P2,P3}");

  std::mt19937 rng(20230601);
  for (int graph = 0; graph < 100; ++graph) {
    const int n = 1 + static_cast<int>(rng() % 50);
    std::vector<Mention> props;
    std::vector<std::string> ids;
    for (int i = 0; i < n; ++i) {
      ids.push_back("P" + std::to_string(i));
      props.push_back({ids.back(), {"d", i}, 0, 0, "p", MentionKind::kProposition});
    }
    std::vector<PairScore> scores;
    std::vector<std::tuple<std::string, std::string, double>> raw;
    std::set<std::pair<int, int>> used;
    const int m = static_cast<int>(rng() % (2 * n + 1));
    std::uniform_real_distribution<double> score(0.0, 1.0);
    for (int e = 0; e < m && n > 1; ++e) {
      int a = static_cast<int>(rng() % n), b = static_cast<int>(rng() % n);
      if (a == b || !used.emplace(std::min(a, b), std::max(a, b)).second) continue;
      double s = (rng() % 8 == 0) ? 0.5 : score(rng);
      scores.push_back({ids[a], ids[b], s});
      raw.emplace_back(ids[a], ids[b], s);
    }
    check.Expect(ToPartition(PropositionClusters(props, scores, config)) ==
                     TransitiveClosureComponents(ids, raw, config.alignment_threshold),
                 "graph " + std::to_string(graph));
  }
  double elapsed = Seconds(start);
  check.Expect(elapsed < 5.0, "runtime " + Fixed(elapsed) + "s >= 5s");
  return check.Result("101 graphs match the transitive-closure oracle in " + Fixed(elapsed) +
                      "s");
}

Outcome AgglomerativeOracle() {
  auto start = Clock::now();
  Checker check;
  std::mt19937 rng(1998);
  int merges = 0;
  for (int i = 0; i < 200; ++i) {
    EntityInstance inst = RandomEntityInstance(rng, 12);
    ClusteringConfig config;
    config.cd_merge_threshold = inst.threshold;
    auto got = ToPartition(AgglomerativeEntityClustering(inst.wd, inst.cd, config));
    auto want = ExhaustiveAverageLinkage(SeedIds(inst.wd), ScoreTable(inst.cd), inst.threshold);
    merges += static_cast<int>(inst.wd.size() - want.size());
    check.Expect(got == want, "instance " + std::to_string(i));
  }
  double elapsed = Seconds(start);
  check.Expect(elapsed < 30.0, "runtime " + Fixed(elapsed) + "s >= 30s");
  return check.Result("200 instances equal exhaustive average linkage (" +
                      std::to_string(merges) + " merges) in " + Fixed(elapsed) + "s");
}

Outcome WdCohesion() {
  Checker check;
  std::mt19937 rng(4242);
  int violations = 0;
  for (int i = 0; i < 1000; ++i) {
    EntityInstance inst = RandomEntityInstance(rng, 24);
    ClusteringConfig config;
    config.cd_merge_threshold = inst.threshold;
    auto clusters = AgglomerativeEntityClustering(inst.wd, inst.cd, config);
    std::map<std::string, std::size_t> owner;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      for (const Mention &m : clusters[c]) owner[m.mention_id] = c;
    }
    for (const RawCluster &wd : inst.wd) {
      for (const Mention &m : wd.mentions) {
        auto a = owner.find(m.mention_id);
        auto b = owner.find(wd.mentions.front().mention_id);
        bool ok = a != owner.end() && b != owner.end() && a->second == b->second;
        if (!ok) ++violations;
        check.Expect(ok, "instance " + std::to_string(i) + " splits " + wd.cluster_id);
      }
    }
  }
  return check.Result("1000 instances, " + std::to_string(violations) + " violations");
}

// Random annotations over the toy corpus, for the filter suite.
AnnotationBundle RandomBundle(const Corpus &corpus, std::mt19937 &rng) {
  AnnotationBundle b;
  int next_id = 0;
  auto mention = [&](MentionKind kind, std::optional<std::string> doc) {
    SentenceId sid;
    do {
      sid = static_cast<SentenceId>(rng() % corpus.sentence_count());
    } while (doc && corpus.RefOf(sid).doc_id != *doc);
    const Sentence &s = corpus.sentence(sid);
    int len = static_cast<int>(s.tokens.size());
    int start = static_cast<int>(rng() % len);
    int end = std::min(len - 1, start + static_cast<int>(rng() % 3));
    Mention m{"m" + std::to_string(next_id++), corpus.RefOf(sid), start, end, "", kind};
    m.surface = corpus.MentionSurface(m);
    return m;
  };
  // Events: clusters drawn from a small pool of single-token spans so that
  // labels repeat and merges happen.
  int events = 2 + static_cast<int>(rng() % 10);
  for (int c = 0; c < events; ++c) {
    RawCluster cluster{"ev" + std::to_string(c), ClusterKind::kEvent, {}};
    int size = 1 + static_cast<int>(rng() % 12);
    for (int i = 0; i < size; ++i) cluster.mentions.push_back(mention(MentionKind::kEvent, {}));
    b.event_clusters.push_back(std::move(cluster));
  }
  std::vector<std::string> entity_ids;
  for (const Document &doc : corpus.documents()) {
    int clusters = static_cast<int>(rng() % 4);
    for (int c = 0; c < clusters; ++c) {
      RawCluster cluster{doc.doc_id + "-wd" + std::to_string(c), ClusterKind::kEntityWd, {}};
      int size = 1 + static_cast<int>(rng() % 3);
      for (int i = 0; i < size; ++i) {
        cluster.mentions.push_back(mention(MentionKind::kEntity, doc.doc_id));
        entity_ids.push_back(cluster.mentions.back().mention_id);
      }
      b.entity_wd_clusters.push_back(std::move(cluster));
    }
  }
  for (std::size_t i = 0; i < entity_ids.size(); ++i) {
    for (std::size_t j = i + 1; j < entity_ids.size(); ++j) {
      if (rng() % 3 == 0) {
        b.entity_cd_scores.push_back({entity_ids[i], entity_ids[j], (rng() % 101) / 100.0});
      }
    }
  }
  int props = static_cast<int>(rng() % 15);
  for (int i = 0; i < props; ++i) b.proposition_mentions.push_back(mention(MentionKind::kProposition, {}));
  for (int i = 0; i < props; ++i) {
    for (int j = i + 1; j < props; ++j) {
      if (rng() % 4 == 0) {
        b.proposition_alignments.push_back({b.proposition_mentions[i].mention_id,
                                            b.proposition_mentions[j].mention_id,
                                            (rng() % 101) / 100.0});
      }
    }
  }
  return b;
}

Outcome FilterSuite(const Options &options) {
  Checker check;
  Corpus corpus = Corpus::LoadJsonl(options.fixture / kDocumentsFile);
  std::mt19937 rng(31337);
  std::size_t survivors = 0;
  std::array<std::size_t, 3> per_facet{};
  for (int trial = 0; trial < 400; ++trial) {
    AnnotationBundle bundle = RandomBundle(corpus, rng);
    ClusteringConfig config;
    config.max_cluster_mentions = 3 + static_cast<int>(rng() % 48);
    FacetTables tables = BuildFacets(corpus, bundle, config);
    for (FacetKind kind : kAllFacets) {
      for (const FacetValue &v : tables.of(kind)) {
        ++survivors;
        ++per_facet[static_cast<int>(kind)];
        std::string where = "trial " + std::to_string(trial) + " " + v.value_id;
        check.Expect(v.frequency() <= config.max_cluster_mentions, where + ": mention cap");
        std::set<SentenceRef> sentences;
        for (const Mention &m : v.mentions) sentences.insert(m.sentence);
        check.Expect(sentences.size() >= 2, where + ": single sentence");
        check.Expect(CharCount(v.label) > 2, where + ": short label");
        if (kind == FacetKind::kStatements) continue;
        bool found = false;
        for (const Mention &m : v.mentions) {
          if (m.surface != v.label) continue;
          found = true;
          const Sentence &s = *corpus.FindSentence(m.sentence);
          for (int t = m.token_start; t <= m.token_end; ++t) {
            check.Expect(s.tokens[t].pos != "VERB", where + ": verb label '" + v.label + "'");
          }
        }
        check.Expect(found, where + ": label is not a mention surface");
      }
    }
  }
  check.Expect(survivors > 0, "no surviving values to check");
  return check.Result("400 random bundles, " + std::to_string(survivors) +
                      " surviving values (" + std::to_string(per_facet[0]) + " concepts, " +
                      std::to_string(per_facet[1]) + " entities, " +
                      std::to_string(per_facet[2]) +
                      " statements); verb-label predicate checked on concepts and entities");
}

Outcome IntersectionOracle(const Topic &topic) {
  Checker check;
  std::vector<std::string> pool;
  for (const FacetValue *v : topic.AllValues()) pool.push_back(v->value_id);
  std::mt19937 rng(500);
  int nonempty = 0;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::string> sel = pool;
    std::shuffle(sel.begin(), sel.end(), rng);
    sel.resize(1 + rng() % 4);
    std::string t = "trial " + std::to_string(trial);

    auto got = IntersectRefs(topic, sel);
    check.Expect(got == ScanIntersection(topic, sel), t + ": intersect");
    if (!got.empty()) ++nonempty;

    FacetView view = RefreshFacets(topic, sel);
    std::map<std::string, int> shown;
    for (FacetKind kind : kAllFacets) {
      for (const FacetViewEntry &e : view.of(kind)) shown[e.value_id] = e.restricted_frequency;
    }
    check.Expect(shown == ScanRestrictedCounts(topic, sel), t + ": refresh");
    check.Expect(view.sentence_count == got.size(), t + ": sentence count");

    std::vector<std::string> permuted = sel;
    std::shuffle(permuted.begin(), permuted.end(), rng);
    check.Expect(IntersectRefs(topic, permuted) == got, t + ": commutativity");
    FacetView permuted_view = RefreshFacets(topic, permuted);
    for (FacetKind kind : kAllFacets) {
      check.Expect(permuted_view.of(kind).size() == view.of(kind).size(), t + ": refresh order");
    }

    std::vector<std::string> wider = sel;
    const std::string &extra = pool[rng() % pool.size()];
    if (std::find(wider.begin(), wider.end(), extra) == wider.end()) wider.push_back(extra);
    auto narrower = IntersectRefs(topic, wider);
    check.Expect(std::includes(got.begin(), got.end(), narrower.begin(), narrower.end()),
                 t + ": anti-monotonicity");
  }
  return check.Result("500 selections (" + std::to_string(nonempty) +
                      " non-empty) match full scans; commutative and anti-monotone");
}

Outcome Determinism(const Options &options, const fs::path &scratch) {
  Checker check;
  std::string a = (scratch / "a.bin").string(), b = (scratch / "b.bin").string();
  for (const std::string &out : {a, b}) {
    Run r = Shell(Quote(options.cli) + " build " + Quote(options.fixture.string()) + " -o " +
                  Quote(out) + " 2>/dev/null");
    check.Expect(r.code == 0, "build exit code " + std::to_string(r.code));
  }
  std::string index = ReadFile(a);
  check.Expect(!index.empty() && index == ReadFile(b), "indexes differ");

  std::string query = Quote(options.cli) + " query " + Quote(a) +
                      " --select treaties --format json 2>/dev/null";
  Run q1 = Shell(query), q2 = Shell(query);
  check.Expect(q1.code == 0 && q1.out == q2.out, "CLI summaries differ");

  auto topic = LoadIndex(fs::path(a));
  std::vector<std::string> pool;
  for (const FacetValue *v : topic->AllValues()) pool.push_back(v->value_id);
  for (const std::string &id : pool) {
    Selection s = Selection::FromIds(*topic, {id});
    SummaryRequest request = SummaryRequest::For(*topic, s, IntersectRefs(*topic, s.ids()));
    Summarizer first{SummarizerOptions{}}, second{SummarizerOptions{}};
    Summary x = first.Summarize(*topic, request), y = second.Summarize(*topic, request);
    check.Expect(x == y && x.text == y.text, "fallback differs for " + id);
  }
  return check.Result("two builds byte-identical (" + std::to_string(index.size()) +
                      " bytes); fallback summaries identical for " + std::to_string(pool.size()) +
                      " selections");
}

class RecordingBackend : public SummarizerBackend {
 public:
  std::string id() const override { return "recording"; }
  std::string Summarize(const std::string &text, std::size_t) override {
    std::lock_guard lock(mutex_);
    ++calls;
    max_tokens_seen = std::max(max_tokens_seen, WhitespaceTokenCount(text));
    return "Summary.";
  }
  std::size_t calls = 0;
  std::size_t max_tokens_seen = 0;

 private:
  std::mutex mutex_;
};

std::shared_ptr<const Topic> RaggedTopic(std::mt19937 &rng, int docs, int sentences) {
  std::vector<Document> out;
  for (int d = 0; d < docs; ++d) {
    Document doc;
    doc.doc_id = "doc" + std::to_string(d);
    for (int s = 0; s < sentences; ++s) {
      Sentence sent;
      int len = 1 + static_cast<int>(rng() % 300);
      for (int t = 0; t < len; ++t) {
        sent.tokens.push_back({"w" + std::to_string(t), t + 1 < len, "NOUN", "NONE"});
      }
      sent.text = JoinTokens(sent.tokens);
      doc.sentences.push_back(std::move(sent));
    }
    out.push_back(std::move(doc));
  }
  return std::make_shared<const Topic>("ragged", "ragged", Corpus(std::move(out)),
                                       FacetTables{}, ClusteringConfig{});
}

Outcome BudgetAndLatency(const Topic &toy) {
  Checker check;
  std::mt19937 rng(1024);
  auto backend = std::make_shared<RecordingBackend>();
  for (int trial = 0; trial < 100; ++trial) {
    auto topic = RaggedTopic(rng, 1 + static_cast<int>(rng() % 8), 1 + static_cast<int>(rng() % 8));
    Summarizer summarizer(SummarizerOptions{}, backend);
    std::vector<SentenceRef> refs;
    for (SentenceId i = 0; i < topic->corpus().sentence_count(); ++i) {
      if (rng() % 3 != 0) refs.push_back(topic->corpus().RefOf(i));
    }
    summarizer.Summarize(*topic, {topic->id(), {}, refs, 1024});
  }
  check.Expect(backend->calls > 0, "backend never called");
  check.Expect(backend->max_tokens_seen <= 1024,
               "sent " + std::to_string(backend->max_tokens_seen) + " tokens");

  // 50 input sentences through the fallback, uncached.
  auto fifty = RaggedTopic(rng, 10, 5);
  std::vector<SentenceRef> refs;
  for (SentenceId i = 0; i < fifty->corpus().sentence_count(); ++i) {
    refs.push_back(fifty->corpus().RefOf(i));
  }
  SummarizerOptions big;
  big.token_budget = 1u << 20;
  auto start = Clock::now();
  Summary s = Summarizer(big).Summarize(*fifty, {fifty->id(), {}, refs, big.token_budget});
  double ms = Seconds(start) * 1000;
  check.Expect(s.source_refs.size() == 50, "fallback input was not 50 sentences");
  check.Expect(ms < 3000, "fallback took " + Fixed(ms) + "ms");

  // The same on the toy topic with a real selection.
  start = Clock::now();
  Selection sel = Selection::FromIds(toy, {"e0"});
  Summarizer(SummarizerOptions{}).Summarize(toy, SummaryRequest::For(toy, sel, IntersectRefs(toy, sel.ids())));
  double toy_ms = Seconds(start) * 1000;
  check.Expect(toy_ms < 3000, "toy fallback took " + Fixed(toy_ms) + "ms");
  return check.Result("max tokens sent " + std::to_string(backend->max_tokens_seen) +
                      " <= 1024 over " + std::to_string(backend->calls) +
                      " calls; 50-sentence fallback " + Fixed(ms, 3) + "ms");
}

Outcome Cache(const Topic &toy) {
  Checker check;
  auto backend = std::make_shared<RecordingBackend>();
  Summarizer summarizer(SummarizerOptions{}, backend);
  auto request = [&](std::vector<std::string> ids) {
    Selection s = Selection::FromIds(toy, ids);
    return SummaryRequest::For(toy, s, IntersectRefs(toy, s.ids()));
  };
  Summary a = summarizer.Summarize(toy, request({"e0", "e1"}));
  Summary b = summarizer.Summarize(toy, request({"e0", "e1"}));
  check.Expect(backend->calls == 1, "identical queries made " +
                                        std::to_string(backend->calls) + " backend calls");
  check.Expect(a == b, "cached summary differs");
  Summary c = summarizer.Summarize(toy, request({"e1", "e0"}));
  check.Expect(backend->calls == 1, "permuted selection missed the cache");
  check.Expect(summarizer.cache_size() == 1, "permuted selection added a cache entry");
  check.Expect(a == c, "permuted summary differs");
  return check.Result("identical queries: " + std::to_string(backend->calls) +
                      " backend call; permuted selection shares the entry");
}

Outcome EndToEnd(const Options &options, const fs::path &scratch) {
  Checker check;
  std::string index = (scratch / "e2e.bin").string();
  Run build = Shell(Quote(options.cli) + " build " + Quote(options.fixture.string()) + " -o " +
                    Quote(index) + " 2>/dev/null");
  check.Expect(build.code == 0, "build failed");
  std::ifstream table(options.expected / "queries.tsv");
  std::string line;
  int queries = 0;
  while (std::getline(table, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::size_t tab = line.find('\t');
    std::string file = line.substr(0, tab);
    std::string args = tab == std::string::npos ? "" : line.substr(tab + 1);
    Run r = Shell(Quote(options.cli) + " query " + Quote(index) + " " + args + " 2>&1");
    std::string expected = ReadFile(options.expected / file);
    check.Expect(r.code == 0, file + ": exit code " + std::to_string(r.code));
    check.Expect(!expected.empty() && r.out == expected, file + ": output differs");
    ++queries;
  }
  check.Expect(queries > 0, "no expected queries found");
  return check.Result(std::to_string(queries) +
                      " queries reproduce the hand-derived tables, counts and summaries");
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"facetnav acceptance suite"};
  Options options;
  app.add_option("--cli", options.cli, "facetnav executable")->required();
  app.add_option("--fixture", options.fixture, "Toy topic directory")->required();
  app.add_option("--expected", options.expected, "Expected query outputs")->required();
  CLI11_PARSE(app, argc, argv);

  fs::path scratch = fs::temp_directory_path() /
                     ("facetnav-acceptance-" + std::to_string(::getpid()));
  fs::create_directories(scratch);
  auto toy = BuildTopic(options.fixture, ClusteringConfig{});

  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"proposition-clustering-oracle", PropositionOracle},
      {"agglomerative-oracle", AgglomerativeOracle},
      {"wd-cohesion", WdCohesion},
      {"filter-suite", [&] { return FilterSuite(options); }},
      {"intersection-oracle", [&] { return IntersectionOracle(*toy); }},
      {"determinism", [&] { return Determinism(options, scratch); }},
      {"budget-latency", [&] { return BudgetAndLatency(*toy); }},
      {"cache", [&] { return Cache(*toy); }},
      {"end-to-end-fixture", [&] { return EndToEnd(options, scratch); }},
  };
  int failed = 0;
  for (const auto &[name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  fs::remove_all(scratch);
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
