#include "facetnav/annotations.h"

#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <unordered_set>
#include <utility>

#include "facetnav/errors.h"
#include "json.hpp"

namespace facetnav {
namespace {

using Code = ValidationError::Code;
using nlohmann::json;

// Shared state while reading the files of one bundle.
class BundleReader {
 public:
  explicit BundleReader(const Corpus &corpus) : corpus_(corpus) {}

  template <typename Fn>
  void ForEachRecord(std::istream *in, const char *file, Fn &&fn) {
    if (in == nullptr) return;
    std::string line;
    int line_no = 0;
    while (std::getline(*in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      json record;
      try {
        record = json::parse(line);
      } catch (const json::exception &e) {
        throw ValidationError(Code::kParse, e.what(), file, line_no);
      }
      try {
        fn(record, line_no);
      } catch (const json::exception &e) {
        throw ValidationError(Code::kParse, e.what(), file, line_no);
      }
    }
  }

  Mention ReadMention(const json &j, MentionKind kind, const char *file,
                      int line) {
    Mention m;
    m.mention_id = j.at("mention_id").get<std::string>();
    m.sentence.doc_id = j.at("doc_id").get<std::string>();
    m.sentence.sent_index = j.at("sent_index").get<int>();
    m.token_start = j.at("token_start").get<int>();
    m.token_end = j.at("token_end").get<int>();
    m.surface = j.value("surface", std::string());
    m.kind = kind;
    if (m.mention_id.empty()) {
      throw ValidationError(Code::kParse, "empty mention_id", file, line);
    }
    if (corpus_.FindDocument(m.sentence.doc_id) == nullptr) {
      throw ValidationError(Code::kUnknownDocId,
                            m.sentence.doc_id + " (mention " + m.mention_id +
                                ")",
                            file, line);
    }
    if (!corpus_.SpanInRange(m)) {
      throw ValidationError(Code::kSpanOutOfRange, m.mention_id, file, line);
    }
    if (!ids_.insert(m.mention_id).second) {
      throw ValidationError(Code::kDuplicateMentionId, m.mention_id, file,
                            line);
    }
    return m;
  }

  RawCluster ReadCluster(const json &j, ClusterKind kind, MentionKind mkind,
                         const char *file, int line) {
    RawCluster c;
    c.cluster_id = j.at("cluster_id").get<std::string>();
    c.kind = kind;
    for (const json &jm : j.at("mentions")) {
      c.mentions.push_back(ReadMention(jm, mkind, file, line));
    }
    if (c.mentions.empty()) {
      throw ValidationError(Code::kEmptyCluster, c.cluster_id, file, line);
    }
    if (kind == ClusterKind::kEntityWd) {
      const std::string &doc = c.mentions.front().sentence.doc_id;
      for (const Mention &m : c.mentions) {
        if (m.sentence.doc_id != doc) {
          throw ValidationError(Code::kCrossDocumentCluster,
                                c.cluster_id + " (" + doc + ", " +
                                    m.sentence.doc_id + ")",
                                file, line);
        }
      }
    }
    return c;
  }

  // known: ids the pair endpoints must come from.
  PairScore ReadPair(const json &j, const std::unordered_set<std::string> &known,
                     std::set<std::pair<std::string, std::string>> &seen,
                     const char *file, int line) {
    PairScore p;
    p.mention_a = j.at("mention_a").get<std::string>();
    p.mention_b = j.at("mention_b").get<std::string>();
    p.score = j.at("score").get<double>();
    if (!(p.score >= 0.0 && p.score <= 1.0)) {
      throw ValidationError(Code::kScoreOutOfRange,
                            p.mention_a + "/" + p.mention_b + " = " +
                                j.at("score").dump(),
                            file, line);
    }
    for (const std::string *id : {&p.mention_a, &p.mention_b}) {
      if (!known.contains(*id)) {
        throw ValidationError(Code::kUnknownMentionId, *id, file, line);
      }
    }
    if (p.mention_a == p.mention_b) {
      throw ValidationError(Code::kSelfPair, p.mention_a, file, line);
    }
    if (p.mention_b < p.mention_a) std::swap(p.mention_a, p.mention_b);
    if (!seen.emplace(p.mention_a, p.mention_b).second) {
      throw ValidationError(Code::kDuplicatePair,
                            p.mention_a + "/" + p.mention_b, file, line);
    }
    return p;
  }

 private:
  const Corpus &corpus_;
  std::unordered_set<std::string> ids_;
};

}  // namespace

AnnotationBundle LoadBundle(const Corpus &corpus, const BundleSources &sources) {
  AnnotationBundle bundle;
  BundleReader reader(corpus);

  reader.ForEachRecord(sources.event_clusters, kEventClustersFile,
                       [&](const json &j, int line) {
                         bundle.event_clusters.push_back(reader.ReadCluster(
                             j, ClusterKind::kEvent, MentionKind::kEvent,
                             kEventClustersFile, line));
                       });

  std::unordered_set<std::string> entity_ids;
  reader.ForEachRecord(sources.entity_wd_clusters, kEntityWdClustersFile,
                       [&](const json &j, int line) {
                         RawCluster c = reader.ReadCluster(
                             j, ClusterKind::kEntityWd, MentionKind::kEntity,
                             kEntityWdClustersFile, line);
                         for (const Mention &m : c.mentions) {
                           entity_ids.insert(m.mention_id);
                         }
                         bundle.entity_wd_clusters.push_back(std::move(c));
                       });

  std::set<std::pair<std::string, std::string>> cd_seen;
  reader.ForEachRecord(sources.entity_cd_scores, kEntityCdScoresFile,
                       [&](const json &j, int line) {
                         bundle.entity_cd_scores.push_back(reader.ReadPair(
                             j, entity_ids, cd_seen, kEntityCdScoresFile,
                             line));
                       });

  std::unordered_set<std::string> prop_ids;
  reader.ForEachRecord(sources.propositions, kPropositionsFile,
                       [&](const json &j, int line) {
                         Mention m = reader.ReadMention(
                             j, MentionKind::kProposition, kPropositionsFile,
                             line);
                         prop_ids.insert(m.mention_id);
                         bundle.proposition_mentions.push_back(std::move(m));
                       });

  std::set<std::pair<std::string, std::string>> align_seen;
  reader.ForEachRecord(sources.proposition_alignments,
                       kPropositionAlignmentsFile,
                       [&](const json &j, int line) {
                         bundle.proposition_alignments.push_back(
                             reader.ReadPair(j, prop_ids, align_seen,
                                             kPropositionAlignmentsFile, line));
                       });
  return bundle;
}

AnnotationBundle LoadBundle(const Corpus &corpus,
                            const std::filesystem::path &topic_dir) {
  auto open = [&](const char *name) -> std::unique_ptr<std::ifstream> {
    auto path = topic_dir / name;
    if (!std::filesystem::exists(path)) return nullptr;
    auto in = std::make_unique<std::ifstream>(path, std::ios::binary);
    if (!*in) {
      throw ValidationError(Code::kParse, "cannot open file", name);
    }
    return in;
  };
  auto events = open(kEventClustersFile);
  auto wd = open(kEntityWdClustersFile);
  auto cd = open(kEntityCdScoresFile);
  auto props = open(kPropositionsFile);
  auto aligns = open(kPropositionAlignmentsFile);
  BundleSources sources{events.get(), wd.get(), cd.get(), props.get(),
                        aligns.get()};
  return LoadBundle(corpus, sources);
}

std::vector<SurfaceMismatch> ValidateSurfaces(const Corpus &corpus,
                                              const AnnotationBundle &bundle) {
  std::vector<SurfaceMismatch> report;
  auto check = [&](const Mention &m) {
    std::string actual = corpus.MentionSurface(m);
    if (actual != m.surface) report.push_back({m.mention_id, m.surface, actual});
  };
  for (const RawCluster &c : bundle.event_clusters) {
    for (const Mention &m : c.mentions) check(m);
  }
  for (const RawCluster &c : bundle.entity_wd_clusters) {
    for (const Mention &m : c.mentions) check(m);
  }
  for (const Mention &m : bundle.proposition_mentions) check(m);
  return report;
}

}  // namespace facetnav
