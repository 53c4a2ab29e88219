#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "facetnav/corpus.h"

namespace facetnav {

enum class ClusterKind { kEvent, kEntityWd, kProposition };

struct RawCluster {
  std::string cluster_id;
  ClusterKind kind = ClusterKind::kEvent;
  std::vector<Mention> mentions;
};

// Unordered pair score. Loading normalizes so that mention_a < mention_b.
struct PairScore {
  std::string mention_a;
  std::string mention_b;
  double score = 0.0;

  bool operator==(const PairScore &) const = default;
};

struct AnnotationBundle {
  std::vector<RawCluster> event_clusters;
  std::vector<RawCluster> entity_wd_clusters;
  std::vector<PairScore> entity_cd_scores;
  std::vector<Mention> proposition_mentions;
  std::vector<PairScore> proposition_alignments;

  bool empty() const {
    return event_clusters.empty() && entity_wd_clusters.empty() &&
           proposition_mentions.empty();
  }
};

// Names of the per-topic annotation files.
inline constexpr const char *kEventClustersFile = "event_clusters.jsonl";
inline constexpr const char *kEntityWdClustersFile = "entity_wd_clusters.jsonl";
inline constexpr const char *kEntityCdScoresFile = "entity_cd_scores.jsonl";
inline constexpr const char *kPropositionsFile = "propositions.jsonl";
inline constexpr const char *kPropositionAlignmentsFile =
    "proposition_alignments.jsonl";
inline constexpr const char *kDocumentsFile = "documents.jsonl";

// In-memory sources for each annotation file; a null stream means the file
// is absent and the corresponding facet input is empty.
struct BundleSources {
  std::istream *event_clusters = nullptr;
  std::istream *entity_wd_clusters = nullptr;
  std::istream *entity_cd_scores = nullptr;
  std::istream *propositions = nullptr;
  std::istream *proposition_alignments = nullptr;
};

// Parses and validates a bundle against the corpus. Throws ValidationError
// with file/line context on the first defect.
AnnotationBundle LoadBundle(const Corpus &corpus, const BundleSources &sources);

// Reads the annotation files of a topic directory; missing files are empty.
AnnotationBundle LoadBundle(const Corpus &corpus,
                            const std::filesystem::path &topic_dir);

struct SurfaceMismatch {
  std::string mention_id;
  std::string stored;
  std::string actual;
};

// Lists every mention whose stored surface differs from its span text.
std::vector<SurfaceMismatch> ValidateSurfaces(const Corpus &corpus,
                                              const AnnotationBundle &bundle);

}  // namespace facetnav
