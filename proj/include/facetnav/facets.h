#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "facetnav/annotations.h"
#include "facetnav/corpus.h"

namespace facetnav {

enum class FacetKind { kConcepts = 0, kEntities = 1, kStatements = 2 };
inline constexpr std::array<FacetKind, 3> kAllFacets = {
    FacetKind::kConcepts, FacetKind::kEntities, FacetKind::kStatements};

const char *FacetKindName(FacetKind kind);
std::optional<FacetKind> ParseFacetKind(std::string_view name);

enum class EntityCategory {
  kNone,
  kPerson,
  kLocation,
  kOrganization,
  kMiscellaneous
};

const char *EntityCategoryName(EntityCategory category);
std::optional<EntityCategory> ParseEntityCategory(std::string_view name);

struct ClusteringConfig {
  double wd_pair_score = 1.0;
  double cd_merge_threshold = 0.5;  // in (0, 1]
  double alignment_threshold = 0.5;
  int max_cluster_mentions = 50;
  int min_label_chars = 3;

  // Throws std::invalid_argument when a field is outside its range.
  void Validate() const;
};

// A cluster of mentions with a display label, before and after filtering.
struct FacetValue {
  std::string value_id;
  FacetKind facet = FacetKind::kConcepts;
  std::string label;
  std::vector<Mention> mentions;  // corpus order
  EntityCategory category = EntityCategory::kNone;

  int frequency() const { return static_cast<int>(mentions.size()); }
  // Distinct sentences of the mentions, sorted.
  std::vector<SentenceRef> SentenceSet() const;
};

struct FacetTables {
  std::vector<FacetValue> concepts;
  std::vector<FacetValue> entities;
  std::vector<FacetValue> statements;

  std::vector<FacetValue> &of(FacetKind kind);
  const std::vector<FacetValue> &of(FacetKind kind) const;
};

// Orders mentions by (doc_id, sent_index, token_start, token_end, id).
bool MentionPositionLess(const Mention &a, const Mention &b);

// Number of Unicode code points in a UTF-8 string.
std::size_t CharCount(std::string_view utf8);

// ASCII case folding; non-ASCII bytes are left unchanged.
std::string FoldCase(std::string_view text);

// True iff the mention's final token is tagged VERB.
bool MentionIsVerbal(const Corpus &corpus, const Mention &mention);

// Drops clusters in which strictly more than half of the mentions are verbal.
std::vector<RawCluster> FilterVerbalEventClusters(
    const Corpus &corpus, std::vector<RawCluster> clusters);

// Most frequent surface (case-insensitive) for concepts and entities, longest
// surface for statements. Ties go to the smallest folded surface; the casing
// returned is that of the earliest mention in corpus order.
std::string ClusterLabel(std::span<const Mention> mentions, FacetKind facet);

struct LabeledCluster {
  std::string label;
  std::vector<Mention> mentions;
};

// Unions clusters whose labels match case-insensitively and relabels them,
// repeating until labels are pairwise distinct.
std::vector<LabeledCluster> MergeSameLabelEventClusters(
    std::vector<LabeledCluster> clusters);

// Every unordered pair inside a within-document cluster scored
// wd_pair_score; pairs are normalized so that mention_a < mention_b.
std::vector<PairScore> WdClustersToPairScores(std::span<const RawCluster> wd,
                                              const ClusteringConfig &config);

// Average-linkage agglomerative clustering seeded with the within-document
// partition. Returns groups of mentions in corpus order; groups are ordered
// by their first mention.
std::vector<std::vector<Mention>> AgglomerativeEntityClustering(
    std::span<const RawCluster> wd, std::span<const PairScore> cd,
    const ClusteringConfig &config);

// Majority NER tag among fully tagged mentions, MISCELLANEOUS when none.
EntityCategory CategorizeEntityCluster(const Corpus &corpus,
                                       std::span<const Mention> mentions);

// Connected components of the graph of alignments scoring strictly above
// the threshold. Singletons are kept.
std::vector<std::vector<Mention>> PropositionClusters(
    std::span<const Mention> propositions, std::span<const PairScore> alignments,
    const ClusteringConfig &config);

enum class FilterReason {
  kNone,
  kTooManyMentions,
  kSingleSentence,
  kShortLabel,
  kVerbLabel,
};

const char *FilterReasonName(FilterReason reason);

// First filter the candidate fails, in fixed order.
FilterReason CheckFacetFilters(const Corpus &corpus, const FacetValue &value,
                               const ClusteringConfig &config);

std::vector<FacetValue> ApplyFacetFilters(const Corpus &corpus,
                                          std::vector<FacetValue> values,
                                          const ClusteringConfig &config);

// Descending frequency, then folded label, then raw label, then first mention.
void SortFacetValues(std::vector<FacetValue> &values);

FacetTables BuildFacets(const Corpus &corpus, const AnnotationBundle &bundle,
                        const ClusteringConfig &config);

}  // namespace facetnav
