#include "facetnav/facets.h"

#include <algorithm>
#include <limits>
#include <map>
#include <queue>
#include <stdexcept>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "facetnav/union_find.h"

namespace facetnav {

const char *FacetKindName(FacetKind kind) {
  switch (kind) {
    case FacetKind::kConcepts: return "CONCEPTS";
    case FacetKind::kEntities: return "ENTITIES";
    case FacetKind::kStatements: return "STATEMENTS";
  }
  return "?";
}

std::optional<FacetKind> ParseFacetKind(std::string_view name) {
  for (FacetKind k : kAllFacets) {
    if (name == FacetKindName(k)) return k;
  }
  return std::nullopt;
}

const char *EntityCategoryName(EntityCategory category) {
  switch (category) {
    case EntityCategory::kNone: return "NONE";
    case EntityCategory::kPerson: return "PERSON";
    case EntityCategory::kLocation: return "LOCATION";
    case EntityCategory::kOrganization: return "ORGANIZATION";
    case EntityCategory::kMiscellaneous: return "MISCELLANEOUS";
  }
  return "?";
}

std::optional<EntityCategory> ParseEntityCategory(std::string_view name) {
  for (auto c : {EntityCategory::kNone, EntityCategory::kPerson,
                 EntityCategory::kLocation, EntityCategory::kOrganization,
                 EntityCategory::kMiscellaneous}) {
    if (name == EntityCategoryName(c)) return c;
  }
  return std::nullopt;
}

void ClusteringConfig::Validate() const {
  if (!(cd_merge_threshold > 0.0 && cd_merge_threshold <= 1.0)) {
    throw std::invalid_argument("cd_merge_threshold must be in (0, 1]");
  }
  if (!(alignment_threshold >= 0.0 && alignment_threshold <= 1.0)) {
    throw std::invalid_argument("alignment_threshold must be in [0, 1]");
  }
  if (!(wd_pair_score >= 0.0 && wd_pair_score <= 1.0)) {
    throw std::invalid_argument("wd_pair_score must be in [0, 1]");
  }
  if (max_cluster_mentions < 1) {
    throw std::invalid_argument("max_cluster_mentions must be positive");
  }
  if (min_label_chars < 0) {
    throw std::invalid_argument("min_label_chars must be non-negative");
  }
}

std::vector<SentenceRef> FacetValue::SentenceSet() const {
  std::vector<SentenceRef> refs;
  refs.reserve(mentions.size());
  for (const Mention &m : mentions) refs.push_back(m.sentence);
  std::sort(refs.begin(), refs.end());
  refs.erase(std::unique(refs.begin(), refs.end()), refs.end());
  return refs;
}

std::vector<FacetValue> &FacetTables::of(FacetKind kind) {
  switch (kind) {
    case FacetKind::kConcepts: return concepts;
    case FacetKind::kEntities: return entities;
    case FacetKind::kStatements: return statements;
  }
  throw std::logic_error("bad facet kind");
}

const std::vector<FacetValue> &FacetTables::of(FacetKind kind) const {
  return const_cast<FacetTables *>(this)->of(kind);
}

bool MentionPositionLess(const Mention &a, const Mention &b) {
  return std::tie(a.sentence.doc_id, a.sentence.sent_index, a.token_start,
                  a.token_end, a.mention_id) <
         std::tie(b.sentence.doc_id, b.sentence.sent_index, b.token_start,
                  b.token_end, b.mention_id);
}

std::size_t CharCount(std::string_view utf8) {
  std::size_t n = 0;
  for (unsigned char c : utf8) {
    if ((c & 0xC0) != 0x80) ++n;
  }
  return n;
}

std::string FoldCase(std::string_view text) {
  std::string out(text);
  for (char &c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

bool MentionIsVerbal(const Corpus &corpus, const Mention &mention) {
  const Sentence *s = corpus.FindSentence(mention.sentence);
  if (s == nullptr || !corpus.SpanInRange(mention)) return false;
  return s->tokens[mention.token_end].pos == "VERB";
}

std::vector<RawCluster> FilterVerbalEventClusters(
    const Corpus &corpus, std::vector<RawCluster> clusters) {
  std::erase_if(clusters, [&](const RawCluster &c) {
    std::size_t verbal = std::count_if(
        c.mentions.begin(), c.mentions.end(),
        [&](const Mention &m) { return MentionIsVerbal(corpus, m); });
    return 2 * verbal > c.mentions.size();
  });
  return clusters;
}

namespace {

std::vector<Mention> SortedByPosition(std::span<const Mention> mentions) {
  std::vector<Mention> out(mentions.begin(), mentions.end());
  std::sort(out.begin(), out.end(), MentionPositionLess);
  return out;
}

}  // namespace

std::string ClusterLabel(std::span<const Mention> mentions, FacetKind facet) {
  if (mentions.empty()) return {};
  std::vector<Mention> ordered = SortedByPosition(mentions);

  // Score per folded surface; higher wins, then smaller folded surface.
  std::map<std::string, std::size_t> score;
  for (const Mention &m : ordered) {
    std::string key = FoldCase(m.surface);
    if (facet == FacetKind::kStatements) {
      score[key] = CharCount(m.surface);
    } else {
      ++score[key];
    }
  }
  auto best = score.begin();
  for (auto it = score.begin(); it != score.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  for (const Mention &m : ordered) {
    if (FoldCase(m.surface) == best->first) return m.surface;
  }
  return ordered.front().surface;
}

std::vector<LabeledCluster> MergeSameLabelEventClusters(
    std::vector<LabeledCluster> clusters) {
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<LabeledCluster> merged;
    std::unordered_map<std::string, std::size_t> by_label;
    for (LabeledCluster &c : clusters) {
      std::string key = FoldCase(c.label);
      auto [it, inserted] = by_label.emplace(key, merged.size());
      if (inserted) {
        merged.push_back(std::move(c));
        continue;
      }
      LabeledCluster &into = merged[it->second];
      into.mentions.insert(into.mentions.end(), c.mentions.begin(),
                           c.mentions.end());
      changed = true;
    }
    if (changed) {
      for (LabeledCluster &c : merged) {
        std::sort(c.mentions.begin(), c.mentions.end(), MentionPositionLess);
        c.mentions.erase(
            std::unique(c.mentions.begin(), c.mentions.end(),
                        [](const Mention &a, const Mention &b) {
                          return a.mention_id == b.mention_id;
                        }),
            c.mentions.end());
        c.label = ClusterLabel(c.mentions, FacetKind::kConcepts);
      }
    }
    clusters = std::move(merged);
  }
  return clusters;
}

std::vector<PairScore> WdClustersToPairScores(std::span<const RawCluster> wd,
                                              const ClusteringConfig &config) {
  std::vector<PairScore> pairs;
  for (const RawCluster &c : wd) {
    for (std::size_t i = 0; i < c.mentions.size(); ++i) {
      for (std::size_t j = i + 1; j < c.mentions.size(); ++j) {
        PairScore p{c.mentions[i].mention_id, c.mentions[j].mention_id,
                    config.wd_pair_score};
        if (p.mention_b < p.mention_a) std::swap(p.mention_a, p.mention_b);
        pairs.push_back(std::move(p));
      }
    }
  }
  return pairs;
}

namespace {

struct Group {
  std::vector<std::size_t> members;
  std::string rep;  // smallest mention_id
  unsigned version = 0;
  bool alive = true;
  // Neighbor group -> sum of pair scores across the two groups.
  std::unordered_map<std::size_t, double> sums;
};

struct Candidate {
  double distance;
  std::string lo, hi;  // representative pair
  std::size_t a, b;
  unsigned ver_a, ver_b;

  // Priority: smallest distance, then smallest representative pair.
  bool operator<(const Candidate &o) const {
    if (distance != o.distance) return distance > o.distance;
    return std::tie(lo, hi) > std::tie(o.lo, o.hi);
  }
};

}  // namespace

std::vector<std::vector<Mention>> AgglomerativeEntityClustering(
    std::span<const RawCluster> wd, std::span<const PairScore> cd,
    const ClusteringConfig &config) {
  std::vector<const Mention *> mentions;
  std::unordered_map<std::string, std::size_t> group_of;
  std::vector<Group> groups;
  for (const RawCluster &c : wd) {
    Group g;
    for (const Mention &m : c.mentions) {
      if (group_of.contains(m.mention_id)) continue;
      group_of.emplace(m.mention_id, groups.size());
      g.members.push_back(mentions.size());
      mentions.push_back(&m);
      if (g.rep.empty() || m.mention_id < g.rep) g.rep = m.mention_id;
    }
    if (!g.members.empty()) groups.push_back(std::move(g));
  }

  for (const PairScore &p : cd) {
    auto a = group_of.find(p.mention_a);
    auto b = group_of.find(p.mention_b);
    if (a == group_of.end() || b == group_of.end()) continue;
    if (a->second == b->second) continue;  // inside a seeded group
    groups[a->second].sums[b->second] += p.score;
    groups[b->second].sums[a->second] += p.score;
  }

  auto make_candidate = [&](std::size_t a, std::size_t b) {
    const Group &ga = groups[a];
    const Group &gb = groups[b];
    double pairs = static_cast<double>(ga.members.size()) *
                   static_cast<double>(gb.members.size());
    double distance = 1.0 - ga.sums.at(b) / pairs;
    Candidate c{distance, ga.rep, gb.rep, a, b, ga.version, gb.version};
    if (c.hi < c.lo) std::swap(c.lo, c.hi);
    return c;
  };

  std::priority_queue<Candidate> queue;
  for (std::size_t a = 0; a < groups.size(); ++a) {
    for (const auto &[b, sum] : groups[a].sums) {
      if (a < b) queue.push(make_candidate(a, b));
    }
  }

  const double stop_distance = 1.0 - config.cd_merge_threshold;
  while (!queue.empty()) {
    Candidate top = queue.top();
    queue.pop();
    Group &ga = groups[top.a];
    Group &gb = groups[top.b];
    if (!ga.alive || !gb.alive || ga.version != top.ver_a ||
        gb.version != top.ver_b) {
      continue;
    }
    if (top.distance > stop_distance) break;

    // Fold gb into ga.
    ga.members.insert(ga.members.end(), gb.members.begin(), gb.members.end());
    ga.rep = std::min(ga.rep, gb.rep);
    ga.sums.erase(top.b);
    for (const auto &[c, sum] : gb.sums) {
      if (c == top.a) continue;
      ga.sums[c] += sum;
      Group &gc = groups[c];
      gc.sums.erase(top.b);
      gc.sums[top.a] += sum;
    }
    gb.alive = false;
    gb.sums.clear();
    gb.members.clear();
    ++ga.version;
    ++gb.version;
    for (const auto &[c, sum] : ga.sums) {
      queue.push(make_candidate(top.a, c));
    }
  }

  std::vector<std::vector<Mention>> out;
  for (const Group &g : groups) {
    if (!g.alive) continue;
    std::vector<Mention> cluster;
    for (std::size_t i : g.members) cluster.push_back(*mentions[i]);
    std::sort(cluster.begin(), cluster.end(), MentionPositionLess);
    out.push_back(std::move(cluster));
  }
  std::sort(out.begin(), out.end(), [](const auto &x, const auto &y) {
    return MentionPositionLess(x.front(), y.front());
  });
  return out;
}

namespace {

// Maps tagger-specific names onto the three tracked classes.
EntityCategory NerClass(std::string_view tag) {
  if (tag == "PERSON" || tag == "PER") return EntityCategory::kPerson;
  if (tag == "LOCATION" || tag == "LOC" || tag == "GPE") {
    return EntityCategory::kLocation;
  }
  if (tag == "ORGANIZATION" || tag == "ORG") {
    return EntityCategory::kOrganization;
  }
  return EntityCategory::kNone;
}

}  // namespace

EntityCategory CategorizeEntityCluster(const Corpus &corpus,
                                       std::span<const Mention> mentions) {
  int person = 0, location = 0, organization = 0;
  for (const Mention &m : mentions) {
    const Sentence *s = corpus.FindSentence(m.sentence);
    if (s == nullptr || !corpus.SpanInRange(m)) continue;
    EntityCategory cls = NerClass(s->tokens[m.token_start].ner);
    for (int i = m.token_start + 1; i <= m.token_end && cls != EntityCategory::kNone;
         ++i) {
      if (NerClass(s->tokens[i].ner) != cls) cls = EntityCategory::kNone;
    }
    switch (cls) {
      case EntityCategory::kPerson: ++person; break;
      case EntityCategory::kLocation: ++location; break;
      case EntityCategory::kOrganization: ++organization; break;
      default: break;
    }
  }
  if (person == 0 && location == 0 && organization == 0) {
    return EntityCategory::kMiscellaneous;
  }
  if (person >= location && person >= organization) {
    return EntityCategory::kPerson;
  }
  if (location >= organization) return EntityCategory::kLocation;
  return EntityCategory::kOrganization;
}

std::vector<std::vector<Mention>> PropositionClusters(
    std::span<const Mention> propositions, std::span<const PairScore> alignments,
    const ClusteringConfig &config) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < propositions.size(); ++i) {
    index.emplace(propositions[i].mention_id, i);
  }
  UnionFind sets(propositions.size());
  for (const PairScore &p : alignments) {
    if (!(p.score > config.alignment_threshold)) continue;
    auto a = index.find(p.mention_a);
    auto b = index.find(p.mention_b);
    if (a == index.end() || b == index.end()) continue;
    sets.Union(a->second, b->second);
  }
  std::vector<std::vector<Mention>> out;
  std::unordered_map<std::size_t, std::size_t> component;
  for (std::size_t i = 0; i < propositions.size(); ++i) {
    auto [it, inserted] = component.emplace(sets.Find(i), out.size());
    if (inserted) out.emplace_back();
    out[it->second].push_back(propositions[i]);
  }
  return out;
}

const char *FilterReasonName(FilterReason reason) {
  switch (reason) {
    case FilterReason::kNone: return "kept";
    case FilterReason::kTooManyMentions: return "too many mentions";
    case FilterReason::kSingleSentence: return "single linked sentence";
    case FilterReason::kShortLabel: return "short label";
    case FilterReason::kVerbLabel: return "verb label";
  }
  return "?";
}

namespace {

bool LabelHasVerb(const Corpus &corpus, const FacetValue &value) {
  const Mention *source = nullptr;
  for (const Mention &m : value.mentions) {
    if (m.surface == value.label) {
      source = &m;
      break;
    }
  }
  if (source == nullptr) {
    std::string folded = FoldCase(value.label);
    for (const Mention &m : value.mentions) {
      if (FoldCase(m.surface) == folded) {
        source = &m;
        break;
      }
    }
  }
  if (source == nullptr || !corpus.SpanInRange(*source)) return false;
  const Sentence &s = *corpus.FindSentence(source->sentence);
  for (int i = source->token_start; i <= source->token_end; ++i) {
    if (s.tokens[i].pos == "VERB") return true;
  }
  return false;
}

}  // namespace

FilterReason CheckFacetFilters(const Corpus &corpus, const FacetValue &value,
                               const ClusteringConfig &config) {
  if (value.frequency() > config.max_cluster_mentions) {
    return FilterReason::kTooManyMentions;
  }
  if (value.SentenceSet().size() <= 1) return FilterReason::kSingleSentence;
  if (CharCount(value.label) < static_cast<std::size_t>(config.min_label_chars)) {
    return FilterReason::kShortLabel;
  }
  // Statement labels are whole propositions and always carry a verb.
  if (value.facet != FacetKind::kStatements && LabelHasVerb(corpus, value)) {
    return FilterReason::kVerbLabel;
  }
  return FilterReason::kNone;
}

std::vector<FacetValue> ApplyFacetFilters(const Corpus &corpus,
                                          std::vector<FacetValue> values,
                                          const ClusteringConfig &config) {
  std::erase_if(values, [&](const FacetValue &v) {
    return CheckFacetFilters(corpus, v, config) != FilterReason::kNone;
  });
  return values;
}

void SortFacetValues(std::vector<FacetValue> &values) {
  std::stable_sort(values.begin(), values.end(),
                   [](const FacetValue &a, const FacetValue &b) {
                     if (a.frequency() != b.frequency()) {
                       return a.frequency() > b.frequency();
                     }
                     std::string fa = FoldCase(a.label), fb = FoldCase(b.label);
                     if (fa != fb) return fa < fb;
                     if (a.label != b.label) return a.label < b.label;
                     if (a.mentions.empty() || b.mentions.empty()) {
                       return a.mentions.size() < b.mentions.size();
                     }
                     return MentionPositionLess(a.mentions.front(),
                                                b.mentions.front());
                   });
}

namespace {

FacetValue MakeValue(FacetKind facet, std::vector<Mention> mentions) {
  FacetValue v;
  v.facet = facet;
  std::sort(mentions.begin(), mentions.end(), MentionPositionLess);
  v.label = ClusterLabel(mentions, facet);
  v.mentions = std::move(mentions);
  return v;
}

void Finish(const Corpus &corpus, std::vector<FacetValue> &values,
            const ClusteringConfig &config, char prefix) {
  values = ApplyFacetFilters(corpus, std::move(values), config);
  SortFacetValues(values);
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i].value_id = prefix + std::to_string(i);
  }
}

}  // namespace

FacetTables BuildFacets(const Corpus &corpus, const AnnotationBundle &bundle,
                        const ClusteringConfig &config) {
  config.Validate();
  FacetTables tables;

  std::vector<LabeledCluster> events;
  for (RawCluster &c : FilterVerbalEventClusters(corpus, bundle.event_clusters)) {
    LabeledCluster lc;
    lc.mentions = std::move(c.mentions);
    std::sort(lc.mentions.begin(), lc.mentions.end(), MentionPositionLess);
    lc.label = ClusterLabel(lc.mentions, FacetKind::kConcepts);
    events.push_back(std::move(lc));
  }
  for (LabeledCluster &c : MergeSameLabelEventClusters(std::move(events))) {
    tables.concepts.push_back(
        MakeValue(FacetKind::kConcepts, std::move(c.mentions)));
  }

  for (auto &group : AgglomerativeEntityClustering(
           bundle.entity_wd_clusters, bundle.entity_cd_scores, config)) {
    FacetValue v = MakeValue(FacetKind::kEntities, std::move(group));
    v.category = CategorizeEntityCluster(corpus, v.mentions);
    tables.entities.push_back(std::move(v));
  }

  for (auto &group : PropositionClusters(bundle.proposition_mentions,
                                         bundle.proposition_alignments, config)) {
    tables.statements.push_back(
        MakeValue(FacetKind::kStatements, std::move(group)));
  }

  Finish(corpus, tables.concepts, config, 'c');
  Finish(corpus, tables.entities, config, 'e');
  Finish(corpus, tables.statements, config, 's');
  return tables;
}

}  // namespace facetnav
