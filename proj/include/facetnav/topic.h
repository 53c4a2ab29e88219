#pragma once

#include <filesystem>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "facetnav/corpus.h"
#include "facetnav/facets.h"

namespace facetnav {

// A loaded topic: corpus, facet tables and the lookup structures the
// exploration engine needs. Immutable after construction.
class Topic {
 public:
  Topic(std::string topic_id, std::string display_name, Corpus corpus,
        FacetTables facets, ClusteringConfig config);
  Topic(const Topic &) = delete;
  Topic &operator=(const Topic &) = delete;

  const std::string &id() const { return id_; }
  const std::string &display_name() const { return display_name_; }
  const Corpus &corpus() const { return corpus_; }
  const FacetTables &facets() const { return facets_; }
  const ClusteringConfig &config() const { return config_; }

  const FacetValue *FindValue(std::string_view value_id) const;
  // Throws NotFoundError.
  const FacetValue &Value(std::string_view value_id) const;

  // Sorted, distinct sentence ids of a value.
  std::span<const SentenceId> SentenceIds(std::string_view value_id) const;
  // Sentence id of each mention, parallel to FacetValue::mentions.
  std::span<const SentenceId> MentionSentenceIds(std::string_view value_id) const;

  // Values in facet order (concepts, entities, statements).
  std::span<const FacetValue *const> AllValues() const { return all_; }

 private:
  struct ValueIndex {
    const FacetValue *value;
    std::vector<SentenceId> sentences;
    std::vector<SentenceId> mention_sentences;
  };

  const ValueIndex &IndexOf(std::string_view value_id) const;

  std::string id_;
  std::string display_name_;
  Corpus corpus_;
  FacetTables facets_;
  ClusteringConfig config_;
  std::vector<const FacetValue *> all_;
  std::unordered_map<std::string, ValueIndex> values_;
};

// Loads documents.jsonl and the annotation files of a topic directory and
// builds the facets. The topic id is the directory name; the display name
// comes from topic.json when present. Throws ValidationError when stored
// mention surfaces disagree with the corpus unless force is set.
std::shared_ptr<const Topic> BuildTopic(const std::filesystem::path &topic_dir,
                                        const ClusteringConfig &config,
                                        bool force = false);

// Binary index: magic "FNAVIDX1" followed by a CBOR document.
void SaveIndex(const Topic &topic, std::ostream &out);
void SaveIndex(const Topic &topic, const std::filesystem::path &path);
std::shared_ptr<const Topic> LoadIndex(std::istream &in);
std::shared_ptr<const Topic> LoadIndex(const std::filesystem::path &path);

// Diagnostic form: one JSON object per facet value.
void WriteFacetsJsonl(const Topic &topic, std::ostream &out);

}  // namespace facetnav
