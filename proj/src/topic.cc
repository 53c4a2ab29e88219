#include "facetnav/topic.h"

#include <algorithm>
#include <fstream>
#include <iterator>

#include "facetnav/annotations.h"
#include "facetnav/errors.h"
#include "json.hpp"

namespace facetnav {
namespace {

using nlohmann::json;
constexpr char kMagic[8] = {'F', 'N', 'A', 'V', 'I', 'D', 'X', '1'};
constexpr int kFormatVersion = 1;

json MentionJson(const Mention &m) {
  return {{"mention_id", m.mention_id},
          {"doc_id", m.sentence.doc_id},
          {"sent_index", m.sentence.sent_index},
          {"token_start", m.token_start},
          {"token_end", m.token_end},
          {"surface", m.surface}};
}

MentionKind KindOf(FacetKind facet) {
  switch (facet) {
    case FacetKind::kConcepts: return MentionKind::kEvent;
    case FacetKind::kEntities: return MentionKind::kEntity;
    case FacetKind::kStatements: return MentionKind::kProposition;
  }
  return MentionKind::kEntity;
}

json ValueJson(const FacetValue &v) {
  json mentions = json::array();
  for (const Mention &m : v.mentions) mentions.push_back(MentionJson(m));
  return {{"value_id", v.value_id},
          {"facet", FacetKindName(v.facet)},
          {"label", v.label},
          {"category", EntityCategoryName(v.category)},
          {"frequency", v.frequency()},
          {"mentions", std::move(mentions)}};
}

json ConfigJson(const ClusteringConfig &c) {
  return {{"wd_pair_score", c.wd_pair_score},
          {"cd_merge_threshold", c.cd_merge_threshold},
          {"alignment_threshold", c.alignment_threshold},
          {"max_cluster_mentions", c.max_cluster_mentions},
          {"min_label_chars", c.min_label_chars}};
}

}  // namespace

Topic::Topic(std::string topic_id, std::string display_name, Corpus corpus,
             FacetTables facets, ClusteringConfig config)
    : id_(std::move(topic_id)),
      display_name_(std::move(display_name)),
      corpus_(std::move(corpus)),
      facets_(std::move(facets)),
      config_(config) {
  for (FacetKind kind : kAllFacets) {
    for (const FacetValue &v : facets_.of(kind)) {
      ValueIndex index{&v, {}, {}};
      for (const Mention &m : v.mentions) {
        auto id = corpus_.IdOf(m.sentence);
        if (!id) {
          throw ValidationError(ValidationError::Code::kUnknownDocId,
                                m.sentence.doc_id + " (mention " +
                                    m.mention_id + ")");
        }
        index.mention_sentences.push_back(*id);
      }
      index.sentences = index.mention_sentences;
      std::sort(index.sentences.begin(), index.sentences.end());
      index.sentences.erase(
          std::unique(index.sentences.begin(), index.sentences.end()),
          index.sentences.end());
      if (!values_.emplace(v.value_id, std::move(index)).second) {
        throw ValidationError(ValidationError::Code::kBadIndex,
                              "duplicate value_id " + v.value_id);
      }
      all_.push_back(&v);
    }
  }
}

const Topic::ValueIndex &Topic::IndexOf(std::string_view value_id) const {
  auto it = values_.find(std::string(value_id));
  if (it == values_.end()) {
    throw NotFoundError("facet value", std::string(value_id));
  }
  return it->second;
}

const FacetValue *Topic::FindValue(std::string_view value_id) const {
  auto it = values_.find(std::string(value_id));
  return it == values_.end() ? nullptr : it->second.value;
}

const FacetValue &Topic::Value(std::string_view value_id) const {
  return *IndexOf(value_id).value;
}

std::span<const SentenceId> Topic::SentenceIds(std::string_view value_id) const {
  return IndexOf(value_id).sentences;
}

std::span<const SentenceId> Topic::MentionSentenceIds(
    std::string_view value_id) const {
  return IndexOf(value_id).mention_sentences;
}

std::shared_ptr<const Topic> BuildTopic(const std::filesystem::path &topic_dir,
                                        const ClusteringConfig &config,
                                        bool force) {
  Corpus corpus = Corpus::LoadJsonl(topic_dir / kDocumentsFile);
  AnnotationBundle bundle = LoadBundle(corpus, topic_dir);
  auto mismatches = ValidateSurfaces(corpus, bundle);
  if (!mismatches.empty() && !force) {
    const SurfaceMismatch &m = mismatches.front();
    throw ValidationError(
        ValidationError::Code::kSurfaceMismatch,
        m.mention_id + " stores \"" + m.stored + "\" but spans \"" + m.actual +
            "\" (" + std::to_string(mismatches.size()) + " mismatches)");
  }
  FacetTables facets = BuildFacets(corpus, bundle, config);

  std::filesystem::path dir = topic_dir;
  if (!dir.has_filename()) dir = dir.parent_path();
  std::string topic_id = dir.filename().string();
  std::string display = topic_id;
  std::ifstream meta(topic_dir / "topic.json");
  if (meta) {
    try {
      json j = json::parse(meta);
      display = j.value("display_name", display);
      topic_id = j.value("topic_id", topic_id);
    } catch (const json::exception &e) {
      throw ValidationError(ValidationError::Code::kParse, e.what(),
                            "topic.json");
    }
  }
  return std::make_shared<const Topic>(std::move(topic_id), std::move(display),
                                       std::move(corpus), std::move(facets),
                                       config);
}

void SaveIndex(const Topic &topic, std::ostream &out) {
  json docs = json::array();
  for (const Document &d : topic.corpus().documents()) docs.push_back(ToJson(d));
  json facets = json::object();
  for (FacetKind kind : kAllFacets) {
    json values = json::array();
    for (const FacetValue &v : topic.facets().of(kind)) {
      values.push_back(ValueJson(v));
    }
    facets[FacetKindName(kind)] = std::move(values);
  }
  json root = {{"format_version", kFormatVersion},
               {"topic_id", topic.id()},
               {"display_name", topic.display_name()},
               {"config", ConfigJson(topic.config())},
               {"documents", std::move(docs)},
               {"facets", std::move(facets)}};
  std::vector<std::uint8_t> bytes = json::to_cbor(root);
  out.write(kMagic, sizeof(kMagic));
  out.write(reinterpret_cast<const char *>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

void SaveIndex(const Topic &topic, const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  SaveIndex(topic, out);
}

std::shared_ptr<const Topic> LoadIndex(std::istream &in) {
  using Code = ValidationError::Code;
  char magic[sizeof(kMagic)] = {};
  in.read(magic, sizeof(magic));
  if (in.gcount() != sizeof(magic) ||
      !std::equal(std::begin(magic), std::end(magic), std::begin(kMagic))) {
    throw ValidationError(Code::kBadIndex, "missing magic header");
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    json root = json::from_cbor(bytes);
    if (root.at("format_version").get<int>() != kFormatVersion) {
      throw ValidationError(Code::kBadIndex, "unsupported format_version");
    }
    std::vector<Document> docs;
    for (const json &d : root.at("documents")) docs.push_back(DocumentFromJson(d));
    Corpus corpus(std::move(docs));

    const json &jc = root.at("config");
    ClusteringConfig config;
    config.wd_pair_score = jc.at("wd_pair_score").get<double>();
    config.cd_merge_threshold = jc.at("cd_merge_threshold").get<double>();
    config.alignment_threshold = jc.at("alignment_threshold").get<double>();
    config.max_cluster_mentions = jc.at("max_cluster_mentions").get<int>();
    config.min_label_chars = jc.at("min_label_chars").get<int>();

    FacetTables tables;
    for (FacetKind kind : kAllFacets) {
      for (const json &jv : root.at("facets").at(FacetKindName(kind))) {
        FacetValue v;
        v.value_id = jv.at("value_id").get<std::string>();
        v.facet = kind;
        v.label = jv.at("label").get<std::string>();
        auto category = ParseEntityCategory(jv.at("category").get<std::string>());
        if (!category) throw ValidationError(Code::kBadIndex, "bad category");
        v.category = *category;
        for (const json &jm : jv.at("mentions")) {
          Mention m;
          m.mention_id = jm.at("mention_id").get<std::string>();
          m.sentence = {jm.at("doc_id").get<std::string>(),
                        jm.at("sent_index").get<int>()};
          m.token_start = jm.at("token_start").get<int>();
          m.token_end = jm.at("token_end").get<int>();
          m.surface = jm.at("surface").get<std::string>();
          m.kind = KindOf(kind);
          if (!corpus.SpanInRange(m)) {
            throw ValidationError(Code::kSpanOutOfRange, m.mention_id);
          }
          v.mentions.push_back(std::move(m));
        }
        tables.of(kind).push_back(std::move(v));
      }
    }
    return std::make_shared<const Topic>(
        root.at("topic_id").get<std::string>(),
        root.at("display_name").get<std::string>(), std::move(corpus),
        std::move(tables), config);
  } catch (const json::exception &e) {
    throw ValidationError(Code::kBadIndex, e.what());
  }
}

std::shared_ptr<const Topic> LoadIndex(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError(ValidationError::Code::kBadIndex, "cannot open file",
                          path.string());
  }
  return LoadIndex(in);
}

void WriteFacetsJsonl(const Topic &topic, std::ostream &out) {
  for (FacetKind kind : kAllFacets) {
    for (const FacetValue &v : topic.facets().of(kind)) {
      json j = ValueJson(v);
      json sentences = json::array();
      for (const SentenceRef &r : v.SentenceSet()) {
        sentences.push_back({r.doc_id, r.sent_index});
      }
      j["sentence_set"] = std::move(sentences);
      out << j.dump() << '\n';
    }
  }
}

}  // namespace facetnav
