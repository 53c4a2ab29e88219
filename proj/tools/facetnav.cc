// facetnav: build facet indexes, query them offline, or serve the HTTP API.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "facetnav/errors.h"
#include "facetnav/service.h"
#include "facetnav/summarization.h"
#include "facetnav/topic.h"
#include "httplib.h"

namespace fs = std::filesystem;
using namespace facetnav;

namespace {

constexpr int kExitError = 1;
constexpr int kExitNotFound = 2;
constexpr int kExitInvalid = 3;

void AddClusteringFlags(CLI::App *cmd, ClusteringConfig &config) {
  cmd->add_option("--cd-threshold", config.cd_merge_threshold,
                  "Average-linkage merge threshold for entities")
      ->capture_default_str();
  cmd->add_option("--alignment-threshold", config.alignment_threshold,
                  "Proposition alignment score an edge must exceed")
      ->capture_default_str();
  cmd->add_option("--max-mentions", config.max_cluster_mentions,
                  "Largest facet-value cluster kept")
      ->capture_default_str();
}

struct SummaryFlags {
  std::string summarizer_url;
  int timeout_ms = 10000;
  std::size_t token_budget = 1024;
  std::size_t output_tokens = 100;
  std::size_t cache_size = 1024;
  std::string order = "position";
};

void AddSummaryFlags(CLI::App *cmd, SummaryFlags &flags) {
  cmd->add_option("--summarizer-url", flags.summarizer_url,
                  "Base URL of an external summarizer (POST /summarize)")
      ->envname("SUMMARIZER_URL");
  cmd->add_option("--summarizer-timeout-ms", flags.timeout_ms,
                  "External summarizer timeout")
      ->envname("SUMMARIZER_TIMEOUT_MS")
      ->capture_default_str();
  cmd->add_option("--token-budget", flags.token_budget,
                  "Summarizer input budget in tokens")
      ->capture_default_str();
  cmd->add_option("--summary-tokens", flags.output_tokens,
                  "Extractive fallback output budget in tokens")
      ->capture_default_str();
  cmd->add_option("--order", flags.order, "Summarizer input order")
      ->check(CLI::IsMember({"position", "document"}))
      ->capture_default_str();
}

std::shared_ptr<Summarizer> MakeSummarizer(const SummaryFlags &flags) {
  SummarizerOptions options;
  options.token_budget = flags.token_budget;
  options.output_tokens = flags.output_tokens;
  options.cache_capacity = flags.cache_size;
  options.order = flags.order == "document" ? SentenceOrder::kDocumentMajor
                                            : SentenceOrder::kPositionMajor;
  std::shared_ptr<SummarizerBackend> external;
  if (!flags.summarizer_url.empty()) {
    external = std::make_shared<HttpSummarizerBackend>(
        flags.summarizer_url, std::chrono::milliseconds(flags.timeout_ms));
  }
  return std::make_shared<Summarizer>(options, std::move(external));
}

std::shared_ptr<const Topic> OpenTopic(const fs::path &path,
                                       const ClusteringConfig &config) {
  if (fs::is_directory(path)) {
    if (fs::exists(path / kIndexFileName)) return LoadIndex(path / kIndexFileName);
    return BuildTopic(path, config);
  }
  return LoadIndex(path);
}

void PrintTable(const Topic &topic, const QueryResult &result, std::ostream &out) {
  out << "topic: " << topic.id() << " (" << topic.display_name() << ")\n";
  out << "selected:";
  if (result.selection.empty()) out << " (none)";
  for (const std::string &id : result.selection.ids()) {
    out << " [" << id << "] " << topic.Value(id).label;
  }
  out << "\nsentence_count: " << result.sentence_refs.size() << "\n";
  for (FacetKind kind : kAllFacets) {
    out << "\n" << FacetKindName(kind) << "\n";
    for (const FacetViewEntry &e : result.facets.of(kind)) {
      out << "  " << std::left << std::setw(6) << e.value_id << std::right
          << std::setw(4) << e.restricted_frequency << "  " << e.label;
      if (kind == FacetKind::kEntities) {
        out << "  <" << EntityCategoryName(e.category) << ">";
      }
      if (e.selected) out << "  *";
      out << "\n";
    }
  }
  if (result.summary) {
    const Summary &s = *result.summary;
    out << "\nsummary (" << BackendKindName(s.backend)
        << (s.truncated ? ", truncated" : "") << "):\n";
    if (s.empty_result) out << "  (no sentences)\n";
    for (const std::string &sentence : s.sentences) out << "  " << sentence << "\n";
  }
}

int RunBuild(const fs::path &topic_dir, const fs::path &output,
             const std::string &jsonl, bool force,
             const ClusteringConfig &config) {
  auto topic = BuildTopic(topic_dir, config, force);
  SaveIndex(*topic, output);
  if (!jsonl.empty()) {
    std::ofstream out(jsonl, std::ios::binary | std::ios::trunc);
    WriteFacetsJsonl(*topic, out);
  }
  std::cerr << "built " << topic->id() << ": "
            << topic->corpus().documents().size() << " documents, "
            << topic->facets().concepts.size() << " concepts, "
            << topic->facets().entities.size() << " entities, "
            << topic->facets().statements.size() << " statements\n";
  return 0;
}

int RunQuery(const fs::path &index, const std::vector<std::string> &select,
             const std::string &format, const SummaryFlags &flags,
             const ClusteringConfig &config) {
  auto topic = OpenTopic(index, config);
  std::vector<std::string> ids;
  for (const std::string &s : select) ids.push_back(ResolveValue(*topic, s));
  Selection selection = Selection::FromIds(*topic, std::move(ids));
  auto summarizer = MakeSummarizer(flags);
  QueryResult result = facetnav::RunQuery(*topic, *summarizer, selection, nullptr);
  if (format == "json") {
    std::cout << QueryResultJson(*topic, result).dump(2) << "\n";
  } else {
    PrintTable(*topic, result, std::cout);
  }
  return 0;
}

httplib::Server *g_server = nullptr;

void Stop(int) {
  if (g_server != nullptr) g_server->stop();
}

int RunServe(const fs::path &data, const std::string &host, int port,
             const std::string &static_dir, const SummaryFlags &flags,
             const ClusteringConfig &config) {
  TopicRegistry topics = TopicRegistry::LoadDataDir(data, config);
  std::size_t count = topics.topics().size();
  Service service(std::move(topics), MakeSummarizer(flags));
  httplib::Server server;
  std::optional<fs::path> assets;
  if (!static_dir.empty()) assets = static_dir;
  service.Mount(server, assets);
  g_server = &server;
  std::signal(SIGINT, Stop);
  std::signal(SIGTERM, Stop);
  std::cerr << "serving " << count << " topics on http://" << host << ":" << port
            << "\n";
  if (!server.listen(host, port)) {
    std::cerr << "error: listen: cannot bind " << host << ":" << port << "\n";
    return kExitError;
  }
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Faceted exploration and summarization of topical document sets"};
  app.set_config("--config", "", "TOML-style configuration file");
  app.require_subcommand(1);

  ClusteringConfig clustering;
  SummaryFlags summary_flags;

  auto *build = app.add_subcommand("build", "Build a facet index from a topic directory");
  fs::path topic_dir, output;
  std::string jsonl;
  bool force = false;
  build->add_option("topic-dir", topic_dir, "Directory with documents.jsonl and annotations")
      ->required()
      ->check(CLI::ExistingDirectory);
  build->add_option("-o,--output", output, "Binary index to write")->required();
  build->add_option("--jsonl", jsonl, "Also write a diagnostic facets.jsonl");
  build->add_flag("--force", force, "Build even if mention surfaces mismatch");
  AddClusteringFlags(build, clustering);

  auto *query = app.add_subcommand("query", "Query an index without a server");
  fs::path index;
  std::vector<std::string> select;
  std::string format = "table";
  query->add_option("index", index, "Index file or topic directory")
      ->required()
      ->check(CLI::ExistingPath);
  query->add_option("--select", select, "Facet value id or label (repeatable)");
  query->add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"json", "table"}))
      ->capture_default_str();
  AddSummaryFlags(query, summary_flags);
  AddClusteringFlags(query, clustering);

  auto *serve = app.add_subcommand("serve", "Serve the HTTP API");
  fs::path data;
  std::string host = "0.0.0.0";
  int port = 8080;
  std::string static_dir;
  serve->add_option("--data", data, "Directory of topic directories")
      ->required()
      ->envname("FACETNAV_DATA");
  serve->add_option("--port", port, "Listening port")
      ->envname("FACETNAV_PORT")
      ->capture_default_str();
  serve->add_option("--host", host, "Listening address")->capture_default_str();
  serve->add_option("--static", static_dir, "Web UI assets served under /");
  serve->add_option("--cache-size", summary_flags.cache_size, "Summary cache entries")
      ->capture_default_str();
  AddSummaryFlags(serve, summary_flags);
  AddClusteringFlags(serve, clustering);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e) == 0 ? 0 : kExitNotFound;
  }

  try {
    clustering.Validate();
    if (*build) return RunBuild(topic_dir, output, jsonl, force, clustering);
    if (*query) return RunQuery(index, select, format, summary_flags, clustering);
    if (*serve) {
      return RunServe(data, host, port, static_dir, summary_flags, clustering);
    }
  } catch (const NotFoundError &e) {
    std::cerr << "error: unknown " << e.kind() << ": " << e.id() << "\n";
    return kExitNotFound;
  } catch (const ValidationError &e) {
    std::cerr << "error: invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::invalid_argument &e) {
    std::cerr << "error: invalid argument: " << e.what() << "\n";
    return kExitNotFound;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
