#include <sys/wait.h>

#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "support/fixture.h"

using namespace facetnav::testing;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run Cli(const std::string &args, const std::string &env = "") {
  static const fs::path scratch = ScratchDir("cli");
  fs::path err_file = scratch / "stderr.txt";
  std::string command = env + " '" + std::string(FACETNAV_CLI) + "' " + args + " 2>'" +
                        err_file.string() + "'";
  Run run;
  FILE *pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) run.out.append(buf, n);
  int status = pclose(pipe);
  run.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  run.err = ReadFile(err_file);
  return run;
}

std::string Quote(const fs::path &p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_CASE("build is deterministic") {
  fs::path dir = ScratchDir("cli-build");
  Run a = Cli("build " + Quote(ToyDir()) + " -o " + Quote(dir / "a.bin") + " --jsonl " +
              Quote(dir / "a.jsonl"));
  Run b = Cli("build " + Quote(ToyDir()) + " -o " + Quote(dir / "b.bin") + " --jsonl " +
              Quote(dir / "b.jsonl"));
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  std::string index = ReadFile(dir / "a.bin");
  CHECK(index.substr(0, 8) == "FNAVIDX1");
  CHECK(index == ReadFile(dir / "b.bin"));
  CHECK(ReadFile(dir / "a.jsonl") == ReadFile(dir / "b.jsonl"));
  CHECK(a.err.find("4 concepts, 10 entities, 3 statements") != std::string::npos);

  // Each facets.jsonl line is one value with its sentence set.
  std::ifstream in(dir / "a.jsonl");
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    auto j = nlohmann::json::parse(line);
    CHECK(j.contains("value_id"));
    CHECK(j.contains("sentence_set"));
    ++lines;
  }
  CHECK(lines == 17);
  fs::remove_all(dir);
}

TEST_CASE("query as json") {
  Run r = Cli("query " + Quote(ToyDir()) + " --select 'New York' --select treaties --format json");
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["sentence_count"] == 1);
  CHECK(j["summary"]["text"] == "New York officials signed agreements with the Seneca Nation.");
  CHECK(j["summary"]["backend"] == "FALLBACK");
}

TEST_CASE("query flags from a config file and the environment") {
  fs::path dir = ScratchDir("cli-config");
  {
    std::ofstream cfg(dir / "facetnav.toml");
    cfg << "[query]\nsummary-tokens = 20\n";
  }
  Run r = Cli("--config " + Quote(dir / "facetnav.toml") + " query " + Quote(ToyDir()) +
              " --select e0 --format json");
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["summary"]["sentences"].size() == 3);

  Run env = Cli("query " + Quote(ToyDir()) + " --select e0 --format json",
                "SUMMARIZER_URL=http://127.0.0.1:1 SUMMARIZER_TIMEOUT_MS=300");
  REQUIRE(env.code == 0);
  CHECK(nlohmann::json::parse(env.out)["summary"]["backend"] == "FALLBACK");
  fs::remove_all(dir);
}

TEST_CASE("error exit codes") {
  Run unknown = Cli("query " + Quote(ToyDir()) + " --select nope");
  CHECK(unknown.code == 2);
  CHECK(unknown.err == "error: unknown facet value: nope\n");

  Run usage = Cli("query");
  CHECK(usage.code == 2);

  Run missing = Cli("build /definitely/not/here -o /tmp/x.bin");
  CHECK(missing.code == 2);

  fs::path dir = ScratchDir("cli-bad");
  for (const auto &entry : fs::directory_iterator(ToyDir())) {
    fs::copy_file(entry.path(), dir / entry.path().filename());
  }
  {
    std::ofstream out(dir / "entity_cd_scores.jsonl", std::ios::app);
    out << R"({"mention_a":"t1","mention_b":"zz","score":0.5})" << "\n";
  }
  Run invalid = Cli("build " + Quote(dir) + " -o " + Quote(dir / "x.bin"));
  CHECK(invalid.code == 3);
  CHECK(invalid.err.find("entity_cd_scores.jsonl:26") != std::string::npos);
  CHECK(invalid.err.find('\n') == invalid.err.size() - 1);

  {
    std::ofstream out(dir / "bad.bin");
    out << "garbage";
  }
  Run bad_index = Cli("query " + Quote(dir / "bad.bin"));
  CHECK(bad_index.code == 3);
  fs::remove_all(dir);
}
