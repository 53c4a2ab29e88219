#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include <unistd.h>

#include "facetnav/topic.h"

namespace facetnav::testing {

inline std::filesystem::path ToyDir() { return FACETNAV_TOY_DIR; }

// The toy topic is built once per process; tests only read it.
inline std::shared_ptr<const Topic> Toy() {
  static std::shared_ptr<const Topic> topic = BuildTopic(ToyDir(), ClusteringConfig{});
  return topic;
}

inline std::string ReadFile(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// A fresh scratch directory under the system temp dir.
inline std::filesystem::path ScratchDir(const std::string &name) {
  auto dir = std::filesystem::temp_directory_path() /
             ("facetnav-test-" + name + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace facetnav::testing
