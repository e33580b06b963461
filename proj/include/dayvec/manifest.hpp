#pragma once

#include "dayvec/types.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace dayvec {

inline constexpr const char* kToolVersion = "dayvec 0.1.0";

// FNV-1a 64 over a file's bytes, hex-encoded. Throws when unreadable.
std::string file_digest(const std::string& path);

// Written alongside every subcommand's outputs as
// <out_dir>/<subcommand>.manifest.json. Contains no timestamps: identical
// manifests (same resolved config, seed, and input digests) imply
// bit-identical outputs.
struct RunManifest {
  std::string subcommand;
  std::string version = kToolVersion;
  std::uint64_t seed = 0;
  nlohmann::json config;
  std::vector<std::pair<std::string, std::string>> inputs;  // path, digest
  std::vector<std::string> outputs;  // paths relative to out_dir

  void add_input(const std::string& path);
  void write(const std::string& out_dir) const;
};

}  // namespace dayvec
