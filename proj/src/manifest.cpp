#include "dayvec/manifest.hpp"

#include "dayvec/random.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace dayvec {

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("file_digest: cannot open '" + path + "'");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
    if (got < std::streamsize(sizeof(buf))) break;
  }
  std::ostringstream hex;
  hex << "fnv1a64:" << std::hex << h;
  return hex.str();
}

void RunManifest::add_input(const std::string& path) {
  inputs.emplace_back(path, file_digest(path));
}

void RunManifest::write(const std::string& out_dir) const {
  nlohmann::json j;
  j["subcommand"] = subcommand;
  j["version"] = version;
  j["seed"] = seed;
  j["config"] = config;
  j["inputs"] = nlohmann::json::array();
  for (const auto& [path, digest] : inputs) {
    j["inputs"].push_back({{"path", path}, {"digest", digest}});
  }
  j["outputs"] = outputs;
  const auto path =
      std::filesystem::path(out_dir) / (subcommand + ".manifest.json");
  std::ofstream out(path);
  if (!out) throw Error("manifest: cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

}  // namespace dayvec
