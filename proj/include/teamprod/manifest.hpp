#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace teamprod {

struct FileDigest {
  std::string path;    // as given on the command line, or relative to the output directory
  std::string sha256;  // lowercase hex
};

// Record of one CLI run. Everything except duration_seconds is a function of
// the command line and the input files, so re-running `argv` from `cwd`
// reproduces the listed outputs byte for byte.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;  // without the program name
  std::string cwd;
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::string version;
  std::vector<FileDigest> inputs;
  std::string out_dir;
  std::vector<FileDigest> outputs;  // paths relative to out_dir
  double duration_seconds = 0.0;
};

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);  // throws ConfigError

void write_manifest(const std::filesystem::path& path, const RunManifest& m);
RunManifest read_manifest(const std::filesystem::path& path);

}  // namespace teamprod
