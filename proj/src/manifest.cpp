#include "teamprod/manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>

#include "teamprod/errors.hpp"
#include "teamprod/io.hpp"

namespace teamprod {

using nlohmann::json;

namespace {

struct Sha256 {
  Sha256() : ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
      throw std::runtime_error("sha256: digest initialisation failed");
  }
  void update(const char* data, std::size_t n) {
    if (EVP_DigestUpdate(ctx.get(), data, n) != 1) throw std::runtime_error("sha256: update failed");
  }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1)
      throw std::runtime_error("sha256: finalisation failed");
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out += digits[md[i] >> 4];
      out += digits[md[i] & 15];
    }
    return out;
  }
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx;
};

json digests_to_json(const std::vector<FileDigest>& files) {
  json arr = json::array();
  for (const auto& f : files) arr.push_back({{"path", f.path}, {"sha256", f.sha256}});
  return arr;
}

std::vector<FileDigest> digests_from_json(const json& j, const std::string& key) {
  if (!j.is_array()) throw ConfigError("manifest." + key + ": expected an array");
  std::vector<FileDigest> out;
  for (const auto& e : j) {
    if (!e.is_object() || !e.contains("path") || !e.contains("sha256"))
      throw ConfigError("manifest." + key + ": entries need path and sha256");
    out.push_back({e.at("path").get<std::string>(), e.at("sha256").get<std::string>()});
  }
  return out;
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput(path.string() + ": cannot open for hashing");
  Sha256 h;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

json to_json(const RunManifest& m) {
  return {{"command", m.command},
          {"argv", m.argv},
          {"cwd", m.cwd},
          {"config", m.config},
          {"seed", m.seed},
          {"version", m.version},
          {"inputs", digests_to_json(m.inputs)},
          {"out_dir", m.out_dir},
          {"outputs", digests_to_json(m.outputs)},
          {"duration_seconds", m.duration_seconds}};
}

RunManifest manifest_from_json(const json& j) {
  try {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.argv = j.at("argv").get<std::vector<std::string>>();
    m.cwd = j.at("cwd").get<std::string>();
    m.config = j.value("config", json::object());
    m.seed = j.at("seed").get<std::uint64_t>();
    m.version = j.at("version").get<std::string>();
    m.inputs = digests_from_json(j.at("inputs"), "inputs");
    m.out_dir = j.at("out_dir").get<std::string>();
    m.outputs = digests_from_json(j.at("outputs"), "outputs");
    m.duration_seconds = j.value("duration_seconds", 0.0);
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  write_text_file(path, to_json(m).dump(2) + "\n");
}

RunManifest read_manifest(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return manifest_from_json(j);
}

}  // namespace teamprod
