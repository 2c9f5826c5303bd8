#include "snv/manifest.hpp"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <stdexcept>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#ifndef SNV_VERSION
#define SNV_VERSION "0.0.0"
#endif

namespace snv {

namespace {

class Digest {
public:
  Digest() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) throw std::runtime_error("sha256 init failed");
  }
  ~Digest() { EVP_MD_CTX_free(ctx_); }
  Digest(const Digest&) = delete;
  Digest& operator=(const Digest&) = delete;

  void update(const void* data, std::size_t n) {
    if (EVP_DigestUpdate(ctx_, data, n) != 1) throw std::runtime_error("sha256 update failed");
  }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_, md.data(), &len) != 1) throw std::runtime_error("sha256 final failed");
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
      out += digits[md[i] >> 4];
      out += digits[md[i] & 0xf];
    }
    return out;
  }

private:
  EVP_MD_CTX* ctx_;
};

std::string utc_now() {
  std::time_t t = std::time(nullptr);
  if (const char* fixed = std::getenv("SOURCE_DATE_EPOCH")) t = static_cast<std::time_t>(std::strtoll(fixed, nullptr, 10));
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

} // namespace

std::string sha256_hex(std::string_view bytes) {
  Digest d;
  d.update(bytes.data(), bytes.size());
  return d.hex();
}

std::string sha256_file(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  Digest d;
  std::array<char, 1 << 16> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), f)) > 0) d.update(buf.data(), n);
  std::fclose(f);
  return d.hex();
}

void RunManifest::add_input(const std::string& path) { inputs.emplace_back(path, sha256_file(path)); }
void RunManifest::add_output(const std::string& path) { outputs.emplace_back(path, sha256_file(path)); }

RunManifest make_manifest(std::string command, std::vector<std::string> arguments, const nlohmann::json& config) {
  RunManifest m;
  m.command = std::move(command);
  m.arguments = std::move(arguments);
  m.config_digest = sha256_hex(config.dump());
  m.tool_version = SNV_VERSION;
  m.timestamp = utc_now();
  return m;
}

void to_json(nlohmann::json& j, const RunManifest& m) {
  auto files = [](const auto& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& [p, d] : v) a.push_back({{"path", p}, {"sha256", d}});
    return a;
  };
  j = {{"command", m.command},
       {"arguments", m.arguments},
       {"config_digest", m.config_digest},
       {"inputs", files(m.inputs)},
       {"outputs", files(m.outputs)},
       {"tool_version", m.tool_version},
       {"timestamp", m.timestamp}};
  j["seed"] = m.seed ? nlohmann::json(*m.seed) : nlohmann::json(nullptr);
}

} // namespace snv
