#include "manifest.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <memory>
#include <stdexcept>

#include "tripletbench/csv.hpp"

namespace tripletbench::cli {
namespace {

using DigestContext = std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)>;

std::vector<std::filesystem::path> expand(const std::filesystem::path& p) {
  if (!std::filesystem::is_directory(p)) return {p};
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(p)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

nlohmann::json hash_list(const std::vector<std::filesystem::path>& paths,
                         const std::filesystem::path& base) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& p : paths) {
    for (const auto& file : expand(p)) {
      const auto shown = base.empty() ? file.lexically_normal() : file.lexically_relative(base);
      out.push_back({{"path", shown.generic_string()},
                     {"sha256", sha256_file(file)}});
    }
  }
  return out;
}

}  // namespace

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string() + " for hashing");
  DigestContext ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 initialisation failed");
  }
  std::array<char, 1 << 16> buffer;
  while (in) {
    in.read(buffer.data(), buffer.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buffer.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &length);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < length; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xf]);
  }
  return hex;
}

nlohmann::json Manifest::to_json(const std::filesystem::path& out_dir) const {
  return {{"tool", kToolName},
          {"version", kToolVersion},
          {"command", command},
          {"config", config},
          {"seed", seed},
          {"inputs", hash_list(inputs, {})},
          {"outputs", hash_list(outputs, out_dir)}};
}

void Manifest::write(const std::filesystem::path& dir) const {
  csv::write_file(dir / "manifest.json", to_json(dir).dump(2) + "\n");
}

}  // namespace tripletbench::cli
