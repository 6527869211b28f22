#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace tripletbench::cli {

// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

// Provenance record written next to every command's outputs. Holds no
// timestamps so identical inputs give identical bytes.
struct Manifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::vector<std::filesystem::path> inputs;   // files or directories
  std::vector<std::filesystem::path> outputs;  // files, listed relative to the output dir

  nlohmann::json to_json(const std::filesystem::path& out_dir) const;
  void write(const std::filesystem::path& dir) const;
};

inline constexpr const char* kToolName = "tripletbench";
inline constexpr const char* kToolVersion = "1.0.0";

}  // namespace tripletbench::cli
