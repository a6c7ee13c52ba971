#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace snlsapp {

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

struct ManifestEntry {
  std::string file;  // relative to the run directory
  std::uintmax_t bytes = 0;
  std::string sha256;
};

struct RunManifest {
  std::vector<std::string> config;
  std::uint64_t seed = 0;
  std::string version;
  std::string started;
  std::string finished;
  std::vector<ManifestEntry> files;
};

/// Hashes every regular file in `dir` except manifest.txt, sorted by name.
std::vector<ManifestEntry> hash_directory(const std::filesystem::path& dir);
void write_manifest(const RunManifest& m, const std::filesystem::path& path);
std::string utc_timestamp();

}  // namespace snlsapp
