#pragma once

// KFC1 checkpoint container.
//
//   "KFC1" | u32 LE manifest length | JSON manifest | payloads | u32 LE CRC32
//
// The manifest holds {"format", "version", "meta", "entries"} where each entry
// maps a name to {offset, length, dtype, shape}; offsets are relative to the
// start of the payload region and the CRC covers that region only.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "kflow/tensor.hpp"

namespace kflow::io {

inline constexpr int container_version = 1;

enum class Dtype { f64, f32, u32 };

struct Entry {
  Dtype dtype = Dtype::f64;
  Shape shape;
  std::vector<double> values;
};

struct Container {
  nlohmann::json meta = nlohmann::json::object();
  std::map<std::string, Entry> entries;

  const Entry& at(const std::string& name) const;
};

/// Writes via a temporary file and rename, so a reader never sees a partial file.
void write_container(const std::filesystem::path& path, const Container& container);
Container read_container(const std::filesystem::path& path);

/// Write bytes to `path` through a sibling temporary file.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace kflow::io
