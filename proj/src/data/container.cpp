#include "kflow/container.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <zlib.h>

#include "kflow/error.hpp"

namespace kflow::io {

namespace {

constexpr char magic[4] = {'K', 'F', 'C', '1'};

std::string_view dtype_name(Dtype d) {
  switch (d) {
    case Dtype::f64: return "f64";
    case Dtype::f32: return "f32";
    case Dtype::u32: return "u32";
  }
  return "?";
}

Dtype parse_dtype(const std::string& s) {
  if (s == "f64") return Dtype::f64;
  if (s == "f32") return Dtype::f32;
  if (s == "u32") return Dtype::u32;
  throw FormatError("unknown container dtype '" + s + "'");
}

std::size_t dtype_bytes(Dtype d) { return d == Dtype::f64 ? 8 : 4; }

template <class T>
void put_le(std::string& out, T value) {
  static_assert(std::endian::native == std::endian::little, "little-endian host required");
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T get_le(const char* p) {
  T value;
  std::memcpy(&value, p, sizeof(T));
  return value;
}

std::uint32_t crc_of(const char* data, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  while (n > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(data), chunk);
    data += chunk;
    n -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

const Entry& Container::at(const std::string& name) const {
  auto it = entries.find(name);
  if (it == entries.end()) throw FormatError("container has no entry '" + name + "'");
  return it->second;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open '" + tmp.string() + "' for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error("write to '" + tmp.string() + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_container(const std::filesystem::path& path, const Container& container) {
  nlohmann::json entries = nlohmann::json::object();
  std::string payload;
  for (const auto& [name, e] : container.entries) {
    if (e.values.size() != shape_size(e.shape))
      throw ShapeError("entry '" + name + "' has " + std::to_string(e.values.size()) + " values for shape " +
                       shape_string(e.shape));
    const std::size_t offset = payload.size();
    for (double v : e.values) {
      switch (e.dtype) {
        case Dtype::f64: put_le(payload, v); break;
        case Dtype::f32: put_le(payload, static_cast<float>(v)); break;
        case Dtype::u32:
          if (v < 0 || v > 4294967295.0 || v != std::floor(v))
            throw ValueError("entry '" + name + "' holds a value that is not a u32");
          put_le(payload, static_cast<std::uint32_t>(v));
          break;
      }
    }
    entries[name] = {{"offset", offset},
                     {"length", payload.size() - offset},
                     {"dtype", dtype_name(e.dtype)},
                     {"shape", e.shape}};
  }
  const nlohmann::json manifest = {
      {"format", "KFC1"}, {"version", container_version}, {"meta", container.meta}, {"entries", entries}};
  const std::string header = manifest.dump();

  std::string out(magic, 4);
  put_le(out, static_cast<std::uint32_t>(header.size()));
  out += header;
  out += payload;
  put_le(out, crc_of(payload.data(), payload.size()));
  write_file_atomic(path, out);
}

Container read_container(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  const std::string where = "checkpoint '" + path.string() + "'";
  if (bytes.size() < 8 || std::memcmp(bytes.data(), magic, 4) != 0)
    throw FormatError(where + " is not a KFC1 container");
  const auto header_len = get_le<std::uint32_t>(bytes.data() + 4);
  if (bytes.size() < 8 + std::size_t{header_len} + 4) throw FormatError(where + " is truncated");
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(bytes.begin() + 8, bytes.begin() + 8 + header_len);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(where + " has a malformed manifest: " + e.what());
  }
  const int version = manifest.value("version", -1);
  if (manifest.value("format", std::string()) != "KFC1" || version != container_version)
    throw FormatError(where + " has format version " + std::to_string(version) + "; this build reads KFC1 version " +
                      std::to_string(container_version));

  const std::size_t payload_start = 8 + header_len;
  const std::size_t payload_len = bytes.size() - payload_start - 4;
  const char* payload = bytes.data() + payload_start;
  if (crc_of(payload, payload_len) != get_le<std::uint32_t>(payload + payload_len))
    throw FormatError(where + " failed its CRC32 check (truncated or corrupted)");

  Container c;
  c.meta = manifest.at("meta");
  try {
    for (const auto& [name, j] : manifest.at("entries").items()) {
      Entry e;
      e.dtype = parse_dtype(j.at("dtype").get<std::string>());
      e.shape = j.at("shape").get<Shape>();
      const auto offset = j.at("offset").get<std::size_t>();
      const auto length = j.at("length").get<std::size_t>();
      const std::size_t count = shape_size(e.shape);
      if (length != count * dtype_bytes(e.dtype) || offset + length > payload_len)
        throw FormatError(where + ": entry '" + name + "' lies outside the payload");
      e.values.resize(count);
      const char* p = payload + offset;
      for (std::size_t i = 0; i < count; ++i) {
        switch (e.dtype) {
          case Dtype::f64: e.values[i] = get_le<double>(p + 8 * i); break;
          case Dtype::f32: e.values[i] = get_le<float>(p + 4 * i); break;
          case Dtype::u32: e.values[i] = get_le<std::uint32_t>(p + 4 * i); break;
        }
      }
      c.entries.emplace(name, std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(where + " has a malformed manifest: " + e.what());
  }
  return c;
}

}  // namespace kflow::io
