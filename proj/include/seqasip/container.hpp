#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "seqasip/maps.hpp"
#include "seqasip/ulam.hpp"

namespace seqasip {

/// Header-plus-payload file: one UTF-8 JSON line, then raw little-endian bytes.
///
/// The writer adds "payload_bytes" and "payload_checksum" (FNV-1a, hex) to the
/// header and renames a temporary file into place, so readers never observe
/// a partial file.
struct Container {
  Json header;
  std::vector<unsigned char> payload;
};

inline constexpr int kContainerVersion = 1;

void write_container(const std::filesystem::path& path, Json header, std::span<const unsigned char> payload);
/// Throws CacheCorrupt on a malformed header, short payload or checksum mismatch.
Container read_container(const std::filesystem::path& path);

/// Little-endian packing used by every payload.
class ByteWriter {
 public:
  void u64(std::uint64_t v);
  void f64(double v);
  void f64s(std::span<const double> v);
  std::vector<unsigned char>& bytes() { return buf_; }

 private:
  std::vector<unsigned char> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const unsigned char> bytes) : buf_(bytes) {}
  std::uint64_t u64();
  double f64();
  std::vector<double> f64s(std::size_t n);
  bool done() const { return pos_ == buf_.size(); }

 private:
  void need(std::size_t n) const;
  std::span<const unsigned char> buf_;
  std::size_t pos_ = 0;
};

std::string hex64(std::uint64_t v);

/// Writes a matrix as CSR triplet arrays (rows u64, cols u64, values f64).
void save_matrix(const UlamMatrix& m, const std::filesystem::path& path);
/// Accepts "csr" and "dense" payload layouts. Reload is bit-exact.
UlamMatrix load_matrix(const std::filesystem::path& path);

/// Directory of Ulam matrices keyed by (map descriptor, N).
///
/// A file that fails validation is discarded and rebuilt. Every read touches
/// the file's modification time, which cache_gc uses as the access clock.
class MatrixCache {
 public:
  explicit MatrixCache(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path path_for(const std::string& descriptor, std::size_t cells) const;
  std::shared_ptr<const UlamMatrix> get(const IntervalMap& map, std::size_t cells);

  struct Stats {
    std::size_t hits = 0;
    std::size_t misses = 0;
    std::size_t rebuilt_corrupt = 0;
  };
  Stats stats() const;
  /// (file name, matrix checksum) of every entry read or written by this instance.
  std::vector<std::pair<std::string, std::uint64_t>> touched() const;

 private:
  std::filesystem::path dir_;
  mutable std::mutex mu_;
  Stats stats_;
  std::vector<std::pair<std::string, std::uint64_t>> touched_;
};

}  // namespace seqasip
