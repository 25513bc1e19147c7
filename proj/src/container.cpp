#include "seqasip/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iostream>

#include "seqasip/errors.hpp"

namespace seqasip {

namespace fs = std::filesystem;

namespace {

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffULL) << (8 * (7 - i));
    return r;
  }
}

std::uint64_t payload_hash(std::span<const unsigned char> p) { return fnv1a(p); }

}  // namespace

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return s;
}

void ByteWriter::u64(std::uint64_t v) {
  v = to_le(v);
  unsigned char b[8];
  std::memcpy(b, &v, 8);
  buf_.insert(buf_.end(), b, b + 8);
}

void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::f64s(std::span<const double> v) {
  buf_.reserve(buf_.size() + 8 * v.size());
  for (double x : v) f64(x);
}

void ByteReader::need(std::size_t n) const {
  if (buf_.size() - pos_ < n) throw CacheCorrupt("payload ends early");
}

std::uint64_t ByteReader::u64() {
  need(8);
  std::uint64_t v;
  std::memcpy(&v, buf_.data() + pos_, 8);
  pos_ += 8;
  return to_le(v);
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

std::vector<double> ByteReader::f64s(std::size_t n) {
  need(8 * n);
  std::vector<double> out(n);
  for (auto& x : out) x = f64();
  return out;
}

void write_container(const fs::path& path, Json header, std::span<const unsigned char> payload) {
  header["version"] = kContainerVersion;
  header["endianness"] = "little";
  header["payload_bytes"] = payload.size();
  header["payload_checksum"] = hex64(payload_hash(payload));
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    const std::string line = header.dump() + "\n";
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
    out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
    if (!out) throw Error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

Container read_container(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CacheCorrupt("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw CacheCorrupt(path.string() + ": missing header line");
  Container c;
  try {
    c.header = Json::parse(line);
  } catch (const Json::exception& e) {
    throw CacheCorrupt(path.string() + ": header is not JSON");
  }
  if (!c.header.is_object() || c.header.value("version", -1) != kContainerVersion ||
      c.header.value("endianness", "") != "little" || !c.header.contains("payload_bytes")) {
    throw CacheCorrupt(path.string() + ": unsupported header");
  }
  const auto n = c.header["payload_bytes"].get<std::size_t>();
  c.payload.resize(n);
  in.read(reinterpret_cast<char*>(c.payload.data()), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n || in.peek() != std::char_traits<char>::eof()) {
    throw CacheCorrupt(path.string() + ": payload size does not match header");
  }
  if (c.header.value("payload_checksum", "") != hex64(payload_hash(c.payload))) {
    throw CacheCorrupt(path.string() + ": payload checksum mismatch");
  }
  return c;
}

void save_matrix(const UlamMatrix& m, const fs::path& path) {
  const auto trips = m.triplets();
  ByteWriter w;
  for (const auto& t : trips) w.u64(t.row);
  for (const auto& t : trips) w.u64(t.col);
  for (const auto& t : trips) w.f64(t.value);
  Json h{{"kind", "ulam"},         {"descriptor", m.descriptor()}, {"N", m.size()},
         {"layout", "csr"},        {"nnz", trips.size()},          {"matrix_checksum", hex64(m.checksum())}};
  write_container(path, std::move(h), w.bytes());
}

UlamMatrix load_matrix(const fs::path& path) {
  const auto c = read_container(path);
  const auto& h = c.header;
  try {
    if (h.at("kind") != "ulam") throw CacheCorrupt(path.string() + ": not a matrix container");
    const auto n = h.at("N").get<std::size_t>();
    const auto layout = h.at("layout").get<std::string>();
    ByteReader r(c.payload);
    std::vector<UlamMatrix::Triplet> trips;
    if (layout == "csr") {
      const auto nnz = h.at("nnz").get<std::size_t>();
      trips.resize(nnz);
      for (auto& t : trips) t.row = static_cast<std::uint32_t>(r.u64());
      for (auto& t : trips) t.col = static_cast<std::uint32_t>(r.u64());
      for (auto& t : trips) t.value = r.f64();
    } else if (layout == "dense") {
      for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = 0; j < n; ++j) {
          const double v = r.f64();
          if (v != 0.0) trips.push_back({i, j, v});
        }
      }
    } else {
      throw CacheCorrupt(path.string() + ": unknown layout " + layout);
    }
    if (!r.done()) throw CacheCorrupt(path.string() + ": trailing payload bytes");
    UlamMatrix m(n, std::move(trips), h.at("descriptor").get<std::string>());
    if (h.contains("matrix_checksum") && h["matrix_checksum"] != hex64(m.checksum())) {
      throw CacheCorrupt(path.string() + ": matrix checksum mismatch");
    }
    return m;
  } catch (const Json::exception& e) {
    throw CacheCorrupt(path.string() + ": bad header field (" + std::string(e.what()) + ")");
  } catch (const DimensionMismatch& e) {
    throw CacheCorrupt(path.string() + ": " + e.what());
  }
}

MatrixCache::MatrixCache(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

fs::path MatrixCache::path_for(const std::string& descriptor, std::size_t cells) const {
  const std::string key = descriptor + "|" + std::to_string(cells);
  const auto h = fnv1a({reinterpret_cast<const unsigned char*>(key.data()), key.size()});
  return dir_ / ("ulam-" + hex64(h) + ".bin");
}

std::shared_ptr<const UlamMatrix> MatrixCache::get(const IntervalMap& map, std::size_t cells) {
  const auto desc = map.descriptor();
  const auto path = path_for(desc, cells);
  bool corrupt = false;
  if (fs::exists(path)) {
    try {
      auto m = std::make_shared<const UlamMatrix>(load_matrix(path));
      if (m->descriptor() != desc || m->size() != cells) throw CacheCorrupt(path.string() + ": key collision");
      std::error_code ec;
      fs::last_write_time(path, fs::file_time_type::clock::now(), ec);
      std::lock_guard lock(mu_);
      ++stats_.hits;
      touched_.emplace_back(path.filename().string(), m->checksum());
      return m;
    } catch (const CacheCorrupt& e) {
      std::cerr << "warning: discarding cache entry: " << e.what() << "\n";
      corrupt = true;
    }
  }
  auto m = std::make_shared<const UlamMatrix>(build_ulam(map, cells));
  save_matrix(*m, path);
  std::lock_guard lock(mu_);
  ++stats_.misses;
  if (corrupt) ++stats_.rebuilt_corrupt;
  touched_.emplace_back(path.filename().string(), m->checksum());
  return m;
}

MatrixCache::Stats MatrixCache::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

std::vector<std::pair<std::string, std::uint64_t>> MatrixCache::touched() const {
  std::lock_guard lock(mu_);
  return touched_;
}

}  // namespace seqasip
