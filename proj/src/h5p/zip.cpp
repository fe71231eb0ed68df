#include "canvas/h5p/zip.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstring>
#include <limits>

#include "canvas/error.hpp"

namespace canvas::h5p::zip {

namespace {

constexpr std::uint32_t kLocalHeaderSig = 0x04034b50;
constexpr std::uint32_t kCentralHeaderSig = 0x02014b50;
constexpr std::uint32_t kEndOfDirSig = 0x06054b50;
constexpr std::size_t kLocalHeaderSize = 30;
constexpr std::size_t kCentralHeaderSize = 46;
constexpr std::size_t kEndOfDirSize = 22;
constexpr std::uint16_t kMethodStored = 0;
constexpr std::uint16_t kMethodDeflate = 8;
constexpr std::uint16_t kFlagUtf8 = 0x0800;
constexpr std::uint16_t kDosDate1980 = (0 << 9) | (1 << 5) | 1;

[[noreturn]] void fail(const std::string& why) { throw Error(ErrorCode::NotAnArchive, why); }

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint16_t u16(std::size_t at) const {
    need(at, 2);
    return static_cast<std::uint16_t>(data_[at] | (data_[at + 1] << 8));
  }
  std::uint32_t u32(std::size_t at) const {
    need(at, 4);
    return static_cast<std::uint32_t>(data_[at]) | (static_cast<std::uint32_t>(data_[at + 1]) << 8) |
           (static_cast<std::uint32_t>(data_[at + 2]) << 16) | (static_cast<std::uint32_t>(data_[at + 3]) << 24);
  }
  std::span<const std::uint8_t> bytes(std::size_t at, std::size_t n) const {
    need(at, n);
    return data_.subspan(at, n);
  }
  std::size_t size() const { return data_.size(); }

 private:
  void need(std::size_t at, std::size_t n) const {
    if (at > data_.size() || n > data_.size() - at) fail("archive is truncated");
  }
  std::span<const std::uint8_t> data_;
};

void put16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

std::uint32_t crc_of(std::span<const std::uint8_t> data) {
  uLong crc = crc32(0L, Z_NULL, 0);
  std::size_t offset = 0;
  while (offset < data.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(data.size() - offset, 1u << 30));
    crc = crc32(crc, data.data() + offset, chunk);
    offset += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

Bytes inflate_raw(std::span<const std::uint8_t> in, std::size_t expected) {
  Bytes out(expected);
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) fail("cannot initialise inflate");
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  const auto produced = zs.total_out;
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || produced != expected) fail("corrupt deflate stream");
  return out;
}

Bytes deflate_raw(std::span<const std::uint8_t> in) {
  z_stream zs{};
  if (deflateInit2(&zs, 9, Z_DEFLATED, -MAX_WBITS, 8, Z_DEFAULT_STRATEGY) != Z_OK)
    throw Error(ErrorCode::InvalidPackage, "cannot initialise deflate");
  Bytes out(deflateBound(&zs, static_cast<uLong>(in.size())));
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&zs, Z_FINISH);
  out.resize(zs.total_out);
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw Error(ErrorCode::InvalidPackage, "deflate failed");
  return out;
}

}  // namespace

std::vector<Entry> read(std::span<const std::uint8_t> archive) {
  const Reader r(archive);
  if (archive.size() < kEndOfDirSize) fail("input is too small to be a zip archive");

  // The end-of-central-directory record sits within the last 64 KiB + 22 bytes.
  std::size_t eocd = std::numeric_limits<std::size_t>::max();
  const std::size_t lowest = archive.size() > 0xffff + kEndOfDirSize ? archive.size() - 0xffff - kEndOfDirSize : 0;
  for (std::size_t at = archive.size() - kEndOfDirSize + 1; at-- > lowest;) {
    if (r.u32(at) == kEndOfDirSig) {
      eocd = at;
      break;
    }
  }
  if (eocd == std::numeric_limits<std::size_t>::max()) fail("no end-of-central-directory record");
  if (r.u16(eocd + 4) != 0 || r.u16(eocd + 6) != 0) fail("multi-disk archives are not supported");
  const std::size_t count = r.u16(eocd + 10);
  const std::size_t dir_offset = r.u32(eocd + 16);
  if (dir_offset == 0xffffffff || count == 0xffff) fail("zip64 archives are not supported");

  std::vector<Entry> entries;
  std::size_t at = dir_offset;
  for (std::size_t i = 0; i < count; ++i) {
    if (r.u32(at) != kCentralHeaderSig) fail("bad central directory header");
    const std::uint16_t flags = r.u16(at + 8);
    const std::uint16_t method = r.u16(at + 10);
    const std::uint32_t crc = r.u32(at + 16);
    const std::size_t packed = r.u32(at + 20);
    const std::size_t size = r.u32(at + 24);
    const std::size_t name_len = r.u16(at + 28);
    const std::size_t extra_len = r.u16(at + 30);
    const std::size_t comment_len = r.u16(at + 32);
    const std::size_t local = r.u32(at + 42);
    const auto name_bytes = r.bytes(at + kCentralHeaderSize, name_len);
    std::string name(name_bytes.begin(), name_bytes.end());
    at += kCentralHeaderSize + name_len + extra_len + comment_len;

    if (flags & 0x1) fail("encrypted entry " + name);
    if (packed == 0xffffffff || size == 0xffffffff) fail("zip64 entry " + name);
    if (name.empty() || name.back() == '/') continue;  // directory entry

    if (r.u32(local) != kLocalHeaderSig) fail("bad local header for " + name);
    const std::size_t data_at = local + kLocalHeaderSize + r.u16(local + 26) + r.u16(local + 28);
    const auto payload = r.bytes(data_at, packed);

    Entry entry;
    entry.path = std::move(name);
    if (method == kMethodStored) {
      if (packed != size) fail("stored entry size mismatch for " + entry.path);
      entry.data.assign(payload.begin(), payload.end());
    } else if (method == kMethodDeflate) {
      entry.data = inflate_raw(payload, size);
    } else {
      fail("unsupported compression method " + std::to_string(method) + " for " + entry.path);
    }
    if (crc_of(entry.data) != crc) fail("CRC mismatch for " + entry.path);
    entries.push_back(std::move(entry));
  }
  return entries;
}

Bytes write(const std::vector<Entry>& entries) {
  Bytes out;
  Bytes directory;
  for (const auto& entry : entries) {
    if (entry.path.size() > 0xffff) throw Error(ErrorCode::InvalidPackage, "entry name too long");
    if (entry.data.size() >= 0xffffffffu) throw Error(ErrorCode::InvalidPackage, "entry too large: " + entry.path);
    const std::uint32_t crc = crc_of(entry.data);
    Bytes packed = deflate_raw(entry.data);
    std::uint16_t method = kMethodDeflate;
    if (packed.size() >= entry.data.size()) {
      packed = entry.data;
      method = kMethodStored;
    }
    const auto offset = static_cast<std::uint32_t>(out.size());
    const auto name_len = static_cast<std::uint16_t>(entry.path.size());

    put32(out, kLocalHeaderSig);
    put16(out, 20);
    put16(out, kFlagUtf8);
    put16(out, method);
    put16(out, 0);
    put16(out, kDosDate1980);
    put32(out, crc);
    put32(out, static_cast<std::uint32_t>(packed.size()));
    put32(out, static_cast<std::uint32_t>(entry.data.size()));
    put16(out, name_len);
    put16(out, 0);
    out.insert(out.end(), entry.path.begin(), entry.path.end());
    out.insert(out.end(), packed.begin(), packed.end());

    put32(directory, kCentralHeaderSig);
    put16(directory, (3 << 8) | 20);  // made by: unix, zip 2.0
    put16(directory, 20);
    put16(directory, kFlagUtf8);
    put16(directory, method);
    put16(directory, 0);
    put16(directory, kDosDate1980);
    put32(directory, crc);
    put32(directory, static_cast<std::uint32_t>(packed.size()));
    put32(directory, static_cast<std::uint32_t>(entry.data.size()));
    put16(directory, name_len);
    put16(directory, 0);
    put16(directory, 0);
    put16(directory, 0);
    put16(directory, 0);
    put32(directory, 0100644u << 16);  // regular file, rw-r--r--
    put32(directory, offset);
    directory.insert(directory.end(), entry.path.begin(), entry.path.end());
  }
  if (entries.size() >= 0xffff) throw Error(ErrorCode::InvalidPackage, "too many archive entries");
  const auto dir_offset = static_cast<std::uint32_t>(out.size());
  out.insert(out.end(), directory.begin(), directory.end());
  put32(out, kEndOfDirSig);
  put16(out, 0);
  put16(out, 0);
  put16(out, static_cast<std::uint16_t>(entries.size()));
  put16(out, static_cast<std::uint16_t>(entries.size()));
  put32(out, static_cast<std::uint32_t>(directory.size()));
  put32(out, dir_offset);
  put16(out, 0);
  return out;
}

}  // namespace canvas::h5p::zip
