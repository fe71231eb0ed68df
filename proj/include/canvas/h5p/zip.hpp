#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace canvas::h5p {

using Bytes = std::vector<std::uint8_t>;

namespace zip {

struct Entry {
  std::string path;
  Bytes data;

  friend bool operator==(const Entry&, const Entry&) = default;
};

/// Reads every file entry of a zip archive (stored or deflated; directory
/// entries are skipped). Throws Error{NotAnArchive} on anything that is not
/// a well-formed single-disk, non-zip64 archive or on a CRC mismatch.
std::vector<Entry> read(std::span<const std::uint8_t> archive);

/// Writes entries in the given order with fixed metadata (1980-01-01
/// timestamps, no extra fields), so equal input yields equal bytes.
Bytes write(const std::vector<Entry>& entries);

}  // namespace zip
}  // namespace canvas::h5p
