#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace canvas::service {

/// Cost parameters of the memory-hard password hash (Argon2id).
struct HashParams {
  unsigned long long opslimit = 2;
  std::size_t memlimit = 64ull * 1024 * 1024;

  /// The smallest parameters the hash accepts; for tests only.
  static HashParams minimal();
};

/// Salted, self-describing hash string (algorithm, parameters and salt are
/// encoded in the result).
std::string hash_password(std::string_view password, const HashParams& params);
bool verify_password(std::string_view hash, std::string_view password);

/// Random URL-safe token for login sessions.
std::string random_token();

std::string base64_encode(const std::string& bytes);
std::string base64_decode(std::string_view text);

}  // namespace canvas::service
