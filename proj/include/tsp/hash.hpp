#ifndef TSP_HASH_HPP
#define TSP_HASH_HPP

#include <filesystem>
#include <string>
#include <vector>

namespace tsp {

// SHA-256 hex digest (lowercase). Backed by OpenSSL's EVP interface.
std::string sha256_hex(const void* data, std::size_t n);
std::string sha256_hex(const std::string& s);
std::string sha256_hex(const std::vector<char>& bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace tsp

#endif  // TSP_HASH_HPP
