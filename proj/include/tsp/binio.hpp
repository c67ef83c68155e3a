#ifndef TSP_BINIO_HPP
#define TSP_BINIO_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "tsp/error.hpp"

namespace tsp {

static_assert(std::endian::native == std::endian::little,
              "artifact file formats are little-endian; big-endian hosts are "
              "not supported");

// Buffered little-endian writer. write_file() commits via temp-file + rename
// so failed runs never leave partial artifacts behind.
class BinWriter {
 public:
  template <typename T>
  void put(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    const auto* p = reinterpret_cast<const char*>(&v);
    buf_.insert(buf_.end(), p, p + sizeof(T));
  }

  void put_bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const char*>(p);
    buf_.insert(buf_.end(), c, c + n);
  }

  void put_magic(const char m[4]) { put_bytes(m, 4); }

  const std::vector<char>& bytes() const { return buf_; }
  std::size_t size() const { return buf_.size(); }

 private:
  std::vector<char> buf_;
};

inline void write_file_atomic(const std::filesystem::path& path,
                              const std::vector<char>& bytes) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec)
    throw IoError("cannot move " + tmp.string() + " to " + path.string() +
                  ": " + ec.message());
}

inline void write_file_atomic(const std::filesystem::path& path,
                              const std::string& text) {
  write_file_atomic(path, std::vector<char>(text.begin(), text.end()));
}

inline std::vector<char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  return bytes;
}

// Offset-tracking reader over an in-memory buffer; truncation and bad magic
// raise FormatError naming the byte offset.
class BinReader {
 public:
  BinReader(const std::vector<char>& bytes, std::string name)
      : bytes_(bytes), name_(std::move(name)) {}

  template <typename T>
  T get() {
    static_assert(std::is_trivially_copyable_v<T>);
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  void get_bytes(void* p, std::size_t n) {
    need(n);
    std::memcpy(p, bytes_.data() + pos_, n);
    pos_ += n;
  }

  void expect_magic(const char m[4]) {
    char got[4];
    get_bytes(got, 4);
    if (std::memcmp(got, m, 4) != 0)
      throw FormatError(name_ + ": bad magic at byte offset 0, expected \"" +
                        std::string(m, 4) + "\"");
  }

  std::size_t offset() const { return pos_; }
  bool at_end() const { return pos_ == bytes_.size(); }

  void expect_end() const {
    if (!at_end())
      throw FormatError(name_ + ": trailing bytes at byte offset " +
                        std::to_string(pos_));
  }

 private:
  void need(std::size_t n) {
    if (pos_ + n > bytes_.size())
      throw FormatError(name_ + ": truncated payload at byte offset " +
                        std::to_string(pos_) + " (need " + std::to_string(n) +
                        " bytes, have " + std::to_string(bytes_.size() - pos_) +
                        ")");
  }

  const std::vector<char>& bytes_;
  std::string name_;
  std::size_t pos_ = 0;
};

}  // namespace tsp

#endif  // TSP_BINIO_HPP
