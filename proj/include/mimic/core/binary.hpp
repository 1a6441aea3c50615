#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "mimic/core/error.hpp"

namespace mimic {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

/// Appends little-endian scalars to a byte buffer.
class ByteWriter {
 public:
  template <typename T>
    requires std::is_arithmetic_v<T>
  void put(T value) {
    char raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    buf_.append(raw, sizeof(T));
  }

  void put_bytes(std::string_view bytes) { buf_.append(bytes); }

  void put_string(std::string_view s) {
    put(std::uint32_t(s.size()));
    buf_.append(s);
  }

  template <typename T>
  void put_vector(std::span<const T> values) {
    put(std::uint64_t(values.size()));
    for (const T& v : values) put(v);
  }

  [[nodiscard]] const std::string& bytes() const& { return buf_; }
  [[nodiscard]] std::string bytes() && { return std::move(buf_); }

 private:
  std::string buf_;
};

/// Bounds-checked little-endian reader over a byte buffer.
class ByteReader {
 public:
  ByteReader(std::string_view bytes, std::string context) : bytes_(bytes), context_(std::move(context)) {}

  template <typename T>
    requires std::is_arithmetic_v<T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string_view get_bytes(std::size_t n) {
    need(n);
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  std::string get_string() {
    const auto n = get<std::uint32_t>();
    return std::string(get_bytes(n));
  }

  template <typename T>
  std::vector<T> get_vector() {
    const auto n = get<std::uint64_t>();
    if (n > (bytes_.size() - pos_) / sizeof(T)) fail("vector length exceeds remaining payload");
    std::vector<T> out(n);
    for (auto& v : out) v = get<T>();
    return out;
  }

  [[nodiscard]] std::size_t remaining() const { return bytes_.size() - pos_; }

  [[noreturn]] void fail(const std::string& what) const { throw DataError(context_ + ": " + what); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) fail("truncated data");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
  std::string context_;
};

/// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : data) {
    h ^= std::uint8_t(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[std::size_t(i)] = digits[v & 0xf];
  return out;
}

}  // namespace mimic
