#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>
#include <vector>

#include "amlgnn/error.hpp"

namespace amlgnn::detail {

static_assert(std::endian::native == std::endian::little,
              "binary containers are written in host order; big-endian hosts unsupported");

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  static_assert(std::is_trivially_copyable_v<T>);
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  static_assert(std::is_trivially_copyable_v<T>);
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw Error(ErrorKind::BadCache, "truncated container");
  return value;
}

template <typename T>
void write_array(std::ostream& out, const std::vector<T>& values) {
  write_pod<std::uint64_t>(out, values.size());
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(T)));
}

template <typename T>
std::vector<T> read_array(std::istream& in, std::uint64_t max_len = (1ULL << 36)) {
  const auto n = read_pod<std::uint64_t>(in);
  if (n > max_len) throw Error(ErrorKind::BadCache, "array length out of range");
  std::vector<T> values(n);
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(n * sizeof(T)));
  if (!in) throw Error(ErrorKind::BadCache, "truncated array");
  return values;
}

inline void write_string(std::ostream& out, const std::string& s) {
  write_pod<std::uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& in) {
  const auto n = read_pod<std::uint64_t>(in);
  if (n > (1ULL << 30)) throw Error(ErrorKind::BadCache, "string length out of range");
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) throw Error(ErrorKind::BadCache, "truncated string");
  return s;
}

}  // namespace amlgnn::detail
