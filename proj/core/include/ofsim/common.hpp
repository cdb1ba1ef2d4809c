#ifndef OFSIM_COMMON_HPP
#define OFSIM_COMMON_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ofsim {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Simulated time, in whole seconds.
using SimTime = std::int64_t;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidArgument : Error {
  using Error::Error;
};
struct InvalidKey : Error {
  using Error::Error;
};
struct InvalidTime : Error {
  using Error::Error;
};
struct InvalidNonce : Error {
  using Error::Error;
};
struct PrecisionError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

std::string to_hex(ByteView data);
Bytes from_hex(const std::string& hex);  // throws InvalidArgument on odd/garbage input

inline Bytes to_bytes(std::string_view s) {
  return Bytes(s.begin(), s.end());
}

/// Appends a 4-byte big-endian length prefix followed by the field bytes.
void append_field(Bytes& out, ByteView field);

/// Splits a buffer of length-prefixed fields; returns empty on malformed input.
std::vector<Bytes> split_fields(ByteView buf);

void put_u32_be(Bytes& out, std::uint32_t v);
void put_u64_be(Bytes& out, std::uint64_t v);
std::uint32_t get_u32_be(ByteView in);  // in.size() >= 4
std::uint64_t get_u64_be(ByteView in);  // in.size() >= 8

}  // namespace ofsim

#endif
