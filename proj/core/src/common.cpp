#include "ofsim/common.hpp"

#include <cstring>

namespace ofsim {

namespace {
constexpr char kHexDigits[] = "0123456789abcdef";

int hex_nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}
}  // namespace

std::string to_hex(ByteView data) {
  std::string out;
  out.reserve(data.size() * 2);
  for (std::uint8_t b : data) {
    out.push_back(kHexDigits[b >> 4]);
    out.push_back(kHexDigits[b & 0x0F]);
  }
  return out;
}

Bytes from_hex(const std::string& hex) {
  if (hex.size() % 2 != 0) throw InvalidArgument("odd-length hex string");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = hex_nibble(hex[2 * i]);
    int lo = hex_nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw InvalidArgument("non-hex character");
    out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return out;
}

void put_u32_be(Bytes& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_u64_be(Bytes& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8)
    out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint32_t get_u32_be(ByteView in) {
  return std::uint32_t{in[0]} << 24 | std::uint32_t{in[1]} << 16 |
         std::uint32_t{in[2]} << 8 | std::uint32_t{in[3]};
}

std::uint64_t get_u64_be(ByteView in) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = v << 8 | in[i];
  return v;
}

void append_field(Bytes& out, ByteView field) {
  put_u32_be(out, static_cast<std::uint32_t>(field.size()));
  out.insert(out.end(), field.begin(), field.end());
}

std::vector<Bytes> split_fields(ByteView buf) {
  std::vector<Bytes> fields;
  std::size_t pos = 0;
  while (pos < buf.size()) {
    if (buf.size() - pos < 4) return {};
    std::uint32_t len = get_u32_be(buf.subspan(pos));
    pos += 4;
    if (buf.size() - pos < len) return {};
    fields.emplace_back(buf.begin() + pos, buf.begin() + pos + len);
    pos += len;
  }
  return fields;
}

}  // namespace ofsim
