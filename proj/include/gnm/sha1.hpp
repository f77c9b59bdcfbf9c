#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <string>

namespace gnm {

// Minimal SHA-1, used to fingerprint run inputs the same way git hashes
// blobs: sha1("blob <len>\0<bytes>"). Not used for anything security
// sensitive.
class Sha1 {
public:
  Sha1() { reset(); }

  void reset() {
    h_ = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu, 0x10325476u, 0xC3D2E1F0u};
    len_ = 0;
    buf_fill_ = 0;
  }

  void update(const void *data, std::size_t n) {
    const auto *p = static_cast<const std::uint8_t *>(data);
    len_ += n;
    while (n > 0) {
      std::size_t take = std::min<std::size_t>(64 - buf_fill_, n);
      std::memcpy(buf_.data() + buf_fill_, p, take);
      buf_fill_ += take;
      p += take;
      n -= take;
      if (buf_fill_ == 64) {
        process(buf_.data());
        buf_fill_ = 0;
      }
    }
  }

  void update(const std::string &s) { update(s.data(), s.size()); }

  std::string hex_digest() {
    std::uint64_t bitlen = len_ * 8;
    std::uint8_t pad = 0x80;
    update(&pad, 1);
    std::uint8_t zero = 0;
    while (buf_fill_ != 56)
      update(&zero, 1);
    std::uint8_t lenbuf[8];
    for (int i = 0; i < 8; ++i)
      lenbuf[i] = static_cast<std::uint8_t>(bitlen >> (56 - 8 * i));
    // bypass len_ accounting for the trailer
    std::memcpy(buf_.data() + 56, lenbuf, 8);
    process(buf_.data());
    static const char *hex = "0123456789abcdef";
    std::string out;
    out.reserve(40);
    for (std::uint32_t w : h_) {
      for (int shift = 28; shift >= 0; shift -= 4)
        out.push_back(hex[(w >> shift) & 0xF]);
    }
    return out;
  }

private:
  static std::uint32_t rol(std::uint32_t v, int s) { return (v << s) | (v >> (32 - s)); }

  void process(const std::uint8_t *block) {
    std::uint32_t w[80];
    for (int i = 0; i < 16; ++i)
      w[i] = (std::uint32_t(block[4 * i]) << 24) | (std::uint32_t(block[4 * i + 1]) << 16) |
             (std::uint32_t(block[4 * i + 2]) << 8) | std::uint32_t(block[4 * i + 3]);
    for (int i = 16; i < 80; ++i)
      w[i] = rol(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
    std::uint32_t a = h_[0], b = h_[1], c = h_[2], d = h_[3], e = h_[4];
    for (int i = 0; i < 80; ++i) {
      std::uint32_t f, k;
      if (i < 20) {
        f = (b & c) | (~b & d);
        k = 0x5A827999u;
      } else if (i < 40) {
        f = b ^ c ^ d;
        k = 0x6ED9EBA1u;
      } else if (i < 60) {
        f = (b & c) | (b & d) | (c & d);
        k = 0x8F1BBCDCu;
      } else {
        f = b ^ c ^ d;
        k = 0xCA62C1D6u;
      }
      std::uint32_t tmp = rol(a, 5) + f + e + k + w[i];
      e = d;
      d = c;
      c = rol(b, 30);
      b = a;
      a = tmp;
    }
    h_[0] += a;
    h_[1] += b;
    h_[2] += c;
    h_[3] += d;
    h_[4] += e;
  }

  std::array<std::uint32_t, 5> h_{};
  std::array<std::uint8_t, 64> buf_{};
  std::uint64_t len_ = 0;
  std::size_t buf_fill_ = 0;
};

// Hash of raw content framed like a git blob object.
inline std::string git_blob_sha1(const std::string &content) {
  Sha1 h;
  std::string header = "blob " + std::to_string(content.size());
  h.update(header.data(), header.size() + 1); // include the NUL
  h.update(content);
  return h.hex_digest();
}

} // namespace gnm
