#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace crnd {

/// Ordered sequence of binary symbols, one byte (0 or 1) per bit.
class BitSequence {
public:
  BitSequence() = default;
  explicit BitSequence(std::vector<std::uint8_t> bits);
  explicit BitSequence(std::size_t length, std::uint8_t fill = 0);

  /// Parses a string of '0'/'1' characters.
  static BitSequence from_string(std::string_view text);

  std::size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }
  std::uint8_t operator[](std::size_t i) const { return bits_[i]; }
  std::span<const std::uint8_t> bits() const { return bits_; }

  void push_back(std::uint8_t bit);
  void reserve(std::size_t n) { bits_.reserve(n); }
  void set(std::size_t i, std::uint8_t bit) { bits_[i] = bit ? 1 : 0; }

  BitSequence slice(std::size_t offset, std::size_t count) const;
  std::size_t count_ones() const;
  std::string to_string() const;

  /// Value with bit 0 as the most significant bit; requires size() <= 64.
  std::uint64_t to_uint() const;
  static BitSequence from_uint(std::uint64_t value, std::size_t length);

  friend bool operator==(const BitSequence&, const BitSequence&) = default;

private:
  std::vector<std::uint8_t> bits_;
};

// Shared file formats. Text: one ASCII '0'/'1' per bit, one record per line,
// each line newline-terminated. Packed: 16-byte header ("CRND", version byte,
// 3 reserved zero bytes, 8-byte little-endian bit count) followed by
// MSB-first bytes, zero padded. Readers accept several concatenated records.
enum class BitFormat { text, packed };

inline constexpr std::uint8_t kPackedVersion = 1;

void write_text(std::ostream& out, std::span<const BitSequence> records);
void write_packed(std::ostream& out, std::span<const BitSequence> records);
std::vector<BitSequence> read_text(std::istream& in);
std::vector<BitSequence> read_packed(std::istream& in);

/// Reads either format, detecting the packed magic.
std::vector<BitSequence> read_bits_file(const std::string& path);
void write_bits_file(const std::string& path, std::span<const BitSequence> records,
                     BitFormat format);

}  // namespace crnd
