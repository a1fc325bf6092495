#include "crnd/bitseq.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>

#include "crnd/errors.hpp"

namespace crnd {

namespace {

constexpr std::array<char, 4> kMagic{'C', 'R', 'N', 'D'};

}  // namespace

BitSequence::BitSequence(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (auto& b : bits_) {
    if (b > 1) throw InputError("bit value other than 0/1");
  }
}

BitSequence::BitSequence(std::size_t length, std::uint8_t fill)
    : bits_(length, static_cast<std::uint8_t>(fill ? 1 : 0)) {}

BitSequence BitSequence::from_string(std::string_view text) {
  std::vector<std::uint8_t> bits;
  bits.reserve(text.size());
  for (char c : text) {
    if (c == '0' || c == '1') {
      bits.push_back(static_cast<std::uint8_t>(c - '0'));
    } else {
      throw InputError(std::string("invalid bit character '") + c + "'");
    }
  }
  return BitSequence(std::move(bits));
}

void BitSequence::push_back(std::uint8_t bit) { bits_.push_back(bit ? 1 : 0); }

BitSequence BitSequence::slice(std::size_t offset, std::size_t count) const {
  if (offset > bits_.size() || count > bits_.size() - offset) {
    throw InputError("slice out of range");
  }
  return BitSequence(std::vector<std::uint8_t>(bits_.begin() + offset,
                                               bits_.begin() + offset + count));
}

std::size_t BitSequence::count_ones() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::string BitSequence::to_string() const {
  std::string s(bits_.size(), '0');
  for (std::size_t i = 0; i < bits_.size(); ++i) s[i] = static_cast<char>('0' + bits_[i]);
  return s;
}

std::uint64_t BitSequence::to_uint() const {
  if (bits_.size() > 64) throw ScaleError("to_uint: more than 64 bits");
  std::uint64_t v = 0;
  for (auto b : bits_) v = (v << 1) | b;
  return v;
}

BitSequence BitSequence::from_uint(std::uint64_t value, std::size_t length) {
  if (length > 64) throw ScaleError("from_uint: more than 64 bits");
  BitSequence out(length);
  for (std::size_t i = 0; i < length; ++i) {
    out.bits_[i] = static_cast<std::uint8_t>((value >> (length - 1 - i)) & 1u);
  }
  return out;
}

void write_text(std::ostream& out, std::span<const BitSequence> records) {
  for (const auto& r : records) out << r.to_string() << '\n';
}

void write_packed(std::ostream& out, std::span<const BitSequence> records) {
  for (const auto& r : records) {
    std::array<char, 16> header{};
    std::copy(kMagic.begin(), kMagic.end(), header.begin());
    header[4] = static_cast<char>(kPackedVersion);
    const std::uint64_t n = r.size();
    for (int i = 0; i < 8; ++i) header[8 + i] = static_cast<char>((n >> (8 * i)) & 0xffu);
    out.write(header.data(), header.size());
    std::vector<char> bytes((n + 7) / 8, 0);
    for (std::size_t i = 0; i < n; ++i) {
      if (r[i]) bytes[i / 8] = static_cast<char>(bytes[i / 8] | (0x80u >> (i % 8)));
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
}

std::vector<BitSequence> read_text(std::istream& in) {
  std::vector<BitSequence> records;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    records.push_back(BitSequence::from_string(line));
  }
  return records;
}

std::vector<BitSequence> read_packed(std::istream& in) {
  std::vector<BitSequence> records;
  for (;;) {
    std::array<char, 16> header{};
    in.read(header.data(), header.size());
    if (in.gcount() == 0) break;
    if (in.gcount() != 16 || !std::equal(kMagic.begin(), kMagic.end(), header.begin())) {
      throw InputError("packed bit file: bad header");
    }
    if (static_cast<std::uint8_t>(header[4]) != kPackedVersion) {
      throw InputError("packed bit file: unsupported version");
    }
    std::uint64_t n = 0;
    for (int i = 7; i >= 0; --i) n = (n << 8) | static_cast<std::uint8_t>(header[8 + i]);
    std::vector<char> bytes((n + 7) / 8);
    in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (static_cast<std::uint64_t>(in.gcount()) != bytes.size()) {
      throw InputError("packed bit file: truncated payload");
    }
    std::vector<std::uint8_t> bits(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      bits[i] = static_cast<std::uint8_t>((static_cast<unsigned char>(bytes[i / 8]) >> (7 - i % 8)) & 1u);
    }
    records.emplace_back(std::move(bits));
  }
  return records;
}

std::vector<BitSequence> read_bits_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::array<char, 4> head{};
  in.read(head.data(), head.size());
  const bool packed = in.gcount() == 4 && head == kMagic;
  in.clear();
  in.seekg(0);
  return packed ? read_packed(in) : read_text(in);
}

void write_bits_file(const std::string& path, std::span<const BitSequence> records,
                     BitFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  if (format == BitFormat::packed) {
    write_packed(out, records);
  } else {
    write_text(out, records);
  }
}

}  // namespace crnd
