#include "vocabhull/io.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>

#include "json.hpp"
#include "vocabhull/error.hpp"

namespace vocabhull {

namespace {

constexpr std::uint8_t kMagic[4] = {'V', 'X', 'E', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t at) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(bytes[at + b]) << (8 * b);
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_matrix(const EmbeddingMatrix& m) {
  if (m.rows() > UINT32_MAX || m.dim() > UINT32_MAX) {
    throw ValidationError("matrix shape does not fit the VXE1 header");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kVxeHeaderBytes + m.data().size() * 4);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.dim()));
  for (float v : m.data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

EmbeddingMatrix decode_matrix(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kVxeHeaderBytes) {
    throw FormatError("truncated VXE1 header: " + std::to_string(bytes.size()) + " bytes",
                      bytes.size());
  }
  for (std::size_t i = 0; i < 4; ++i) {
    if (bytes[i] != kMagic[i]) throw FormatError("bad magic, expected \"VXE1\"", i);
  }
  const std::uint32_t rows = get_u32(bytes, 4);
  const std::uint32_t dim = get_u32(bytes, 8);
  if (rows == 0) throw FormatError("rows must be >= 1", 4);
  if (dim == 0) throw FormatError("dim must be >= 1", 8);

  const std::uint64_t count = static_cast<std::uint64_t>(rows) * dim;
  const std::uint64_t expected = kVxeHeaderBytes + count * 4;
  if (bytes.size() < expected) {
    throw FormatError("truncated payload: expected " + std::to_string(expected) + " bytes, got " +
                          std::to_string(bytes.size()),
                      bytes.size());
  }
  if (bytes.size() > expected) {
    throw FormatError("trailing bytes after payload", expected);
  }

  std::vector<float> data(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::size_t at = kVxeHeaderBytes + i * 4;
    const float v = std::bit_cast<float>(get_u32(bytes, at));
    if (!std::isfinite(v)) throw FormatError("non-finite value", at);
    data[i] = v;
  }
  return EmbeddingMatrix(rows, dim, std::move(data));
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  if (path.empty()) throw IoError("empty path");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(std::span<const std::uint8_t> bytes, const std::filesystem::path& path) {
  if (path.empty()) throw IoError("empty path");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

void write_text(const std::string& text, const std::filesystem::path& path) {
  write_bytes(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()), path);
}

EmbeddingMatrix read_matrix(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  return decode_matrix(bytes);
}

void write_matrix(const EmbeddingMatrix& m, const std::filesystem::path& path) {
  write_bytes(encode_matrix(m), path);
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  std::vector<std::string> lines;
  std::string current;
  for (std::uint8_t b : bytes) {
    if (b == '\n') {
      if (!current.empty() && current.back() == '\r') current.pop_back();
      lines.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(static_cast<char>(b));
    }
  }
  if (!current.empty()) {
    if (current.back() == '\r') current.pop_back();
    lines.push_back(std::move(current));
  }
  return lines;
}

std::string escape_token(const std::string& token) {
  try {
    return nlohmann::json(token).dump();
  } catch (const nlohmann::json::type_error& e) {
    throw ValidationError(std::string("token is not valid UTF-8: ") + e.what());
  }
}

std::string unescape_token(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("invalid token escape: ") + e.what(), e.byte);
  }
  if (!j.is_string()) throw FormatError("vocab line is not a JSON string", 0);
  return j.get<std::string>();
}

Vocab read_vocab(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  Vocab vocab;
  std::size_t line_start = 0;
  std::size_t line_no = 0;
  while (line_start < bytes.size()) {
    std::size_t end = line_start;
    while (end < bytes.size() && bytes[end] != '\n') ++end;
    std::string line(bytes.begin() + static_cast<std::ptrdiff_t>(line_start),
                     bytes.begin() + static_cast<std::ptrdiff_t>(end));
    ++line_no;
    std::string token;
    try {
      token = unescape_token(line);
    } catch (const FormatError& e) {
      throw FormatError("vocab line " + std::to_string(line_no) + ": " + e.detail(),
                        line_start + e.offset());
    }
    if (auto existing = vocab.find(token)) {
      throw ValidationError("duplicate token " + line + " on line " + std::to_string(line_no) +
                            " (first on line " + std::to_string(*existing + 1) + ")");
    }
    vocab.add(std::move(token));
    line_start = end + 1;
  }
  return vocab;
}

void write_vocab(const Vocab& v, const std::filesystem::path& path) {
  std::string text;
  for (const auto& t : v.tokens()) {
    text += escape_token(t);
    text += '\n';
  }
  write_text(text, path);
}

}  // namespace vocabhull
