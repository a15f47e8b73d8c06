#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vocabhull/matrix.hpp"
#include "vocabhull/vocab.hpp"

namespace vocabhull {

// VXE1 layout: "VXE1" magic, rows (u32 LE), dim (u32 LE), then rows*dim
// IEEE-754 f32 LE values in row-major order.
inline constexpr std::size_t kVxeHeaderBytes = 12;

std::vector<std::uint8_t> encode_matrix(const EmbeddingMatrix& m);
// Throws FormatError naming the byte offset of the first problem.
EmbeddingMatrix decode_matrix(std::span<const std::uint8_t> bytes);

EmbeddingMatrix read_matrix(const std::filesystem::path& path);
void write_matrix(const EmbeddingMatrix& m, const std::filesystem::path& path);

// One JSON string literal per line, LF line endings.
Vocab read_vocab(const std::filesystem::path& path);
void write_vocab(const Vocab& v, const std::filesystem::path& path);
std::string escape_token(const std::string& token);
std::string unescape_token(const std::string& line);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(std::span<const std::uint8_t> bytes, const std::filesystem::path& path);
void write_text(const std::string& text, const std::filesystem::path& path);
// Lines without their terminators; a trailing CR is stripped.
std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace vocabhull
