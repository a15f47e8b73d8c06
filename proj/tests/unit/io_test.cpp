#include <gtest/gtest.h>

#include <filesystem>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "vocabhull/error.hpp"
#include "vocabhull/io.hpp"

namespace vocabhull {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "vocabhull_io_test";
  fs::create_directories(dir);
  return dir / name;
}

TEST(Vxe, IdentityFromHandBuiltBytes) {
  const auto bytes = testing::vxe_bytes(2, 2, {1, 0, 0, 1});
  const auto m = decode_matrix(bytes);
  EXPECT_EQ(m, EmbeddingMatrix(2, 2, {1, 0, 0, 1}));
}

TEST(Vxe, EncodingMatchesHandBuiltBytes) {
  const auto m = testing::gaussian_matrix(3, 5, 9);
  std::vector<float> values(m.data().begin(), m.data().end());
  EXPECT_EQ(encode_matrix(m), testing::vxe_bytes(3, 5, values));
}

TEST(Vxe, SingleEntryIsSixteenBytes) {
  EXPECT_EQ(encode_matrix(EmbeddingMatrix(1, 1, {0.0f})).size(), 16u);
}

TEST(Vxe, PayloadIsRowsTimesDimTimesFour) {
  EXPECT_EQ(encode_matrix(EmbeddingMatrix(2, 3)).size() - kVxeHeaderBytes, 24u);
}

TEST(Vxe, FileRoundTripIsByteExact) {
  const auto path = scratch("rt.vxe");
  const auto bytes = testing::vxe_bytes(4, 3, {1, -2, 3.5f, 1e-30f, -0.0f, 7, 8, 9, 10, 11, 12, 13});
  write_bytes(bytes, path);
  const auto m = read_matrix(path);
  const auto again = scratch("rt2.vxe");
  write_matrix(m, again);
  EXPECT_EQ(read_bytes(again), bytes);
}

TEST(Vxe, BadMagicNamesOffsetZero) {
  auto bytes = testing::vxe_bytes(1, 1, {1});
  bytes[0] = 'X';
  bytes[1] = 'X';
  bytes[2] = 'X';
  bytes[3] = 'X';
  try {
    decode_matrix(bytes);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }
}

TEST(Vxe, TruncatedPayloadNamesOffset) {
  auto bytes = testing::vxe_bytes(2, 2, {1, 2, 3, 4});
  bytes.resize(bytes.size() - 3);
  try {
    decode_matrix(bytes);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), bytes.size());
    EXPECT_NE(std::string(e.what()).find("byte offset"), std::string::npos);
  }
}

TEST(Vxe, TruncatedHeader) {
  const std::vector<std::uint8_t> bytes = {'V', 'X', 'E', '1', 1, 0};
  EXPECT_THROW(decode_matrix(bytes), FormatError);
}

TEST(Vxe, NonFiniteEntryNamesItsOffset) {
  const auto bytes = testing::vxe_bytes(1, 3, {1, NAN, 2});
  try {
    decode_matrix(bytes);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), kVxeHeaderBytes + 4);
  }
}

TEST(Vxe, TrailingBytesRejected) {
  auto bytes = testing::vxe_bytes(1, 1, {1});
  bytes.push_back(0);
  EXPECT_THROW(decode_matrix(bytes), FormatError);
}

TEST(Vxe, EmptyPathIsIoError) {
  EXPECT_THROW(write_matrix(EmbeddingMatrix(1, 1), ""), IoError);
  EXPECT_THROW(read_matrix(""), IoError);
}

TEST(Vxe, MissingFileIsIoError) { EXPECT_THROW(read_matrix(scratch("absent.vxe")), IoError); }

TEST(VocabFile, ReadsEscapedLines) {
  const auto path = scratch("a.vocab");
  write_text("\"a\"\n\"\xE2\x96\x81" "b\"\n", path);
  const auto v = read_vocab(path);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v.find("a"), TokenId{0});
  EXPECT_EQ(v.at(1), "\xE2\x96\x81" "b");
}

TEST(VocabFile, DuplicateTokenRejected) {
  const auto path = scratch("dup.vocab");
  write_text("\"a\"\n\"a\"\n", path);
  EXPECT_THROW(read_vocab(path), ValidationError);
}

TEST(VocabFile, InvalidEscapeIsFormatError) {
  const auto path = scratch("bad.vocab");
  write_text("\"a\"\n\"\\q\"\n", path);
  try {
    read_vocab(path);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_GE(e.offset(), 4u);
  }
}

TEST(VocabFile, ControlCharactersRoundTrip) {
  const Vocab v({"line\nbreak", "tab\there", "quote\"", "back\\slash", "\xC4\xA0the", " "});
  const auto path = scratch("ctl.vocab");
  write_vocab(v, path);
  const auto bytes = read_bytes(path);
  EXPECT_EQ(std::count(bytes.begin(), bytes.end(), '\n'), 6);
  EXPECT_EQ(read_vocab(path), v);
  const auto again = scratch("ctl2.vocab");
  write_vocab(read_vocab(path), again);
  EXPECT_EQ(read_bytes(again), bytes);
}

TEST(VocabFile, EscapeIsInverseOfUnescape) {
  for (const std::string s : {"plain", "new\nline", "\x01\x02", "\xE2\x96\x81x", "\"\\"}) {
    EXPECT_EQ(unescape_token(escape_token(s)), s);
  }
}

TEST(Vocab, DuplicateAddThrows) {
  Vocab v;
  v.add("x");
  EXPECT_THROW(v.add("x"), ValidationError);
}

}  // namespace
}  // namespace vocabhull
