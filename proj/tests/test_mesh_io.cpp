// Copyright 2026 The pccorrupt Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "pcc/errors.hpp"
#include "pcc/mesh_io.hpp"
#include "test_util.hpp"

using pcc::ParseError;
using pcc::ParseErrorKind;

namespace {

ParseErrorKind off_error(const std::string& text, std::size_t* line = nullptr) {
  try {
    pcc::parse_off(text);
  } catch (const ParseError& e) {
    if (line) *line = e.line();
    return e.kind();
  }
  ADD_FAILURE() << "no parse error for:\n" << text;
  return ParseErrorKind::kInvalidValue;
}

}  // namespace

TEST(ParseOff, MinimalTriangle) {
  const auto m = pcc::parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
  EXPECT_EQ(m.vertex_count(), 3u);
  EXPECT_EQ(m.face_count(), 1u);
}

TEST(ParseOff, FusedHeaderQuadIsFanTriangulated) {
  const auto m = pcc::parse_off("OFF4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n");
  EXPECT_EQ(m.vertex_count(), 4u);
  ASSERT_EQ(m.face_count(), 2u);
  EXPECT_EQ(m.faces()[0], (pcc::Face{0, 1, 2}));
  EXPECT_EQ(m.faces()[1], (pcc::Face{0, 2, 3}));
}

TEST(ParseOff, CommentsAndColorsIgnored) {
  const auto m = pcc::parse_off("# header\nOFF\n3 1 0 # counts\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2 255 0 0\n");
  EXPECT_EQ(m.face_count(), 1u);
}

TEST(ParseOff, DistinctErrorsWithLines) {
  std::size_t line = 0;
  EXPECT_EQ(off_error("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 99\n", &line), ParseErrorKind::kIndexOutOfRange);
  EXPECT_EQ(line, 6u);
  EXPECT_EQ(off_error("PLY\n3 1 0\n"), ParseErrorKind::kMalformedHeader);
  EXPECT_EQ(off_error("OFF\n3 1 0\n0 0 0\n1 0 0\n"), ParseErrorKind::kTruncated);
  EXPECT_EQ(off_error("OFF\n3 1 0\n0 0 x\n1 0 0\n0 1 0\n3 0 1 2\n"), ParseErrorKind::kInvalidValue);
}

TEST(ParseOff, WriteReparseFixedPoint) {
  const auto m = pcc::parse_off("OFF\n4 2 0\n0 0 0\n1 0.5 0\n1 1 0.25\n0 1 0\n3 0 1 2\n3 0 2 3\n");
  const std::string once = pcc::write_off(m);
  const auto again = pcc::parse_off(once);
  EXPECT_EQ(again, m);
  EXPECT_EQ(pcc::write_off(again), once);
}

TEST(Ply, BinaryAndAsciiRoundTripAtFloatPrecision) {
  const auto c = testutil::random_cloud(50, 3);
  for (auto enc : {pcc::PlyEncoding::kBinaryLittleEndian, pcc::PlyEncoding::kAscii}) {
    const auto back = pcc::parse_ply(pcc::encode_ply(c, enc));
    ASSERT_EQ(back.size(), c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      for (int k = 0; k < 3; ++k) EXPECT_EQ(back[i][k], static_cast<double>(static_cast<float>(c[i][k])));
    }
  }
}

TEST(Ply, SkipsExtraPropertiesAndElements) {
  const std::string text =
      "ply\nformat ascii 1.0\ncomment test\nelement vertex 2\nproperty float x\nproperty float y\n"
      "property float z\nproperty uchar red\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n"
      "1 2 3 255\n4 5 6 0\n3 0 1 1\n";
  const auto c = pcc::parse_ply(text);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[1], pcc::Vec3(4, 5, 6));
}

TEST(Raw, RoundTripAndSizeCheck) {
  const auto c = testutil::random_cloud(10, 4);
  const std::string bytes = pcc::encode_raw(c);
  EXPECT_EQ(bytes.size(), 120u);
  EXPECT_EQ(pcc::parse_raw(bytes).size(), 10u);
  EXPECT_THROW(pcc::parse_raw(bytes.substr(0, 119)), ParseError);
}

TEST(Files, SaveAndLoadByExtension) {
  testutil::TempDir dir("mesh_io");
  const auto c = testutil::random_cloud(20, 5);
  pcc::save_cloud(dir.path() / "a.ply", c);
  pcc::write_file(dir.path() / "b.bin", pcc::encode_raw(c));
  EXPECT_EQ(pcc::load_cloud(dir.path() / "a.ply"), pcc::load_cloud(dir.path() / "b.bin"));
  EXPECT_THROW(pcc::load_cloud(dir.path() / "missing.ply"), pcc::Error);
}
