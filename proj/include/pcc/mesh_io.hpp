// Copyright 2026 The pccorrupt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "pcc/geometry.hpp"

namespace pcc {

/// Parses OFF text into a triangle mesh.
///
/// Accepts the ModelNet40 variant where the counts are fused onto the magic
/// line ("OFF492 306 0"). Polygons are fan-triangulated from their first
/// vertex; fan triangles that repeat an index are dropped. Trailing tokens on
/// vertex and face lines (colors) are ignored.
TriangleMesh parse_off(std::string_view text);
std::string write_off(const TriangleMesh& mesh);

enum class PlyEncoding { kBinaryLittleEndian, kAscii };

/// PLY with a "vertex" element carrying float x, y, z. Other vertex
/// properties and other elements are skipped on read.
PointCloud parse_ply(std::string_view bytes);
std::string encode_ply(const PointCloud& cloud, PlyEncoding encoding = PlyEncoding::kBinaryLittleEndian);

/// Header-less little-endian float32 xyz triples.
PointCloud parse_raw(std::string_view bytes);
std::string encode_raw(const PointCloud& cloud);

std::string read_file(const std::filesystem::path& path);
/// Writes via a temporary sibling and rename, so readers never see a torn file.
void write_file(const std::filesystem::path& path, std::string_view bytes);

TriangleMesh load_mesh(const std::filesystem::path& path);
/// Dispatches on extension: .ply, .bin/.raw, or .off (sampled later by callers,
/// so .off is rejected here).
PointCloud load_cloud(const std::filesystem::path& path);
void save_cloud(const std::filesystem::path& path, const PointCloud& cloud,
                PlyEncoding encoding = PlyEncoding::kBinaryLittleEndian);

}  // namespace pcc
