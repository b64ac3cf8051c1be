// Copyright 2026 The pccorrupt Authors
// SPDX-License-Identifier: Apache-2.0

#include "pcc/mesh_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <vector>

#include "pcc/errors.hpp"

namespace pcc {
namespace {

struct Token {
  std::string_view text;
  std::size_t line;
};

// Whitespace tokens with their 1-based line numbers; '#' starts a comment.
std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t line = 1;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (c == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else {
      const std::size_t start = i;
      while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) && text[i] != '#') ++i;
      tokens.push_back({text.substr(start, i - start), line});
    }
  }
  return tokens;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T value{};
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && s.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return value;
}

class TokenCursor {
 public:
  explicit TokenCursor(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  bool done() const { return pos_ >= tokens_.size(); }
  std::size_t line() const {
    if (tokens_.empty()) return 1;
    return pos_ < tokens_.size() ? tokens_[pos_].line : tokens_.back().line;
  }
  const Token& next(const char* what) {
    if (done()) throw ParseError(ParseErrorKind::kTruncated, line(), std::string("unexpected end of file reading ") + what);
    return tokens_[pos_++];
  }
  template <typename T>
  T number(const char* what) {
    const Token& tok = next(what);
    auto v = parse_number<T>(tok.text);
    if (!v) throw ParseError(ParseErrorKind::kInvalidValue, tok.line, std::string("bad ") + what + " '" + std::string(tok.text) + "'");
    return *v;
  }
  void skip_rest_of_line(std::size_t line_no) {
    while (!done() && tokens_[pos_].line == line_no) ++pos_;
  }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

TriangleMesh parse_off(std::string_view text) {
  auto tokens = tokenize(text);
  if (tokens.empty()) throw ParseError(ParseErrorKind::kMalformedHeader, 1, "empty OFF file");
  const Token magic = tokens.front();
  if (magic.text.substr(0, 3) != "OFF") {
    throw ParseError(ParseErrorKind::kMalformedHeader, magic.line, "missing OFF magic");
  }
  std::string_view fused = magic.text.substr(3);
  tokens.erase(tokens.begin());
  if (!fused.empty()) tokens.insert(tokens.begin(), Token{fused, magic.line});
  TokenCursor cur(std::move(tokens));

  auto header_count = [&](const char* what) -> std::size_t {
    if (cur.done()) throw ParseError(ParseErrorKind::kMalformedHeader, magic.line, std::string("missing ") + what);
    const Token& tok = cur.next(what);
    auto v = parse_number<long long>(tok.text);
    if (!v || *v < 0) {
      throw ParseError(ParseErrorKind::kMalformedHeader, tok.line, std::string("bad ") + what + " '" + std::string(tok.text) + "'");
    }
    return static_cast<std::size_t>(*v);
  };
  const std::size_t nv = header_count("vertex count");
  const std::size_t nf = header_count("face count");
  const std::size_t header_line = cur.line();
  header_count("edge count");
  cur.skip_rest_of_line(header_line);

  std::vector<Vec3> vertices;
  vertices.reserve(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    const std::size_t line = cur.line();
    Vec3 v;
    v.x() = cur.number<double>("vertex coordinate");
    v.y() = cur.number<double>("vertex coordinate");
    v.z() = cur.number<double>("vertex coordinate");
    if (!v.allFinite()) throw ParseError(ParseErrorKind::kInvalidValue, line, "non-finite vertex coordinate");
    vertices.push_back(v);
    cur.skip_rest_of_line(line);
  }

  std::vector<Face> faces;
  faces.reserve(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    const std::size_t line = cur.line();
    const auto arity = cur.number<long long>("face arity");
    if (arity < 3) throw ParseError(ParseErrorKind::kInvalidValue, line, "face with fewer than 3 vertices");
    std::vector<std::uint32_t> poly;
    poly.reserve(static_cast<std::size_t>(arity));
    for (long long k = 0; k < arity; ++k) {
      const std::size_t idx_line = cur.line();
      const auto idx = cur.number<long long>("face index");
      if (idx < 0 || static_cast<std::size_t>(idx) >= nv) {
        throw ParseError(ParseErrorKind::kIndexOutOfRange, idx_line,
                         "face index " + std::to_string(idx) + " out of range for " + std::to_string(nv) + " vertices");
      }
      poly.push_back(static_cast<std::uint32_t>(idx));
    }
    for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
      const Face tri{poly[0], poly[k], poly[k + 1]};
      if (tri[0] != tri[1] && tri[1] != tri[2] && tri[0] != tri[2]) faces.push_back(tri);
    }
    cur.skip_rest_of_line(line);
  }
  return TriangleMesh(std::move(vertices), std::move(faces));
}

std::string write_off(const TriangleMesh& mesh) {
  std::string out = "OFF\n" + std::to_string(mesh.vertex_count()) + " " + std::to_string(mesh.face_count()) + " 0\n";
  char buf[64];
  for (const Vec3& v : mesh.vertices()) {
    for (int k = 0; k < 3; ++k) {
      auto res = std::to_chars(buf, buf + sizeof(buf), v[k]);
      out.append(buf, res.ptr);
      out.push_back(k == 2 ? '\n' : ' ');
    }
  }
  for (const Face& f : mesh.faces()) {
    out += "3 " + std::to_string(f[0]) + " " + std::to_string(f[1]) + " " + std::to_string(f[2]) + "\n";
  }
  return out;
}

namespace {

template <typename T>
T load_le(const char* p) {
  T value;
  std::memcpy(&value, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
    auto* bytes = reinterpret_cast<unsigned char*>(&value);
    std::reverse(bytes, bytes + sizeof(T));
  }
  return value;
}

template <typename T>
void store_le(std::string& out, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) std::reverse(bytes, bytes + sizeof(T));
  out.append(bytes, sizeof(T));
}

enum class PlyType { kInt8, kUInt8, kInt16, kUInt16, kInt32, kUInt32, kFloat32, kFloat64 };

std::optional<PlyType> ply_type(std::string_view name) {
  if (name == "char" || name == "int8") return PlyType::kInt8;
  if (name == "uchar" || name == "uint8") return PlyType::kUInt8;
  if (name == "short" || name == "int16") return PlyType::kInt16;
  if (name == "ushort" || name == "uint16") return PlyType::kUInt16;
  if (name == "int" || name == "int32") return PlyType::kInt32;
  if (name == "uint" || name == "uint32") return PlyType::kUInt32;
  if (name == "float" || name == "float32") return PlyType::kFloat32;
  if (name == "double" || name == "float64") return PlyType::kFloat64;
  return std::nullopt;
}

std::size_t ply_size(PlyType t) {
  switch (t) {
    case PlyType::kInt8:
    case PlyType::kUInt8: return 1;
    case PlyType::kInt16:
    case PlyType::kUInt16: return 2;
    case PlyType::kInt32:
    case PlyType::kUInt32:
    case PlyType::kFloat32: return 4;
    case PlyType::kFloat64: return 8;
  }
  return 0;
}

double ply_read(PlyType t, const char* p) {
  switch (t) {
    case PlyType::kInt8: return load_le<std::int8_t>(p);
    case PlyType::kUInt8: return load_le<std::uint8_t>(p);
    case PlyType::kInt16: return load_le<std::int16_t>(p);
    case PlyType::kUInt16: return load_le<std::uint16_t>(p);
    case PlyType::kInt32: return load_le<std::int32_t>(p);
    case PlyType::kUInt32: return load_le<std::uint32_t>(p);
    case PlyType::kFloat32: return load_le<float>(p);
    case PlyType::kFloat64: return load_le<double>(p);
  }
  return 0.0;
}

struct PlyProperty {
  std::string name;
  PlyType type;
  bool is_list = false;
  PlyType count_type = PlyType::kUInt8;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

}  // namespace

PointCloud parse_ply(std::string_view bytes) {
  // Header is line-oriented ASCII terminated by "end_header\n".
  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto next_line = [&]() -> std::optional<std::string_view> {
    if (pos >= bytes.size()) return std::nullopt;
    std::size_t end = bytes.find('\n', pos);
    if (end == std::string_view::npos) end = bytes.size();
    std::string_view line = bytes.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = end + 1;
    ++line_no;
    return line;
  };
  auto split = [](std::string_view line) {
    std::vector<std::string_view> words;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      std::size_t start = i;
      while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i > start) words.push_back(line.substr(start, i - start));
    }
    return words;
  };

  auto magic = next_line();
  if (!magic || *magic != "ply") throw ParseError(ParseErrorKind::kMalformedHeader, 1, "missing ply magic");
  bool binary = false;
  bool have_format = false;
  std::vector<PlyElement> elements;
  for (;;) {
    auto line = next_line();
    if (!line) throw ParseError(ParseErrorKind::kTruncated, line_no, "header not terminated by end_header");
    auto words = split(*line);
    if (words.empty() || words[0] == "comment" || words[0] == "obj_info") continue;
    if (words[0] == "end_header") break;
    if (words[0] == "format") {
      if (words.size() < 2) throw ParseError(ParseErrorKind::kMalformedHeader, line_no, "bad format line");
      if (words[1] == "ascii") {
        binary = false;
      } else if (words[1] == "binary_little_endian") {
        binary = true;
      } else {
        throw ParseError(ParseErrorKind::kMalformedHeader, line_no, "unsupported PLY format " + std::string(words[1]));
      }
      have_format = true;
    } else if (words[0] == "element") {
      if (words.size() != 3) throw ParseError(ParseErrorKind::kMalformedHeader, line_no, "bad element line");
      auto count = parse_number<std::size_t>(words[2]);
      if (!count) throw ParseError(ParseErrorKind::kMalformedHeader, line_no, "bad element count");
      elements.push_back({std::string(words[1]), *count, {}});
    } else if (words[0] == "property") {
      if (elements.empty()) throw ParseError(ParseErrorKind::kMalformedHeader, line_no, "property before element");
      PlyProperty prop;
      if (words.size() == 5 && words[1] == "list") {
        auto ct = ply_type(words[2]);
        auto it = ply_type(words[3]);
        if (!ct || !it) throw ParseError(ParseErrorKind::kMalformedHeader, line_no, "bad list property type");
        prop = {std::string(words[4]), *it, true, *ct};
      } else if (words.size() == 3) {
        auto t = ply_type(words[1]);
        if (!t) throw ParseError(ParseErrorKind::kMalformedHeader, line_no, "bad property type " + std::string(words[1]));
        prop = {std::string(words[2]), *t, false, PlyType::kUInt8};
      } else {
        throw ParseError(ParseErrorKind::kMalformedHeader, line_no, "bad property line");
      }
      elements.back().properties.push_back(prop);
    } else {
      throw ParseError(ParseErrorKind::kMalformedHeader, line_no, "unknown header keyword " + std::string(words[0]));
    }
  }
  if (!have_format) throw ParseError(ParseErrorKind::kMalformedHeader, line_no, "missing format line");

  auto vertex_it = std::find_if(elements.begin(), elements.end(), [](const PlyElement& e) { return e.name == "vertex"; });
  if (vertex_it == elements.end()) throw ParseError(ParseErrorKind::kMalformedHeader, line_no, "no vertex element");
  int axis_of[3] = {-1, -1, -1};
  for (std::size_t i = 0; i < vertex_it->properties.size(); ++i) {
    const auto& p = vertex_it->properties[i];
    if (p.is_list) continue;
    if (p.name == "x") axis_of[0] = static_cast<int>(i);
    if (p.name == "y") axis_of[1] = static_cast<int>(i);
    if (p.name == "z") axis_of[2] = static_cast<int>(i);
  }
  if (axis_of[0] < 0 || axis_of[1] < 0 || axis_of[2] < 0) {
    throw ParseError(ParseErrorKind::kMalformedHeader, line_no, "vertex element lacks x, y, z");
  }

  std::vector<Vec3> points;
  points.reserve(vertex_it->count);
  if (binary) {
    for (const PlyElement& element : elements) {
      const bool is_vertex = &element == &*vertex_it;
      for (std::size_t r = 0; r < element.count; ++r) {
        Vec3 v = Vec3::Zero();
        for (std::size_t pi = 0; pi < element.properties.size(); ++pi) {
          const PlyProperty& prop = element.properties[pi];
          std::size_t count = 1;
          if (prop.is_list) {
            const std::size_t cs = ply_size(prop.count_type);
            if (pos + cs > bytes.size()) throw ParseError(ParseErrorKind::kTruncated, 0, "binary PLY body truncated");
            count = static_cast<std::size_t>(ply_read(prop.count_type, bytes.data() + pos));
            pos += cs;
          }
          const std::size_t need = count * ply_size(prop.type);
          if (pos + need > bytes.size()) throw ParseError(ParseErrorKind::kTruncated, 0, "binary PLY body truncated");
          if (is_vertex && !prop.is_list) {
            for (int a = 0; a < 3; ++a) {
              if (axis_of[a] == static_cast<int>(pi)) v[a] = ply_read(prop.type, bytes.data() + pos);
            }
          }
          pos += need;
        }
        if (is_vertex) points.push_back(v);
      }
      if (is_vertex) break;
    }
  } else {
    for (const PlyElement& element : elements) {
      const bool is_vertex = &element == &*vertex_it;
      for (std::size_t r = 0; r < element.count; ++r) {
        auto line = next_line();
        if (!line) throw ParseError(ParseErrorKind::kTruncated, line_no, "ASCII PLY body truncated");
        if (!is_vertex) continue;
        auto words = split(*line);
        if (words.size() < vertex_it->properties.size()) {
          throw ParseError(ParseErrorKind::kTruncated, line_no, "vertex row has too few values");
        }
        Vec3 v;
        for (int a = 0; a < 3; ++a) {
          const auto col = static_cast<std::size_t>(axis_of[a]);
          // Float columns round-trip through float so ASCII and binary agree.
          std::optional<double> value;
          if (vertex_it->properties[col].type == PlyType::kFloat32) {
            if (auto f = parse_number<float>(words[col])) value = *f;
          } else {
            value = parse_number<double>(words[col]);
          }
          if (!value) throw ParseError(ParseErrorKind::kInvalidValue, line_no, "bad vertex coordinate");
          v[a] = *value;
        }
        points.push_back(v);
      }
      if (is_vertex) break;
    }
  }
  for (const Vec3& p : points) {
    if (!p.allFinite()) throw ParseError(ParseErrorKind::kInvalidValue, 0, "non-finite vertex coordinate");
  }
  return PointCloud(std::move(points));
}

std::string encode_ply(const PointCloud& cloud, PlyEncoding encoding) {
  std::string out = "ply\nformat ";
  out += encoding == PlyEncoding::kAscii ? "ascii" : "binary_little_endian";
  out += " 1.0\nelement vertex " + std::to_string(cloud.size()) +
         "\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
  if (encoding == PlyEncoding::kAscii) {
    char buf[32];
    for (const Vec3& p : cloud) {
      for (int k = 0; k < 3; ++k) {
        auto res = std::to_chars(buf, buf + sizeof(buf), static_cast<float>(p[k]));
        out.append(buf, res.ptr);
        out.push_back(k == 2 ? '\n' : ' ');
      }
    }
  } else {
    out.reserve(out.size() + cloud.size() * 12);
    for (const Vec3& p : cloud) {
      for (int k = 0; k < 3; ++k) store_le(out, static_cast<float>(p[k]));
    }
  }
  return out;
}

PointCloud parse_raw(std::string_view bytes) {
  if (bytes.size() % 12 != 0) {
    throw ParseError(ParseErrorKind::kTruncated, 0,
                     "raw cloud size " + std::to_string(bytes.size()) + " is not a multiple of 12 bytes");
  }
  std::vector<Vec3> points(bytes.size() / 12);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (int k = 0; k < 3; ++k) points[i][k] = load_le<float>(bytes.data() + 12 * i + 4 * k);
    if (!points[i].allFinite()) throw ParseError(ParseErrorKind::kInvalidValue, 0, "non-finite coordinate in raw cloud");
  }
  return PointCloud(std::move(points));
}

std::string encode_raw(const PointCloud& cloud) {
  std::string out;
  out.reserve(cloud.size() * 12);
  for (const Vec3& p : cloud) {
    for (int k = 0; k < 3; ++k) store_le(out, static_cast<float>(p[k]));
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("failed writing " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace {

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext;
}

}  // namespace

TriangleMesh load_mesh(const std::filesystem::path& path) {
  if (lower_extension(path) != ".off") throw InvalidArgument("not an OFF mesh: " + path.string());
  return parse_off(read_file(path));
}

PointCloud load_cloud(const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".ply") return parse_ply(read_file(path));
  if (ext == ".bin" || ext == ".raw") return parse_raw(read_file(path));
  throw InvalidArgument("unsupported cloud format: " + path.string());
}

void save_cloud(const std::filesystem::path& path, const PointCloud& cloud, PlyEncoding encoding) {
  const std::string ext = lower_extension(path);
  if (ext == ".bin" || ext == ".raw") {
    write_file(path, encode_raw(cloud));
  } else {
    write_file(path, encode_ply(cloud, encoding));
  }
}

}  // namespace pcc
