// Copyright 2026 The pccorrupt Authors
// SPDX-License-Identifier: Apache-2.0

#include "pcc/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "pcc/errors.hpp"
#include "pcc/mesh_io.hpp"

namespace pcc {
namespace {

template <typename T>
void put(std::string& out, T value) {
  static_assert(std::endian::native == std::endian::little, "little-endian host required");
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    if (bytes_.size() - pos_ < sizeof(T)) throw ParseError(ParseErrorKind::kTruncated, 0, "checkpoint truncated");
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(const NetworkState& state) {
  std::string out(kCheckpointMagic, 4);
  std::uint32_t count = 0;
  for_each_tensor(state, [&](std::string_view, TensorRole, const auto&) { ++count; });
  put<std::uint32_t>(out, count);
  for_each_tensor(state, [&](std::string_view, TensorRole, const auto& t) {
    using T = std::decay_t<decltype(t)>;
    if constexpr (T::ColsAtCompileTime == 1) {
      put<std::uint32_t>(out, 1);
      put<std::uint64_t>(out, static_cast<std::uint64_t>(t.rows()));
      for (Eigen::Index i = 0; i < t.size(); ++i) put<double>(out, t(i));
    } else {
      put<std::uint32_t>(out, 2);
      put<std::uint64_t>(out, static_cast<std::uint64_t>(t.rows()));
      put<std::uint64_t>(out, static_cast<std::uint64_t>(t.cols()));
      for (Eigen::Index r = 0; r < t.rows(); ++r)
        for (Eigen::Index c = 0; c < t.cols(); ++c) put<double>(out, t(r, c));
    }
  });
  return out;
}

NetworkState decode_checkpoint(std::string_view bytes, const Architecture& arch) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) {
    throw ParseError(ParseErrorKind::kMalformedHeader, 0, "not a TPN1 checkpoint");
  }
  Reader in(bytes.substr(4));
  NetworkState state = init_network(arch, 0);
  std::uint32_t expected = 0;
  for_each_tensor(state, [&](std::string_view, TensorRole, const auto&) { ++expected; });
  if (in.get<std::uint32_t>() != expected) {
    throw ParseError(ParseErrorKind::kMalformedHeader, 0, "checkpoint tensor count does not match architecture");
  }
  for_each_tensor(state, [&](std::string_view name, TensorRole, auto& t) {
    using T = std::decay_t<decltype(t)>;
    const std::uint32_t ndim = in.get<std::uint32_t>();
    const bool vec = T::ColsAtCompileTime == 1;
    if (ndim != (vec ? 1u : 2u)) {
      throw ParseError(ParseErrorKind::kMalformedHeader, 0, "tensor " + std::string(name) + " has wrong rank");
    }
    const std::uint64_t rows = in.get<std::uint64_t>();
    const std::uint64_t cols = vec ? 1 : in.get<std::uint64_t>();
    if (rows != static_cast<std::uint64_t>(t.rows()) || cols != static_cast<std::uint64_t>(t.cols())) {
      throw ParseError(ParseErrorKind::kMalformedHeader, 0, "tensor " + std::string(name) + " has wrong shape");
    }
    for (Eigen::Index r = 0; r < t.rows(); ++r)
      for (Eigen::Index c = 0; c < t.cols(); ++c) t(r, c) = in.get<double>();
  });
  if (!in.done()) throw ParseError(ParseErrorKind::kInvalidValue, 0, "trailing bytes after checkpoint tensors");
  auto check_var = [](const BatchNorm& bn) {
    if (!(bn.running_var.array() > 0.0).all()) throw ParseError(ParseErrorKind::kInvalidValue, 0, "non-positive running variance");
  };
  for (const BatchNorm& bn : state.point_norms) check_var(bn);
  check_var(state.head_norm);
  return state;
}

nlohmann::json checkpoint_meta_json(const CheckpointMeta& meta) {
  return {{"format", "TPN1"},
          {"version", kCheckpointVersion},
          {"architecture",
           {{"point_dims", meta.arch.point_dims}, {"head_dim", meta.arch.head_dim}, {"classes", meta.arch.classes}}},
          {"class_names", meta.class_names},
          {"config_digest", meta.config_digest}};
}

CheckpointMeta checkpoint_meta_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format") != "TPN1" || doc.at("version") != kCheckpointVersion) {
      throw ParseError(ParseErrorKind::kMalformedHeader, 0, "unsupported checkpoint metadata version");
    }
    CheckpointMeta meta;
    const auto& a = doc.at("architecture");
    meta.arch.point_dims = a.at("point_dims").get<std::array<int, 3>>();
    meta.arch.head_dim = a.at("head_dim").get<int>();
    meta.arch.classes = a.at("classes").get<int>();
    meta.class_names = doc.at("class_names").get<std::vector<std::string>>();
    meta.config_digest = doc.value("config_digest", "");
    if (meta.class_names.size() != static_cast<std::size_t>(meta.arch.classes)) {
      throw ParseError(ParseErrorKind::kInvalidValue, 0, "class name count does not match architecture");
    }
    return meta;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(ParseErrorKind::kInvalidValue, 0, std::string("checkpoint metadata: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const NetworkState& state, const CheckpointMeta& meta) {
  write_file(path, encode_checkpoint(state));
  write_file(std::filesystem::path(path.string() + ".json"), checkpoint_meta_json(meta).dump(2) + "\n");
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string meta_text = read_file(std::filesystem::path(path.string() + ".json"));
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(meta_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(ParseErrorKind::kMalformedHeader, 0, std::string("checkpoint metadata: ") + e.what());
  }
  LoadedCheckpoint out;
  out.meta = checkpoint_meta_from_json(doc);
  out.state = decode_checkpoint(read_file(path), out.meta.arch);
  return out;
}

}  // namespace pcc
