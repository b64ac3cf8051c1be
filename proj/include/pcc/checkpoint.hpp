// Copyright 2026 The pccorrupt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcc/tiny_pointnet.hpp"

namespace pcc {

inline constexpr char kCheckpointMagic[4] = {'T', 'P', 'N', '1'};
inline constexpr int kCheckpointVersion = 1;

struct CheckpointMeta {
  Architecture arch;
  std::vector<std::string> class_names;
  std::string config_digest;
};

std::string encode_checkpoint(const NetworkState& state);
NetworkState decode_checkpoint(std::string_view bytes, const Architecture& arch);

nlohmann::json checkpoint_meta_json(const CheckpointMeta& meta);
CheckpointMeta checkpoint_meta_from_json(const nlohmann::json& doc);

/// Writes `path` and `path` + ".json".
void save_checkpoint(const std::filesystem::path& path, const NetworkState& state, const CheckpointMeta& meta);

struct LoadedCheckpoint {
  NetworkState state;
  CheckpointMeta meta;
};
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace pcc
