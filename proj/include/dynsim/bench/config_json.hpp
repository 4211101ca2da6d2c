// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <initializer_list>
#include <string>

#include <json.hpp>

#include "dynsim/bench/episode.hpp"

namespace dynsim {

// JSON forms used by run configs and bench manifests. Readers fill omitted
// keys with the C++ defaults and reject unknown keys with
// std::invalid_argument.

void to_json(nlohmann::json& j, const Range& r);
void from_json(const nlohmann::json& j, Range& r);
void to_json(nlohmann::json& j, const PedestrianConfig& c);
void from_json(const nlohmann::json& j, PedestrianConfig& c);
void to_json(nlohmann::json& j, const OrcaParams& p);
void from_json(const nlohmann::json& j, OrcaParams& p);
void to_json(nlohmann::json& j, const RobotConfig& r);
void from_json(const nlohmann::json& j, RobotConfig& r);
void to_json(nlohmann::json& j, const ScriptedPedestrian& s);
void from_json(const nlohmann::json& j, ScriptedPedestrian& s);
void to_json(nlohmann::json& j, const EpisodeResult& r);
void from_json(const nlohmann::json& j, EpisodeResult& r);
void to_json(nlohmann::json& j, const BenchMetrics& m);

/// Scene embedded inline. `seed` is included.
nlohmann::json episode_to_json(const EpisodeConfig& cfg);
EpisodeConfig episode_from_json(const nlohmann::json& j);

/// Throws std::invalid_argument if `j` has a key outside `allowed`.
void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                const char* where);

/// 64-bit FNV-1a over the bytes, as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace dynsim
