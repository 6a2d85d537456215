#pragma once

// Model files are a single JSON object:
//   {"format":"agc-ensemble-model","format_version":1,"kind":...,
//    "hyperparams":{...},"n_features":...,"base_score":...,
//    "learning_rate":...,"training_seed":...,"trees":[...],
//    "digest":"fnv1a64:<16 hex digits>"}
// Trees are nested: {"feature","threshold","left","right"} for splits,
// {"leaf":score} for boosted leaves, {"counts":[normal,attack]} for forest
// leaves. The digest covers the compact serialization of every other key.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "agc/dataset_io.h"
#include "agc/detector.h"

namespace agc {

std::uint64_t fnv1a64(std::string_view bytes);

Json model_to_json(const EnsembleModel& model);
// Throws FormatError on malformed content, version or digest mismatch.
EnsembleModel model_from_json(const Json& j);

std::string serialize_model(const EnsembleModel& model);
EnsembleModel parse_model(std::string_view text);

void save_model(const std::filesystem::path& path, const EnsembleModel& model);
EnsembleModel load_model(const std::filesystem::path& path);

}  // namespace agc
