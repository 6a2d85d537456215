#pragma once

// Line-delimited JSON dataset files.
//
// Line 1 is a header object:
//   {"format":"agc-fdia-dataset","format_version":1,"master_seed":...,
//    "n":...,"seed_mixing":"...","generator":{...}}
// Every following line is one sample:
//   {"id","label","scenario","attack"(nullable),"trace","features"}
// with trace arrays t_s, delta_f1_pu, delta_f2_pu, delta_p_tie_pu, ace1_pu,
// ace2_pu and features keyed "delta_f1.mean" ... "delta_p_tie.max".
// Doubles are written in shortest round-trip form.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "agc/datagen.h"

namespace agc {

using Json = nlohmann::ordered_json;

inline constexpr int kDatasetFormatVersion = 1;

struct DatasetHeader {
  int format_version = kDatasetFormatVersion;
  std::uint64_t master_seed = 0;
  std::int64_t n = 0;
  GeneratorOptions options;
};

struct Dataset {
  DatasetHeader header;
  std::vector<Sample> samples;
};

Json scenario_to_json(const ScenarioConfig& sc);
ScenarioConfig scenario_from_json(const Json& j);
Json system_to_json(const SystemParams& p);
SystemParams system_from_json(const Json& j);
Json attack_to_json(const AttackSpec& a);
AttackSpec attack_from_json(const Json& j);
Json features_to_json(const FeatureVector& f);
FeatureVector features_from_json(const Json& j);
Json header_to_json(const DatasetHeader& h);
DatasetHeader header_from_json(const Json& j);

std::string sample_to_line(const Sample& s);
Sample sample_from_line(std::string_view line);

// Generates n samples (n/2 per class) and streams them to path in id order.
// Output bytes do not depend on the worker count.
void generate_dataset(const std::filesystem::path& path, std::int64_t n,
                      std::uint64_t master_seed, int workers = 1,
                      const GeneratorOptions& options = {});

// Throws FormatError when the sample count disagrees with the header.
Dataset read_dataset(const std::filesystem::path& path);
// Writes ds with header.n set to the number of samples.
void write_dataset(const std::filesystem::path& path, const Dataset& ds);

}  // namespace agc
