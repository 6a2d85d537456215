#include "agc/dataset_io.h"

#include <fstream>
#include <mutex>

#include "agc/error.h"
#include "agc/parallel.h"

namespace agc {

namespace {

constexpr std::string_view kDatasetFormat = "agc-fdia-dataset";
constexpr std::string_view kSeedMixing =
    "per-sample stream seed = splitmix64(splitmix64(splitmix64(master_seed) "
    "^ id) ^ tag), tag SCEN=0x5343454e (scenario and noise seed), "
    "ATTK=0x4154544b (attack, odd ids only); engine mt19937_64";

Json area_to_json(const AreaParams& a) {
  return {{"inertia_h_s", a.inertia_h},     {"damping_d", a.damping_d},
          {"bias_b", a.bias_b},             {"governor_tg_s", a.governor_tg},
          {"turbine_tt_s", a.turbine_tt},   {"droop_r", a.droop_r},
          {"agc_gain_ki", a.agc_gain_ki}};
}

AreaParams area_from_json(const Json& j) {
  AreaParams a;
  a.inertia_h = j.at("inertia_h_s").get<double>();
  a.damping_d = j.at("damping_d").get<double>();
  a.bias_b = j.at("bias_b").get<double>();
  a.governor_tg = j.at("governor_tg_s").get<double>();
  a.turbine_tt = j.at("turbine_tt_s").get<double>();
  a.droop_r = j.at("droop_r").get<double>();
  a.agc_gain_ki = j.at("agc_gain_ki").get<double>();
  return a;
}

template <typename Fn>
auto wrap_format(std::string_view what, Fn&& fn) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  }
}

Signal signal_or_throw(const std::string& name) {
  auto s = signal_from_name(name);
  if (!s) throw FormatError("unknown signal '" + name + "'");
  return *s;
}

}  // namespace

Json system_to_json(const SystemParams& p) {
  return {{"area1", area_to_json(p.area1)},
          {"area2", area_to_json(p.area2)},
          {"tie_sync_t12", p.tie_sync_t12},
          {"deadband_width_pu", p.deadband_width},
          {"grc_limit_pu_per_s", p.grc_limit},
          {"ace_delay_s", p.ace_delay},
          {"nonlinear_mode", p.nonlinear_mode}};
}

SystemParams system_from_json(const Json& j) {
  return wrap_format("system", [&] {
    SystemParams p;
    p.area1 = area_from_json(j.at("area1"));
    p.area2 = area_from_json(j.at("area2"));
    p.tie_sync_t12 = j.at("tie_sync_t12").get<double>();
    p.deadband_width = j.at("deadband_width_pu").get<double>();
    p.grc_limit = j.at("grc_limit_pu_per_s").get<double>();
    p.ace_delay = j.at("ace_delay_s").get<double>();
    p.nonlinear_mode = j.at("nonlinear_mode").get<bool>();
    return p;
  });
}

Json scenario_to_json(const ScenarioConfig& sc) {
  return {{"system", system_to_json(sc.system)},
          {"disturbance",
           {{"area", sc.disturbance.area},
            {"magnitude_pu", sc.disturbance.magnitude},
            {"start_time_s", sc.disturbance.start_time}}},
          {"process_noise_std_pu", sc.process_noise_std},
          {"measurement_noise_std_pu", sc.measurement_noise_std},
          {"window_s", sc.window},
          {"record_dt_s", sc.record_dt},
          {"internal_dt_s", sc.internal_dt},
          {"seed", sc.seed}};
}

ScenarioConfig scenario_from_json(const Json& j) {
  return wrap_format("scenario", [&] {
    ScenarioConfig sc;
    sc.system = system_from_json(j.at("system"));
    const Json& d = j.at("disturbance");
    sc.disturbance.area = d.at("area").get<int>();
    sc.disturbance.magnitude = d.at("magnitude_pu").get<double>();
    sc.disturbance.start_time = d.at("start_time_s").get<double>();
    sc.process_noise_std = j.at("process_noise_std_pu").get<double>();
    sc.measurement_noise_std = j.at("measurement_noise_std_pu").get<double>();
    sc.window = j.at("window_s").get<double>();
    sc.record_dt = j.at("record_dt_s").get<double>();
    sc.internal_dt = j.at("internal_dt_s").get<double>();
    sc.seed = j.at("seed").get<std::uint64_t>();
    return sc;
  });
}

Json attack_to_json(const AttackSpec& a) {
  return {{"target", std::string(signal_name(a.target))},
          {"t_start_s", a.t_start},
          {"f_i_pu", a.f_i},
          {"f_f_pu", a.f_f},
          {"scale", a.scale},
          {"subtlety", std::string(subtlety_name(a.subtlety))},
          {"magnitude_pu", a.magnitude}};
}

AttackSpec attack_from_json(const Json& j) {
  return wrap_format("attack", [&] {
    AttackSpec a;
    a.target = signal_or_throw(j.at("target").get<std::string>());
    a.t_start = j.at("t_start_s").get<double>();
    a.f_i = j.at("f_i_pu").get<double>();
    a.f_f = j.at("f_f_pu").get<double>();
    a.scale = j.at("scale").get<double>();
    const auto sub = subtlety_from_name(j.at("subtlety").get<std::string>());
    if (!sub) throw FormatError("attack: unknown subtlety");
    a.subtlety = *sub;
    a.magnitude = j.at("magnitude_pu").get<double>();
    return a;
  });
}

Json features_to_json(const FeatureVector& f) {
  Json j = Json::object();
  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    j[FeatureVector::names()[i]] = f.values[i];
  }
  return j;
}

FeatureVector features_from_json(const Json& j) {
  return wrap_format("features", [&] {
    if (j.size() != kNumFeatures) {
      throw FormatError("features: expected 18 values");
    }
    FeatureVector f;
    for (std::size_t i = 0; i < kNumFeatures; ++i) {
      f.values[i] = j.at(FeatureVector::names()[i]).get<double>();
    }
    return f;
  });
}

Json header_to_json(const DatasetHeader& h) {
  const GeneratorOptions& o = h.options;
  return {{"format", kDatasetFormat},
          {"format_version", h.format_version},
          {"master_seed", h.master_seed},
          {"n", h.n},
          {"seed_mixing", kSeedMixing},
          {"generator",
           {{"disturbance_std_pu", o.disturbance_std},
            {"nonlinear_fraction", o.nonlinear_fraction},
            {"subtle_ace_limit", o.policy.subtle_limit},
            {"noticeable_ace_limit", o.policy.noticeable_limit},
            {"ace_limit_tolerance", o.policy.tolerance},
            {"max_rescale_iterations", o.policy.max_iterations},
            {"attack_retries", o.attack_retries},
            {"injection_mean_pu", -0.11},
            {"injection_std_pu", 0.02},
            {"latest_event_time_s", 30.0}}}};
}

DatasetHeader header_from_json(const Json& j) {
  return wrap_format("dataset header", [&] {
    if (j.at("format").get<std::string>() != kDatasetFormat) {
      throw FormatError("not a dataset file");
    }
    DatasetHeader h;
    h.format_version = j.at("format_version").get<int>();
    if (h.format_version != kDatasetFormatVersion) {
      throw FormatError("unsupported dataset format_version " +
                        std::to_string(h.format_version));
    }
    h.master_seed = j.at("master_seed").get<std::uint64_t>();
    h.n = j.at("n").get<std::int64_t>();
    const Json& g = j.at("generator");
    h.options.disturbance_std = g.at("disturbance_std_pu").get<double>();
    h.options.nonlinear_fraction = g.at("nonlinear_fraction").get<double>();
    h.options.policy.subtle_limit = g.at("subtle_ace_limit").get<double>();
    h.options.policy.noticeable_limit =
        g.at("noticeable_ace_limit").get<double>();
    h.options.policy.tolerance = g.at("ace_limit_tolerance").get<double>();
    h.options.policy.max_iterations = g.at("max_rescale_iterations").get<int>();
    h.options.attack_retries = g.at("attack_retries").get<int>();
    return h;
  });
}

std::string sample_to_line(const Sample& s) {
  Json j;
  j["id"] = s.id;
  j["label"] = std::string(label_name(s.label));
  j["scenario"] = scenario_to_json(s.scenario);
  j["attack"] = s.attack ? attack_to_json(*s.attack) : Json(nullptr);
  j["trace"] = {{"t_s", s.trace.t},
                {"delta_f1_pu", s.trace.delta_f1},
                {"delta_f2_pu", s.trace.delta_f2},
                {"delta_p_tie_pu", s.trace.delta_p_tie},
                {"ace1_pu", s.trace.ace1},
                {"ace2_pu", s.trace.ace2}};
  j["features"] = features_to_json(s.features);
  return j.dump();
}

Sample sample_from_line(std::string_view line) {
  return wrap_format("sample", [&] {
    const Json j = Json::parse(line);
    Sample s;
    s.id = j.at("id").get<std::int64_t>();
    const auto label = label_from_name(j.at("label").get<std::string>());
    if (!label) throw FormatError("sample: unknown label");
    s.label = *label;
    s.scenario = scenario_from_json(j.at("scenario"));
    if (!j.at("attack").is_null()) s.attack = attack_from_json(j.at("attack"));
    if ((s.label == Label::kAttack) != s.attack.has_value()) {
      throw FormatError("sample " + std::to_string(s.id) +
                        ": label and attack presence disagree");
    }
    const Json& t = j.at("trace");
    s.trace.t = t.at("t_s").get<std::vector<double>>();
    s.trace.delta_f1 = t.at("delta_f1_pu").get<std::vector<double>>();
    s.trace.delta_f2 = t.at("delta_f2_pu").get<std::vector<double>>();
    s.trace.delta_p_tie = t.at("delta_p_tie_pu").get<std::vector<double>>();
    s.trace.ace1 = t.at("ace1_pu").get<std::vector<double>>();
    s.trace.ace2 = t.at("ace2_pu").get<std::vector<double>>();
    const std::size_t n = s.trace.t.size();
    for (const auto* v : {&s.trace.delta_f1, &s.trace.delta_f2,
                          &s.trace.delta_p_tie, &s.trace.ace1, &s.trace.ace2}) {
      if (v->size() != n) throw FormatError("sample: ragged trace arrays");
    }
    s.features = features_from_json(j.at("features"));
    return s;
  });
}

void generate_dataset(const std::filesystem::path& path, std::int64_t n,
                      std::uint64_t master_seed, int workers,
                      const GeneratorOptions& options) {
  if (n < 0 || n % 2 != 0) {
    throw InvalidArgument("generate_dataset: n must be even and >= 0");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");

  DatasetHeader header;
  header.master_seed = master_seed;
  header.n = n;
  header.options = options;
  out << header_to_json(header).dump() << '\n';
  if (!out) throw IoError("write failed on dataset header");

  // Samples are produced in blocks and written in id order so memory stays
  // bounded and the byte stream is schedule-independent.
  const std::int64_t block = 64 * std::max(workers, 1);
  std::vector<std::string> lines;
  for (std::int64_t first = 0; first < n; first += block) {
    const std::int64_t count = std::min(block, n - first);
    lines.assign(static_cast<std::size_t>(count), std::string());
    parallel_for(static_cast<std::size_t>(count), workers, [&](std::size_t k) {
      const std::int64_t id = first + static_cast<std::int64_t>(k);
      try {
        lines[k] = sample_to_line(
            generate_sample(id, master_seed, is_attacked_index(id), options));
      } catch (const Error& e) {
        throw Error("sample " + std::to_string(id) + ": " + e.what());
      }
    });
    for (std::int64_t k = 0; k < count; ++k) {
      out << lines[static_cast<std::size_t>(k)] << '\n';
      if (!out) {
        throw IoError("write failed at sample " + std::to_string(first + k));
      }
    }
  }
  out.flush();
  if (!out) throw IoError("flush failed on " + path.string());
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  Dataset ds;
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty dataset file");
  ds.header = header_from_json(
      wrap_format("dataset header", [&] { return Json::parse(line); }));
  std::int64_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      ds.samples.push_back(sample_from_line(line));
    } catch (const FormatError& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  if (static_cast<std::int64_t>(ds.samples.size()) != ds.header.n) {
    throw FormatError(path.string() + ": header declares " +
                      std::to_string(ds.header.n) + " samples, found " +
                      std::to_string(ds.samples.size()));
  }
  return ds;
}

void write_dataset(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  DatasetHeader header = ds.header;
  header.n = static_cast<std::int64_t>(ds.samples.size());
  out << header_to_json(header).dump() << '\n';
  for (const Sample& s : ds.samples) {
    out << sample_to_line(s) << '\n';
    if (!out) throw IoError("write failed at sample " + std::to_string(s.id));
  }
  out.flush();
  if (!out) throw IoError("flush failed on " + path.string());
}

}  // namespace agc
