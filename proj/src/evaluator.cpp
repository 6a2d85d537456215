#include "agc/evaluator.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "agc/error.h"

namespace agc {

namespace {

constexpr std::string_view kCsvHeader =
    "table,model,shots,accuracy,recall,precision,f1_score,latency_s,"
    "target_accuracy_pct,mae_attack_magnitude_pu,mae_attack_time_s,"
    "n_evaluated,n_parse_failures,key,value";
constexpr std::size_t kCsvColumns = 15;

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Splits CSV text into records of fields (RFC 4180 quoting).
std::vector<std::vector<std::string>> csv_records(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        fields.push_back(std::move(field));
        records.push_back(std::move(fields));
      }
      fields.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw FormatError("report csv: unterminated quoted field");
  if (any || !field.empty()) {
    fields.push_back(std::move(field));
    records.push_back(std::move(fields));
  }
  return records;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw FormatError("report csv: bad number '" + s + "'");
  }
  if (used != s.size()) throw FormatError("report csv: bad number '" + s + "'");
  return v;
}

std::int64_t parse_int(const std::string& s) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw FormatError("report csv: bad integer '" + s + "'");
  }
  if (used != s.size()) throw FormatError("report csv: bad integer '" + s + "'");
  return v;
}

std::vector<ClassifierMetrics> sorted_classifiers(const Report& r) {
  auto rows = r.classifiers;
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.model < b.model; });
  return rows;
}

std::vector<ExplanationMetrics> sorted_explanations(const Report& r) {
  auto rows = r.explanations;
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return std::tie(a.model, a.shots) < std::tie(b.model, b.shots);
  });
  return rows;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + p.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write failed on " + p.string());
}

}  // namespace

ExplanationMetrics score(std::span<const ExplanationOutcome> outcomes,
                         std::span<const GroundTruth> truths) {
  std::vector<const ExplanationOutcome*> by_id;
  for (const auto& o : outcomes) by_id.push_back(&o);
  std::vector<const GroundTruth*> truth_by_id;
  for (const auto& t : truths) truth_by_id.push_back(&t);
  std::sort(by_id.begin(), by_id.end(),
            [](auto* a, auto* b) { return a->sample_id < b->sample_id; });
  std::sort(truth_by_id.begin(), truth_by_id.end(),
            [](auto* a, auto* b) { return a->sample_id < b->sample_id; });
  if (by_id.size() != truth_by_id.size()) {
    throw AlignmentError("score: " + std::to_string(by_id.size()) + " outcomes for " +
                         std::to_string(truth_by_id.size()) + " ground truths");
  }
  for (std::size_t i = 0; i < by_id.size(); ++i) {
    if (by_id[i]->sample_id != truth_by_id[i]->sample_id ||
        (i > 0 && by_id[i]->sample_id == by_id[i - 1]->sample_id)) {
      throw AlignmentError("score: sample ids of outcomes and ground truths differ near id " +
                           std::to_string(by_id[i]->sample_id));
    }
  }

  ExplanationMetrics m;
  double correct = 0, mag = 0, onset = 0, latency = 0;
  for (std::size_t i = 0; i < by_id.size(); ++i) {
    const auto& report = by_id[i]->report;
    if (!report) {
      ++m.n_parse_failures;
      continue;
    }
    const GoldAnswer& truth = truth_by_id[i]->answer;
    ++m.n_evaluated;
    correct += report->attack_target == truth.target ? 1.0 : 0.0;
    mag += std::abs(report->attack_magnitude - truth.magnitude);
    onset += std::abs(report->attack_start_time - truth.start_time);
    latency += report->latency_s;
  }
  if (m.n_evaluated > 0) {
    const auto n = static_cast<double>(m.n_evaluated);
    m.target_accuracy = 100.0 * correct / n;
    m.mae_magnitude = mag / n;
    m.mae_onset = onset / n;
    m.mean_latency_s = latency / n;
  }
  return m;
}

std::string render_markdown(const Report& report) {
  std::ostringstream out;
  out << "# AGC attack detection and explanation report\n\n";
  if (!report.metadata.empty()) {
    out << "## Run\n\n";
    for (const auto& [k, v] : report.metadata) out << "- " << k << ": " << v << "\n";
    out << "\n";
  }
  out << "## Attack detection\n\n"
      << "| Model | Accuracy | Recall | Precision | F1 Score | Latency (s) |\n"
      << "|---|---|---|---|---|---|\n";
  for (const ClassifierMetrics& c : sorted_classifiers(report)) {
    out << "| " << c.model << " | " << fixed(c.accuracy, 4) << " | "
        << fixed(c.recall, 4) << " | " << fixed(c.precision, 4) << " | "
        << fixed(c.f1, 4) << " | " << fixed(c.mean_latency_s, 3) << " |\n";
  }
  if (!report.explanations.empty()) {
    out << "\n## Attack explanation\n\n"
        << "| Model | Shots | Accuracy of Attack Target (%) | MAE of Attack "
           "Magnitude | MAE of Attack Time | Latency (s) | Evaluated | Parse "
           "failures |\n"
        << "|---|---|---|---|---|---|---|---|\n";
    for (const ExplanationMetrics& e : sorted_explanations(report)) {
      out << "| " << e.model << " | " << e.shots << " | "
          << fixed(e.target_accuracy, 2) << " | " << fixed(e.mae_magnitude, 5)
          << " | " << fixed(e.mae_onset, 2) << " | " << fixed(e.mean_latency_s, 3)
          << " | " << e.n_evaluated << " | " << e.n_parse_failures << " |\n";
    }
  }
  return out.str();
}

std::string render_csv(const Report& report) {
  std::ostringstream out;
  out << kCsvHeader << "\n";
  for (const ClassifierMetrics& c : sorted_classifiers(report)) {
    out << "detection," << csv_field(c.model) << ",," << full(c.accuracy) << ","
        << full(c.recall) << "," << full(c.precision) << "," << full(c.f1) << ","
        << full(c.mean_latency_s) << ",,,,,,,\n";
  }
  for (const ExplanationMetrics& e : sorted_explanations(report)) {
    out << "explanation," << csv_field(e.model) << "," << e.shots << ",,,,,"
        << full(e.mean_latency_s) << "," << full(e.target_accuracy) << ","
        << full(e.mae_magnitude) << "," << full(e.mae_onset) << ","
        << e.n_evaluated << "," << e.n_parse_failures << ",,\n";
  }
  for (const auto& [k, v] : report.metadata) {
    out << "meta,,,,,,,,,,,,," << csv_field(k) << "," << csv_field(v) << "\n";
  }
  return out.str();
}

Report parse_csv(std::string_view text) {
  const auto records = csv_records(text);
  if (records.empty()) throw FormatError("report csv: empty");
  std::string header;
  for (std::size_t i = 0; i < records[0].size(); ++i) {
    header += (i ? "," : "") + records[0][i];
  }
  if (header != kCsvHeader) throw FormatError("report csv: unexpected header");

  Report r;
  for (std::size_t n = 1; n < records.size(); ++n) {
    const auto& f = records[n];
    if (f.size() != kCsvColumns) {
      throw FormatError("report csv: row " + std::to_string(n + 1) + " has " +
                        std::to_string(f.size()) + " fields");
    }
    if (f[0] == "detection") {
      ClassifierMetrics c;
      c.model = f[1];
      c.accuracy = parse_double(f[3]);
      c.recall = parse_double(f[4]);
      c.precision = parse_double(f[5]);
      c.f1 = parse_double(f[6]);
      c.mean_latency_s = parse_double(f[7]);
      r.classifiers.push_back(c);
    } else if (f[0] == "explanation") {
      ExplanationMetrics e;
      e.model = f[1];
      e.shots = static_cast<int>(parse_int(f[2]));
      e.mean_latency_s = parse_double(f[7]);
      e.target_accuracy = parse_double(f[8]);
      e.mae_magnitude = parse_double(f[9]);
      e.mae_onset = parse_double(f[10]);
      e.n_evaluated = parse_int(f[11]);
      e.n_parse_failures = parse_int(f[12]);
      r.explanations.push_back(e);
    } else if (f[0] == "meta") {
      r.metadata.emplace_back(f[13], f[14]);
    } else {
      throw FormatError("report csv: unknown table '" + f[0] + "'");
    }
  }
  return r;
}

void write_report(const std::filesystem::path& dir, const Report& report) {
  std::filesystem::create_directories(dir);
  spit(dir / "report.md", render_markdown(report));
  spit(dir / "report.csv", render_csv(report));
}

Report read_report(const std::filesystem::path& dir) {
  return parse_csv(slurp(dir / "report.csv"));
}

std::vector<SweepEntry> run_shot_sweep(std::span<const Sample> eval,
                                       std::span<const DetectionResult> detections,
                                       std::span<const Sample> shot_pool,
                                       const SweepConfig& config,
                                       const Detector& shot_detector) {
  if (eval.size() != detections.size()) {
    throw AlignmentError("run_shot_sweep: one detection per eval sample required");
  }
  std::vector<std::int64_t> eval_ids;
  for (const Sample& s : eval) {
    if (!s.attack) {
      throw InvalidArgument("run_shot_sweep: eval sample " + std::to_string(s.id) +
                            " is not attacked");
    }
    eval_ids.push_back(s.id);
  }
  const SystemParams system =
      eval.empty() ? SystemParams::reference() : eval.front().scenario.system;

  std::vector<SweepEntry> entries;
  for (int k : config.shots) {
    if (k < 0) throw InvalidArgument("run_shot_sweep: negative shot count");
    const auto shots = select_few_shots(shot_pool, static_cast<std::size_t>(k),
                                        config.shot_seed, eval_ids, shot_detector);
    std::string system_text = build_system_prompt(system, shots);

    std::vector<PromptBundle> bundles;
    std::vector<GroundTruth> truths;
    for (std::size_t i = 0; i < eval.size(); ++i) {
      if (detections[i].label != Label::kAttack) continue;
      bundles.push_back(make_bundle(eval[i].id, system_text,
                                    build_query(eval[i], detections[i], config.query),
                                    shots.size(), config.client.token_budget));
      truths.push_back({eval[i].id, gold_answer(*eval[i].attack)});
    }

    SweepEntry entry;
    entry.outcomes = explain_all(config.client, bundles);
    if (!config.record_latency) {
      for (auto& o : entry.outcomes) {
        if (o.report) o.report->latency_s = 0.0;
      }
    }
    entry.metrics = score(entry.outcomes, truths);
    entry.metrics.model = config.model_label;
    entry.metrics.shots = k;
    entries.push_back(std::move(entry));
  }
  return entries;
}

}  // namespace agc
