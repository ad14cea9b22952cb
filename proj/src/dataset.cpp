#include "facelm/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

namespace facelm {

namespace {

constexpr std::size_t kCsvColumns = 3 + kFeatureDim;

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void fail_at(std::size_t line, const std::string& what) {
  throw Error(what + " at line " + std::to_string(line));
}

double parse_number(std::string_view text, std::size_t line) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty()) {
    fail_at(line, "unparsable number '" + std::string(text) + "'");
  }
  return value;
}

FrameRole parse_role(std::string_view text, std::size_t line) {
  if (text == "neutral") return FrameRole::Neutral;
  if (text == "peak") return FrameRole::Peak;
  fail_at(line, "unknown frame role '" + std::string(text) + "'");
}

}  // namespace

std::string_view role_name(FrameRole role) {
  return role == FrameRole::Neutral ? "neutral" : "peak";
}

std::string_view reason_name(RejectReason reason) {
  switch (reason) {
    case RejectReason::MissingNeutral: return "missing-neutral";
    case RejectReason::MissingPeak: return "missing-peak";
    case RejectReason::BadPointCount: return "bad-point-count";
    case RejectReason::LabelMismatch: return "label-mismatch";
    case RejectReason::NonFiniteCoordinate: return "non-finite-coordinate";
  }
  return "unknown";
}

std::string landmark_csv_header() {
  std::string header = "subject_id,emotion,frame";
  for (std::size_t i = 0; i < kNumLandmarks; ++i) {
    header += ",x" + std::to_string(i) + ",y" + std::to_string(i);
  }
  return header;
}

std::vector<RawFrameRow> parse_dataset(std::istream& in) {
  const std::string expected_header = landmark_csv_header();
  std::vector<RawFrameRow> rows;
  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!saw_header) {
      if (line != expected_header) fail_at(line_no, "missing or malformed header");
      saw_header = true;
      continue;
    }
    if (line.empty()) continue;

    const auto fields = split_commas(line);
    if (fields.size() < 3) fail_at(line_no, "malformed row");
    if (fields.size() != kCsvColumns) fail_at(line_no, "bad-point-count");

    RawFrameRow row;
    row.line = line_no;
    row.subject_id = std::string(fields[0]);
    if (row.subject_id.empty()) fail_at(line_no, "empty subject_id");
    try {
      row.emotion = parse_emotion(fields[1]);
    } catch (const Error& e) {
      fail_at(line_no, e.what());
    }
    row.role = parse_role(fields[2], line_no);
    row.points.resize(kNumLandmarks);
    for (std::size_t i = 0; i < kNumLandmarks; ++i) {
      row.points[i].x = parse_number(fields[3 + 2 * i], line_no);
      row.points[i].y = parse_number(fields[4 + 2 * i], line_no);
    }
    rows.push_back(std::move(row));
  }
  if (in.bad()) throw Error("I/O failure while reading dataset");
  if (!saw_header) throw Error("empty dataset file (no header)");
  return rows;
}

std::vector<RawFrameRow> parse_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset file '" + path.string() + "'");
  return parse_dataset(in);
}

ValidationResult validate(const std::vector<RawFrameRow>& rows) {
  struct Group {
    std::string subject_id;
    Emotion emotion;
    std::vector<const RawFrameRow*> frames;
    bool accepted = false;
    RejectReason reason = RejectReason::MissingNeutral;
  };

  std::vector<Group> groups;
  std::map<std::pair<std::string, int>, std::size_t> index;
  for (const auto& row : rows) {
    const auto key = std::make_pair(row.subject_id, label_index(row.emotion));
    auto [it, inserted] = index.try_emplace(key, groups.size());
    if (inserted) groups.push_back(Group{row.subject_id, row.emotion, {}});
    groups[it->second].frames.push_back(&row);
  }

  // Incomplete groups per subject, split by which role they hold.
  std::unordered_map<std::string, std::pair<int, int>> incomplete;  // (missing neutral, missing peak)

  for (auto& g : groups) {
    bool bad_count = false;
    bool non_finite = false;
    int neutrals = 0;
    int peaks = 0;
    for (const auto* f : g.frames) {
      if (f->points.size() != kNumLandmarks) bad_count = true;
      for (const auto& p : f->points) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) non_finite = true;
      }
      (f->role == FrameRole::Neutral ? neutrals : peaks)++;
    }
    if (bad_count) {
      g.reason = RejectReason::BadPointCount;
    } else if (non_finite) {
      g.reason = RejectReason::NonFiniteCoordinate;
    } else if (neutrals > 1 || peaks > 1) {
      g.reason = RejectReason::LabelMismatch;
    } else if (neutrals == 1 && peaks == 1) {
      g.accepted = true;
    } else if (neutrals == 0) {
      g.reason = RejectReason::MissingNeutral;
      incomplete[g.subject_id].first++;
    } else {
      g.reason = RejectReason::MissingPeak;
      incomplete[g.subject_id].second++;
    }
  }

  // A neutral under one label and a peak under another label for the same
  // subject is one pair with inconsistent labels, not two half-pairs.
  for (auto& g : groups) {
    if (g.accepted) continue;
    if (g.reason != RejectReason::MissingNeutral && g.reason != RejectReason::MissingPeak) continue;
    const auto& [missing_neutral, missing_peak] = incomplete[g.subject_id];
    if (missing_neutral > 0 && missing_peak > 0) g.reason = RejectReason::LabelMismatch;
  }

  ValidationResult result;
  for (const auto& g : groups) {
    if (!g.accepted) {
      result.report.rejected.push_back(Rejection{g.subject_id, g.emotion, g.reason});
      continue;
    }
    SubjectRecord rec;
    rec.subject_id = g.subject_id;
    rec.emotion = g.emotion;
    for (const auto* f : g.frames) {
      LandmarkFrame frame;
      frame.subject_id = g.subject_id;
      frame.role = f->role;
      std::copy(f->points.begin(), f->points.end(), frame.points.begin());
      (f->role == FrameRole::Neutral ? rec.neutral : rec.peak) = std::move(frame);
    }
    result.dataset.records.push_back(std::move(rec));
  }
  result.report.accepted_count = result.dataset.records.size();
  return result;
}

ValidationResult load_dataset(const std::filesystem::path& path) {
  auto result = validate(parse_dataset(path));
  result.dataset.source = path.string();
  return result;
}

std::string format_decimal(double value) {
  char buf[512];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed);
  if (ec != std::errc()) throw Error("cannot format number");
  return std::string(buf, ptr);
}

void write_dataset_csv(const CuratedDataset& dataset, std::ostream& out) {
  out << landmark_csv_header() << '\n';
  auto write_frame = [&](const SubjectRecord& rec, const LandmarkFrame& frame) {
    out << rec.subject_id << ',' << emotion_name(rec.emotion) << ',' << role_name(frame.role);
    for (const auto& p : frame.points) {
      out << ',' << format_decimal(p.x) << ',' << format_decimal(p.y);
    }
    out << '\n';
  };
  for (const auto& rec : dataset.records) {
    write_frame(rec, rec.neutral);
    write_frame(rec, rec.peak);
  }
}

void write_dataset_csv(const CuratedDataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  write_dataset_csv(dataset, out);
  if (!out) throw Error("I/O failure writing '" + path.string() + "'");
}

DistributionSummary class_distribution(const CuratedDataset& dataset) {
  if (dataset.empty()) throw Error("class distribution of an empty dataset");
  DistributionSummary s;
  for (const auto& rec : dataset.records) s.counts[static_cast<std::size_t>(rec.emotion)]++;
  s.total = dataset.size();
  for (std::size_t i = 0; i < kNumEmotions; ++i) {
    s.percentages[i] = 100.0 * static_cast<double>(s.counts[i]) / static_cast<double>(s.total);
  }
  return s;
}

nlohmann::json to_json(const ValidationReport& report) {
  nlohmann::json rejected = nlohmann::json::array();
  for (const auto& r : report.rejected) {
    rejected.push_back({{"subject", r.subject_id}, {"reason", reason_name(r.reason)}});
  }
  return {{"accepted", report.accepted_count}, {"rejected", rejected}};
}

nlohmann::json to_json(const DistributionSummary& summary) {
  nlohmann::json classes = nlohmann::json::object();
  for (auto e : kAllEmotions) {
    const auto i = static_cast<std::size_t>(e);
    classes[std::string(emotion_name(e))] = {{"count", summary.counts[i]},
                                             {"percent", summary.percentages[i]}};
  }
  return {{"total", summary.total}, {"classes", classes}};
}

}  // namespace facelm
