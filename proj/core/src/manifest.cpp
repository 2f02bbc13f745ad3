#include "sqa/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "sqa/error.hpp"
#include "sqa/text.hpp"

namespace sqa {
namespace {

constexpr std::size_t kColumns = 7;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string quote_if_needed(const std::string& field) {
  if (field.find_first_of(",\"") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::optional<std::filesystem::path> UtteranceRecord::feature_path(FeatureKind kind) const {
  const auto it = feature_paths.find(kind);
  if (it == feature_paths.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw FormatError("unterminated quoted field");
  fields.push_back(trim(cur));
  return fields;
}

std::vector<UtteranceRecord> parse_manifest(const std::string& text,
                                            const std::filesystem::path& base_dir,
                                            const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<UtteranceRecord> records;
  std::set<std::string> seen;

  auto resolve = [&](const std::string& cell) -> std::optional<std::filesystem::path> {
    if (cell.empty()) return std::nullopt;
    std::filesystem::path p(cell);
    return p.is_absolute() ? p : base_dir / p;
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto where = source + " row " + std::to_string(line_no);
    std::vector<std::string> cells;
    try {
      cells = split_csv_line(line);
    } catch (const FormatError& e) {
      throw FormatError(where + ": " + e.what());
    }
    if (!have_header) {
      std::string joined;
      for (std::size_t i = 0; i < cells.size(); ++i) joined += (i ? "," : "") + cells[i];
      if (joined != kManifestHeader) {
        throw FormatError(source + ": expected header '" + kManifestHeader + "', got '" + joined + "'");
      }
      have_header = true;
      continue;
    }
    if (cells.size() != kColumns) {
      throw FormatError(where + ": expected " + std::to_string(kColumns) + " columns, got " +
                        std::to_string(cells.size()));
    }

    UtteranceRecord rec;
    rec.utt_id = cells[0];
    rec.system_id = cells[1];
    if (rec.utt_id.empty()) throw FormatError(where + ": empty utt_id");
    if (rec.system_id.empty()) throw FormatError(where + ": empty system_id");
    rec.wav_path = resolve(cells[2]);
    if (!cells[3].empty()) {
      double mos = 0.0;
      const auto& s = cells[3];
      try {
        mos = parse_double(s, "mos");
      } catch (const FormatError& e) {
        throw FormatError(where + ": " + e.what());
      }
      if (!(mos >= 1.0 && mos <= 5.0)) {
        throw InvalidArgument(where + ": mos label " + s + " outside [1, 5]");
      }
      rec.mos_label = mos;
    }
    if (auto p = resolve(cells[4])) rec.feature_paths[FeatureKind::embedding] = *p;
    if (auto p = resolve(cells[5])) rec.feature_paths[FeatureKind::spectral] = *p;
    if (auto p = resolve(cells[6])) rec.feature_paths[FeatureKind::pitch] = *p;
    if (!rec.wav_path && rec.feature_paths.empty()) {
      throw FormatError(where + ": neither wav_path nor any feature path given");
    }
    if (!seen.insert(rec.utt_id).second) {
      throw FormatError(where + ": duplicate utt_id '" + rec.utt_id + "'");
    }
    records.push_back(std::move(rec));
  }
  if (!have_header) throw FormatError(source + ": missing header");
  return records;
}

std::vector<UtteranceRecord> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str(), path.parent_path(), path.string());
}

void write_manifest(const std::filesystem::path& path, const std::vector<UtteranceRecord>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write manifest " + path.string());
  out << kManifestHeader << '\n';
  auto path_cell = [](const std::optional<std::filesystem::path>& p) {
    return p ? quote_if_needed(std::filesystem::absolute(*p).lexically_normal().string())
             : std::string{};
  };
  for (const auto& r : records) {
    const std::string mos = r.mos_label ? format_exact(*r.mos_label) : std::string{};
    out << quote_if_needed(r.utt_id) << ',' << quote_if_needed(r.system_id) << ','
        << path_cell(r.wav_path) << ',' << mos << ',' << path_cell(r.feature_path(FeatureKind::embedding))
        << ',' << path_cell(r.feature_path(FeatureKind::spectral)) << ','
        << path_cell(r.feature_path(FeatureKind::pitch)) << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace sqa
