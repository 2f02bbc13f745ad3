#include "sqa/model_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "byte_io.hpp"
#include "sqa/error.hpp"
#include "sqa/text.hpp"

namespace sqa {
namespace {

constexpr std::string_view kModelMagic = "sqa-model";
constexpr std::string_view kFusionMagic = "sqa-fusion";
constexpr int kModelVersion = 1;
constexpr int kFloatDigits = 9;

std::string float_text(float v) { return format_significant(static_cast<double>(v), kFloatDigits); }

void put_array(std::ostringstream& out, std::string_view key, const std::vector<float>& v) {
  out << key << ' ' << v.size();
  for (float x : v) out << ' ' << float_text(x);
  out << '\n';
}

// Ordered "key -> tokens" view of a text model file.
class Fields {
 public:
  Fields(std::string_view text, std::string_view magic) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::istringstream ls(line);
      std::vector<std::string> tokens;
      for (std::string t; ls >> t;) tokens.push_back(t);
      if (tokens.empty()) continue;
      if (line_no == 1 || lines_.empty()) {
        if (tokens.size() != 2 || tokens[0] != magic) {
          throw FormatError("expected '" + std::string(magic) + " <version>' header");
        }
        if (parse_integer(tokens[1], "format version") != kModelVersion) {
          throw FormatError("unsupported format version " + tokens[1]);
        }
        lines_.push_back(std::move(tokens));
        continue;
      }
      lines_.push_back(std::move(tokens));
    }
    if (lines_.empty()) throw FormatError("empty model file");
    if (lines_.back().size() != 1 || lines_.back()[0] != "end") throw FormatError("missing 'end' line (truncated?)");
    cursor_ = 1;
  }

  // Next line, which must start with `key`.
  const std::vector<std::string>& next(std::string_view key) {
    if (cursor_ >= lines_.size()) throw FormatError("missing field '" + std::string(key) + "'");
    const auto& l = lines_[cursor_];
    if (l[0] != key) throw FormatError("expected field '" + std::string(key) + "', found '" + l[0] + "'");
    ++cursor_;
    return l;
  }

  bool peek(std::string_view key) const { return cursor_ < lines_.size() && lines_[cursor_][0] == key; }

  std::string scalar(std::string_view key) {
    const auto& l = next(key);
    if (l.size() != 2) throw FormatError("field '" + std::string(key) + "' takes one value");
    return l[1];
  }

  double number(std::string_view key) { return parse_double(scalar(key), key); }

  std::uint64_t count(std::string_view key) {
    const long long v = parse_integer(scalar(key), key);
    if (v < 0) throw FormatError("field '" + std::string(key) + "' must be non-negative");
    return static_cast<std::uint64_t>(v);
  }

  std::vector<float> array(std::string_view key) {
    const auto& l = next(key);
    if (l.size() < 2) throw FormatError("field '" + std::string(key) + "' needs a length");
    const long long n = parse_integer(l[1], key);
    if (n < 0 || static_cast<std::size_t>(n) != l.size() - 2) {
      throw FormatError("field '" + std::string(key) + "' declares " + l[1] + " values but has " +
                        std::to_string(l.size() - 2));
    }
    std::vector<float> out;
    out.reserve(static_cast<std::size_t>(n));
    for (std::size_t i = 2; i < l.size(); ++i) out.push_back(static_cast<float>(parse_double(l[i], key)));
    return out;
  }

  void finish() {
    next("end");
    if (cursor_ != lines_.size()) throw FormatError("content after 'end'");
  }

 private:
  std::vector<std::vector<std::string>> lines_;
  std::size_t cursor_ = 0;
};

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

std::string serialize_model(const ModelFile& model) {
  const PredictorHead& h = model.head;
  validate(h);
  std::ostringstream out;
  out << kModelMagic << ' ' << kModelVersion << '\n';
  out << "variant " << to_string(h.config.variant) << '\n';
  out << "embedding_dim " << h.config.embedding_dim << '\n';
  out << "aux_dim " << h.config.aux_dim << '\n';
  out << "raw_aux_dim " << h.raw_aux_dim << '\n';
  out << "use_layer_norm " << (h.config.use_layer_norm ? 1 : 0) << '\n';
  out << "histogram_norm " << (h.config.histogram_norm == HistogramNorm::voiced ? "voiced" : "all") << '\n';
  out << "seed " << h.config.seed << '\n';
  put_array(out, "weights", h.weights);
  out << "bias " << float_text(h.bias) << '\n';
  put_array(out, "norm_scale", h.norm_scale);
  put_array(out, "norm_offset", h.norm_offset);
  put_array(out, "projection", h.projection);
  if (model.bias_branch) {
    const BiasBranch& b = *model.bias_branch;
    out << "bias_branch 1\n";
    out << "alpha " << format_exact(b.alpha) << '\n';
    out << "beta " << format_exact(b.beta) << '\n';
    put_array(out, "add_weights", b.add_weights);
    out << "add_bias " << float_text(b.add_bias) << '\n';
    put_array(out, "sub_weights", b.sub_weights);
    out << "sub_bias " << float_text(b.sub_bias) << '\n';
  }
  out << "end\n";
  return out.str();
}

ModelFile parse_model(std::string_view text) {
  Fields f(text, kModelMagic);
  ModelFile m;
  HeadConfig& c = m.head.config;
  c.variant = parse_head_variant(f.scalar("variant"));
  c.embedding_dim = f.count("embedding_dim");
  c.aux_dim = f.count("aux_dim");
  m.head.raw_aux_dim = f.count("raw_aux_dim");
  c.use_layer_norm = f.count("use_layer_norm") != 0;
  const auto norm = f.scalar("histogram_norm");
  if (norm != "voiced" && norm != "all") throw FormatError("histogram_norm must be 'voiced' or 'all'");
  c.histogram_norm = norm == "voiced" ? HistogramNorm::voiced : HistogramNorm::all;
  c.seed = f.count("seed");
  m.head.weights = f.array("weights");
  m.head.bias = static_cast<float>(f.number("bias"));
  m.head.norm_scale = f.array("norm_scale");
  m.head.norm_offset = f.array("norm_offset");
  m.head.projection = f.array("projection");
  try {
    validate(m.head);
  } catch (const Error& e) {
    throw FormatError(std::string("inconsistent model: ") + e.what());
  }
  if (f.peek("bias_branch")) {
    if (f.count("bias_branch") != 1) throw FormatError("unsupported bias_branch section version");
    BiasBranch b;
    b.alpha = f.number("alpha");
    b.beta = f.number("beta");
    b.add_weights = f.array("add_weights");
    b.add_bias = static_cast<float>(f.number("add_bias"));
    b.sub_weights = f.array("sub_weights");
    b.sub_bias = static_cast<float>(f.number("sub_bias"));
    validate_thresholds(b.alpha, b.beta);
    if (b.add_weights.size() != c.feature_dim() || b.sub_weights.size() != c.feature_dim()) {
      throw FormatError("bias branch width does not match the head");
    }
    m.bias_branch = std::move(b);
  }
  f.finish();
  return m;
}

void save_model(const ModelFile& model, const std::filesystem::path& path) {
  write_text(path, serialize_model(model));
}

ModelFile load_model(const std::filesystem::path& path) {
  try {
    return parse_model(read_text(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

double model_score(const ModelFile& model, const PooledFeatures& pooled) {
  const auto v = assemble(model.head, pooled);
  return model.bias_branch ? forward_corrected(model.head, *model.bias_branch, v) : forward(model.head, v);
}

std::string serialize_fusion(const FusionModel& model) {
  validate(model);
  std::ostringstream out;
  out << kFusionMagic << ' ' << kModelVersion << '\n';
  out << "members " << model.member_ids.size() << '\n';
  for (std::size_t j = 0; j < model.member_ids.size(); ++j) {
    const auto& id = model.member_ids[j];
    if (id.empty() || id.find_first_of(" \t\n") != std::string::npos) {
      throw InvalidArgument("fusion member id '" + id + "' must be non-empty without whitespace");
    }
    out << "member " << id << ' ' << (model.member_digests[j].empty() ? "-" : model.member_digests[j]) << '\n';
  }
  put_array(out, "combiner_weights", model.combiner_weights);
  out << "combiner_bias " << float_text(model.combiner_bias) << '\n';
  out << "end\n";
  return out.str();
}

FusionModel parse_fusion(std::string_view text) {
  Fields f(text, kFusionMagic);
  FusionModel m;
  const auto k = f.count("members");
  for (std::uint64_t j = 0; j < k; ++j) {
    const auto& l = f.next("member");
    if (l.size() != 3) throw FormatError("member line needs an id and a digest");
    m.member_ids.push_back(l[1]);
    m.member_digests.push_back(l[2] == "-" ? std::string{} : l[2]);
  }
  m.combiner_weights = f.array("combiner_weights");
  m.combiner_bias = static_cast<float>(f.number("combiner_bias"));
  f.finish();
  try {
    validate(m);
  } catch (const Error& e) {
    throw FormatError(std::string("inconsistent fusion model: ") + e.what());
  }
  return m;
}

void save_fusion(const FusionModel& model, const std::filesystem::path& path) {
  write_text(path, serialize_fusion(model));
}

FusionModel load_fusion(const std::filesystem::path& path) {
  try {
    return parse_fusion(read_text(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string content_digest(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016" PRIx64, h);
  return buf;
}

std::string file_digest(const std::filesystem::path& path) { return content_digest(read_text(path)); }

void verify_members(const FusionModel& model, const std::filesystem::path& base_dir) {
  validate(model);
  for (std::size_t j = 0; j < model.member_ids.size(); ++j) {
    const std::filesystem::path p = base_dir / model.member_ids[j];
    if (model.member_digests[j].empty()) continue;
    const auto digest = file_digest(p);
    if (digest != model.member_digests[j]) {
      throw FormatError("fusion member " + model.member_ids[j] + " changed since the combiner was trained (" +
                        digest + " != " + model.member_digests[j] + ")");
    }
  }
}

bool is_fusion_text(std::string_view text) { return text.starts_with(kFusionMagic); }

}  // namespace sqa
