#include "sqa_tools/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "sqa/audio.hpp"
#include "sqa/bias_correction.hpp"
#include "sqa/dataset.hpp"
#include "sqa/error.hpp"
#include "sqa/feature.hpp"
#include "sqa/fusion.hpp"
#include "sqa/heads.hpp"
#include "sqa/manifest.hpp"
#include "sqa/metrics.hpp"
#include "sqa/model_io.hpp"
#include "sqa/pitch.hpp"
#include "sqa/spectral.hpp"
#include "sqa/text.hpp"

namespace sqa::tools {
namespace fs = std::filesystem;
namespace {

// Per-subcommand exit status for "ran, but some items failed".
constexpr int kItemFailure = 1;
constexpr int kUsageError = 2;

class Log {
 public:
  explicit Log(std::ostream& err) : err_(err) {}
  void info(const std::string& msg) const { err_ << "[sqa] " << msg << '\n'; }
  void error(const std::string& msg) const { err_ << "[sqa] error: " << msg << '\n'; }

 private:
  std::ostream& err_;
};

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

unsigned default_jobs() {
  if (const char* env = std::getenv("SQA_JOBS")) {
    try {
      const long long v = parse_integer(env, "SQA_JOBS");
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const Error&) {
    }
  }
  return 1;
}

// Runs task(i) for i in [0, n) on up to `jobs` threads. Each index is owned
// by exactly one worker, so outputs stored per index are order-independent.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& task) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < jobs; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) task(i);
    });
  }
  for (auto& t : pool) t.join();
}

void check_file_id(const std::string& utt_id) {
  if (utt_id.find_first_of("/\\") != std::string::npos || utt_id == "." || utt_id == "..") {
    throw InvalidArgument("utterance id '" + utt_id + "' cannot be used as a file name");
  }
}

// Options shared by every training subcommand.
struct TrainFlags {
  TrainConfig cfg;

  void add_to(CLI::App& app) {
    app.add_option("--lr", cfg.learning_rate, "Learning rate")->capture_default_str();
    app.add_option("--batch-size", cfg.batch_size, "Mini-batch size")->capture_default_str();
    app.add_option("--max-epochs", cfg.max_epochs, "Maximum epochs")->capture_default_str();
    app.add_option("--patience", cfg.early_stop_patience, "Epochs without a better checkpoint before stopping")
        ->capture_default_str();
    app.add_option("--seed", cfg.seed, "Shuffle and initialization seed")->capture_default_str();
  }
};

std::string histogram_row(const std::string& utt_id, const PitchHistogram& h) {
  std::string row = utt_id;
  for (double b : h.bins) row += "," + format_exact(b);
  const bool empty = std::all_of(h.bins.begin(), h.bins.end(), [](double b) { return b == 0.0; });
  row += "," + (empty ? std::string("nan") : format_exact(histogram_sharpness(h))) + "\n";
  return row;
}

std::string histogram_header() {
  std::string h = "utt_id";
  for (std::size_t j = 1; j <= kHistogramBins; ++j) h += ",p" + std::to_string(j);
  return h + ",sharpness\n";
}

HistogramNorm parse_norm(const std::string& s) { return s == "all" ? HistogramNorm::all : HistogramNorm::voiced; }

// ---------------------------------------------------------------------------
// extract-pitch / extract-spectral

struct ExtractFlags {
  std::string manifest;
  std::string out_dir;
  std::string manifest_out;
  unsigned jobs = default_jobs();
};

struct ItemOutcome {
  std::optional<std::string> error;
  std::string row;  // histogram row for extract-pitch
};

int finish_extraction(const ExtractFlags& f, std::vector<UtteranceRecord>& records,
                      const std::vector<ItemOutcome>& outcomes, const Log& log) {
  std::string failures;
  std::size_t failed = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (outcomes[i].error) {
      ++failed;
      log.error(records[i].utt_id + ": " + *outcomes[i].error);
      failures += records[i].utt_id + "," + *outcomes[i].error + "\n";
    }
  }
  const fs::path failures_path = fs::path(f.out_dir) / "failures.csv";
  if (failed > 0) {
    write_file(failures_path, "utt_id,error\n" + failures);
  } else if (fs::exists(failures_path)) {
    fs::remove(failures_path);
  }
  if (!f.manifest_out.empty()) write_manifest(f.manifest_out, records);
  log.info(std::to_string(records.size() - failed) + " of " + std::to_string(records.size()) + " utterances done");
  return failed > 0 ? kItemFailure : 0;
}

void add_extract_flags(CLI::App& app, ExtractFlags& f) {
  app.add_option("manifest", f.manifest, "Manifest CSV with wav_path")->required();
  app.add_option("out_dir", f.out_dir, "Output directory")->required();
  app.add_option("--manifest-out", f.manifest_out, "Write a copy of the manifest pointing at the new files");
  app.add_option("--jobs", f.jobs, "Worker threads (default: $SQA_JOBS or 1)")->check(CLI::PositiveNumber);
}

int cmd_extract_pitch(const ExtractFlags& f, const PitchTrackerOptions& opts, HistogramNorm norm, const Log& log) {
  auto records = load_manifest(f.manifest);
  fs::create_directories(f.out_dir);
  std::vector<ItemOutcome> outcomes(records.size());
  parallel_for(records.size(), f.jobs, [&](std::size_t i) {
    auto& r = records[i];
    try {
      check_file_id(r.utt_id);
      if (!r.wav_path) throw InvalidArgument("no wav_path");
      const auto track = track_pitch(read_wav(*r.wav_path), opts);
      const auto seq = to_features(track);
      const fs::path out = fs::absolute(fs::path(f.out_dir) / (r.utt_id + ".pitch.sqaf"));
      write_feature_file(seq, out);
      // Histogram of the track as persisted, so it matches what training sees.
      outcomes[i].row = histogram_row(r.utt_id, compute_histogram(pitch_track_from_features(seq), norm));
      r.feature_paths[FeatureKind::pitch] = out;
    } catch (const std::exception& e) {
      outcomes[i].error = e.what();
    }
  });
  std::string csv = histogram_header();
  for (const auto& o : outcomes) {
    if (!o.error) csv += o.row;
  }
  write_file(fs::path(f.out_dir) / "histograms.csv", csv);
  return finish_extraction(f, records, outcomes, log);
}

int cmd_extract_spectral(const ExtractFlags& f, const SpectralOptions& opts, const Log& log) {
  auto records = load_manifest(f.manifest);
  fs::create_directories(f.out_dir);
  std::vector<ItemOutcome> outcomes(records.size());
  parallel_for(records.size(), f.jobs, [&](std::size_t i) {
    auto& r = records[i];
    try {
      check_file_id(r.utt_id);
      if (!r.wav_path) throw InvalidArgument("no wav_path");
      const auto seq = stft_amplitude_phase(read_wav(*r.wav_path), opts);
      const fs::path out = fs::absolute(fs::path(f.out_dir) / (r.utt_id + ".spec.sqaf"));
      write_feature_file(seq, out);
      r.feature_paths[FeatureKind::spectral] = out;
    } catch (const std::exception& e) {
      outcomes[i].error = e.what();
    }
  });
  return finish_extraction(f, records, outcomes, log);
}

// ---------------------------------------------------------------------------
// train / bias-correct / fuse

struct HeadFlags {
  std::string variant = "plain";
  std::size_t projection_width = kDefaultProjectionWidth;
  bool no_layer_norm = false;
  std::string norm = "voiced";

  void add_to(CLI::App& app) {
    app.add_option("--variant", variant, "plain | compressed_pitch | pitch_histogram | spectrum")
        ->capture_default_str()
        ->check(CLI::IsMember({"plain", "compressed_pitch", "pitch_histogram", "spectrum"}));
    app.add_option("--projection-width", projection_width, "Spectral projection width")->capture_default_str();
    app.add_flag("--no-layer-norm", no_layer_norm, "Concatenate the pitch histogram without layer norm");
    app.add_option("--norm", norm, "Histogram normalization")->capture_default_str()->check(
        CLI::IsMember({"voiced", "all"}));
  }
};

std::size_t embedding_dim_of(const std::vector<UtteranceRecord>& records) {
  if (records.empty()) throw InvalidArgument("manifest is empty");
  return load_inputs(records.front(), HeadVariant::plain).embedding->dims();
}

std::string default_log_path(const std::string& out) { return out + ".log.csv"; }

int cmd_train(const std::string& train_manifest, const std::string& val_manifest, const HeadFlags& hf,
              const TrainConfig& cfg, const std::string& out, std::string log_path, std::ostream& stdout_,
              const Log& log) {
  const auto train_rows = load_manifest(train_manifest);
  const auto val_rows = load_manifest(val_manifest);
  HeadConfig config = make_head_config(parse_head_variant(hf.variant), embedding_dim_of(train_rows), cfg.seed,
                                       hf.projection_width);
  config.use_layer_norm = !hf.no_layer_norm;
  config.histogram_norm = parse_norm(hf.norm);

  const auto train = load_labeled(train_rows, config);
  const auto val = load_labeled(val_rows, config);
  log.info("training " + hf.variant + " head on " + std::to_string(train.size()) + " utterances");
  const auto result = train_head(config, train, val, cfg);

  save_model({result.head, std::nullopt}, out);
  if (log_path.empty()) log_path = default_log_path(out);
  write_file(log_path, training_log_csv(result.log));
  log.info("best epoch " + std::to_string(result.log.best_epoch) + " of " +
           std::to_string(result.log.epochs.size()));
  stdout_ << "best_val_sys_srcc " << format_exact(result.log.best().val_srcc_system) << '\n';
  return 0;
}

std::vector<double> score_rows(const ModelFile& model, const std::vector<UtteranceRecord>& rows) {
  const auto pooled = load_pooled(rows, model.head.config);
  std::vector<double> out;
  out.reserve(pooled.size());
  for (const auto& p : pooled) out.push_back(model_score(model, p));
  return out;
}

int cmd_bias_correct(const std::string& train_manifest, const std::string& val_manifest,
                     const std::string& model_path, double alpha, double beta, const TrainConfig& cfg,
                     const std::string& out, std::string log_path, const std::string& segments_path,
                     std::ostream& stdout_, const Log& log) {
  validate_thresholds(alpha, beta);
  ModelFile model = load_model(model_path);
  const auto train_rows = load_manifest(train_manifest);
  const auto val_rows = load_manifest(val_manifest);
  const auto train = load_labeled(train_rows, model.head.config);
  const auto val = load_labeled(val_rows, model.head.config);

  const auto result = train_bias_branch(model.head, train, val, alpha, beta, cfg);
  if (result.inactive) log.info("no training prediction falls outside [beta, alpha]; branch left at zero");
  model.bias_branch = result.branch;
  save_model(model, out);
  if (log_path.empty()) log_path = default_log_path(out);
  write_file(log_path, training_log_csv(result.log));
  if (!segments_path.empty()) {
    write_file(segments_path, segment_mse_csv(segment_mse(score_rows(model, val_rows), manifest_labels(val_rows))));
  }
  stdout_ << "bias_branch_active " << (result.inactive ? 0 : 1) << '\n';
  if (!result.inactive) stdout_ << "best_val_sys_srcc " << format_exact(result.log.best().val_srcc_system) << '\n';
  return 0;
}

std::string member_id(const fs::path& member, const fs::path& fusion_out) {
  const fs::path base = fs::absolute(fusion_out).parent_path();
  const fs::path rel = fs::absolute(member).lexically_normal().lexically_relative(base);
  return (rel.empty() ? fs::absolute(member).lexically_normal() : rel).generic_string();
}

MemberScores member_scores(const std::vector<std::vector<double>>& per_member,
                           const std::vector<UtteranceRecord>& rows) {
  MemberScores s;
  s.labels = manifest_labels(rows);
  s.system_ids = manifest_systems(rows);
  s.scores.assign(rows.size(), std::vector<double>(per_member.size()));
  for (std::size_t j = 0; j < per_member.size(); ++j) {
    for (std::size_t i = 0; i < rows.size(); ++i) s.scores[i][j] = per_member[j][i];
  }
  return s;
}

int cmd_fuse(const std::string& train_manifest, const std::string& val_manifest,
             const std::vector<std::string>& members, std::size_t k, const TrainConfig& cfg, const std::string& out,
             std::string log_path, std::ostream& stdout_, const Log& log) {
  if (k > members.size()) {
    throw InvalidArgument("--k " + std::to_string(k) + " exceeds the " + std::to_string(members.size()) +
                          " member models given");
  }
  const auto train_rows = load_manifest(train_manifest);
  const auto val_rows = load_manifest(val_manifest);
  const auto val_labels = manifest_labels(val_rows);
  const auto val_systems = manifest_systems(val_rows);

  std::vector<ModelFile> models;
  std::vector<PredictorReport> reports;
  std::map<std::string, std::size_t> index;
  for (const auto& m : members) {
    const std::string id = member_id(m, out);
    if (index.count(id) != 0) throw InvalidArgument("member " + m + " given twice");
    index[id] = models.size();
    models.push_back(load_model(m));
    reports.emplace_back(id, full_report(score_rows(models.back(), val_rows), val_labels, val_systems));
  }
  const auto chosen = rank_predictors(reports, k);

  std::vector<std::vector<double>> train_scores;
  std::vector<std::vector<double>> val_scores;
  for (const auto& id : chosen) {
    const auto& model = models[index.at(id)];
    train_scores.push_back(score_rows(model, train_rows));
    val_scores.push_back(score_rows(model, val_rows));
    log.info("member " + id + " val sys SRCC " + format_significant(reports[index.at(id)].second.system.srcc, 6));
  }
  auto result = train_combiner(chosen, member_scores(train_scores, train_rows), member_scores(val_scores, val_rows),
                               cfg);
  for (std::size_t j = 0; j < chosen.size(); ++j) {
    result.model.member_digests[j] = file_digest(members[index.at(chosen[j])]);
  }
  save_fusion(result.model, out);
  if (log_path.empty()) log_path = default_log_path(out);
  write_file(log_path, training_log_csv(result.log));
  stdout_ << "best_val_sys_srcc " << format_exact(result.log.best().val_srcc_system) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// predict / evaluate / histogram

std::vector<double> predict_rows(const fs::path& model_path, const std::vector<UtteranceRecord>& rows) {
  const std::string text = read_file(model_path);
  if (!is_fusion_text(text)) return score_rows(parse_model(text), rows);

  FusionModel fusion;
  try {
    fusion = parse_fusion(text);
  } catch (const FormatError& e) {
    throw FormatError(model_path.string() + ": " + e.what());
  }
  const fs::path base = fs::absolute(model_path).parent_path();
  verify_members(fusion, base);
  std::vector<std::vector<double>> per_member;
  for (const auto& id : fusion.member_ids) per_member.push_back(score_rows(load_model(base / id), rows));
  std::vector<double> out(rows.size());
  std::vector<double> s(per_member.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < per_member.size(); ++j) s[j] = per_member[j][i];
    out[i] = fuse_forward(s, fusion);
  }
  return out;
}

int cmd_predict(const std::string& manifest, const std::string& model_path, const std::string& out,
                const Log& log) {
  const auto rows = load_manifest(manifest);
  const auto scores = predict_rows(model_path, rows);
  std::string csv = "utt_id,raw_score,clamped_score\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    csv += rows[i].utt_id + "," + format_exact(scores[i]) + "," + format_exact(std::clamp(scores[i], 1.0, 5.0)) +
           "\n";
  }
  write_file(out, csv);
  log.info("wrote " + std::to_string(rows.size()) + " predictions to " + out);
  return 0;
}

// Scores keyed by utt_id from a predict CSV.
std::map<std::string, double> read_predictions(const fs::path& path, const std::string& column) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty predictions file");
  const auto header = split_csv_line(line);
  const auto col = std::find(header.begin(), header.end(), column);
  if (header.empty() || header[0] != "utt_id" || col == header.end()) {
    throw FormatError(path.string() + ": expected utt_id and " + column + " columns");
  }
  const auto c = static_cast<std::size_t>(col - header.begin());
  std::map<std::string, double> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    const std::string where = path.string() + " row " + std::to_string(row);
    if (cells.size() != header.size()) throw FormatError(where + ": wrong number of columns");
    if (!out.emplace(cells[0], parse_double(cells[c], where)).second) {
      throw FormatError(where + ": duplicate utt_id " + cells[0]);
    }
  }
  return out;
}

int cmd_evaluate(const std::string& predictions, const std::string& manifest, const std::string& column,
                 const std::string& out, std::ostream& stdout_) {
  const auto rows = load_manifest(manifest);
  auto scores = read_predictions(predictions, column);
  std::vector<double> pred;
  pred.reserve(rows.size());
  for (const auto& r : rows) {
    const auto it = scores.find(r.utt_id);
    if (it == scores.end()) throw InvalidArgument("no prediction for utterance " + r.utt_id);
    pred.push_back(it->second);
    scores.erase(it);
  }
  if (!scores.empty()) throw InvalidArgument("prediction for unknown utterance " + scores.begin()->first);
  const auto report = full_report(pred, manifest_labels(rows), manifest_systems(rows));
  stdout_ << report_to_table(report);
  if (!out.empty()) write_file(out, report_to_csv(report));
  return 0;
}

int cmd_histogram(const std::vector<std::string>& inputs, HistogramNorm norm, const std::string& out,
                  std::ostream& stdout_, const Log& log) {
  std::string csv = histogram_header();
  int status = 0;
  for (const auto& in : inputs) {
    try {
      const auto seq = read_feature_file(in);
      std::string id = fs::path(in).filename().string();
      if (const auto dot = id.find(".pitch.sqaf"); dot != std::string::npos) id.resize(dot);
      csv += histogram_row(id, compute_histogram(pitch_track_from_features(seq), norm));
    } catch (const Error& e) {
      log.error(in + ": " + e.what());
      status = kItemFailure;
    }
  }
  if (out.empty()) {
    stdout_ << csv;
  } else {
    write_file(out, csv);
  }
  return status;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const Log log(err);
  CLI::App app{"Singing quality assessment toolkit", "sqa"};
  app.require_subcommand(1);
  std::function<int()> action;

  // extract-pitch
  ExtractFlags pitch_flags;
  PitchTrackerOptions pitch_opts;
  std::string pitch_norm = "voiced";
  auto* ep = app.add_subcommand("extract-pitch", "Track f0 per utterance; write pitch files and histograms");
  add_extract_flags(*ep, pitch_flags);
  ep->add_option("--frame-shift", pitch_opts.frame_shift, "Frame shift in seconds")->capture_default_str();
  ep->add_option("--f0-min", pitch_opts.f0_min, "Lowest f0 in Hz")->capture_default_str();
  ep->add_option("--f0-max", pitch_opts.f0_max, "Highest f0 in Hz")->capture_default_str();
  ep->add_option("--norm", pitch_norm, "Histogram normalization")->capture_default_str()->check(
      CLI::IsMember({"voiced", "all"}));
  ep->callback([&] { action = [&] { return cmd_extract_pitch(pitch_flags, pitch_opts, parse_norm(pitch_norm), log); }; });

  // extract-spectral
  ExtractFlags spec_flags;
  SpectralOptions spec_opts;
  auto* es = app.add_subcommand("extract-spectral", "Write STFT log-amplitude and phase features");
  add_extract_flags(*es, spec_flags);
  es->add_option("--frame-shift", spec_opts.frame_shift, "Frame shift in seconds")->capture_default_str();
  es->add_option("--fft-size", spec_opts.fft_size, "FFT size (power of two)")->capture_default_str();
  es->callback([&] { action = [&] { return cmd_extract_spectral(spec_flags, spec_opts, log); }; });

  // train
  std::string train_manifest;
  std::string val_manifest;
  std::string out_path;
  std::string log_path;
  HeadFlags head_flags;
  TrainFlags train_flags;
  auto* tr = app.add_subcommand("train", "Train a predictor head");
  tr->add_option("train_manifest", train_manifest, "Training manifest")->required();
  tr->add_option("val_manifest", val_manifest, "Validation manifest")->required();
  head_flags.add_to(*tr);
  train_flags.add_to(*tr);
  tr->add_option("--out", out_path, "Model file to write")->required();
  tr->add_option("--log", log_path, "Training-log CSV (default: <out>.log.csv)");
  tr->callback([&] {
    action = [&] {
      return cmd_train(train_manifest, val_manifest, head_flags, train_flags.cfg, out_path, log_path, out, log);
    };
  });

  // bias-correct
  std::string model_path;
  std::string segments_path;
  double alpha = kDefaultAlpha;
  double beta = kDefaultBeta;
  auto* bc = app.add_subcommand("bias-correct", "Train the bias-correction branch of a frozen head");
  bc->add_option("train_manifest", train_manifest, "Training manifest")->required();
  bc->add_option("val_manifest", val_manifest, "Validation manifest")->required();
  bc->add_option("--model", model_path, "Trained head")->required();
  bc->add_option("--alpha", alpha, "Upper threshold")->capture_default_str();
  bc->add_option("--beta", beta, "Lower threshold")->capture_default_str();
  train_flags.add_to(*bc);
  bc->add_option("--out", out_path, "Corrected model file to write")->required();
  bc->add_option("--log", log_path, "Training-log CSV (default: <out>.log.csv)");
  bc->add_option("--segments", segments_path, "Write per-segment validation MSE CSV");
  bc->callback([&] {
    action = [&] {
      return cmd_bias_correct(train_manifest, val_manifest, model_path, alpha, beta, train_flags.cfg, out_path,
                              log_path, segments_path, out, log);
    };
  });

  // fuse
  std::vector<std::string> members;
  std::size_t k = kDefaultFusionMembers;
  auto* fu = app.add_subcommand("fuse", "Select the top-k members and train a linear combiner");
  fu->add_option("train_manifest", train_manifest, "Training manifest")->required();
  fu->add_option("val_manifest", val_manifest, "Validation manifest")->required();
  fu->add_option("--member", members, "Trained model file (repeatable)")->required();
  fu->add_option("--k", k, "Number of members to fuse")->capture_default_str()->check(CLI::PositiveNumber);
  train_flags.add_to(*fu);
  fu->add_option("--out", out_path, "Fusion model file to write")->required();
  fu->add_option("--log", log_path, "Training-log CSV (default: <out>.log.csv)");
  fu->callback([&] {
    action = [&] {
      return cmd_fuse(train_manifest, val_manifest, members, k, train_flags.cfg, out_path, log_path, out, log);
    };
  });

  // predict
  std::string manifest;
  auto* pr = app.add_subcommand("predict", "Score a manifest with a model or fusion file");
  pr->add_option("manifest", manifest, "Manifest to score")->required();
  pr->add_option("--model", model_path, "Model or fusion file")->required();
  pr->add_option("--out", out_path, "Predictions CSV")->required();
  pr->callback([&] { action = [&] { return cmd_predict(manifest, model_path, out_path, log); }; });

  // evaluate
  std::string predictions;
  std::string column = "raw_score";
  auto* ev = app.add_subcommand("evaluate", "Utterance- and system-level metrics for a predictions CSV");
  ev->add_option("predictions", predictions, "Predictions CSV")->required();
  ev->add_option("manifest", manifest, "Labeled manifest")->required();
  ev->add_option("--column", column, "Score column")->capture_default_str()->check(
      CLI::IsMember({"raw_score", "clamped_score"}));
  ev->add_option("--out", out_path, "Report CSV");
  ev->callback([&] { action = [&] { return cmd_evaluate(predictions, manifest, column, out_path, out); }; });

  // histogram
  std::vector<std::string> pitch_files;
  std::string hist_norm = "voiced";
  auto* hi = app.add_subcommand("histogram", "Pitch histograms and sharpness of pitch files");
  hi->add_option("pitch_files", pitch_files, "Pitch SQAF files")->required();
  hi->add_option("--norm", hist_norm, "Histogram normalization")->capture_default_str()->check(
      CLI::IsMember({"voiced", "all"}));
  hi->add_option("--out", out_path, "CSV path (default: standard output)");
  hi->callback([&] { action = [&] { return cmd_histogram(pitch_files, parse_norm(hist_norm), out_path, out, log); }; });

  // synth-corpus
  std::string synth_dir;
  SynthOptions synth;
  auto* sy = app.add_subcommand("synth-corpus", "Generate a small synthetic labeled corpus");
  sy->add_option("out_dir", synth_dir, "Output directory")->required();
  sy->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
  sy->add_option("--systems", synth.systems, "Number of systems")->capture_default_str();
  sy->add_option("--train-per-system", synth.train_per_system)->capture_default_str();
  sy->add_option("--val-per-system", synth.val_per_system)->capture_default_str();
  sy->add_option("--test-per-system", synth.test_per_system)->capture_default_str();
  sy->add_option("--embedding-dim", synth.embedding_dim)->capture_default_str();
  sy->callback([&] {
    action = [&] {
      write_synthetic_corpus(synth_dir, synth);
      log.info("wrote synthetic corpus to " + synth_dir);
      return 0;
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : kUsageError;
  }
  try {
    return action();
  } catch (const std::exception& e) {
    log.error(e.what());
    return kItemFailure;
  }
}

}  // namespace sqa::tools
