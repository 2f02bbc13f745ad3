#include "sqa/dataset.hpp"

#include "sqa/error.hpp"

namespace sqa {
namespace {

FeatureSequence require_feature(const UtteranceRecord& record, FeatureKind kind) {
  const auto path = record.feature_path(kind);
  if (!path) {
    throw InvalidArgument("utterance " + record.utt_id + ": no " + std::string(to_string(kind)) + " file in manifest");
  }
  try {
    FeatureSequence seq = read_feature_file(*path);
    if (seq.kind() != kind) {
      throw FormatError(path->string() + ": expected " + std::string(to_string(kind)) + " features, found " +
                        std::string(to_string(seq.kind())));
    }
    return seq;
  } catch (const Error& e) {
    throw IoError("utterance " + record.utt_id + ": " + e.what());
  }
}

}  // namespace

UtteranceInputs load_inputs(const UtteranceRecord& record, HeadVariant variant) {
  UtteranceInputs in;
  in.embedding = require_feature(record, FeatureKind::embedding);
  switch (variant) {
    case HeadVariant::plain: break;
    case HeadVariant::compressed_pitch:
    case HeadVariant::pitch_histogram:
      in.pitch = pitch_track_from_features(require_feature(record, FeatureKind::pitch));
      break;
    case HeadVariant::spectrum: in.spectral = require_feature(record, FeatureKind::spectral); break;
  }
  return in;
}

std::vector<PooledFeatures> load_pooled(const std::vector<UtteranceRecord>& records, const HeadConfig& config) {
  std::vector<PooledFeatures> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    try {
      out.push_back(pool_inputs(config, load_inputs(r, config.variant)));
    } catch (const IoError&) {
      throw;
    } catch (const Error& e) {
      throw InvalidArgument("utterance " + r.utt_id + ": " + e.what());
    }
  }
  return out;
}

std::vector<LabeledExample> load_labeled(const std::vector<UtteranceRecord>& records, const HeadConfig& config) {
  const auto labels = manifest_labels(records);
  auto pooled = load_pooled(records, config);
  std::vector<LabeledExample> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    out.push_back({std::move(pooled[i]), labels[i], records[i].system_id});
  }
  return out;
}

std::vector<double> manifest_labels(const std::vector<UtteranceRecord>& records) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    if (!r.mos_label) throw InvalidArgument("utterance " + r.utt_id + " has no MOS label");
    out.push_back(*r.mos_label);
  }
  return out;
}

std::vector<std::string> manifest_systems(const std::vector<UtteranceRecord>& records) {
  std::vector<std::string> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.system_id);
  return out;
}

}  // namespace sqa
