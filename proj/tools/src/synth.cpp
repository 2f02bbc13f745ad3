#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "sqa/audio.hpp"
#include "sqa/error.hpp"
#include "sqa/feature.hpp"
#include "sqa/framing.hpp"
#include "sqa/manifest.hpp"
#include "sqa_tools/cli.hpp"

namespace sqa::tools {
namespace {

constexpr double kNoteSeconds = 0.25;

AudioClip sing(double quality, std::mt19937_64& rng, const SynthOptions& o) {
  std::uniform_int_distribution<int> note(-9, 7);  // semitones around A4
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double detune_cents = (5.0 - quality) * 30.0;
  const double noise = (5.0 - quality) * 0.02;

  const auto n = static_cast<std::size_t>(std::lround(o.duration * o.sample_rate));
  AudioClip clip{std::vector<double>(n), o.sample_rate};
  double phase = 0.0;
  double freq = 0.0;
  const auto note_len = static_cast<std::size_t>(kNoteSeconds * o.sample_rate);
  for (std::size_t i = 0; i < n; ++i) {
    if (i % note_len == 0) {
      const double cents = 100.0 * note(rng) + detune_cents * gauss(rng);
      freq = 440.0 * std::exp2(cents / 1200.0);
    }
    phase += 2.0 * std::numbers::pi * freq / o.sample_rate;
    if (phase > 2.0 * std::numbers::pi) phase -= 2.0 * std::numbers::pi;
    const double tone = 0.3 * std::sin(phase) + 0.12 * std::sin(2 * phase) + 0.05 * std::sin(3 * phase);
    clip.samples[i] = std::clamp(tone + noise * gauss(rng), -1.0, 1.0);
  }
  return clip;
}

FeatureSequence embed(double label, double system_offset, std::size_t frames, std::mt19937_64& rng,
                      const SynthOptions& o) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<float> data(frames * o.embedding_dim);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t d = 0; d < o.embedding_dim; ++d) {
      double v = 0.5 * gauss(rng);
      if (d < 4) v += (label - 3.0) * (1.0 - 0.2 * static_cast<double>(d));
      if (d == 4) v += system_offset;
      data[t * o.embedding_dim + d] = static_cast<float>(v);
    }
  }
  return {frames, o.embedding_dim, std::move(data), 0.02, FeatureKind::embedding};
}

}  // namespace

void write_synthetic_corpus(const std::filesystem::path& dir, const SynthOptions& o) {
  if (o.systems < 2) throw InvalidArgument("synthetic corpus needs at least 2 systems");
  if (o.embedding_dim < 5) throw InvalidArgument("synthetic corpus needs embedding_dim >= 5");
  if (o.duration < 0.1) throw InvalidArgument("synthetic clips must last at least 0.1 s");
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<double> quality(static_cast<std::size_t>(o.systems));
  std::vector<double> offset(quality.size());
  for (std::size_t s = 0; s < quality.size(); ++s) {
    quality[s] = 1.5 + 3.0 * static_cast<double>(s) / static_cast<double>(o.systems - 1);
    offset[s] = 0.3 * gauss(rng);
  }

  const std::pair<const char*, int> splits[] = {
      {"train", o.train_per_system}, {"val", o.val_per_system}, {"test", o.test_per_system}};
  for (const auto& [split, per_system] : splits) {
    std::vector<UtteranceRecord> rows;
    for (std::size_t s = 0; s < quality.size(); ++s) {
      for (int u = 0; u < per_system; ++u) {
        char id[64];
        std::snprintf(id, sizeof id, "%s_s%02zu_u%03d", split, s, u);
        const double label = std::clamp(quality[s] + 0.3 * gauss(rng), 1.0, 5.0);
        const AudioClip clip = sing(quality[s], rng, o);
        const FrameGrid grid{clip.samples.size(), clip.sample_rate, 0.02};
        const auto emb = embed(label, offset[s], grid.frame_count(), rng, o);

        UtteranceRecord r;
        r.utt_id = id;
        r.system_id = "sys" + std::to_string(s);
        r.wav_path = dir / (r.utt_id + ".wav");
        r.feature_paths[FeatureKind::embedding] = dir / (r.utt_id + ".emb.sqaf");
        r.mos_label = static_cast<double>(static_cast<float>(label));
        write_wav(*r.wav_path, clip, WavEncoding::pcm16);
        write_feature_file(emb, r.feature_paths[FeatureKind::embedding]);
        rows.push_back(std::move(r));
      }
    }
    write_manifest(dir / (std::string(split) + ".csv"), rows);
  }
}

}  // namespace sqa::tools
