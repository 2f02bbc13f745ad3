#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sqa/feature.hpp"
#include "sqa/pitch.hpp"
#include "sqa/sgd.hpp"

namespace sqa {

enum class HeadVariant : std::uint8_t { plain, compressed_pitch, pitch_histogram, spectrum };

std::string_view to_string(HeadVariant variant);
HeadVariant parse_head_variant(std::string_view name);

inline constexpr std::size_t kCompressedPitchChannels = 2;  // I(f_cent) / 120, voicing flag
inline constexpr std::size_t kDefaultProjectionWidth = 64;
inline constexpr double kLayerNormEpsilon = 1e-5;

struct HeadConfig {
  HeadVariant variant = HeadVariant::plain;
  std::size_t embedding_dim = 0;
  // 0 plain, 2 compressed_pitch, 120 pitch_histogram, projection width for spectrum.
  std::size_t aux_dim = 0;
  bool use_layer_norm = true;                          // pitch_histogram only
  HistogramNorm histogram_norm = HistogramNorm::voiced;  // pitch_histogram only
  std::uint64_t seed = 0;

  [[nodiscard]] std::size_t feature_dim() const { return embedding_dim + aux_dim; }

  friend bool operator==(const HeadConfig&, const HeadConfig&) = default;
};

HeadConfig make_head_config(HeadVariant variant, std::size_t embedding_dim, std::uint64_t seed = 0,
                            std::size_t projection_width = kDefaultProjectionWidth);

void validate(const HeadConfig& config);

// Linear output layer plus the variant's trainable front end: layer-norm
// affine (pitch_histogram with layer norm) or the spectral projection
// (spectrum, aux_dim x raw_aux_dim, row-major). Parameters are float32.
struct PredictorHead {
  HeadConfig config;
  std::size_t raw_aux_dim = 0;
  std::vector<float> weights;
  float bias = 0.0f;
  std::vector<float> projection;
  std::vector<float> norm_scale;
  std::vector<float> norm_offset;

  friend bool operator==(const PredictorHead&, const PredictorHead&) = default;
};

void validate(const PredictorHead& head);

// Zero output weights and bias, identity layer-norm affine, and a seeded
// Gaussian projection with standard deviation projection_std.
PredictorHead init_head(const HeadConfig& config, std::size_t raw_aux_dim = 0, double projection_std = 0.0);

// Flat layout: weights, bias, [norm_scale, norm_offset], [projection].
std::size_t parameter_count(const PredictorHead& head);
std::vector<double> flatten_parameters(const PredictorHead& head);
void assign_parameters(PredictorHead& head, std::span<const double> params);

// Per-dimension mean over frames.
std::vector<double> mean_pool(const FeatureSequence& seq);

// (v - mean) / sqrt(var + 1e-5) with population variance.
std::vector<double> layer_normalize(std::span<const double> v);
std::vector<double> layer_normalize(std::span<const double> v, std::span<const float> scale,
                                    std::span<const float> offset);

struct AlignedPair {
  FeatureSequence embedding;
  FeatureSequence aux;
};

// Frame shifts must agree within 1%; lengths may differ by up to 2 frames,
// in which case both are truncated to the shorter one.
AlignedPair align_frames(const FeatureSequence& embedding, const FeatureSequence& aux);

struct UtteranceInputs {
  std::optional<FeatureSequence> embedding;
  std::optional<PitchTrack> pitch;
  std::optional<FeatureSequence> spectral;
};

// The part of feature assembly that has no trainable parameters:
//   plain            fixed = mean_pool(emb)
//   compressed_pitch fixed = mean_pool([emb | I(f_cent)/120 | voiced])
//   pitch_histogram  fixed = layer_normalize([mean_pool(emb) | P]) before the
//                    affine (plain concatenation without layer norm)
//   spectrum         fixed = mean_pool(emb), raw_aux = mean_pool(spec)
// Mean pooling commutes with the spectral projection, so the projected
// frames never need to be materialized.
struct PooledFeatures {
  std::vector<double> fixed;
  std::vector<double> raw_aux;
};

PooledFeatures pool_inputs(const HeadConfig& config, const UtteranceInputs& inputs);

// Feature vector consumed by the output layer (length feature_dim()).
std::vector<double> assemble(const PredictorHead& head, const PooledFeatures& pooled);
std::vector<double> assemble_features(const PredictorHead& head, const UtteranceInputs& inputs);

// dot(weights, features) + bias, unclamped.
double forward(const PredictorHead& head, std::span<const double> features);

double predict(const PredictorHead& head, const PooledFeatures& pooled);

struct LabeledExample {
  PooledFeatures features;
  double label = 0.0;
  std::string system_id;
};

// Training view of a head: predictions and gradients for a flat parameter
// vector laid out as in flatten_parameters().
class HeadObjective final : public L1Objective {
 public:
  HeadObjective(PredictorHead shape, const std::vector<LabeledExample>& train,
                const std::vector<LabeledExample>& validation);

  [[nodiscard]] std::size_t num_params() const override;
  [[nodiscard]] std::size_t num_train() const override { return train_.size(); }
  [[nodiscard]] double train_label(std::size_t i) const override { return train_[i].label; }
  [[nodiscard]] double predict_train(std::span<const double> params, std::size_t i) const override;
  void accumulate_gradient(std::span<const double> params, std::size_t i, double coeff,
                           std::span<double> grad) const override;
  [[nodiscard]] std::vector<double> predict_validation(std::span<const double> params) const override;

  [[nodiscard]] double predict_with(std::span<const double> params, const PooledFeatures& x) const;

 private:
  PredictorHead shape_;
  const std::vector<LabeledExample>& train_;
  const std::vector<LabeledExample>& validation_;
};

struct HeadTrainingResult {
  PredictorHead head;
  TrainingLog log;
};

// Fits a head by mini-batch SGD on L1 loss with system-level SRCC
// checkpointing. The output bias starts at the median training label; the
// spectral projection starts at N(0, 1 / (raw_aux_dim * rms^2)) where rms is
// the root-mean-square pooled spectral value over the training set.
HeadTrainingResult train_head(const HeadConfig& config, const std::vector<LabeledExample>& train,
                              const std::vector<LabeledExample>& validation, const TrainConfig& cfg);

ValidationTargets validation_targets(const std::vector<LabeledExample>& validation);

// Throws InvalidArgument unless the set is non-empty and spans >= 2 systems.
void require_ranking_set(const std::vector<LabeledExample>& validation);

}  // namespace sqa
