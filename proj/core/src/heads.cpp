#include "sqa/heads.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "sqa/error.hpp"

namespace sqa {
namespace {

// Offsets of each parameter block inside the flat vector.
struct Layout {
  std::size_t embedding = 0;
  std::size_t features = 0;
  std::size_t raw_aux = 0;
  bool affine = false;
  bool projection = false;

  std::size_t bias_at() const { return features; }
  std::size_t scale_at() const { return features + 1; }
  std::size_t offset_at() const { return features + 1 + features; }
  std::size_t projection_at() const { return features + 1 + (affine ? 2 * features : 0); }
  std::size_t total() const {
    return projection_at() + (projection ? (features - embedding) * raw_aux : 0);
  }
};

Layout layout_of(const PredictorHead& head) {
  Layout l;
  l.embedding = head.config.embedding_dim;
  l.features = head.config.feature_dim();
  l.raw_aux = head.raw_aux_dim;
  l.affine = head.config.variant == HeadVariant::pitch_histogram && head.config.use_layer_norm;
  l.projection = head.config.variant == HeadVariant::spectrum;
  return l;
}

void check_pooled(const Layout& l, const PooledFeatures& x) {
  const std::size_t expect_fixed = l.projection ? l.embedding : l.features;
  if (x.fixed.size() != expect_fixed) {
    throw DimensionError("pooled feature length " + std::to_string(x.fixed.size()) + " does not match head (" +
                         std::to_string(expect_fixed) + ")");
  }
  if (x.raw_aux.size() != (l.projection ? l.raw_aux : 0)) {
    throw DimensionError("spectral input width " + std::to_string(x.raw_aux.size()) + " does not match head (" +
                         std::to_string(l.raw_aux) + ")");
  }
}

// Output-layer input for flat parameters `p`.
std::vector<double> assemble_with(const Layout& l, std::span<const double> p, const PooledFeatures& x) {
  check_pooled(l, x);
  if (l.projection) {
    std::vector<double> v(l.features);
    std::copy(x.fixed.begin(), x.fixed.end(), v.begin());
    const std::size_t aux = l.features - l.embedding;
    const double* proj = p.data() + l.projection_at();
    for (std::size_t i = 0; i < aux; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < l.raw_aux; ++j) acc += proj[i * l.raw_aux + j] * x.raw_aux[j];
      v[l.embedding + i] = acc;
    }
    return v;
  }
  if (l.affine) {
    std::vector<double> v(l.features);
    for (std::size_t i = 0; i < l.features; ++i) {
      v[i] = p[l.scale_at() + i] * x.fixed[i] + p[l.offset_at() + i];
    }
    return v;
  }
  return x.fixed;
}

double dot_plus_bias(const Layout& l, std::span<const double> p, std::span<const double> v) {
  double acc = 0.0;
  for (std::size_t i = 0; i < l.features; ++i) acc += p[i] * v[i];
  return acc + p[l.bias_at()];
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<double> pool_rows(const FeatureSequence& seq, std::size_t frames) {
  std::vector<double> acc(seq.dims(), 0.0);
  for (std::size_t n = 0; n < frames; ++n) {
    const auto row = seq.row(n);
    for (std::size_t d = 0; d < seq.dims(); ++d) acc[d] += row[d];
  }
  for (double& a : acc) a /= static_cast<double>(frames);
  return acc;
}

}  // namespace

std::string_view to_string(HeadVariant variant) {
  switch (variant) {
    case HeadVariant::plain: return "plain";
    case HeadVariant::compressed_pitch: return "compressed_pitch";
    case HeadVariant::pitch_histogram: return "pitch_histogram";
    case HeadVariant::spectrum: return "spectrum";
  }
  return "unknown";
}

HeadVariant parse_head_variant(std::string_view name) {
  for (auto v : {HeadVariant::plain, HeadVariant::compressed_pitch, HeadVariant::pitch_histogram,
                 HeadVariant::spectrum}) {
    if (to_string(v) == name) return v;
  }
  throw InvalidArgument("unknown head variant '" + std::string(name) + "'");
}

HeadConfig make_head_config(HeadVariant variant, std::size_t embedding_dim, std::uint64_t seed,
                            std::size_t projection_width) {
  HeadConfig c;
  c.variant = variant;
  c.embedding_dim = embedding_dim;
  c.seed = seed;
  switch (variant) {
    case HeadVariant::plain: c.aux_dim = 0; break;
    case HeadVariant::compressed_pitch: c.aux_dim = kCompressedPitchChannels; break;
    case HeadVariant::pitch_histogram: c.aux_dim = kHistogramBins; break;
    case HeadVariant::spectrum: c.aux_dim = projection_width; break;
  }
  validate(c);
  return c;
}

void validate(const HeadConfig& c) {
  if (c.embedding_dim == 0) throw InvalidArgument("embedding_dim must be positive");
  switch (c.variant) {
    case HeadVariant::plain:
      if (c.aux_dim != 0) throw InvalidArgument("plain head takes no auxiliary input");
      break;
    case HeadVariant::compressed_pitch:
      if (c.aux_dim != kCompressedPitchChannels) throw InvalidArgument("compressed_pitch head needs aux_dim 2");
      break;
    case HeadVariant::pitch_histogram:
      if (c.aux_dim != kHistogramBins) throw InvalidArgument("pitch_histogram head needs aux_dim 120");
      break;
    case HeadVariant::spectrum:
      if (c.aux_dim == 0) throw InvalidArgument("spectrum head needs a positive projection width");
      break;
  }
}

void validate(const PredictorHead& head) {
  validate(head.config);
  const Layout l = layout_of(head);
  if (head.weights.size() != l.features) throw DimensionError("head weight length does not match config");
  if (l.projection) {
    if (head.raw_aux_dim == 0) throw DimensionError("spectrum head needs raw_aux_dim");
    if (head.projection.size() != head.config.aux_dim * head.raw_aux_dim) {
      throw DimensionError("projection size does not match aux_dim x raw_aux_dim");
    }
  } else if (!head.projection.empty() || head.raw_aux_dim != 0) {
    throw DimensionError("only spectrum heads carry a projection");
  }
  if (l.affine) {
    if (head.norm_scale.size() != l.features || head.norm_offset.size() != l.features) {
      throw DimensionError("layer-norm affine size does not match feature dim");
    }
  } else if (!head.norm_scale.empty() || !head.norm_offset.empty()) {
    throw DimensionError("only layer-normalized pitch_histogram heads carry affine parameters");
  }
}

PredictorHead init_head(const HeadConfig& config, std::size_t raw_aux_dim, double projection_std) {
  validate(config);
  PredictorHead head;
  head.config = config;
  head.weights.assign(config.feature_dim(), 0.0f);
  if (config.variant == HeadVariant::spectrum) {
    if (raw_aux_dim == 0) throw InvalidArgument("spectrum head needs the spectral input width");
    head.raw_aux_dim = raw_aux_dim;
    head.projection.resize(config.aux_dim * raw_aux_dim);
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> normal(0.0, projection_std > 0.0 ? projection_std : 1.0);
    for (float& w : head.projection) w = static_cast<float>(normal(rng));
  }
  if (config.variant == HeadVariant::pitch_histogram && config.use_layer_norm) {
    head.norm_scale.assign(config.feature_dim(), 1.0f);
    head.norm_offset.assign(config.feature_dim(), 0.0f);
  }
  return head;
}

std::size_t parameter_count(const PredictorHead& head) { return layout_of(head).total(); }

std::vector<double> flatten_parameters(const PredictorHead& head) {
  validate(head);
  std::vector<double> p;
  p.reserve(parameter_count(head));
  p.insert(p.end(), head.weights.begin(), head.weights.end());
  p.push_back(head.bias);
  p.insert(p.end(), head.norm_scale.begin(), head.norm_scale.end());
  p.insert(p.end(), head.norm_offset.begin(), head.norm_offset.end());
  p.insert(p.end(), head.projection.begin(), head.projection.end());
  return p;
}

void assign_parameters(PredictorHead& head, std::span<const double> params) {
  const Layout l = layout_of(head);
  if (params.size() != l.total()) throw DimensionError("parameter vector length does not match head");
  auto take = [&](std::size_t at, std::vector<float>& dst) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<float>(params[at + i]);
  };
  take(0, head.weights);
  head.bias = static_cast<float>(params[l.bias_at()]);
  if (l.affine) {
    take(l.scale_at(), head.norm_scale);
    take(l.offset_at(), head.norm_offset);
  }
  if (l.projection) take(l.projection_at(), head.projection);
}

std::vector<double> mean_pool(const FeatureSequence& seq) { return pool_rows(seq, seq.frames()); }

std::vector<double> layer_normalize(std::span<const double> v) {
  if (v.size() < 2) throw InvalidArgument("layer_normalize needs at least 2 dimensions");
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= n;
  const double inv = 1.0 / std::sqrt(var + kLayerNormEpsilon);
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - mean) * inv;
  return out;
}

std::vector<double> layer_normalize(std::span<const double> v, std::span<const float> scale,
                                    std::span<const float> offset) {
  if (scale.size() != v.size() || offset.size() != v.size()) throw DimensionError("affine size mismatch");
  auto out = layer_normalize(v);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale[i] * out[i] + offset[i];
  return out;
}

AlignedPair align_frames(const FeatureSequence& embedding, const FeatureSequence& aux) {
  const double a = embedding.frame_shift();
  const double b = aux.frame_shift();
  if (std::abs(a - b) > 0.01 * std::max(a, b)) {
    throw InvalidArgument("frame shifts differ by more than 1% (" + std::to_string(a) + " vs " +
                          std::to_string(b) + ")");
  }
  const std::size_t n = std::min(embedding.frames(), aux.frames());
  const std::size_t diff = std::max(embedding.frames(), aux.frames()) - n;
  if (diff > 2) {
    throw DimensionError("frame counts differ by " + std::to_string(diff) + " (" +
                         std::to_string(embedding.frames()) + " vs " + std::to_string(aux.frames()) + ")");
  }
  if (diff == 0) return {embedding, aux};
  return {embedding.truncated(n), aux.truncated(n)};
}

PooledFeatures pool_inputs(const HeadConfig& config, const UtteranceInputs& inputs) {
  validate(config);
  if (!inputs.embedding) throw InvalidArgument("missing embedding input");
  const FeatureSequence& emb = *inputs.embedding;
  if (emb.kind() != FeatureKind::embedding) throw InvalidArgument("embedding input has the wrong kind");
  if (emb.dims() != config.embedding_dim) {
    throw DimensionError("embedding width " + std::to_string(emb.dims()) + " does not match head (" +
                         std::to_string(config.embedding_dim) + ")");
  }

  PooledFeatures out;
  switch (config.variant) {
    case HeadVariant::plain:
      out.fixed = mean_pool(emb);
      break;
    case HeadVariant::compressed_pitch: {
      if (!inputs.pitch) throw InvalidArgument("missing auxiliary input: pitch track");
      const auto aligned = align_frames(emb, to_features(*inputs.pitch));
      const std::size_t frames = aligned.embedding.frames();
      out.fixed = pool_rows(aligned.embedding, frames);
      double channel = 0.0;
      double voiced = 0.0;
      for (std::size_t n = 0; n < frames; ++n) {
        if (aligned.aux.at(n, 1) > 0.5f) {
          channel += fold_to_octave(hz_to_cent(aligned.aux.at(n, 0))) / static_cast<double>(kHistogramBins);
          voiced += 1.0;
        }
      }
      out.fixed.push_back(channel / static_cast<double>(frames));
      out.fixed.push_back(voiced / static_cast<double>(frames));
      break;
    }
    case HeadVariant::pitch_histogram: {
      if (!inputs.pitch) throw InvalidArgument("missing auxiliary input: pitch track");
      const auto hist = compute_histogram(*inputs.pitch, config.histogram_norm);
      std::vector<double> joined = mean_pool(emb);
      joined.insert(joined.end(), hist.bins.begin(), hist.bins.end());
      out.fixed = config.use_layer_norm ? layer_normalize(joined) : std::move(joined);
      break;
    }
    case HeadVariant::spectrum: {
      if (!inputs.spectral) throw InvalidArgument("missing auxiliary input: spectral features");
      if (inputs.spectral->kind() != FeatureKind::spectral) {
        throw InvalidArgument("spectral input has the wrong kind");
      }
      const auto aligned = align_frames(emb, *inputs.spectral);
      out.fixed = mean_pool(aligned.embedding);
      out.raw_aux = mean_pool(aligned.aux);
      break;
    }
  }
  return out;
}

std::vector<double> assemble(const PredictorHead& head, const PooledFeatures& pooled) {
  return assemble_with(layout_of(head), flatten_parameters(head), pooled);
}

std::vector<double> assemble_features(const PredictorHead& head, const UtteranceInputs& inputs) {
  return assemble(head, pool_inputs(head.config, inputs));
}

double forward(const PredictorHead& head, std::span<const double> features) {
  if (features.size() != head.weights.size()) {
    throw DimensionError("feature vector length " + std::to_string(features.size()) + " does not match head (" +
                         std::to_string(head.weights.size()) + ")");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) acc += static_cast<double>(head.weights[i]) * features[i];
  return acc + static_cast<double>(head.bias);
}

double predict(const PredictorHead& head, const PooledFeatures& pooled) {
  return forward(head, assemble(head, pooled));
}

HeadObjective::HeadObjective(PredictorHead shape, const std::vector<LabeledExample>& train,
                             const std::vector<LabeledExample>& validation)
    : shape_(std::move(shape)), train_(train), validation_(validation) {
  validate(shape_);
}

std::size_t HeadObjective::num_params() const { return parameter_count(shape_); }

double HeadObjective::predict_with(std::span<const double> params, const PooledFeatures& x) const {
  const Layout l = layout_of(shape_);
  const auto v = assemble_with(l, params, x);
  return dot_plus_bias(l, params, v);
}

double HeadObjective::predict_train(std::span<const double> params, std::size_t i) const {
  return predict_with(params, train_[i].features);
}

void HeadObjective::accumulate_gradient(std::span<const double> params, std::size_t i, double coeff,
                                        std::span<double> grad) const {
  const Layout l = layout_of(shape_);
  const PooledFeatures& x = train_[i].features;
  const auto v = assemble_with(l, params, x);
  for (std::size_t k = 0; k < l.features; ++k) grad[k] += coeff * v[k];
  grad[l.bias_at()] += coeff;
  if (l.affine) {
    for (std::size_t k = 0; k < l.features; ++k) {
      grad[l.scale_at() + k] += coeff * params[k] * x.fixed[k];
      grad[l.offset_at() + k] += coeff * params[k];
    }
  }
  if (l.projection) {
    const std::size_t aux = l.features - l.embedding;
    double* g = grad.data() + l.projection_at();
    for (std::size_t r = 0; r < aux; ++r) {
      const double w = coeff * params[l.embedding + r];
      if (w == 0.0) continue;
      for (std::size_t j = 0; j < l.raw_aux; ++j) g[r * l.raw_aux + j] += w * x.raw_aux[j];
    }
  }
}

std::vector<double> HeadObjective::predict_validation(std::span<const double> params) const {
  std::vector<double> out;
  out.reserve(validation_.size());
  for (const auto& ex : validation_) out.push_back(predict_with(params, ex.features));
  return out;
}

ValidationTargets validation_targets(const std::vector<LabeledExample>& validation) {
  ValidationTargets t;
  for (const auto& ex : validation) {
    t.labels.push_back(ex.label);
    t.system_ids.push_back(ex.system_id);
  }
  return t;
}

void require_ranking_set(const std::vector<LabeledExample>& validation) {
  if (validation.empty()) throw InvalidArgument("validation set is empty");
  std::set<std::string> systems;
  for (const auto& ex : validation) systems.insert(ex.system_id);
  if (systems.size() < 2) {
    throw InvalidArgument("validation set needs at least 2 systems for system-level SRCC");
  }
}

HeadTrainingResult train_head(const HeadConfig& config, const std::vector<LabeledExample>& train,
                              const std::vector<LabeledExample>& validation, const TrainConfig& cfg) {
  validate(config);
  validate(cfg);
  if (train.empty()) throw InvalidArgument("training set is empty");
  require_ranking_set(validation);

  std::size_t raw_aux_dim = 0;
  double projection_std = 0.0;
  if (config.variant == HeadVariant::spectrum) {
    raw_aux_dim = train.front().features.raw_aux.size();
    double sum_sq = 0.0;
    for (const auto& ex : train) {
      for (double s : ex.features.raw_aux) sum_sq += s * s;
    }
    const double rms = std::sqrt(sum_sq / static_cast<double>(train.size() * std::max<std::size_t>(raw_aux_dim, 1)));
    projection_std = 1.0 / (std::sqrt(static_cast<double>(std::max<std::size_t>(raw_aux_dim, 1))) *
                            (rms > 0.0 ? rms : 1.0));
  }

  PredictorHead head = init_head(config, raw_aux_dim, projection_std);
  std::vector<double> labels;
  labels.reserve(train.size());
  for (const auto& ex : train) labels.push_back(ex.label);
  head.bias = static_cast<float>(median(labels));

  const HeadObjective objective(head, train, validation);
  // Surface shape errors before the first epoch.
  for (const auto& ex : train) check_pooled(layout_of(head), ex.features);
  for (const auto& ex : validation) check_pooled(layout_of(head), ex.features);

  auto fit = fit_l1_sgd(objective, flatten_parameters(head), validation_targets(validation), cfg);
  assign_parameters(head, fit.params);
  return {std::move(head), std::move(fit.log)};
}

}  // namespace sqa
