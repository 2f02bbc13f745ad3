#include "sqa/bias_correction.hpp"

#include <cmath>
#include <sstream>

#include "sqa/error.hpp"
#include "sqa/text.hpp"

namespace sqa {
namespace {

enum class Active { middle, add, sub };

Active active_branch(double y_hat, double alpha, double beta) {
  if (y_hat > alpha) return Active::add;
  if (y_hat < beta) return Active::sub;
  return Active::middle;
}

double affine(std::span<const double> w, double b, std::span<const double> v) {
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) acc += w[i] * v[i];
  return acc + b;
}

// Flat layout: add_weights (F), add_bias, sub_weights (F), sub_bias.
class BranchObjective final : public L1Objective {
 public:
  struct Example {
    std::vector<double> features;
    double y_hat;
    double label;
  };

  BranchObjective(std::vector<Example> train, std::vector<Example> validation, std::size_t dim, double alpha,
                  double beta)
      : train_(std::move(train)), validation_(std::move(validation)), dim_(dim), alpha_(alpha), beta_(beta) {}

  std::size_t num_params() const override { return 2 * (dim_ + 1); }
  std::size_t num_train() const override { return train_.size(); }
  double train_label(std::size_t i) const override { return train_[i].label; }

  double predict_train(std::span<const double> p, std::size_t i) const override { return score(p, train_[i]); }

  void accumulate_gradient(std::span<const double> p, std::size_t i, double coeff,
                           std::span<double> grad) const override {
    const Example& ex = train_[i];
    const Active a = active_branch(ex.y_hat, alpha_, beta_);
    if (a == Active::middle) return;
    const std::size_t at = a == Active::add ? 0 : dim_ + 1;
    const double s = a == Active::add ? coeff : -coeff;
    for (std::size_t k = 0; k < dim_; ++k) grad[at + k] += s * ex.features[k];
    grad[at + dim_] += s;
    (void)p;
  }

  std::vector<double> predict_validation(std::span<const double> p) const override {
    std::vector<double> out;
    out.reserve(validation_.size());
    for (const auto& ex : validation_) out.push_back(score(p, ex));
    return out;
  }

  bool any_active() const {
    for (const auto& ex : train_) {
      if (active_branch(ex.y_hat, alpha_, beta_) != Active::middle) return true;
    }
    return false;
  }

 private:
  double score(std::span<const double> p, const Example& ex) const {
    const double b_add = affine(p.subspan(0, dim_), p[dim_], ex.features);
    const double b_sub = affine(p.subspan(dim_ + 1, dim_), p[2 * dim_ + 1], ex.features);
    return apply_bias(ex.y_hat, b_add, b_sub, alpha_, beta_);
  }

  std::vector<Example> train_;
  std::vector<Example> validation_;
  std::size_t dim_;
  double alpha_;
  double beta_;
};

std::vector<BranchObjective::Example> frozen_examples(const PredictorHead& head,
                                                      const std::vector<LabeledExample>& set) {
  std::vector<BranchObjective::Example> out;
  out.reserve(set.size());
  for (const auto& ex : set) {
    auto v = assemble(head, ex.features);
    const double y_hat = forward(head, v);
    out.push_back({std::move(v), y_hat, ex.label});
  }
  return out;
}

}  // namespace

void validate_thresholds(double alpha, double beta) {
  if (!(1.0 < beta && beta < alpha && alpha < 5.0)) {
    throw InvalidArgument("thresholds must satisfy 1 < beta < alpha < 5 (alpha " + format_exact(alpha) +
                          ", beta " + format_exact(beta) + ")");
  }
}

BiasBranch zero_branch(std::size_t feature_dim, double alpha, double beta) {
  validate_thresholds(alpha, beta);
  BiasBranch b;
  b.alpha = alpha;
  b.beta = beta;
  b.add_weights.assign(feature_dim, 0.0f);
  b.sub_weights.assign(feature_dim, 0.0f);
  return b;
}

double apply_bias(double y_hat, double b_add, double b_sub, double alpha, double beta) {
  validate_thresholds(alpha, beta);
  switch (active_branch(y_hat, alpha, beta)) {
    case Active::add: return y_hat + b_add;
    case Active::sub: return y_hat - b_sub;
    case Active::middle: break;
  }
  return y_hat;
}

double forward_corrected(const PredictorHead& head, const BiasBranch& branch, std::span<const double> features) {
  if (branch.add_weights.size() != features.size() || branch.sub_weights.size() != features.size()) {
    throw DimensionError("bias branch width does not match the feature vector");
  }
  const double y_hat = forward(head, features);
  double b_add = 0.0;
  double b_sub = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    b_add += static_cast<double>(branch.add_weights[i]) * features[i];
    b_sub += static_cast<double>(branch.sub_weights[i]) * features[i];
  }
  return apply_bias(y_hat, b_add + branch.add_bias, b_sub + branch.sub_bias, branch.alpha, branch.beta);
}

BiasTrainingResult train_bias_branch(const PredictorHead& head, const std::vector<LabeledExample>& train,
                                     const std::vector<LabeledExample>& validation, double alpha, double beta,
                                     const TrainConfig& cfg) {
  validate_thresholds(alpha, beta);
  validate(cfg);
  validate(head);
  if (train.empty()) throw InvalidArgument("training set is empty");
  require_ranking_set(validation);

  const std::size_t dim = head.config.feature_dim();
  const BranchObjective objective(frozen_examples(head, train), frozen_examples(head, validation), dim, alpha,
                                  beta);
  BiasTrainingResult result;
  result.branch = zero_branch(dim, alpha, beta);
  if (!objective.any_active()) {
    result.inactive = true;
    return result;
  }

  auto fit = fit_l1_sgd(objective, std::vector<double>(objective.num_params(), 0.0), validation_targets(validation),
                        cfg);
  const auto& p = fit.params;
  for (std::size_t k = 0; k < dim; ++k) {
    result.branch.add_weights[k] = static_cast<float>(p[k]);
    result.branch.sub_weights[k] = static_cast<float>(p[dim + 1 + k]);
  }
  result.branch.add_bias = static_cast<float>(p[dim]);
  result.branch.sub_bias = static_cast<float>(p[2 * dim + 1]);
  result.log = std::move(fit.log);
  return result;
}

std::array<SegmentStat, kSegments> segment_mse(std::span<const double> predictions, std::span<const double> labels) {
  if (predictions.size() != labels.size()) throw DimensionError("predictions and labels differ in length");
  std::array<SegmentStat, kSegments> segs;
  std::array<double, kSegments> sq{};
  for (std::size_t k = 0; k < kSegments; ++k) {
    segs[k].lo = 1.0 + kSegmentWidth * static_cast<double>(k);
    segs[k].hi = segs[k].lo + kSegmentWidth;
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double y = labels[i];
    if (!(y >= 1.0 && y <= 5.0)) throw InvalidArgument("label " + format_exact(y) + " outside [1, 5]");
    auto k = static_cast<std::size_t>(std::floor((y - 1.0) / kSegmentWidth));
    if (k >= kSegments) k = kSegments - 1;
    const double d = predictions[i] - y;
    sq[k] += d * d;
    ++segs[k].count;
  }
  for (std::size_t k = 0; k < kSegments; ++k) {
    if (segs[k].count > 0) segs[k].mse = sq[k] / static_cast<double>(segs[k].count);
  }
  return segs;
}

std::string segment_mse_csv(const std::array<SegmentStat, kSegments>& segments) {
  std::ostringstream out;
  out << "segment_lo,segment_hi,count,mse\n";
  for (const auto& s : segments) {
    out << format_exact(s.lo) << ',' << format_exact(s.hi) << ',' << s.count << ','
        << (s.mse ? format_exact(*s.mse) : std::string{}) << '\n';
  }
  return out.str();
}

}  // namespace sqa
