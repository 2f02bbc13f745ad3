#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "sqa/heads.hpp"
#include "sqa/sgd.hpp"

namespace sqa {

inline constexpr double kDefaultAlpha = 4.0;
inline constexpr double kDefaultBeta = 2.0;

// Addition and subtraction branches that run in parallel with a head's output
// layer. Both read the head's assembled feature vector.
struct BiasBranch {
  double alpha = kDefaultAlpha;
  double beta = kDefaultBeta;
  std::vector<float> add_weights;
  float add_bias = 0.0f;
  std::vector<float> sub_weights;
  float sub_bias = 0.0f;

  friend bool operator==(const BiasBranch&, const BiasBranch&) = default;
};

// Throws InvalidArgument unless 1 < beta < alpha < 5.
void validate_thresholds(double alpha, double beta);

BiasBranch zero_branch(std::size_t feature_dim, double alpha = kDefaultAlpha, double beta = kDefaultBeta);

// y + b_a above alpha, y - b_s below beta, y otherwise (equality included).
double apply_bias(double y_hat, double b_add, double b_sub, double alpha, double beta);

double forward_corrected(const PredictorHead& head, const BiasBranch& branch, std::span<const double> features);

struct BiasTrainingResult {
  BiasBranch branch;
  TrainingLog log;
  // No training example reached either outer branch; the branch is zero.
  bool inactive = false;
};

// Trains only the branch parameters against the L1 loss of the corrected
// score; the head is read-only. Each example updates only the branch its
// frozen prediction activates.
BiasTrainingResult train_bias_branch(const PredictorHead& head, const std::vector<LabeledExample>& train,
                                     const std::vector<LabeledExample>& validation, double alpha, double beta,
                                     const TrainConfig& cfg);

inline constexpr std::size_t kSegments = 16;
inline constexpr double kSegmentWidth = 0.25;

struct SegmentStat {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  std::optional<double> mse;  // absent for empty segments
};

// Sixteen label segments [1 + 0.25(k-1), 1 + 0.25k); the last includes 5.
std::array<SegmentStat, kSegments> segment_mse(std::span<const double> predictions, std::span<const double> labels);

// "segment_lo,segment_hi,count,mse" (empty mse cell for absent segments).
std::string segment_mse_csv(const std::array<SegmentStat, kSegments>& segments);

}  // namespace sqa
