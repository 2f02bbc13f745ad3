#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sqa/metrics.hpp"
#include "sqa/sgd.hpp"

namespace sqa {

inline constexpr std::size_t kDefaultFusionMembers = 5;

// Linear combiner over the scores of k frozen predictors. Weights are
// positional: weight j applies to member_ids[j].
struct FusionModel {
  std::vector<std::string> member_ids;
  std::vector<std::string> member_digests;  // one per member, may be empty strings
  std::vector<float> combiner_weights;
  float combiner_bias = 0.0f;

  friend bool operator==(const FusionModel&, const FusionModel&) = default;
};

void validate(const FusionModel& model);

using PredictorReport = std::pair<std::string, MetricReport>;

// Top-k ids by system-level SRCC (descending), then lower system MSE, then id.
// Degenerate SRCC sorts last.
std::vector<std::string> rank_predictors(std::span<const PredictorReport> reports, std::size_t k);

double fuse_forward(std::span<const double> member_scores, const FusionModel& model);

// Member predictions materialized per utterance (scores[i] has one entry per
// member, in member order).
struct MemberScores {
  std::vector<std::vector<double>> scores;
  std::vector<double> labels;
  std::vector<std::string> system_ids;
};

struct FusionTrainingResult {
  FusionModel model;
  TrainingLog log;
};

// SGD on the L1 loss of the fused score, starting from uniform weights 1/k and
// bias 0, with the same checkpoint rule as head training.
FusionTrainingResult train_combiner(std::vector<std::string> member_ids, const MemberScores& train,
                                    const MemberScores& validation, const TrainConfig& cfg);

}  // namespace sqa
