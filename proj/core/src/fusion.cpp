#include "sqa/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "sqa/error.hpp"

namespace sqa {
namespace {

class CombinerObjective final : public L1Objective {
 public:
  CombinerObjective(const MemberScores& train, const MemberScores& validation, std::size_t k)
      : train_(train), validation_(validation), k_(k) {}

  std::size_t num_params() const override { return k_ + 1; }
  std::size_t num_train() const override { return train_.scores.size(); }
  double train_label(std::size_t i) const override { return train_.labels[i]; }
  double predict_train(std::span<const double> p, std::size_t i) const override {
    return combine(p, train_.scores[i]);
  }
  void accumulate_gradient(std::span<const double>, std::size_t i, double coeff,
                           std::span<double> grad) const override {
    const auto& s = train_.scores[i];
    for (std::size_t j = 0; j < k_; ++j) grad[j] += coeff * s[j];
    grad[k_] += coeff;
  }
  std::vector<double> predict_validation(std::span<const double> p) const override {
    std::vector<double> out;
    out.reserve(validation_.scores.size());
    for (const auto& s : validation_.scores) out.push_back(combine(p, s));
    return out;
  }

 private:
  double combine(std::span<const double> p, const std::vector<double>& s) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < k_; ++j) acc += p[j] * s[j];
    return acc + p[k_];
  }

  const MemberScores& train_;
  const MemberScores& validation_;
  std::size_t k_;
};

void check_scores(const MemberScores& set, std::size_t k, const char* name) {
  if (set.scores.empty()) throw InvalidArgument(std::string(name) + " set is empty");
  if (set.labels.size() != set.scores.size() || set.system_ids.size() != set.scores.size()) {
    throw DimensionError(std::string(name) + " set: scores, labels and system ids differ in length");
  }
  for (const auto& s : set.scores) {
    if (s.size() != k) throw DimensionError(std::string(name) + " set: member score count does not match k");
  }
}

}  // namespace

void validate(const FusionModel& model) {
  const std::size_t k = model.member_ids.size();
  if (k == 0) throw InvalidArgument("fusion model needs at least one member");
  if (model.combiner_weights.size() != k) throw DimensionError("combiner weight count does not match members");
  if (model.member_digests.size() != k) throw DimensionError("member digest count does not match members");
  std::set<std::string> unique(model.member_ids.begin(), model.member_ids.end());
  if (unique.size() != k) throw InvalidArgument("fusion member ids must be unique");
}

std::vector<std::string> rank_predictors(std::span<const PredictorReport> reports, std::size_t k) {
  if (k == 0) throw InvalidArgument("k must be positive");
  if (k > reports.size()) {
    throw InvalidArgument("cannot select " + std::to_string(k) + " predictors from " +
                          std::to_string(reports.size()));
  }
  std::vector<const PredictorReport*> order;
  order.reserve(reports.size());
  for (const auto& r : reports) order.push_back(&r);
  auto key_srcc = [](const PredictorReport* r) {
    const double v = r->second.system.srcc;
    return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
  };
  auto key_mse = [](const PredictorReport* r) {
    const double v = r->second.system.mse;
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };
  std::sort(order.begin(), order.end(), [&](const PredictorReport* a, const PredictorReport* b) {
    if (key_srcc(a) != key_srcc(b)) return key_srcc(a) > key_srcc(b);
    if (key_mse(a) != key_mse(b)) return key_mse(a) < key_mse(b);
    return a->first < b->first;
  });
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < k; ++i) ids.push_back(order[i]->first);
  return ids;
}

double fuse_forward(std::span<const double> member_scores, const FusionModel& model) {
  if (member_scores.size() != model.combiner_weights.size()) {
    throw DimensionError("expected " + std::to_string(model.combiner_weights.size()) + " member scores, got " +
                         std::to_string(member_scores.size()));
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < member_scores.size(); ++j) {
    acc += static_cast<double>(model.combiner_weights[j]) * member_scores[j];
  }
  return acc + static_cast<double>(model.combiner_bias);
}

FusionTrainingResult train_combiner(std::vector<std::string> member_ids, const MemberScores& train,
                                    const MemberScores& validation, const TrainConfig& cfg) {
  const std::size_t k = member_ids.size();
  if (k == 0) throw InvalidArgument("fusion needs at least one member");
  check_scores(train, k, "training");
  check_scores(validation, k, "validation");

  const CombinerObjective objective(train, validation, k);
  std::vector<double> init(k + 1, 1.0 / static_cast<double>(k));
  init[k] = 0.0;
  auto fit = fit_l1_sgd(objective, std::move(init), {validation.labels, validation.system_ids}, cfg);

  FusionTrainingResult result;
  result.model.member_ids = std::move(member_ids);
  result.model.member_digests.assign(k, std::string{});
  for (std::size_t j = 0; j < k; ++j) result.model.combiner_weights.push_back(static_cast<float>(fit.params[j]));
  result.model.combiner_bias = static_cast<float>(fit.params[k]);
  result.log = std::move(fit.log);
  validate(result.model);
  return result;
}

}  // namespace sqa
