#include "sqa/sgd.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "sqa/error.hpp"
#include "sqa/metrics.hpp"
#include "sqa/text.hpp"

namespace sqa {
namespace {

double sign(double r) { return r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0); }

// Higher SRCC wins; equal SRCC falls back to lower validation L1. NaN SRCC
// ranks below every number.
bool better(const EpochRecord& a, const EpochRecord& b) {
  const bool a_nan = std::isnan(a.val_srcc_system);
  const bool b_nan = std::isnan(b.val_srcc_system);
  if (a_nan != b_nan) return b_nan;
  if (!a_nan && a.val_srcc_system != b.val_srcc_system) return a.val_srcc_system > b.val_srcc_system;
  return a.val_l1 < b.val_l1;
}

void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace

void validate(const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate)) {
    throw InvalidArgument("learning_rate must be positive");
  }
  if (cfg.batch_size <= 0) throw InvalidArgument("batch_size must be positive");
  if (cfg.max_epochs <= 0) throw InvalidArgument("max_epochs must be positive");
  if (cfg.early_stop_patience <= 0) throw InvalidArgument("early_stop_patience must be positive");
}

const EpochRecord& TrainingLog::best() const {
  for (const auto& e : epochs) {
    if (e.epoch == best_epoch) return e;
  }
  throw Error("training log has no record for the best epoch");
}

std::string training_log_csv(const TrainingLog& log) {
  std::ostringstream out;
  out << "epoch,train_l1,val_srcc_system\n";
  for (const auto& e : log.epochs) {
    out << e.epoch << ',' << format_exact(e.train_l1) << ','
        << (std::isnan(e.val_srcc_system) ? std::string("nan") : format_exact(e.val_srcc_system)) << '\n';
  }
  return out.str();
}

double l1_loss(const L1Objective& objective, std::span<const double> params,
               std::span<const std::size_t> indices) {
  if (indices.empty()) throw InvalidArgument("l1_loss over an empty batch");
  double acc = 0.0;
  for (std::size_t i : indices) acc += std::abs(objective.predict_train(params, i) - objective.train_label(i));
  return acc / static_cast<double>(indices.size());
}

std::vector<double> l1_gradient(const L1Objective& objective, std::span<const double> params,
                                std::span<const std::size_t> indices) {
  if (indices.empty()) throw InvalidArgument("l1_gradient over an empty batch");
  std::vector<double> grad(objective.num_params(), 0.0);
  const double scale = 1.0 / static_cast<double>(indices.size());
  for (std::size_t i : indices) {
    const double s = sign(objective.predict_train(params, i) - objective.train_label(i));
    if (s != 0.0) objective.accumulate_gradient(params, i, s * scale, grad);
  }
  return grad;
}

void round_to_float(std::span<double> params) {
  for (double& p : params) p = static_cast<double>(static_cast<float>(p));
}

double system_srcc(std::span<const double> pred, const ValidationTargets& targets) {
  const auto sys = system_aggregate(pred, targets.labels, targets.system_ids);
  return srcc(sys.mean_pred, sys.mean_label);
}

FitResult fit_l1_sgd(const L1Objective& objective, std::vector<double> initial,
                     const ValidationTargets& validation, const TrainConfig& cfg) {
  validate(cfg);
  const std::size_t n = objective.num_train();
  if (n == 0) throw InvalidArgument("training set is empty");
  if (validation.labels.empty()) throw InvalidArgument("validation set is empty");
  if (validation.labels.size() != validation.system_ids.size()) {
    throw DimensionError("validation labels and system ids differ in length");
  }
  if (initial.size() != objective.num_params()) throw DimensionError("initial parameter count mismatch");

  std::vector<double> params = std::move(initial);
  round_to_float(params);

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  std::vector<std::size_t> order = all;
  std::mt19937_64 rng(cfg.seed);
  const auto batch = static_cast<std::size_t>(cfg.batch_size);

  FitResult result;
  result.params = params;
  EpochRecord best{};
  bool have_best = false;
  int since_improvement = 0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffle(order, rng);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(n, start + batch);
      const auto grad = l1_gradient(objective, params, std::span(order).subspan(start, stop - start));
      for (std::size_t k = 0; k < params.size(); ++k) params[k] -= cfg.learning_rate * grad[k];
      round_to_float(params);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_l1 = l1_loss(objective, params, all);
    const auto val_pred = objective.predict_validation(params);
    if (val_pred.size() != validation.labels.size()) throw DimensionError("validation prediction count mismatch");
    rec.val_srcc_system = system_srcc(val_pred, validation);
    double val_l1 = 0.0;
    for (std::size_t i = 0; i < val_pred.size(); ++i) val_l1 += std::abs(val_pred[i] - validation.labels[i]);
    rec.val_l1 = val_l1 / static_cast<double>(val_pred.size());
    result.log.epochs.push_back(rec);

    if (!have_best || better(rec, best)) {
      best = rec;
      have_best = true;
      result.params = params;
      result.log.best_epoch = epoch;
      since_improvement = 0;
    } else if (++since_improvement >= cfg.early_stop_patience) {
      result.log.stopped_early = true;
      break;
    }
  }
  return result;
}

}  // namespace sqa
