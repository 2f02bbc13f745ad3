#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sqa {

// Optimizer settings. Defaults: lr 1e-4, batch 4, up to 1000 epochs, early
// stop after 15 epochs without a better validation checkpoint.
struct TrainConfig {
  double learning_rate = 1e-4;
  int batch_size = 4;
  int max_epochs = 1000;
  int early_stop_patience = 15;
  std::uint64_t seed = 0;
};

void validate(const TrainConfig& cfg);

struct EpochRecord {
  int epoch = 0;
  double train_l1 = 0.0;
  double val_srcc_system = 0.0;  // NaN when the system ranking is degenerate
  double val_l1 = 0.0;
};

struct TrainingLog {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  bool stopped_early = false;

  [[nodiscard]] const EpochRecord& best() const;
};

// "epoch,train_l1,val_srcc_system" with shortest round-trip decimals.
std::string training_log_csv(const TrainingLog& log);

// A scalar regressor over a flat parameter vector, trained under L1 loss.
//
// Implementations expose predictions and the gradient of each prediction with
// respect to the parameters; the optimizer owns loss, batching and
// checkpointing.
class L1Objective {
 public:
  virtual ~L1Objective() = default;

  [[nodiscard]] virtual std::size_t num_params() const = 0;
  [[nodiscard]] virtual std::size_t num_train() const = 0;
  [[nodiscard]] virtual double train_label(std::size_t i) const = 0;
  [[nodiscard]] virtual double predict_train(std::span<const double> params, std::size_t i) const = 0;
  // grad += coeff * d(prediction_i)/d(params)
  virtual void accumulate_gradient(std::span<const double> params, std::size_t i, double coeff,
                                   std::span<double> grad) const = 0;
  [[nodiscard]] virtual std::vector<double> predict_validation(std::span<const double> params) const = 0;
};

struct ValidationTargets {
  std::vector<double> labels;
  std::vector<std::string> system_ids;
};

struct FitResult {
  std::vector<double> params;
  TrainingLog log;
};

// Mean |prediction - label| over the listed training examples.
double l1_loss(const L1Objective& objective, std::span<const double> params,
               std::span<const std::size_t> indices);

// Subgradient of l1_loss: mean of sign(residual) * d(prediction)/d(params),
// with sign(0) = 0.
std::vector<double> l1_gradient(const L1Objective& objective, std::span<const double> params,
                                std::span<const std::size_t> indices);

// Parameters are stored in single precision; every update is rounded.
void round_to_float(std::span<double> params);

// System-level SRCC of validation predictions (NaN when degenerate).
double system_srcc(std::span<const double> pred, const ValidationTargets& targets);

// Mini-batch SGD on mean L1 loss with validation checkpointing.
//
// After every epoch the validation set is scored; a checkpoint is better when
// its system-level SRCC is higher, or equal with a lower validation L1.
// Training stops after `early_stop_patience` epochs without a better
// checkpoint, or at `max_epochs`, and returns the best checkpoint.
// Deterministic for a given seed.
FitResult fit_l1_sgd(const L1Objective& objective, std::vector<double> initial,
                     const ValidationTargets& validation, const TrainConfig& cfg);

}  // namespace sqa
