#pragma once

#include <iosfwd>
#include <vector>

namespace facelm::nn {

struct EpochRecord {
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double test_loss = 0.0;
  double test_accuracy = 0.0;
  double learning_rate = 0.0;
};

struct TrainingHistory {
  std::vector<EpochRecord> epochs;

  std::size_t size() const { return epochs.size(); }
  bool empty() const { return epochs.empty(); }
};

/// CSV `epoch,train_loss,train_acc,test_loss,test_acc,lr`, epochs from 1.
void write_history_csv(const TrainingHistory& history, std::ostream& out);

/// Epoch-wise mean of equally long histories (e.g. across CV folds).
TrainingHistory mean_history(const std::vector<TrainingHistory>& histories);

}  // namespace facelm::nn
