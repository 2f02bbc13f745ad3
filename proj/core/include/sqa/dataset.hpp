#pragma once

#include <string>
#include <vector>

#include "sqa/heads.hpp"
#include "sqa/manifest.hpp"

namespace sqa {

// Reads the feature files a head variant needs for one manifest row.
// Throws with the utterance id in the message when a file is missing.
UtteranceInputs load_inputs(const UtteranceRecord& record, HeadVariant variant);

// Pooled inputs for every row, in manifest order.
std::vector<PooledFeatures> load_pooled(const std::vector<UtteranceRecord>& records, const HeadConfig& config);

// Labeled training view; every row must carry a MOS label.
std::vector<LabeledExample> load_labeled(const std::vector<UtteranceRecord>& records, const HeadConfig& config);

// Labels and system ids of a labeled manifest, in row order.
std::vector<double> manifest_labels(const std::vector<UtteranceRecord>& records);
std::vector<std::string> manifest_systems(const std::vector<UtteranceRecord>& records);

}  // namespace sqa
