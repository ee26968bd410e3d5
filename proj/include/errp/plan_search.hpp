#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "errp/features.hpp"
#include "errp/pipeline.hpp"

namespace errp {

struct PlanSearchConfig {
  std::size_t folds{5};
  std::uint64_t seed{0};
};

struct PlanSearchEntry {
  std::size_t plan_index{0};
  WindowPlan plan;
  double mean_bacc{0.0};
  std::vector<double> fold_bacc;
  bool failed{false};
  std::string error;
};

// Cross-validates each candidate plan with folds drawn over whole episodes
// (stratified by label), so overlapping windows of one episode never straddle
// train and validation. Every fold trains the full pipeline (xDAWN, normalizer,
// C grid search) on the training episodes' plan windows and scores the
// evaluation-region windows of the validation episodes; the fold metric is
// their pooled bACC. Candidates that throw are reported as failed.
// Result: successful plans by mean bACC descending (ties: fewer windows, then
// list order), followed by the failed plans in list order.
std::vector<PlanSearchEntry> search_window_plans(std::span<const LabeledRecording> datasets,
                                                 std::span<const WindowPlan> plans,
                                                 const PipelineConfig& config,
                                                 const PlanSearchConfig& search = {});

}  // namespace errp
