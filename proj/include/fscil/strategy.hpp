#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "fscil/core.hpp"
#include "fscil/prototype.hpp"

namespace fscil {

/// Outcome of exploring one class prototype against a test batch.
struct ExplorationResult {
    ClassId class_id = 0;
    /// R-th highest similarity (minimum similarity when the batch has fewer than
    /// R samples, -inf for an empty batch).
    double alpha = 0.0;
    /// Indices into the explored batch, ascending. Add `offset` for the position
    /// within the full session batch when streaming.
    std::vector<std::size_t> selected;
    std::vector<double> similarities;
    std::size_t offset = 0;

    bool operator==(const ExplorationResult&) const = default;
};

/// Selects test samples whose cosine similarity to `prototype` is among the top
/// R (every sample tied with the R-th value is kept) and strictly above `tau`.
ExplorationResult explore(std::span<const double> prototype, std::span<const FeatureVector> batch, int R,
                          double tau, ClassId class_id = 0);

/// Decayed update degree: beta_base^(t+1) for base classes and
/// beta_inc^(t - floor((c - |C0|)/N)) for incremental ones. Throws
/// std::invalid_argument when `class_id` is not introduced by `session`.
double beta_schedule(ClassId class_id, int session, const StrategyConfig& strategy,
                     const ProtocolConfig& protocol);

/// (1-beta)·w + beta·mean(selected); `w` unchanged when `selected` is empty.
FeatureVector exploit_update(std::span<const double> w, std::span<const FeatureVector> selected, double beta);

struct ClassUpdate {
    double beta = 0.0;
    /// Absent exactly when nothing was selected for the class.
    std::optional<FeatureVector> mean_feature;
};

struct UpdatePlan {
    std::map<ClassId, ClassUpdate> updates;
    std::map<ClassId, ExplorationResult> explorations;
};

/// Computes every class update against the given snapshot. The loop visits
/// classes in `class_order` when provided (it must be a permutation of the
/// bank's ids), ascending id otherwise; the plan does not depend on the order.
UpdatePlan plan_updates(const PrototypeBank& snapshot, std::span<const FeatureVector> batch,
                        const StrategyConfig& strategy, const ProtocolConfig& protocol, int session,
                        std::span<const ClassId> class_order = {});

/// Commits a plan: w_c <- (1-beta_c)·w_c + beta_c·mean_c for every class with a mean.
PrototypeBank apply_plan(PrototypeBank bank, const UpdatePlan& plan);

struct SessionInference {
    std::vector<ClassId> predictions;
    PrototypeBank bank;
    /// One entry per (chunk, class) in chunk order, then ascending class id.
    std::vector<ExplorationResult> explorations;
};

/// Inference for one session: update the bank according to the strategy, then
/// predict every sample with the updated bank. With `strategy.chunk > 0` the
/// batch is processed chunk by chunk, each chunk predicted after its own update.
SessionInference run_session_inference(const PrototypeBank& bank, std::span<const FeatureVector> batch,
                                       const StrategyConfig& strategy, const ProtocolConfig& protocol,
                                       int session, std::span<const ClassId> class_order = {});

}  // namespace fscil
