#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "fscil/core.hpp"
#include "fscil/prototype.hpp"
#include "fscil/strategy.hpp"

namespace fscil {

struct SessionReport {
    int session = 0;
    double overall_accuracy = 0.0;
    std::optional<double> incremental_accuracy;  // absent when no incremental-class test samples
    std::size_t n_test = 0;
    std::size_t n_test_incremental = 0;
    std::size_t n_correct = 0;
    std::size_t n_correct_incremental = 0;
    /// ‖w_c(after inference) − w_c(before inference)‖ for every class in the bank.
    std::map<ClassId, double> drift;

    bool operator==(const SessionReport&) const = default;
};

struct ProtocolReport {
    std::vector<SessionReport> sessions;
    StrategyConfig strategy;
    std::uint64_t dataset_fingerprint = 0;
    std::uint64_t seed = 0;
    std::uint64_t final_bank_fingerprint = 0;

    bool operator==(const ProtocolReport&) const = default;
};

/// Called once per session after inference, with the bank before and after
/// the strategy's updates.
using SessionObserver =
    std::function<void(int session, const PrototypeBank& before, const PrototypeBank& after,
                       const SessionInference& inference)>;

struct ProtocolOptions {
    std::uint64_t seed = 0;  // echoed into the report
    /// Per-session class visiting order for the update loop; empty = ascending.
    std::function<std::vector<ClassId>(int session, const PrototypeBank&)> class_order;
    SessionObserver observer;
};

struct ProtocolRun {
    ProtocolReport report;
    PrototypeBank final_bank;
};

/// Runs all T+1 sessions: extend the bank with the new classes' prototypes,
/// infer the session's test set with the strategy, score against the labels.
/// Throws ValidationError when the dataset is invalid.
ProtocolRun run_protocol(const SessionDataset& dataset, const StrategyConfig& strategy,
                         const ProtocolOptions& options = {});

/// Fraction of exact matches. Throws std::invalid_argument when empty
/// ("no test samples") or lengths differ.
double overall_accuracy(std::span<const ClassId> predictions, std::span<const ClassId> labels);

/// Accuracy over samples whose true label is an incremental class.
std::optional<double> incremental_accuracy(std::span<const ClassId> predictions, std::span<const ClassId> labels,
                                           int base_class_count);

/// Mean of the defined incremental accuracies over sessions t >= 1.
std::optional<double> mean_incremental_accuracy(const ProtocolReport& report);

}  // namespace fscil
