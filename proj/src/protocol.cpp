#include "fscil/protocol.hpp"

#include <cmath>
#include <stdexcept>

namespace fscil {

namespace {

void require_same_length(std::span<const ClassId> predictions, std::span<const ClassId> labels) {
    if (predictions.size() != labels.size()) {
        throw std::invalid_argument("predictions and labels differ in length");
    }
}

void extend_bank(PrototypeBank& bank, const SessionDataset& dataset, int session) {
    const auto& cfg = dataset.config;
    std::map<ClassId, std::vector<FeatureVector>> by_class;
    for (const auto& s : dataset.train[static_cast<std::size_t>(session)]) by_class[s.label].push_back(s.feature);
    for (ClassId c = cfg.first_class(session); c < cfg.end_class(session); ++c) {
        const auto& samples = by_class.at(c);
        bank.add(c, compute_prototype(samples), session, static_cast<int>(samples.size()));
    }
}

}  // namespace

double overall_accuracy(std::span<const ClassId> predictions, std::span<const ClassId> labels) {
    require_same_length(predictions, labels);
    if (labels.empty()) throw std::invalid_argument("no test samples");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) correct += predictions[i] == labels[i];
    return static_cast<double>(correct) / static_cast<double>(labels.size());
}

std::optional<double> incremental_accuracy(std::span<const ClassId> predictions, std::span<const ClassId> labels,
                                           int base_class_count) {
    require_same_length(predictions, labels);
    std::size_t total = 0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < base_class_count) continue;
        ++total;
        correct += predictions[i] == labels[i];
    }
    if (total == 0) return std::nullopt;
    return static_cast<double>(correct) / static_cast<double>(total);
}

std::optional<double> mean_incremental_accuracy(const ProtocolReport& report) {
    double sum = 0.0;
    int n = 0;
    for (const auto& s : report.sessions) {
        if (s.session < 1 || !s.incremental_accuracy) continue;
        sum += *s.incremental_accuracy;
        ++n;
    }
    if (n == 0) return std::nullopt;
    return sum / n;
}

ProtocolRun run_protocol(const SessionDataset& dataset, const StrategyConfig& strategy,
                         const ProtocolOptions& options) {
    if (auto report = validate(dataset); !report.ok) throw ValidationError(std::move(report));
    if (auto msg = strategy.check(); !msg.empty()) throw std::invalid_argument(msg);

    const auto& cfg = dataset.config;
    ProtocolRun run;
    run.report.strategy = strategy;
    run.report.seed = options.seed;
    run.report.dataset_fingerprint = fingerprint(dataset);
    run.final_bank = PrototypeBank(cfg.dim);

    for (int t = 0; t <= cfg.sessions; ++t) {
        extend_bank(run.final_bank, dataset, t);

        const auto& test = dataset.test[static_cast<std::size_t>(t)];
        std::vector<FeatureVector> batch;
        std::vector<ClassId> labels;
        batch.reserve(test.size());
        labels.reserve(test.size());
        for (const auto& s : test) {
            batch.push_back(s.feature);
            labels.push_back(s.label);
        }

        std::vector<ClassId> order;
        if (options.class_order) order = options.class_order(t, run.final_bank);
        auto inference = run_session_inference(run.final_bank, batch, strategy, cfg, t, order);

        SessionReport sr;
        sr.session = t;
        sr.n_test = labels.size();
        for (std::size_t i = 0; i < labels.size(); ++i) {
            const bool hit = inference.predictions[i] == labels[i];
            sr.n_correct += hit;
            if (!cfg.is_base(labels[i])) {
                ++sr.n_test_incremental;
                sr.n_correct_incremental += hit;
            }
        }
        sr.overall_accuracy = labels.empty() ? 0.0 : overall_accuracy(inference.predictions, labels);
        sr.incremental_accuracy = incremental_accuracy(inference.predictions, labels, cfg.base_classes);
        for (const auto& [c, entry] : inference.bank.entries()) {
            sr.drift[c] = std::sqrt(squared_distance(entry.weight, run.final_bank.at(c).weight));
        }
        run.report.sessions.push_back(std::move(sr));

        if (options.observer) options.observer(t, run.final_bank, inference.bank, inference);
        run.final_bank = std::move(inference.bank);
    }
    run.report.final_bank_fingerprint = fingerprint(run.final_bank);
    return run;
}

}  // namespace fscil
