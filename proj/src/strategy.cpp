#include "fscil/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>

namespace fscil {

ExplorationResult explore(std::span<const double> prototype, std::span<const FeatureVector> batch, int R,
                          double tau, ClassId class_id) {
    if (R < 1) throw std::invalid_argument("R must be >= 1");
    ExplorationResult out;
    out.class_id = class_id;
    out.alpha = -std::numeric_limits<double>::infinity();
    if (batch.empty()) return out;

    out.similarities.reserve(batch.size());
    for (const auto& f : batch) out.similarities.push_back(cosine_similarity(prototype, f));

    const auto rank = static_cast<std::size_t>(R);
    if (rank >= batch.size()) {
        out.alpha = *std::min_element(out.similarities.begin(), out.similarities.end());
    } else {
        auto sorted = out.similarities;
        std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1), sorted.end(),
                         std::greater<>());
        out.alpha = sorted[rank - 1];
    }
    for (std::size_t i = 0; i < out.similarities.size(); ++i) {
        const double s = out.similarities[i];
        if (s >= out.alpha && s > tau) out.selected.push_back(i);
    }
    return out;
}

double beta_schedule(ClassId class_id, int session, const StrategyConfig& strategy,
                     const ProtocolConfig& protocol) {
    if (session < 0 || class_id < 0 || class_id >= protocol.seen_classes(session)) {
        throw std::invalid_argument("class " + std::to_string(class_id) + " unseen at session " +
                                    std::to_string(session));
    }
    if (protocol.is_base(class_id)) return std::pow(strategy.beta_base, session + 1);
    const int exponent = session - (class_id - protocol.base_classes) / protocol.way;
    return std::pow(strategy.beta_inc, exponent);
}

FeatureVector exploit_update(std::span<const double> w, std::span<const FeatureVector> selected, double beta) {
    if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in [0, 1)");
    FeatureVector out(w.begin(), w.end());
    if (selected.empty()) return out;
    for (const auto& f : selected) {
        if (f.size() != w.size()) throw std::invalid_argument("dimension mismatch in exploit_update");
    }
    const FeatureVector mean = compute_prototype(selected);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = (1.0 - beta) * w[j] + beta * mean[j];
    return out;
}

namespace {

void require_coverage(const PrototypeBank& bank, const ProtocolConfig& protocol, int session) {
    const auto expected = static_cast<std::size_t>(protocol.seen_classes(session));
    if (bank.size() != expected || (expected > 0 && !bank.contains(static_cast<ClassId>(expected) - 1))) {
        throw std::invalid_argument("prototype bank does not cover the classes seen by session " +
                                    std::to_string(session));
    }
}

std::vector<ClassId> visit_order(const PrototypeBank& bank, std::span<const ClassId> class_order) {
    std::vector<ClassId> order;
    if (class_order.empty()) {
        for (const auto& [id, e] : bank.entries()) order.push_back(id);
        return order;
    }
    order.assign(class_order.begin(), class_order.end());
    std::set<ClassId> unique(order.begin(), order.end());
    const bool permutation = unique.size() == order.size() && unique.size() == bank.size() &&
                             std::all_of(order.begin(), order.end(), [&](ClassId c) { return bank.contains(c); });
    if (!permutation) throw std::invalid_argument("class_order is not a permutation of the bank's classes");
    return order;
}

bool updates_enabled(const StrategyConfig& strategy, int session) {
    if (strategy.variant == Variant::Baseline) return false;
    return session > 0 || strategy.update_base_session;
}

}  // namespace

UpdatePlan plan_updates(const PrototypeBank& snapshot, std::span<const FeatureVector> batch,
                        const StrategyConfig& strategy, const ProtocolConfig& protocol, int session,
                        std::span<const ClassId> class_order) {
    UpdatePlan plan;
    if (!updates_enabled(strategy, session)) return plan;

    for (ClassId c : visit_order(snapshot, class_order)) {
        const auto& w = snapshot.at(c).weight;
        ClassUpdate update;
        switch (strategy.variant) {
            case Variant::Average: {
                update.beta = 0.5;
                if (!batch.empty()) update.mean_feature = compute_prototype(batch);
                break;
            }
            case Variant::Exp2:
            case Variant::Weight: {
                update.beta = strategy.variant == Variant::Exp2
                                  ? beta_schedule(c, session, strategy, protocol)
                                  : (protocol.is_base(c) ? strategy.beta_base : strategy.beta_inc);
                auto result = explore(w, batch, strategy.R, strategy.tau, c);
                if (!result.selected.empty()) {
                    std::vector<FeatureVector> chosen;
                    chosen.reserve(result.selected.size());
                    for (auto i : result.selected) chosen.push_back(batch[i]);
                    update.mean_feature = compute_prototype(chosen);
                }
                plan.explorations.emplace(c, std::move(result));
                break;
            }
            case Variant::Baseline: break;
        }
        plan.updates.emplace(c, std::move(update));
    }
    return plan;
}

PrototypeBank apply_plan(PrototypeBank bank, const UpdatePlan& plan) {
    for (const auto& [c, update] : plan.updates) {
        if (!update.mean_feature) continue;
        const auto& w = bank.at(c).weight;
        FeatureVector next(w.size());
        for (std::size_t j = 0; j < w.size(); ++j) {
            next[j] = (1.0 - update.beta) * w[j] + update.beta * (*update.mean_feature)[j];
        }
        bank.set_weight(c, std::move(next));
    }
    return bank;
}

SessionInference run_session_inference(const PrototypeBank& bank, std::span<const FeatureVector> batch,
                                       const StrategyConfig& strategy, const ProtocolConfig& protocol,
                                       int session, std::span<const ClassId> class_order) {
    require_coverage(bank, protocol, session);
    SessionInference out{{}, bank, {}};
    out.predictions.reserve(batch.size());

    if (batch.empty()) return out;

    const std::size_t step = strategy.chunk == 0 ? batch.size() : strategy.chunk;
    for (std::size_t begin = 0; begin < batch.size(); begin += step) {
        const auto chunk = batch.subspan(begin, std::min(step, batch.size() - begin));
        auto plan = plan_updates(out.bank, chunk, strategy, protocol, session, class_order);
        out.bank = apply_plan(std::move(out.bank), plan);
        for (auto& [c, result] : plan.explorations) {
            result.offset = begin;
            out.explorations.push_back(std::move(result));
        }
        for (const auto& f : chunk) out.predictions.push_back(predict(out.bank, f));
    }
    return out;
}

}  // namespace fscil
