#include "fscil/prototype.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fscil {

void PrototypeBank::add(ClassId id, FeatureVector weight, int intro_session, int labeled_count) {
    if (entries_.contains(id)) {
        throw std::invalid_argument("class " + std::to_string(id) + " already in bank");
    }
    if (dim_ == 0) dim_ = static_cast<int>(weight.size());
    if (static_cast<int>(weight.size()) != dim_) {
        throw std::invalid_argument("prototype dimension mismatch for class " + std::to_string(id));
    }
    if (labeled_count < 1) {
        throw std::invalid_argument("labeled_count must be >= 1 for class " + std::to_string(id));
    }
    entries_.emplace(id, Entry{std::move(weight), intro_session, labeled_count});
}

void PrototypeBank::set_weight(ClassId id, FeatureVector weight) {
    auto it = entries_.find(id);
    if (it == entries_.end()) throw std::out_of_range("class " + std::to_string(id) + " not in bank");
    if (static_cast<int>(weight.size()) != dim_) {
        throw std::invalid_argument("prototype dimension mismatch for class " + std::to_string(id));
    }
    it->second.weight = std::move(weight);
}

const PrototypeBank::Entry& PrototypeBank::at(ClassId id) const {
    auto it = entries_.find(id);
    if (it == entries_.end()) throw std::out_of_range("class " + std::to_string(id) + " not in bank");
    return it->second;
}

FeatureVector compute_prototype(std::span<const FeatureVector> samples) {
    if (samples.empty()) throw std::invalid_argument("no labeled samples for class");
    const std::size_t d = samples.front().size();
    FeatureVector mean(d, 0.0);
    for (const auto& s : samples) {
        if (s.size() != d) throw std::invalid_argument("prototype samples have mixed dimensions");
        for (std::size_t j = 0; j < d; ++j) mean[j] += s[j];
    }
    const double n = static_cast<double>(samples.size());
    for (auto& v : mean) v /= n;
    return mean;
}

namespace {

void require_same_dim(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()));
    }
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
    require_same_dim(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    require_same_dim(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    require_same_dim(a, b);
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) throw std::domain_error("degenerate vector");
    return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

ClassId predict(const PrototypeBank& bank, std::span<const double> feature) {
    if (bank.empty()) throw std::invalid_argument("predict on an empty prototype bank");
    ClassId best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    // Ascending id order plus strict < keeps the smallest id on ties.
    for (const auto& [id, entry] : bank.entries()) {
        const double d = squared_distance(feature, entry.weight);
        if (d < best_dist) {
            best_dist = d;
            best = id;
        }
    }
    return best;
}

std::uint64_t fingerprint(const PrototypeBank& bank) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= static_cast<unsigned char>(v >> (8 * i));
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& [id, e] : bank.entries()) {
        mix(static_cast<std::uint64_t>(id));
        mix(static_cast<std::uint64_t>(e.intro_session));
        mix(static_cast<std::uint64_t>(e.labeled_count));
        for (double v : e.weight) mix(std::bit_cast<std::uint64_t>(v));
    }
    return h;
}

}  // namespace fscil
