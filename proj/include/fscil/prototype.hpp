#pragma once

#include <cstdint>
#include <map>
#include <span>

#include "fscil/core.hpp"

namespace fscil {

/// Nearest-class-mean classifier state: one prototype per seen class.
class PrototypeBank {
  public:
    struct Entry {
        FeatureVector weight;
        int intro_session = 0;
        int labeled_count = 1;

        bool operator==(const Entry&) const = default;
    };

    PrototypeBank() = default;
    explicit PrototypeBank(int dim) : dim_(dim) {}

    /// Adds a new class. Throws std::invalid_argument on duplicate id, dimension
    /// mismatch, or a non-positive labeled count.
    void add(ClassId id, FeatureVector weight, int intro_session, int labeled_count);

    /// Replaces the weight of an existing class.
    void set_weight(ClassId id, FeatureVector weight);

    const Entry& at(ClassId id) const;
    bool contains(ClassId id) const { return entries_.contains(id); }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    int dim() const { return dim_; }

    /// Iteration is in ascending ClassId order.
    const std::map<ClassId, Entry>& entries() const { return entries_; }

    bool operator==(const PrototypeBank&) const = default;

  private:
    int dim_ = 0;
    std::map<ClassId, Entry> entries_;
};

/// Component-wise arithmetic mean. Throws std::invalid_argument when `samples`
/// is empty ("no labeled samples for class") or dimensions differ.
FeatureVector compute_prototype(std::span<const FeatureVector> samples);

double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

/// a·b / (‖a‖‖b‖), clamped to [-1, 1]. Throws std::domain_error on a zero-norm
/// input ("degenerate vector") and std::invalid_argument on dimension mismatch.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Class whose prototype minimises squared Euclidean distance to `feature`;
/// ties go to the smallest ClassId.
ClassId predict(const PrototypeBank& bank, std::span<const double> feature);

/// Hash of every weight bit pattern, for bit-exact bank comparisons in reports.
std::uint64_t fingerprint(const PrototypeBank& bank);

}  // namespace fscil
