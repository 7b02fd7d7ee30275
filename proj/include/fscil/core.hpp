#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fscil {

/// Dense embedding vector. All vectors in one dataset share a declared dimension.
using FeatureVector = std::vector<double>;

/// Global class index. Ids are contiguous in introduction order: the base
/// block [0, base_classes) first, then `way` ids per incremental session.
using ClassId = int;

/// Raised when user-supplied input (files, flags, configs) cannot be parsed.
class ParseError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct LabeledSample {
    FeatureVector feature;
    ClassId label = 0;

    bool operator==(const LabeledSample&) const = default;
};

struct ProtocolConfig {
    int total_classes = 0;
    int base_classes = 0;
    int sessions = 0;  // T, number of incremental sessions
    int way = 1;       // N
    int shot = 1;      // K
    int dim = 1;       // d

    bool operator==(const ProtocolConfig&) const = default;

    /// Empty when the invariants hold, otherwise a description of the first failure.
    std::string check() const;

    /// Session index in [0, T] that introduces `id`. Throws std::out_of_range
    /// for ids outside [0, total_classes).
    int session_of(ClassId id) const;

    /// Half-open id range [first, last) introduced in `session`.
    ClassId first_class(int session) const;
    ClassId end_class(int session) const;

    /// Number of classes seen after `session` completes.
    int seen_classes(int session) const { return end_class(session); }

    bool is_base(ClassId id) const { return id < base_classes; }
};

enum class Variant { Baseline, Exp2, Average, Weight };

const char* to_string(Variant v);
/// Accepts the lower-case CLI spellings ("baseline", "exp2", "average", "weight").
Variant parse_variant(const std::string& name);

struct StrategyConfig {
    Variant variant = Variant::Exp2;
    int R = 40;
    double tau = 0.8;
    double beta_base = 0.05;
    double beta_inc = 0.3;
    /// 0 processes each session's test set as one batch; otherwise the batch is
    /// consumed in chunks of this size, updating between chunks.
    std::size_t chunk = 0;
    /// When false, no prototype updates happen while inferring session 0.
    bool update_base_session = true;

    bool operator==(const StrategyConfig&) const = default;

    std::string check() const;
};

struct SessionDataset {
    ProtocolConfig config;
    std::vector<std::vector<LabeledSample>> train;  // size T+1
    std::vector<std::vector<LabeledSample>> test;   // size T+1

    bool operator==(const SessionDataset&) const = default;
};

struct Violation {
    std::string kind;  // short tag, e.g. "disjointness", "shot count"
    std::string message;
};

struct ValidationReport {
    bool ok = true;
    std::vector<Violation> violations;

    std::string to_string() const;
};

/// Thrown when an operation requires a valid dataset and gets an invalid one.
class ValidationError : public std::runtime_error {
  public:
    explicit ValidationError(ValidationReport report);
    const ValidationReport& report() const noexcept { return report_; }

  private:
    ValidationReport report_;
};

/// Checks every dataset invariant. Never throws; all violations are collected.
ValidationReport validate(const SessionDataset& dataset);

/// 64-bit FNV-1a over the config and the bit patterns of every feature value.
std::uint64_t fingerprint(const SessionDataset& dataset);

}  // namespace fscil
