#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fscil/core.hpp"

namespace fscil {

enum class MeanPlacement { SphereRejection, ScaledSimplex };

const char* to_string(MeanPlacement p);
MeanPlacement parse_placement(const std::string& name);

/// Simplex when the class count fits (classes <= dim + 1), sphere rejection otherwise.
MeanPlacement default_placement(int classes, int dim);

struct SynthSpec {
    ProtocolConfig protocol;
    double sigma_intra = 1.0;         // per-coordinate standard deviation
    double target_delta_inter = 1.0;  // minimum pairwise distance between class means
    std::optional<MeanPlacement> placement;  // unset: default_placement
    int test_per_class = 10;
    int base_train_per_class = 20;
    /// Distance of the shared centre of all class means from the origin (along
    /// the all-ones direction). Cosine similarity is origin-sensitive, so this
    /// controls how similar same-class features look to the exploration step.
    double center_offset = 0.0;
    std::uint64_t seed = 0;

    bool operator==(const SynthSpec&) const = default;

    /// Empty when valid, otherwise the first problem found.
    std::string check() const;
};

struct SyntheticDataset {
    SessionDataset dataset;
    std::vector<FeatureVector> means;  // true class means, indexed by ClassId
};

/// Gaussian classes N(mu_c, sigma^2 I) with min pairwise mean distance equal to
/// target_delta_inter. Test samples are drawn once per class; session t's test
/// set holds every test sample of the classes seen by t, in a seeded shuffle.
/// Throws std::invalid_argument on an invalid spec and std::runtime_error
/// ("packing infeasible; increase dim or radius") when sphere rejection fails.
SyntheticDataset generate(const SynthSpec& spec);
SessionDataset generate_dataset(const SynthSpec& spec);

/// Class means only (same construction and seed stream as `generate`).
std::vector<FeatureVector> place_means(const SynthSpec& spec);

struct Separation {
    double delta_inter = 0.0;
    /// sqrt(mean over classes of trace(cov) / d): per-coordinate spread, on
    /// the same scale as SynthSpec::sigma_intra.
    double sigma_intra = 0.0;
    double mean_trace = 0.0;  // mean over classes of trace(cov)
};

/// Empirical separation of labelled samples. Needs >= 2 classes and >= 2
/// samples per class ("covariance undefined" otherwise).
Separation measure_separation(std::span<const LabeledSample> samples);

/// Pools every train sample and the final session's test samples.
Separation measure_separation(const SessionDataset& dataset);

double std_normal_cdf(double x);

/// Upper tail 1 − Φ(x), computed without cancellation.
double std_normal_sf(double x);

/// Lower bound on the overlap probability: 1 − Φ((delta − 2·epsilon) / (2·sigma)).
double overlap_bound(double delta, double sigma, double epsilon);

struct OverlapQuery {
    double delta = 1.0;
    double sigma = 0.5;
    double epsilon = 0.0;
    int dim = 2;
    std::uint64_t trials = 1'000'000;
    std::uint64_t seed = 0;
    /// Trials are split across this many independently seeded shards; the
    /// result is a function of (seed, shards).
    int shards = 8;
};

struct MonteCarloEstimate {
    double probability = 0.0;
    double stderr_ = 0.0;
    std::uint64_t hits = 0;
    std::uint64_t trials = 0;
};

/// Simulates the worst-case estimated-mean construction: true means delta apart
/// along axis 0, both estimates displaced by epsilon toward the sampled class,
/// and counts X ~ N(mu_c, sigma^2 I) closer to the other class's estimate.
MonteCarloEstimate monte_carlo_overlap(const OverlapQuery& query);

/// Acceptance band for |empirical − bound|: the larger of three standard errors
/// and 0.002 + 0.5·(epsilon/delta)^2.
double lemma_tolerance(double delta, double epsilon, double stderr_);

}  // namespace fscil
