#include "fscil/synth.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <map>
#include <stdexcept>

#include "fscil/prototype.hpp"
#include "fscil/rng.hpp"

namespace fscil {

namespace {

// Seed streams, so means/samples/shuffles never share generator state.
constexpr std::uint64_t kMeansStream = 1;
constexpr std::uint64_t kSamplesStream = 2;
constexpr std::uint64_t kShuffleStream = 3;
constexpr std::uint64_t kShardStream = 1000;

constexpr int kAttemptsPerMean = 2000;
constexpr int kRadiusEscalations = 40;

FeatureVector center_point(const SynthSpec& spec) {
    const int d = spec.protocol.dim;
    return FeatureVector(static_cast<std::size_t>(d), spec.center_offset / std::sqrt(static_cast<double>(d)));
}

// Regular simplex with edge length `side`, centred at the origin.
std::vector<FeatureVector> simplex_vertices(int classes, int dim, double side) {
    const double s = side / std::sqrt(2.0);
    std::vector<FeatureVector> pts(static_cast<std::size_t>(classes), FeatureVector(static_cast<std::size_t>(dim), 0.0));
    const int on_axes = std::min(classes, dim);
    for (int i = 0; i < on_axes; ++i) pts[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = s;
    if (classes == dim + 1) {
        // Last vertex a·(1,...,1), equidistant (side) from every s·e_i.
        const double a = s * (1.0 - std::sqrt(1.0 + dim)) / dim;
        std::fill(pts.back().begin(), pts.back().end(), a);
    }
    FeatureVector centroid(static_cast<std::size_t>(dim), 0.0);
    for (const auto& p : pts)
        for (int j = 0; j < dim; ++j) centroid[static_cast<std::size_t>(j)] += p[static_cast<std::size_t>(j)];
    for (auto& c : centroid) c /= classes;
    for (auto& p : pts)
        for (int j = 0; j < dim; ++j) p[static_cast<std::size_t>(j)] -= centroid[static_cast<std::size_t>(j)];
    return pts;
}

FeatureVector random_on_sphere(Rng& rng, int dim, double radius) {
    std::normal_distribution<double> normal(0.0, 1.0);
    FeatureVector v(static_cast<std::size_t>(dim));
    double n2 = 0.0;
    do {
        n2 = 0.0;
        for (auto& x : v) {
            x = normal(rng);
            n2 += x * x;
        }
    } while (n2 == 0.0);
    const double scale = radius / std::sqrt(n2);
    for (auto& x : v) x *= scale;
    return v;
}

double min_pairwise_distance(const std::vector<FeatureVector>& pts) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::min(best, squared_distance(pts[i], pts[j]));
    return std::sqrt(best);
}

std::vector<FeatureVector> sphere_rejection(int classes, int dim, double delta, Rng& rng) {
    double radius = delta / 2.0;
    for (int escalation = 0; escalation < kRadiusEscalations; ++escalation, radius *= 1.25) {
        std::vector<FeatureVector> pts;
        bool failed = false;
        while (static_cast<int>(pts.size()) < classes && !failed) {
            failed = true;
            for (int attempt = 0; attempt < kAttemptsPerMean; ++attempt) {
                auto candidate = random_on_sphere(rng, dim, radius);
                const bool clear = std::all_of(pts.begin(), pts.end(), [&](const FeatureVector& p) {
                    return squared_distance(p, candidate) >= delta * delta;
                });
                if (clear) {
                    pts.push_back(std::move(candidate));
                    failed = false;
                    break;
                }
            }
        }
        if (failed) continue;
        if (classes < 2) return pts;
        // Shrink the accepted configuration so the minimum distance is exactly delta.
        const double scale = delta / min_pairwise_distance(pts);
        for (auto& p : pts)
            for (auto& x : p) x *= scale;
        return pts;
    }
    throw std::runtime_error("packing infeasible; increase dim or radius");
}

}  // namespace

const char* to_string(MeanPlacement p) {
    return p == MeanPlacement::ScaledSimplex ? "simplex" : "sphere";
}

MeanPlacement parse_placement(const std::string& name) {
    if (name == "simplex") return MeanPlacement::ScaledSimplex;
    if (name == "sphere") return MeanPlacement::SphereRejection;
    throw ParseError("unknown placement '" + name + "' (expected simplex or sphere)");
}

MeanPlacement default_placement(int classes, int dim) {
    return classes <= dim + 1 ? MeanPlacement::ScaledSimplex : MeanPlacement::SphereRejection;
}

std::string SynthSpec::check() const {
    if (auto msg = protocol.check(); !msg.empty()) return msg;
    if (!(sigma_intra > 0.0) || !std::isfinite(sigma_intra)) return "sigma_intra must be > 0";
    if (!(target_delta_inter > 0.0) || !std::isfinite(target_delta_inter)) return "target_delta_inter must be > 0";
    if (test_per_class < 1) return "test_per_class must be >= 1";
    if (base_train_per_class < 1) return "base_train_per_class must be >= 1";
    if (!std::isfinite(center_offset)) return "center_offset must be finite";
    if (placement == MeanPlacement::ScaledSimplex && protocol.total_classes > protocol.dim + 1) {
        return "simplex placement needs total_classes <= dim + 1";
    }
    return {};
}

std::vector<FeatureVector> place_means(const SynthSpec& spec) {
    if (auto msg = spec.check(); !msg.empty()) throw std::invalid_argument(msg);
    const int classes = spec.protocol.total_classes;
    const int dim = spec.protocol.dim;
    const auto placement = spec.placement.value_or(default_placement(classes, dim));

    std::vector<FeatureVector> means;
    if (placement == MeanPlacement::ScaledSimplex) {
        means = simplex_vertices(classes, dim, spec.target_delta_inter);
    } else {
        Rng rng(derive_seed(spec.seed, kMeansStream));
        means = sphere_rejection(classes, dim, spec.target_delta_inter, rng);
    }
    const auto center = center_point(spec);
    for (auto& m : means)
        for (std::size_t j = 0; j < m.size(); ++j) m[j] += center[j];
    return means;
}

SyntheticDataset generate(const SynthSpec& spec) {
    SyntheticDataset out;
    out.means = place_means(spec);

    const auto& cfg = spec.protocol;
    auto& ds = out.dataset;
    ds.config = cfg;
    ds.train.assign(static_cast<std::size_t>(cfg.sessions) + 1, {});
    ds.test.assign(static_cast<std::size_t>(cfg.sessions) + 1, {});

    Rng rng(derive_seed(spec.seed, kSamplesStream));
    std::normal_distribution<double> noise(0.0, spec.sigma_intra);
    auto draw = [&](ClassId c) {
        const auto& mu = out.means[static_cast<std::size_t>(c)];
        FeatureVector f(mu.size());
        bool nonzero = false;
        for (std::size_t j = 0; j < f.size(); ++j) {
            f[j] = mu[j] + noise(rng);
            nonzero = nonzero || f[j] != 0.0;
        }
        if (!nonzero) f[0] = std::numeric_limits<double>::epsilon();
        return f;
    };

    std::vector<std::vector<LabeledSample>> test_by_class(static_cast<std::size_t>(cfg.total_classes));
    for (ClassId c = 0; c < cfg.total_classes; ++c) {
        const int t = cfg.session_of(c);
        const int n_train = t == 0 ? spec.base_train_per_class : cfg.shot;
        for (int i = 0; i < n_train; ++i) ds.train[static_cast<std::size_t>(t)].push_back({draw(c), c});
        for (int i = 0; i < spec.test_per_class; ++i) test_by_class[static_cast<std::size_t>(c)].push_back({draw(c), c});
    }

    for (int t = 0; t <= cfg.sessions; ++t) {
        auto& test = ds.test[static_cast<std::size_t>(t)];
        for (ClassId c = 0; c < cfg.seen_classes(t); ++c) {
            const auto& samples = test_by_class[static_cast<std::size_t>(c)];
            test.insert(test.end(), samples.begin(), samples.end());
        }
        Rng shuffle_rng(derive_seed(spec.seed, kShuffleStream + 16 * static_cast<std::uint64_t>(t)));
        std::shuffle(test.begin(), test.end(), shuffle_rng);
    }
    return out;
}

SessionDataset generate_dataset(const SynthSpec& spec) { return generate(spec).dataset; }

Separation measure_separation(std::span<const LabeledSample> samples) {
    std::map<ClassId, std::vector<FeatureVector>> by_class;
    for (const auto& s : samples) by_class[s.label].push_back(s.feature);
    if (by_class.size() < 2) throw std::invalid_argument("separation needs at least two classes");

    std::vector<FeatureVector> means;
    double trace_sum = 0.0;
    std::size_t dim = 0;
    for (const auto& [c, feats] : by_class) {
        if (feats.size() < 2) {
            throw std::invalid_argument("covariance undefined: class " + std::to_string(c) + " has one sample");
        }
        auto mean = compute_prototype(feats);
        dim = mean.size();
        double trace = 0.0;
        for (const auto& f : feats) trace += squared_distance(f, mean);
        trace_sum += trace / static_cast<double>(feats.size() - 1);
        means.push_back(std::move(mean));
    }
    Separation sep;
    sep.delta_inter = min_pairwise_distance(means);
    sep.mean_trace = trace_sum / static_cast<double>(by_class.size());
    sep.sigma_intra = std::sqrt(sep.mean_trace / static_cast<double>(dim));
    return sep;
}

Separation measure_separation(const SessionDataset& dataset) {
    std::vector<LabeledSample> pooled;
    for (const auto& rows : dataset.train) pooled.insert(pooled.end(), rows.begin(), rows.end());
    if (!dataset.test.empty()) pooled.insert(pooled.end(), dataset.test.back().begin(), dataset.test.back().end());
    return measure_separation(pooled);
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double std_normal_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double overlap_bound(double delta, double sigma, double epsilon) {
    if (!(delta > 0.0) || !(sigma > 0.0) || !(epsilon >= 0.0)) {
        throw std::invalid_argument("overlap_bound needs delta > 0, sigma > 0, epsilon >= 0");
    }
    return std_normal_sf((delta - 2.0 * epsilon) / (2.0 * sigma));
}

double lemma_tolerance(double delta, double epsilon, double stderr_) {
    const double r = epsilon / delta;
    return std::max(3.0 * stderr_, 0.002 + 0.5 * r * r);
}

MonteCarloEstimate monte_carlo_overlap(const OverlapQuery& q) {
    if (q.trials == 0) throw std::invalid_argument("trials must be > 0");
    if (!(q.delta > 0.0) || !(q.sigma > 0.0) || !(q.epsilon >= 0.0) || q.dim < 1 || q.shards < 1) {
        throw std::invalid_argument("invalid overlap query");
    }
    const auto d = static_cast<std::size_t>(q.dim);
    // mu_c = delta·e0, mu_c' = 0, u = (mu_c − mu_c')/delta = e0.
    FeatureVector mu_c(d, 0.0);
    mu_c[0] = q.delta;
    FeatureVector est_c = mu_c;
    FeatureVector est_other(d, 0.0);
    est_c[0] += q.epsilon;
    est_other[0] += q.epsilon;

    const auto shards = static_cast<std::uint64_t>(q.shards);
    auto run_shard = [&](std::uint64_t shard) {
        const std::uint64_t n = q.trials / shards + (shard < q.trials % shards ? 1 : 0);
        Rng rng(derive_seed(q.seed, kShardStream + shard));
        std::normal_distribution<double> noise(0.0, q.sigma);
        FeatureVector x(d);
        std::uint64_t hits = 0;
        for (std::uint64_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < d; ++j) x[j] = mu_c[j] + noise(rng);
            hits += squared_distance(x, est_other) < squared_distance(x, est_c);
        }
        return hits;
    };

    std::vector<std::future<std::uint64_t>> jobs;
    for (std::uint64_t s = 0; s < shards; ++s) jobs.push_back(std::async(std::launch::async, run_shard, s));
    MonteCarloEstimate est;
    for (auto& j : jobs) est.hits += j.get();
    est.trials = q.trials;
    est.probability = static_cast<double>(est.hits) / static_cast<double>(est.trials);
    est.stderr_ = std::sqrt(est.probability * (1.0 - est.probability) / static_cast<double>(est.trials));
    return est;
}

}  // namespace fscil
