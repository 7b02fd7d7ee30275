#include <doctest.h>

#include <cmath>

#include "fscil/io.hpp"
#include "fscil/prototype.hpp"
#include "fscil/synth.hpp"
#include "helpers.hpp"

using namespace fscil;

namespace {

SynthSpec spec_with(int classes, int dim, double delta, double sigma, int per_class, std::uint64_t seed = 1) {
    SynthSpec s;
    s.protocol = {classes, classes, 0, 1, 1, dim};
    s.target_delta_inter = delta;
    s.sigma_intra = sigma;
    s.test_per_class = per_class;
    s.base_train_per_class = 2;
    s.seed = seed;
    return s;
}

}  // namespace

TEST_CASE("simplex placement gives exact pairwise distances") {
    for (int dim : {2, 3, 8}) {
        auto s = spec_with(3, dim, 2.0, 0.1, 1);
        s.placement = MeanPlacement::ScaledSimplex;
        s.center_offset = 4.0;
        const auto means = place_means(s);
        REQUIRE(means.size() == 3);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = i + 1; j < 3; ++j)
                CHECK(std::abs(std::sqrt(squared_distance(means[i], means[j])) - 2.0) <= 1e-9);
    }
    // classes == dim + 1 uses the extra vertex.
    auto s = spec_with(5, 4, 1.5, 0.1, 1);
    s.placement = MeanPlacement::ScaledSimplex;
    const auto means = place_means(s);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = i + 1; j < 5; ++j)
            CHECK(std::abs(std::sqrt(squared_distance(means[i], means[j])) - 1.5) <= 1e-9);
}

TEST_CASE("sphere placement hits the target minimum distance") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto s = spec_with(40, 8, 3.0, 1.0, 1, seed);
        CHECK(default_placement(40, 8) == MeanPlacement::SphereRejection);
        const auto means = place_means(s);
        double best = 1e300;
        for (std::size_t i = 0; i < means.size(); ++i)
            for (std::size_t j = i + 1; j < means.size(); ++j) best = std::min(best, squared_distance(means[i], means[j]));
        CHECK(std::sqrt(best) == doctest::Approx(3.0).epsilon(0.01));
    }
}

TEST_CASE("sphere packing fails loudly when infeasible") {
    // A 1-D sphere is two points, so three classes never fit.
    auto s = spec_with(3, 1, 1.0, 1.0, 1);
    s.placement = MeanPlacement::SphereRejection;
    CHECK_THROWS_WITH_AS(place_means(s), "packing infeasible; increase dim or radius", std::runtime_error);
}

TEST_CASE("spec validation") {
    auto s = spec_with(3, 4, 1.0, 0.0, 1);
    CHECK_FALSE(s.check().empty());
    CHECK_THROWS_AS(generate_dataset(s), std::invalid_argument);
    s = spec_with(3, 4, -1.0, 1.0, 1);
    CHECK_FALSE(s.check().empty());
    s = spec_with(10, 4, 1.0, 1.0, 1);
    s.placement = MeanPlacement::ScaledSimplex;
    CHECK_FALSE(s.check().empty());
    CHECK(parse_placement("sphere") == MeanPlacement::SphereRejection);
    CHECK_THROWS_AS(parse_placement("grid"), ParseError);
}

TEST_CASE("sample covariance matches sigma^2") {
    const auto s = spec_with(2, 16, 1.0, 0.5, 10000);
    const auto syn = generate(s);
    const auto& test = syn.dataset.test.back();
    for (ClassId c = 0; c < 2; ++c) {
        std::vector<FeatureVector> xs;
        for (const auto& smp : test)
            if (smp.label == c) xs.push_back(smp.feature);
        REQUIRE(xs.size() == 10000);
        const auto mean = compute_prototype(xs);
        double trace = 0.0;
        for (const auto& x : xs) trace += squared_distance(x, mean);
        trace /= static_cast<double>(xs.size() - 1);
        CHECK(trace / 16.0 == doctest::Approx(0.25).epsilon(0.05));
    }
}

TEST_CASE("generator layout and determinism") {
    const auto spec = fscil::testing::small_spec(21);
    const auto a = generate_dataset(spec);
    const auto b = generate_dataset(spec);
    CHECK(a == b);
    std::ostringstream sa, sb;
    io::write_dataset(a, sa);
    io::write_dataset(b, sb);
    CHECK(sa.str() == sb.str());

    auto other = spec;
    other.seed = 22;
    CHECK_FALSE(generate_dataset(other) == a);

    CHECK(a.train[0].size() == static_cast<std::size_t>(spec.protocol.base_classes * spec.base_train_per_class));
    for (int t = 1; t <= spec.protocol.sessions; ++t)
        CHECK(a.train[static_cast<std::size_t>(t)].size() == static_cast<std::size_t>(spec.protocol.way * spec.protocol.shot));
    for (int t = 0; t <= spec.protocol.sessions; ++t)
        CHECK(a.test[static_cast<std::size_t>(t)].size() ==
              static_cast<std::size_t>(spec.protocol.seen_classes(t) * spec.test_per_class));
}

TEST_CASE("measure_separation") {
    SUBCASE("point masses") {
        std::vector<LabeledSample> s{{{0, 0}, 0}, {{0, 0}, 0}, {{1, 0}, 1}, {{1, 0}, 1}};
        const auto sep = measure_separation(s);
        CHECK(sep.delta_inter == 1.0);
        CHECK(sep.sigma_intra == 0.0);
    }
    SUBCASE("collinear clusters take the minimum pair") {
        std::vector<LabeledSample> s;
        for (double x : {0.0, 1.0, 3.0})
            for (int i = 0; i < 2; ++i) s.push_back({{x}, static_cast<ClassId>(x)});
        CHECK(measure_separation(s).delta_inter == 1.0);
    }
    SUBCASE("errors") {
        std::vector<LabeledSample> one_class{{{0.0}, 0}, {{1.0}, 0}};
        CHECK_THROWS_AS(measure_separation(one_class), std::invalid_argument);
        std::vector<LabeledSample> singleton{{{0.0}, 0}, {{1.0}, 0}, {{3.0}, 1}};
        CHECK_THROWS_WITH_AS(measure_separation(singleton), doctest::Contains("covariance undefined"),
                             std::invalid_argument);
    }
    SUBCASE("recovers generator parameters") {
        auto s = spec_with(4, 8, 2.0, 0.3, 5000);
        s.center_offset = 3.0;
        const auto sep = measure_separation(generate_dataset(s));
        CHECK(sep.delta_inter == doctest::Approx(2.0).epsilon(0.03));
        CHECK(sep.sigma_intra == doctest::Approx(0.3).epsilon(0.03));
        CHECK(sep.mean_trace == doctest::Approx(8 * 0.09).epsilon(0.06));
    }
}

TEST_CASE("standard normal cdf") {
    CHECK(std_normal_cdf(0.0) == 0.5);
    CHECK(std::abs(std_normal_cdf(1.0) - 0.8413447461) <= 1e-8);
    // mpmath, 30 digits
    CHECK(std::abs(std_normal_cdf(-2.5) - 0.00620966532577613516697810457419) <= 1e-10);
    CHECK(std::abs(std_normal_cdf(3.7) - 0.999892200266522611663062530567) <= 1e-10);
    CHECK(std_normal_sf(8.0) == doctest::Approx(6.22096057427178412351599517262e-16).epsilon(1e-12));
    for (double x = -8.0; x <= 8.0; x += 0.173) CHECK(std::abs(std_normal_cdf(-x) + std_normal_cdf(x) - 1.0) <= 1e-10);
}

TEST_CASE("overlap_bound") {
    CHECK(overlap_bound(1.0, 0.5, 0.5) == 0.5);
    CHECK(overlap_bound(3.0, 0.2, 1.5) == 0.5);
    CHECK(overlap_bound(1.0, 0.5, 0.0) == doctest::Approx(0.158655253931457).epsilon(1e-12));
    const double far = overlap_bound(5.0, 0.1, 0.0);
    CHECK(far > 0.0);
    CHECK(far < 1e-100);
    CHECK(far == doctest::Approx(3.0566967063825609e-138).epsilon(1e-10));
    CHECK_THROWS_AS(overlap_bound(0.0, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(overlap_bound(1.0, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(overlap_bound(1.0, 1.0, -0.1), std::invalid_argument);

    SUBCASE("monotonicity on a grid") {
        for (double d = 0.5; d <= 5.0; d += 0.5)
            for (double s = 0.1; s <= 2.0; s += 0.3)
                for (double e = 0.0; e <= 1.0; e += 0.1) {
                    const double b = overlap_bound(d, s, e);
                    CHECK(overlap_bound(d, s, e + 0.05) >= b);
                    // Growing sigma pulls the bound toward 0.5 from either side.
                    if (2.0 * e < d) CHECK(overlap_bound(d, s + 0.05, e) >= b);
                    CHECK(overlap_bound(d + 0.05, s, e) <= b);
                }
    }
}

TEST_CASE("monte carlo overlap") {
    OverlapQuery q;
    q.delta = 1.0;
    q.sigma = 0.5;
    q.epsilon = 0.0;
    q.dim = 4;
    q.trials = 200'000;
    q.seed = 5;

    SUBCASE("agrees with the analytic value") {
        for (double eps : {0.0, 0.25}) {
            q.epsilon = eps;
            const auto mc = monte_carlo_overlap(q);
            CHECK(std::abs(mc.probability - overlap_bound(1.0, 0.5, eps)) <= 3.0 * mc.stderr_);
        }
    }
    SUBCASE("vanishing noise gives no overlap") {
        q.sigma = 1e-6;
        CHECK(monte_carlo_overlap(q).probability == 0.0);
    }
    SUBCASE("deterministic for a fixed seed and shard count") {
        const auto a = monte_carlo_overlap(q);
        const auto b = monte_carlo_overlap(q);
        CHECK(a.hits == b.hits);
        q.seed = 6;
        CHECK(monte_carlo_overlap(q).hits != a.hits);
    }
    SUBCASE("dimension does not matter beyond noise") {
        q.epsilon = 0.1;
        q.dim = 1;
        const auto low = monte_carlo_overlap(q);
        q.dim = 32;
        const auto high = monte_carlo_overlap(q);
        CHECK(std::abs(low.probability - high.probability) <= 3.0 * std::hypot(low.stderr_, high.stderr_));
    }
    SUBCASE("errors") {
        q.trials = 0;
        CHECK_THROWS_AS(monte_carlo_overlap(q), std::invalid_argument);
    }
}
