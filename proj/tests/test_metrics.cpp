#include "doctest.h"

#include <numeric>
#include <random>

#include "lsdr/metrics.hpp"
#include "lsdr/synth.hpp"
#include "oracles.hpp"

using namespace lsdr;

namespace {

Matrix random_orthogonal(Index n, std::mt19937_64& rng) {
    return Eigen::HouseholderQR<Matrix>(oracle::random_matrix(n, n, rng)).householderQ();
}

}  // namespace

TEST_CASE("nse examples") {
    std::mt19937_64 rng(61);
    const Matrix l = oracle::random_matrix(6, 7, rng);
    CHECK(metrics::nse(l, l) == 0.0);
    CHECK(metrics::nse(Matrix::Zero(6, 7), l) == doctest::Approx(1.0));
    CHECK(metrics::nse(2.0 * l, l) == doctest::Approx(1.0));
    try {
        metrics::nse(l, Matrix::Zero(6, 7));
        FAIL("expected ZeroTruth");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ZeroTruth);
    }
}

TEST_CASE("nse is scale covariant") {
    std::mt19937_64 rng(67);
    for (double c : {-3.0, 0.25, 1e3}) {
        const Matrix l = oracle::random_matrix(5, 5, rng);
        const Matrix e = oracle::random_matrix(5, 5, rng);
        CHECK(metrics::nse(c * e, c * l) == doctest::Approx(metrics::nse(e, l)).epsilon(1e-12));
    }
}

TEST_CASE("energy_cdf examples") {
    Vector u(4), v(6);
    u << 1, 2, 3, 4;
    v << 1, -1, 2, 0.5, 3, 1;
    for (double x : metrics::energy_cdf(u * v.transpose())) CHECK(x == doctest::Approx(1.0));

    const auto id = metrics::energy_cdf(Matrix::Identity(4, 4));
    REQUIRE(id.size() == 4);
    CHECK(id[0] == doctest::Approx(0.25));
    CHECK(id[1] == doctest::Approx(0.5));
    CHECK(id[2] == doctest::Approx(0.75));
    CHECK(id[3] == 1.0);

    CHECK_THROWS_AS(metrics::energy_cdf(Matrix::Zero(3, 3)), Error);
}

TEST_CASE("energy_cdf on the regenerated anomaly instance") {
    synth::SynthSpec s;
    s.seed = 2;
    const auto clean = synth::make_instance(s);
    s.anomaly_ratio = 0.03;
    const auto dirty = synth::make_instance(s);
    const double clean10 = metrics::energy_cdf(clean.truth.corrupted())[9];
    const double dirty10 = metrics::energy_cdf(dirty.truth.corrupted())[9];
    CHECK(clean10 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(dirty10 < 0.9);
    MESSAGE("top-10 energy: clean " << clean10 << ", 3% anomalies " << dirty10);
}

TEST_CASE("energy_cdf is nondecreasing and rotation invariant") {
    std::mt19937_64 rng(71);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix x = oracle::random_matrix(6, 8, rng);
        const auto base = metrics::energy_cdf(x);
        CHECK(std::is_sorted(base.begin(), base.end()));
        CHECK(base.back() == 1.0);
        const auto t = metrics::energy_cdf(x.transpose());
        const auto rot = metrics::energy_cdf(random_orthogonal(6, rng) * x * random_orthogonal(8, rng));
        for (std::size_t k = 0; k < base.size(); ++k) {
            CHECK(std::abs(t[k] - base[k]) < 1e-8);
            CHECK(std::abs(rot[k] - base[k]) < 1e-8);
        }
    }
}

TEST_CASE("loss_rate_per_node") {
    const Dimensions d{3, 10};
    for (double r : metrics::loss_rate_per_node(Mask::full(d))) CHECK(r == 0.0);
    for (double r : metrics::loss_rate_per_node(Mask::empty(d))) CHECK(r == 1.0);
    const Mask m(d, {{1, 0}, {1, 4}, {1, 9}});
    CHECK(metrics::loss_rate_per_node(m)[1] == doctest::Approx(0.7));

    const Mask random = synth::gen_mask(Dimensions{20, 35}, 0.37, 9);
    const auto rates = metrics::loss_rate_per_node(random);
    const double avg = std::accumulate(rates.begin(), rates.end(), 0.0) / double(rates.size());
    CHECK(avg == doctest::Approx(1.0 - random.sampling_rate()).epsilon(1e-12));
}

TEST_CASE("theorem1_bound") {
    CHECK(metrics::theorem1_bound(100, 0.5, 0.0) == 0.0);
    // mpmath, 40 digits: 87655.27893155412919...
    CHECK(metrics::theorem1_bound(100, 0.5, 1.0) == doctest::Approx(87655.27893155413).epsilon(1e-13));
    double previous = metrics::theorem1_bound(50, 0.05, 2.0);
    for (double p = 0.1; p <= 1.0; p += 0.05) {
        const double b = metrics::theorem1_bound(50, p, 2.0);
        CHECK(b < previous);
        previous = b;
    }
    CHECK_THROWS_AS(metrics::theorem1_bound(0, 0.5, 1.0), Error);
    CHECK_THROWS_AS(metrics::theorem1_bound(10, 0.0, 1.0), Error);
}

TEST_CASE("theorem2_envelope") {
    CHECK(metrics::theorem2_envelope(1.0, 2) == 1.0);
    CHECK(metrics::theorem2_envelope(3.0, 10) == doctest::Approx(4.0 * metrics::theorem2_envelope(3.0, 20)));
    CHECK(metrics::theorem2_envelope(10.0, 500) == doctest::Approx(1.6e-4));
}

TEST_CASE("incoherence score") {
    const Matrix spread = Matrix::Ones(8, 8);
    const auto s = metrics::incoherence_score(spread, 1);
    CHECK(s.column_score == doctest::Approx(1.0));
    CHECK(s.row_score == doctest::Approx(1.0));
    Matrix spike = Matrix::Zero(8, 8);
    spike(2, 3) = 5.0;
    const auto k = metrics::incoherence_score(spike, 1);
    CHECK(k.column_score == doctest::Approx(8.0));
    CHECK(k.row_score == doctest::Approx(8.0));
}

TEST_CASE("metric record json") {
    metrics::MetricRecord r{"nse", {{"solver", "lsd"}}, 0.25};
    const nlohmann::json j = r;
    CHECK(j.at("metric") == "nse");
    CHECK(j.at("value") == 0.25);
    const auto back = j.get<metrics::MetricRecord>();
    CHECK(back.params.at("solver") == "lsd");
}
