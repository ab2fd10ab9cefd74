#include "doctest.h"

#include <set>

#include "lsdr/metrics.hpp"
#include "lsdr/ops.hpp"
#include "lsdr/synth.hpp"
#include "oracles.hpp"

using namespace lsdr;

namespace {

synth::SynthSpec fig1(double anomalies = 0.0) {
    synth::SynthSpec s;
    s.anomaly_ratio = anomalies;
    s.seed = 1;
    return s;
}

}  // namespace

TEST_CASE("gen_lowrank rank one has vanishing minors") {
    for (double lo : {0.0, 2.0, -3.0, -9.0}) {
        synth::SynthSpec s;
        s.dims = Dimensions{2, 2};
        s.rank = 1;
        s.value_low = lo;
        s.value_high = lo < -5 ? -1.0 : 10.0;
        const Matrix l = synth::gen_lowrank(s);
        CHECK(std::abs(l(0, 0) * l(1, 1) - l(0, 1) * l(1, 0)) < 1e-10);
        CHECK(l.minCoeff() == doctest::Approx(s.value_low));
        CHECK(l.maxCoeff() == doctest::Approx(s.value_high));
    }
    synth::SynthSpec s;
    s.dims = Dimensions{30, 40};
    s.rank = 1;
    const Matrix l = synth::gen_lowrank(s);
    const Vector sv = ops::singular_values(l).values();
    CHECK(sv(1) / sv(0) < 1e-10);
}

TEST_CASE("gen_lowrank figure-1 field has rank 5 and spans [0,100]") {
    const Matrix l = synth::gen_lowrank(fig1());
    const Vector sv = ops::singular_values(l).values();
    CHECK(sv(5) / sv(0) < 1e-10);
    CHECK(sv(4) / sv(0) > 1e-6);
    CHECK(l.minCoeff() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(l.maxCoeff() == doctest::Approx(100.0));
    CHECK(synth::gen_lowrank(fig1()) == l);
}

TEST_CASE("rank certificate across shapes and ranks") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        synth::SynthSpec s;
        s.dims = Dimensions{10 + Index(seed) * 3, 25 - Index(seed)};
        s.rank = 1 + Index(seed % 6);
        s.value_low = -20.0 + double(seed);
        s.value_high = 50.0;
        s.seed = seed;
        const Vector sv = ops::singular_values(synth::gen_lowrank(s)).values();
        if (s.rank < sv.size()) CHECK(sv(s.rank) / sv(0) < 1e-9);
    }
}

TEST_CASE("inject_anomalies") {
    const Matrix l = synth::gen_lowrank(fig1());
    SUBCASE("zero ratio") {
        const auto c = synth::inject_anomalies(l, fig1(0.0));
        CHECK(c.corrupted == l);
        CHECK(c.support.empty());
    }
    SUBCASE("3% of 100x100 is 300 cells; replace mode sets the reading") {
        const auto c = synth::inject_anomalies(l, fig1(0.03));
        CHECK(c.support.size() == 300);
        CHECK(std::set<Entry>(c.support.begin(), c.support.end()).size() == 300);
        for (const auto& e : c.support) CHECK(c.corrupted(e.row, e.col) == doctest::Approx(100.0));
        CHECK(static_cast<std::size_t>((c.sparse.array() != 0.0).count()) == 300);
    }
    SUBCASE("additive mode") {
        auto s = fig1(0.005);
        s.anomaly_mode = synth::AnomalyMode::Add;
        const auto c = synth::inject_anomalies(l, s);
        CHECK(c.support.size() == 50);
        for (const auto& e : c.support) CHECK(c.sparse(e.row, e.col) == 100.0);
    }
}

TEST_CASE("anomaly supports are uniform over cells") {
    // 1000 draws of k = 5 cells on a 10x10 grid: each cell is included
    // Binomial(1000, 0.05) times.
    synth::SynthSpec s;
    s.dims = Dimensions{10, 10};
    s.rank = 2;
    s.anomaly_ratio = 0.05;
    const Matrix l = Matrix::Zero(10, 10);
    Matrix counts = Matrix::Zero(10, 10);
    for (std::uint64_t trial = 0; trial < 1000; ++trial) {
        s.seed = trial;
        const auto c = synth::inject_anomalies(l, s);
        REQUIRE(c.support.size() == 5);
        for (const auto& e : c.support) counts(e.row, e.col) += 1.0;
    }
    const double mean = 1000 * 0.05;
    const double sigma = oracle::binomial_sigma(1000, 0.05);
    CHECK(counts.sum() == 5000.0);
    CHECK((counts.array() - mean).abs().maxCoeff() <= 3.0 * sigma);
}

TEST_CASE("noise has exactly the requested Frobenius norm") {
    auto s = fig1();
    const Matrix r = Matrix::Constant(100, 100, 3.0);
    CHECK(synth::add_noise(r, s) == r);
    s.noise_delta = 3.5;
    const Matrix z1 = synth::add_noise(r, s) - r;
    CHECK(std::abs(z1.norm() - 3.5) < 1e-10);
    s.seed = 2;
    const Matrix z2 = synth::gen_noise(s);
    CHECK(std::abs(z2.norm() - 3.5) < 1e-10);
    CHECK((z2 - z1).norm() > 1.0);
}

TEST_CASE("gen_mask") {
    const Dimensions d{100, 100};
    CHECK(synth::gen_mask(d, 1.0, 4).count() == 10000);
    const Mask m = synth::gen_mask(d, 0.3, 4);
    CHECK(m.count() == 3000);
    CHECK(synth::gen_mask(d, 0.3, 4) == m);
    CHECK_FALSE(synth::gen_mask(d, 0.3, 5) == m);
    CHECK_THROWS_AS(synth::gen_mask(d, 0.0, 4), Error);
    CHECK_THROWS_AS(synth::gen_mask(d, 1.5, 4), Error);
}

TEST_CASE("make_instance") {
    SUBCASE("no corruption, full sampling gives M = L") {
        const auto inst = synth::make_instance(fig1());
        CHECK(inst.observation.values() == inst.truth.low_rank);
        CHECK(inst.observation.mask().count() == 10000);
    }
    SUBCASE("ground truth consistency") {
        auto s = fig1(0.03);
        s.noise_delta = 2.0;
        s.sampling_rate = 0.5;
        const auto inst = synth::make_instance(s);
        const GroundTruth& t = inst.truth;
        const Matrix r = (t.low_rank + t.sparse) + t.noise;
        CHECK(r == t.corrupted());
        CHECK(ops::project(inst.observation.mask(), r) == inst.observation.values());
        CHECK(std::abs(t.noise.norm() - 2.0) < 1e-10);
        std::set<Entry> nonzero;
        for (Index c = 0; c < 100; ++c)
            for (Index rr = 0; rr < 100; ++rr)
                if (t.sparse(rr, c) != 0.0) nonzero.insert({rr, c});
        CHECK(nonzero == std::set<Entry>(t.support.begin(), t.support.end()));
        CHECK(inst.observation.mask().count() == 5000);

        const auto again = synth::make_instance(s);
        CHECK(again.observation.values() == inst.observation.values());
        CHECK(again.truth.noise == t.noise);
    }
    SUBCASE("anomalies flatten the spectrum") {
        const auto clean = synth::make_instance(fig1());
        const auto dirty = synth::make_instance(fig1(0.005));
        const double clean_top10 = metrics::energy_cdf(clean.truth.corrupted())[9];
        const double dirty_top10 = metrics::energy_cdf(dirty.truth.corrupted())[9];
        CHECK(clean_top10 == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(dirty_top10 < clean_top10 - 0.05);
    }
}

TEST_CASE("spec validation") {
    auto s = fig1();
    s.rank = 101;
    CHECK_THROWS_AS(s.validate(), Error);
    s = fig1();
    s.value_low = 5;
    s.value_high = 5;
    CHECK_THROWS_AS(s.validate(), Error);
    s = fig1();
    s.sampling_rate = 0;
    CHECK_THROWS_AS(s.validate(), Error);
}

TEST_CASE("derived seeds are distinct per stream and stable") {
    CHECK(synth::derive_seed(1, synth::Stream::LowRank) != synth::derive_seed(1, synth::Stream::Mask));
    CHECK(synth::derive_seed(1, synth::Stream::Mask) != synth::derive_seed(2, synth::Stream::Mask));
    CHECK(synth::derive_seed(7, synth::Stream::Noise) == synth::derive_seed(7, synth::Stream::Noise));
}
