#include "doctest.h"

#include <cmath>
#include <random>

#include "lsdr/baselines.hpp"
#include "lsdr/metrics.hpp"
#include "lsdr/ops.hpp"
#include "lsdr/solver.hpp"
#include "lsdr/synth.hpp"
#include "oracles.hpp"

using namespace lsdr;

namespace {

Matrix m2(double a, double b, double c, double d) {
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

synth::Instance fig1_instance(std::uint64_t seed, double sampling, double anomalies,
                              double noise = 0.0) {
    synth::SynthSpec spec;
    spec.sampling_rate = sampling;
    spec.anomaly_ratio = anomalies;
    spec.noise_delta = noise;
    spec.seed = seed;
    return synth::make_instance(spec);
}

// Smooth rank-2 field on a 40x60 grid.
Matrix smooth_field() {
    const Index n = 40, t = 60;
    Matrix l(n, t);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < t; ++j)
            l(i, j) = 20.0 + 5.0 * std::sin(M_PI * i / n) * std::cos(M_PI * j / t) +
                      3.0 * std::cos(2.0 * M_PI * i / n) * std::sin(M_PI * j / t);
    return l;
}

}  // namespace

TEST_CASE("difference operators") {
    const Matrix c = Matrix::Constant(3, 4, 2.5);
    CHECK(baselines::diff_horizontal(c) == Matrix::Zero(3, 3));
    CHECK(baselines::diff_vertical(c) == Matrix::Zero(2, 4));

    const Matrix l = m2(1, 3, 2, 5);
    Matrix dx(2, 1);
    dx << 2, 3;
    Matrix dy(1, 2);
    dy << 1, 2;
    CHECK(baselines::diff_horizontal(l) == dx);
    CHECK(baselines::diff_vertical(l) == dy);

    Matrix ramp(3, 5);
    for (Index i = 0; i < 3; ++i)
        for (Index j = 0; j < 5; ++j) ramp(i, j) = double(j);
    CHECK(baselines::diff_horizontal(ramp) == Matrix::Ones(3, 4));
    CHECK(baselines::diff_vertical(ramp) == Matrix::Zero(2, 5));

    CHECK_THROWS_AS(baselines::diff_horizontal(Matrix::Zero(3, 1)), Error);
    CHECK_THROWS_AS(baselines::diff_vertical(Matrix::Zero(1, 3)), Error);
}

TEST_CASE("smooth_penalty examples") {
    CHECK(baselines::smooth_penalty(Matrix::Constant(4, 4, 7.0)) == 0.0);
    CHECK(baselines::smooth_penalty(m2(1, 3, 2, 5)) == 18.0);
    Matrix board(4, 4);
    for (Index i = 0; i < 4; ++i)
        for (Index j = 0; j < 4; ++j) board(i, j) = ((i + j) % 2 == 0) ? 1.0 : -1.0;
    // 12 horizontal and 12 vertical neighbour pairs, each differing by 2.
    CHECK(baselines::smooth_penalty(board) == 96.0);
    try {
        baselines::smooth_penalty(Matrix::Zero(1, 4));
        FAIL("expected DegenerateDimension");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateDimension);
    }
}

TEST_CASE("smooth_penalty is transpose invariant") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix l = oracle::random_matrix(3 + trial % 4, 2 + trial % 5, rng);
        CHECK(baselines::smooth_penalty(l) ==
              doctest::Approx(baselines::smooth_penalty(l.transpose())).epsilon(1e-14));
        CHECK(baselines::diff_horizontal(l).transpose() == baselines::diff_vertical(l.transpose()));
    }
}

TEST_CASE("smooth_penalty gradient matches central finite differences") {
    std::mt19937_64 rng(43);
    const double h = 1e-6;
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix l = oracle::random_matrix(5, 5, rng, -3, 3);
        const Matrix g = baselines::smooth_penalty_gradient(l);
        for (Index i = 0; i < 5; ++i) {
            for (Index j = 0; j < 5; ++j) {
                Matrix plus = l, minus = l;
                plus(i, j) += h;
                minus(i, j) -= h;
                const double fd =
                    (baselines::smooth_penalty(plus) - baselines::smooth_penalty(minus)) / (2 * h);
                CHECK(std::abs(fd - g(i, j)) <= 1e-5 * std::max(1.0, std::abs(g(i, j))));
            }
        }
    }
}

TEST_CASE("solve_mc exact completion at 30% sampling") {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto inst = fig1_instance(seed, 0.3, 0.0);
        const auto res = baselines::solve_mc(inst.observation, resolve_config(inst.observation));
        CHECK(metrics::relative_error(res.l_hat, inst.truth.low_rank) < 1e-3);
        CHECK(res.s_hat == Matrix::Zero(100, 100));
        CHECK(res.iterations <= 1000);
    }
}

TEST_CASE("solve_mc reproduces a fully observed matrix as the floor shrinks") {
    std::mt19937_64 rng(47);
    const Matrix m = oracle::random_matrix(12, 9, rng, -5, 5);
    const auto obs = canonicalize(m, Mask::full(Dimensions::of(m)));
    SolverOptions opt;
    opt.mu_floor_ratio = 1e-9;
    opt.max_iterations = 2000;
    const auto res = baselines::solve_mc(obs, resolve_config(obs, opt));
    CHECK(metrics::relative_error(res.l_hat, m) < 1e-6);
}

TEST_CASE("solve_mc equals solve_lsd with an unreachable sparse threshold") {
    const auto inst = fig1_instance(5, 0.5, 0.03);
    SolverOptions opt;
    opt.max_iterations = 60;
    SolverConfig cfg = resolve_config(inst.observation, opt);
    const auto mc = baselines::solve_mc(inst.observation, cfg);
    cfg.lambda = 1e300;
    const auto lsd = solver::solve_lsd(inst.observation, cfg);
    CHECK(lsd.s_hat == Matrix::Zero(100, 100));
    CHECK(lsd.l_hat == mc.l_hat);
    CHECK(lsd.objective_trace == mc.objective_trace);
}

TEST_CASE("anomalies degrade MC but not LSD") {
    double mc_total = 0.0, lsd_total = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto inst = fig1_instance(seed, 0.6, 0.03);
        const auto cfg = resolve_config(inst.observation);
        mc_total += metrics::nse(baselines::solve_mc(inst.observation, cfg).l_hat, inst.truth.low_rank);
        lsd_total += metrics::nse(solver::solve_lsd(inst.observation, cfg).l_hat, inst.truth.low_rank);
    }
    CHECK(mc_total > lsd_total);
}

TEST_CASE("solve_srmf with zero weight follows the MC trajectory") {
    const auto inst = fig1_instance(6, 0.4, 0.01);
    SolverOptions opt;
    opt.max_iterations = 80;
    const auto cfg = resolve_config(inst.observation, opt);
    const auto mc = baselines::solve_mc(inst.observation, cfg);
    const auto srmf = baselines::solve_srmf(inst.observation, cfg, 0.0);
    CHECK(srmf.objective_trace == mc.objective_trace);
    CHECK(srmf.l_hat == mc.l_hat);
    CHECK(srmf.s_hat == Matrix::Zero(100, 100));
}

TEST_CASE("SRMF helps on smooth fields and hurts on anomalous ones") {
    SUBCASE("smooth field with a block of missing slots") {
        const Matrix l = smooth_field();
        double srmf_total = 0.0, mc_total = 0.0;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            Mask sampled = synth::gen_mask(Dimensions::of(l), 0.3, seed);
            Matrix ind = sampled.indicator();
            ind.middleCols(25, 5).setZero();  // outage: five slots lost on every node
            const auto obs = canonicalize(l, Mask::from_indicator(ind));
            const auto cfg = resolve_config(obs);
            srmf_total += metrics::nse(baselines::solve_srmf(obs, cfg).l_hat, l);
            mc_total += metrics::nse(baselines::solve_mc(obs, cfg).l_hat, l);
        }
        CHECK(srmf_total < mc_total);
    }
    SUBCASE("anomaly-laden field at 30% sampling") {
        double srmf_total = 0.0, mc_total = 0.0;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            const auto inst = fig1_instance(seed, 0.3, 0.03);
            const auto cfg = resolve_config(inst.observation);
            srmf_total += metrics::nse(baselines::solve_srmf(inst.observation, cfg).l_hat, inst.truth.low_rank);
            mc_total += metrics::nse(baselines::solve_mc(inst.observation, cfg).l_hat, inst.truth.low_rank);
        }
        CHECK(srmf_total > mc_total);
    }
}

TEST_CASE("tangent projection is idempotent and self-adjoint") {
    std::mt19937_64 rng(53);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix u = Eigen::HouseholderQR<Matrix>(oracle::random_matrix(8, 3, rng)).householderQ() *
                         Matrix::Identity(8, 3);
        const Matrix v = Eigen::HouseholderQR<Matrix>(oracle::random_matrix(6, 3, rng)).householderQ() *
                         Matrix::Identity(6, 3);
        const Matrix x = oracle::random_matrix(8, 6, rng);
        const Matrix y = oracle::random_matrix(8, 6, rng);
        const Matrix px = baselines::project_tangent(x, u, v);
        CHECK((baselines::project_tangent(px, u, v) - px).norm() < 1e-12);
        CHECK(px.cwiseProduct(y).sum() ==
              doctest::Approx(x.cwiseProduct(baselines::project_tangent(y, u, v)).sum()).epsilon(1e-12));
    }
}

TEST_CASE("oracle spec validation") {
    const Dimensions d{4, 3};
    CHECK_THROWS_AS(baselines::OracleSpec(d, {}, Matrix::Ones(4, 1), Matrix::Ones(3, 1)), Error);
    CHECK_THROWS_AS(baselines::OracleSpec(d, {{5, 0}}, Matrix::Identity(4, 1), Matrix::Identity(3, 1)),
                    Error);
    CHECK_NOTHROW(baselines::OracleSpec(d, {{1, 2}}, Matrix::Identity(4, 1), Matrix::Identity(3, 1)));
}

TEST_CASE("solve_oracle examples") {
    SUBCASE("noiseless truth is feasible and optimal") {
        const auto inst = fig1_instance(7, 0.5, 0.03);
        const auto spec = baselines::OracleSpec::from_truth(inst.truth);
        const auto res = baselines::solve_oracle(inst.observation, spec);
        const Matrix residual =
            ops::project(inst.observation.mask(), inst.observation.values() - res.l_hat - res.s_hat);
        CHECK(residual.norm() < 1e-8);
        CHECK(metrics::nse(res.l_hat, inst.truth.low_rank) < 1e-12);
        for (std::size_t k = 1; k < res.objective_trace.size(); ++k) {
            CHECK(res.objective_trace[k] <= res.objective_trace[k - 1] * (1.0 + 1e-12) + 1e-12);
        }
    }
    SUBCASE("empty support and full observation give P_T(M)") {
        std::mt19937_64 rng(59);
        const Matrix m = oracle::random_matrix(7, 5, rng);
        const auto obs = canonicalize(m, Mask::full(Dimensions{7, 5}));
        const Matrix u = Eigen::HouseholderQR<Matrix>(oracle::random_matrix(7, 2, rng)).householderQ() *
                         Matrix::Identity(7, 2);
        const Matrix v = Eigen::HouseholderQR<Matrix>(oracle::random_matrix(5, 2, rng)).householderQ() *
                         Matrix::Identity(5, 2);
        const auto res = baselines::solve_oracle(obs, baselines::OracleSpec(Dimensions{7, 5}, {}, u, v));
        CHECK((res.l_hat - baselines::project_tangent(m, u, v)).norm() < 1e-12);
        CHECK(res.s_hat == Matrix::Zero(7, 5));
    }
    SUBCASE("sweep cap raises NonConvergence") {
        const auto inst = fig1_instance(8, 0.3, 0.03, 5.0);
        baselines::OracleControls ctl;
        ctl.max_sweeps = 1;
        try {
            baselines::solve_oracle(inst.observation, baselines::OracleSpec::from_truth(inst.truth), ctl);
            FAIL("expected NonConvergence");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::NonConvergence);
        }
    }
}

TEST_CASE("recovery ordering oracle <= lsd <= mc on noisy corrupted data") {
    double oracle_total = 0.0, lsd_total = 0.0, mc_total = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto inst = fig1_instance(seed, 0.5, 0.03, 10.0);
        const auto cfg = resolve_config(inst.observation);
        const auto& truth = inst.truth.low_rank;
        oracle_total += metrics::nse(
            baselines::solve_oracle(inst.observation, baselines::OracleSpec::from_truth(inst.truth)).l_hat,
            truth);
        lsd_total += metrics::nse(solver::solve_lsd(inst.observation, cfg).l_hat, truth);
        mc_total += metrics::nse(baselines::solve_mc(inst.observation, cfg).l_hat, truth);
    }
    CHECK(oracle_total <= lsd_total);
    CHECK(lsd_total <= mc_total);
}
