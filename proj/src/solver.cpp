#include "lsdr/solver.hpp"

#include <algorithm>
#include <cmath>

#include "lsdr/ops.hpp"

namespace lsdr::solver {
namespace {

constexpr double kLipschitz = 2.0;

}  // namespace

double update_t(double t) { return (1.0 + std::sqrt(4.0 * t * t + 1.0)) / 2.0; }

double update_mu(double mu, const SolverConfig& cfg) {
    return std::max(cfg.continuation_factor * mu, cfg.mu_floor);
}

ApgState init_state(const ObservationMatrix& obs, const SolverConfig& cfg, Model model) {
    const Index rows = obs.dims().rows;
    const Index cols = obs.dims().cols;
    ApgState st;
    st.l_curr = Matrix::Zero(rows, cols);
    st.l_prev = st.l_curr;
    if (cfg.sparse_init == SparseInit::Ones && model == Model::LowRankPlusSparse) {
        st.s_curr = Matrix::Ones(rows, cols);
    } else {
        st.s_curr = Matrix::Zero(rows, cols);
    }
    st.s_prev = st.s_curr;
    st.t_curr = 1.0;
    st.t_prev = 1.0;
    st.mu = cfg.mu_initial;
    st.mu_used = cfg.mu_initial;
    st.iteration = 0;
    st.objective = 0.5 * ops::project(obs.mask(), obs.values() - st.l_curr - st.s_curr).squaredNorm() +
                   cfg.mu_initial * cfg.lambda * ops::l1_norm(st.s_curr);
    return st;
}

ApgState step(const ApgState& state, const ObservationMatrix& obs, const SolverConfig& cfg,
              Model model) {
    const double momentum = (state.t_prev - 1.0) / state.t_curr;
    const Matrix y_l = state.l_curr + momentum * (state.l_curr - state.l_prev);
    const Matrix y_s = state.s_curr + momentum * (state.s_curr - state.s_prev);

    const Matrix half_grad = (1.0 / kLipschitz) * ops::project(obs.mask(), y_l + y_s - obs.values());

    const double mu = state.mu;
    ops::SvtResult low = ops::svt(y_l - half_grad, mu / kLipschitz);

    ApgState next;
    next.l_prev = state.l_curr;
    next.s_prev = state.s_curr;
    next.l_curr = std::move(low.value);
    if (model == Model::LowRankPlusSparse) {
        next.s_curr = ops::soft_threshold(y_s - half_grad, cfg.lambda * mu / kLipschitz);
    } else {
        next.s_curr = Matrix::Zero(obs.dims().rows, obs.dims().cols);
    }
    next.t_prev = state.t_curr;
    next.t_curr = update_t(state.t_curr);
    next.mu_used = mu;
    next.mu = update_mu(mu, cfg);
    next.iteration = state.iteration + 1;

    const double residual =
        ops::project(obs.mask(), obs.values() - next.l_curr - next.s_curr).squaredNorm();
    next.objective = mu * low.nuclear_norm + mu * cfg.lambda * ops::l1_norm(next.s_curr) +
                     0.5 * residual;
    return next;
}

bool objective_settled(double previous, double current, double mu_before, double mu_after,
                       const SolverConfig& cfg) {
    if (mu_before != cfg.mu_floor || mu_after != cfg.mu_floor) return false;
    return std::abs(current - previous) / std::max(1.0, previous) < cfg.objective_tolerance;
}

DecompositionResult run(const ObservationMatrix& obs, const SolverConfig& cfg, Model model) {
    cfg.validate();
    ApgState st = init_state(obs, cfg, model);

    DecompositionResult result;
    result.objective_trace.reserve(static_cast<std::size_t>(cfg.max_iterations) + 1);
    result.objective_trace.push_back(st.objective);
    while (st.iteration < cfg.max_iterations) {
        const double prev_objective = st.objective;
        const double prev_mu = st.mu_used;
        st = step(st, obs, cfg, model);
        result.objective_trace.push_back(st.objective);
        if (st.iteration > 1 &&
            objective_settled(prev_objective, st.objective, prev_mu, st.mu_used, cfg)) {
            result.converged = true;
            break;
        }
    }
    result.iterations = st.iteration;
    result.l_hat = std::move(st.l_curr);
    result.s_hat = ops::project(obs.mask(), st.s_curr);
    return result;
}

DecompositionResult solve_lsd(const ObservationMatrix& obs, const SolverConfig& cfg) {
    return run(obs, cfg, Model::LowRankPlusSparse);
}

}  // namespace lsdr::solver
