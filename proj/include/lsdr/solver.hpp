#pragma once

#include "lsdr/core.hpp"

namespace lsdr::solver {

/// Iterate of the accelerated proximal gradient method. l_prev/s_prev hold
/// the previous iterate for momentum; objective is F at (l_curr, s_curr)
/// evaluated with the mu that produced it.
struct ApgState {
    Matrix l_curr;
    Matrix l_prev;
    Matrix s_curr;
    Matrix s_prev;
    double t_curr = 1.0;
    double t_prev = 1.0;
    double mu = 1.0;
    int iteration = 0;
    double objective = 0.0;
    double mu_used = 1.0;  // mu of the last prox step, or mu0 at k = 0
};

/// Which blocks of the pair (L, S) the step updates. LowRankOnly pins S at
/// zero and is the matrix-completion baseline.
enum class Model { LowRankPlusSparse, LowRankOnly };

/// L0 = L-1 = 0, S0 = S-1 = 0 (or all ones with SparseInit::Ones), t = 1.
ApgState init_state(const ObservationMatrix& obs, const SolverConfig& cfg,
                    Model model = Model::LowRankPlusSparse);

/// One accelerated proximal gradient iteration with Lipschitz constant 2:
/// momentum extrapolation, a shared half-step on the masked residual, SVT on
/// the low-rank block with mu/2, soft thresholding on the sparse block with
/// lambda*mu/2, then the t and mu updates.
ApgState step(const ApgState& state, const ObservationMatrix& obs, const SolverConfig& cfg,
              Model model = Model::LowRankPlusSparse);

/// (1 + sqrt(4t^2 + 1)) / 2
double update_t(double t);

/// max(eta * mu, mu_floor)
double update_mu(double mu, const SolverConfig& cfg);

/// Relative objective change test; only armed once mu has settled at the
/// floor on both sides of the step, since F is not comparable across mu.
bool objective_settled(double previous, double current, double mu_before, double mu_after,
                       const SolverConfig& cfg);

/// Full solve of min ||L||_* + lambda ||S||_1 over the masked fit. The
/// returned s_hat is projected onto the mask.
DecompositionResult solve_lsd(const ObservationMatrix& obs, const SolverConfig& cfg);

/// Shared driver for both models.
DecompositionResult run(const ObservationMatrix& obs, const SolverConfig& cfg, Model model);

}  // namespace lsdr::solver
