#pragma once

#include <vector>

#include "json.hpp"

#include "lsdr/core.hpp"

namespace lsdr::theory {

struct Theorem1Report {
    double error = 0.0;  // pair error (||L^ - L||^2 + ||S^ - P_O(S)||^2)^(1/2)
    double bound = 0.0;
    Index n = 0;
    double p = 0.0;
    double delta = 0.0;
    bool within_bound = false;
};

/// Compares the recovered pair to the truth against the stable-recovery
/// bound with n = max(N,T), p = sampling rate, delta = ||Z||_F. Anomalies
/// at unobserved cells cannot be identified, so the sparse truth is masked.
Theorem1Report check_theorem1(const DecompositionResult& result, const GroundTruth& truth,
                              const Mask& mask);

struct Theorem2Point {
    int k = 0;
    double gap = 0.0;
    double envelope = 0.0;
    bool flagged = false;
};

struct Theorem2Report {
    std::vector<Theorem2Point> points;  // k = 2 .. trace.size() - 1
    int violations = 0;
};

/// For every k >= 2: gap_k = F(X_k) - F(X*) against 4 x_star_gap / k^2;
/// flags gap_k > envelope * (1 + 1e-6).
Theorem2Report check_theorem2(const std::vector<double>& trace, double f_star,
                              double x_star_gap);

/// Fixed-mu convergence experiment: mu is frozen at cfg.mu_initial, the
/// reference optimum is the iterate after reference_iterations steps.
struct Theorem2Experiment {
    Theorem2Report report;
    std::vector<double> trace;  // F(X_0) .. F(X_horizon)
    double f_star = 0.0;
    double x1_gap = 0.0;              // ||X_1 - X*||_F^2 on pairs
    double reference_rel_change = 0.0;  // last relative change of the reference run
    bool reference_valid = false;       // reference_rel_change < 1e-12
};

Theorem2Experiment run_theorem2_experiment(const ObservationMatrix& obs, SolverConfig cfg,
                                           int horizon = 500, int reference_iterations = 20000);

/// Smallest k with F(X_k) - f_star <= eps, or -1.
int first_iteration_within(const std::vector<double>& trace, double f_star, double eps);

void to_json(nlohmann::json& j, const Theorem1Report& r);
void to_json(nlohmann::json& j, const Theorem2Report& r);

}  // namespace lsdr::theory
