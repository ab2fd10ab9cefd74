#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "lsdr/core.hpp"

namespace lsdr::metrics {

/// Normalized square error sum (est - truth)^2 / sum truth^2.
double nse(const Matrix& estimate, const Matrix& truth);

/// ||est - truth||_F / ||truth||_F
double relative_error(const Matrix& estimate, const Matrix& truth);

/// Entry K-1 is the fraction of the singular value sum captured by the top K
/// singular values.
std::vector<double> energy_cdf(const Matrix& x);

/// Per-row fraction of unobserved slots.
std::vector<double> loss_rate_per_node(const Mask& mask);

/// (8n sqrt(40n + 40n/p + 5) + sqrt(2)) * delta
double theorem1_bound(Index n, double p, double delta);

/// 4 * gap / k^2, with gap = ||X1 - X*||_F^2.
double theorem2_envelope(double x1_gap, int k);

struct Incoherence {
    double column_score = 0.0;  // (N/r) max_i ||U^T e_i||^2
    double row_score = 0.0;     // (T/r) max_j ||V^T e_j||^2
};

/// Diagnostic only: how spread out the top-r singular vectors are. Both
/// scores lie in [1, N/r] and [1, T/r]; 1 is perfectly spread.
Incoherence incoherence_score(const Matrix& l, Index rank);

/// Flat record {metric, params, value} used by the CLI reports.
struct MetricRecord {
    std::string metric;
    nlohmann::json params = nlohmann::json::object();
    double value = 0.0;
};

void to_json(nlohmann::json& j, const MetricRecord& r);
void from_json(const nlohmann::json& j, MetricRecord& r);

}  // namespace lsdr::metrics
