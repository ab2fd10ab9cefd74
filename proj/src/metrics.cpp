#include "lsdr/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "lsdr/ops.hpp"

namespace lsdr::metrics {
namespace {

void require_same_shape(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw Error(ErrorKind::DimensionMismatch, "estimate and truth shapes differ");
    }
}

}  // namespace

double nse(const Matrix& estimate, const Matrix& truth) {
    require_same_shape(estimate, truth);
    const double denom = truth.squaredNorm();
    if (denom == 0.0) throw Error(ErrorKind::ZeroTruth, "NSE undefined for all-zero truth");
    return (estimate - truth).squaredNorm() / denom;
}

double relative_error(const Matrix& estimate, const Matrix& truth) {
    require_same_shape(estimate, truth);
    const double denom = truth.norm();
    if (denom == 0.0) throw Error(ErrorKind::ZeroTruth, "relative error undefined for zero truth");
    return (estimate - truth).norm() / denom;
}

std::vector<double> energy_cdf(const Matrix& x) {
    const ops::SingularSpectrum spectrum = ops::singular_values(x);
    const double total = spectrum.sum();
    if (total == 0.0) throw Error(ErrorKind::ZeroMatrix, "energy CDF undefined for zero matrix");
    std::vector<double> cdf;
    cdf.reserve(static_cast<std::size_t>(spectrum.size()));
    double running = 0.0;
    for (Index i = 0; i < spectrum.size(); ++i) {
        running += spectrum.values()(i);
        cdf.push_back(std::min(1.0, running / total));
    }
    cdf.back() = 1.0;
    return cdf;
}

std::vector<double> loss_rate_per_node(const Mask& mask) {
    const Index t = mask.dims().cols;
    std::vector<double> rates;
    rates.reserve(static_cast<std::size_t>(mask.dims().rows));
    const Vector observed = mask.indicator().rowwise().sum();
    for (Index i = 0; i < observed.size(); ++i) {
        rates.push_back((static_cast<double>(t) - observed(i)) / static_cast<double>(t));
    }
    return rates;
}

double theorem1_bound(Index n, double p, double delta) {
    if (n < 1 || !(p > 0.0 && p <= 1.0) || !(delta >= 0.0)) {
        throw Error(ErrorKind::InvalidConfig, "theorem1_bound needs n >= 1, p in (0,1], delta >= 0");
    }
    const double nn = static_cast<double>(n);
    return (8.0 * nn * std::sqrt(40.0 * nn + 40.0 * nn / p + 5.0) + std::sqrt(2.0)) * delta;
}

double theorem2_envelope(double x1_gap, int k) {
    if (k < 1 || !(x1_gap >= 0.0)) {
        throw Error(ErrorKind::InvalidConfig, "theorem2_envelope needs k >= 1 and gap >= 0");
    }
    const double kk = static_cast<double>(k);
    return 4.0 * x1_gap / (kk * kk);
}

Incoherence incoherence_score(const Matrix& l, Index rank) {
    if (rank < 1 || rank > std::min(l.rows(), l.cols())) {
        throw Error(ErrorKind::InvalidConfig, "rank must lie in [1, min(N,T)]");
    }
    const ops::Svd f = ops::svd(l);
    const double r = static_cast<double>(rank);
    Incoherence out;
    out.column_score = static_cast<double>(l.rows()) / r *
                       f.u.leftCols(rank).rowwise().squaredNorm().maxCoeff();
    out.row_score = static_cast<double>(l.cols()) / r *
                    f.v.leftCols(rank).rowwise().squaredNorm().maxCoeff();
    return out;
}

void to_json(nlohmann::json& j, const MetricRecord& r) {
    j = nlohmann::json{{"metric", r.metric}, {"params", r.params}, {"value", r.value}};
}

void from_json(const nlohmann::json& j, MetricRecord& r) {
    j.at("metric").get_to(r.metric);
    r.params = j.value("params", nlohmann::json::object());
    j.at("value").get_to(r.value);
}

}  // namespace lsdr::metrics
