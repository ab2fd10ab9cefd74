#include "lsdr/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lsdr/ops.hpp"

namespace lsdr {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonCanonical: return "NonCanonical";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::NegativeThreshold: return "NegativeThreshold";
    case ErrorKind::SvdFailure: return "SvdFailure";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::DegenerateDimension: return "DegenerateDimension";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::ZeroTruth: return "ZeroTruth";
    case ErrorKind::ZeroMatrix: return "ZeroMatrix";
    case ErrorKind::MalformedLine: return "MalformedLine";
    case ErrorKind::MissingHeader: return "MissingHeader";
    case ErrorKind::UnknownNode: return "UnknownNode";
    case ErrorKind::InvalidFlag: return "InvalidFlag";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::MissingInput: return "MissingInput";
    case ErrorKind::OracleNeedsTruth: return "OracleNeedsTruth";
    }
    return "Unknown";
}

Dimensions Dimensions::make(Index rows, Index cols) {
    if (rows < 1 || cols < 1) {
        throw Error(ErrorKind::DimensionMismatch,
                    "dimensions must be positive, got " + std::to_string(rows) + "x" +
                        std::to_string(cols));
    }
    return Dimensions{rows, cols};
}

Mask::Mask(Dimensions dims, std::vector<Entry> observed)
    : dims_(Dimensions::make(dims.rows, dims.cols)), entries_(std::move(observed)) {
    for (const auto& e : entries_) {
        if (!dims_.contains(e.row, e.col)) {
            throw Error(ErrorKind::DimensionMismatch,
                        "mask entry (" + std::to_string(e.row) + "," + std::to_string(e.col) +
                            ") outside " + std::to_string(dims_.rows) + "x" +
                            std::to_string(dims_.cols));
        }
    }
    std::sort(entries_.begin(), entries_.end());
    entries_.erase(std::unique(entries_.begin(), entries_.end()), entries_.end());
    indicator_ = Matrix::Zero(dims_.rows, dims_.cols);
    for (const auto& e : entries_) indicator_(e.row, e.col) = 1.0;
}

Mask Mask::full(Dimensions dims) {
    std::vector<Entry> all;
    all.reserve(static_cast<std::size_t>(dims.size()));
    for (Index r = 0; r < dims.rows; ++r)
        for (Index c = 0; c < dims.cols; ++c) all.push_back({r, c});
    return Mask(dims, std::move(all));
}

Mask Mask::empty(Dimensions dims) { return Mask(dims, {}); }

Mask Mask::from_indicator(const Matrix& indicator) {
    std::vector<Entry> observed;
    for (Index r = 0; r < indicator.rows(); ++r)
        for (Index c = 0; c < indicator.cols(); ++c)
            if (indicator(r, c) != 0.0) observed.push_back({r, c});
    return Mask(Dimensions::of(indicator), std::move(observed));
}

double Mask::sampling_rate() const {
    return static_cast<double>(entries_.size()) / static_cast<double>(dims_.size());
}

bool Mask::contains(Index r, Index c) const {
    return dims_.contains(r, c) && indicator_(r, c) != 0.0;
}

Mask Mask::complement() const { return from_indicator(Matrix::Ones(dims_.rows, dims_.cols) - indicator_); }

Mask Mask::intersect(const Mask& other) const {
    if (!(dims_ == other.dims_)) throw Error(ErrorKind::DimensionMismatch, "mask shapes differ");
    return from_indicator(indicator_.cwiseProduct(other.indicator_));
}

void validate_observation(const Matrix& values, const Mask& mask) {
    if (values.rows() != mask.dims().rows || values.cols() != mask.dims().cols) {
        throw Error(ErrorKind::DimensionMismatch, "value grid and mask shapes differ");
    }
    if (!values.allFinite()) throw Error(ErrorKind::NonFinite, "observation contains NaN or Inf");
    const Matrix& ind = mask.indicator();
    for (Index c = 0; c < values.cols(); ++c) {
        for (Index r = 0; r < values.rows(); ++r) {
            if (ind(r, c) == 0.0 && values(r, c) != 0.0) {
                throw Error(ErrorKind::NonCanonical, "nonzero value at unobserved entry (" +
                                                         std::to_string(r) + "," +
                                                         std::to_string(c) + ")");
            }
        }
    }
}

ObservationMatrix::ObservationMatrix(Matrix values, Mask mask)
    : values_(std::move(values)), mask_(std::move(mask)) {
    validate_observation(values_, mask_);
}

ObservationMatrix canonicalize(const Matrix& values, const Mask& mask) {
    if (values.rows() != mask.dims().rows || values.cols() != mask.dims().cols) {
        throw Error(ErrorKind::DimensionMismatch, "value grid and mask shapes differ");
    }
    Matrix out = Matrix::Zero(values.rows(), values.cols());
    for (const auto& e : mask.entries()) {
        const double v = values(e.row, e.col);
        if (!std::isfinite(v)) {
            throw Error(ErrorKind::NonFinite, "non-finite value at observed entry (" +
                                                  std::to_string(e.row) + "," +
                                                  std::to_string(e.col) + ")");
        }
        out(e.row, e.col) = v;
    }
    return ObservationMatrix(std::move(out), mask);
}

void SolverConfig::validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidConfig, what); };
    if (!(lambda > 0.0)) fail("lambda must be positive");
    if (!(mu_initial > 0.0)) fail("mu_initial must be positive");
    if (!(mu_floor > 0.0)) fail("mu_floor must be positive");
    if (mu_floor > mu_initial) fail("mu_floor must not exceed mu_initial");
    if (!(continuation_factor > 0.0 && continuation_factor <= 1.0))
        fail("continuation_factor must lie in (0, 1]");
    if (max_iterations < 1) fail("max_iterations must be at least 1");
    if (!(objective_tolerance >= 0.0)) fail("objective_tolerance must be nonnegative");
}

SolverConfig resolve_config(const ObservationMatrix& obs, const SolverOptions& options) {
    SolverConfig cfg;
    cfg.lambda = options.lambda.value_or(1.0 / std::sqrt(static_cast<double>(obs.dims().n())));
    if (options.mu_initial) {
        cfg.mu_initial = *options.mu_initial;
    } else {
        const double spectral = ops::spectral_norm(obs.values());
        // All-zero input: any positive mu gives the zero minimizer.
        cfg.mu_initial = spectral > 0.0 ? 0.99 * spectral : 1.0;
    }
    cfg.mu_floor = options.mu_floor_ratio * cfg.mu_initial;
    cfg.continuation_factor = options.continuation_factor;
    cfg.max_iterations = options.max_iterations;
    cfg.objective_tolerance = options.objective_tolerance;
    cfg.seed = options.seed;
    cfg.sparse_init = options.sparse_init;
    cfg.validate();
    return cfg;
}

}  // namespace lsdr
