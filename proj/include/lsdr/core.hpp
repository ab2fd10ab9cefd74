#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstdint>
#include <optional>
#include <vector>

#include "lsdr/error.hpp"

namespace lsdr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Shape of a node-by-slot data matrix: rows are sensor nodes (N), columns
/// are time slots (T).
struct Dimensions {
    Index rows = 1;
    Index cols = 1;

    /// Throws DimensionMismatch unless both extents are positive.
    static Dimensions make(Index rows, Index cols);
    static Dimensions of(const Matrix& m) { return make(m.rows(), m.cols()); }

    /// n = max(N, T), the size parameter used by the recovery guarantees.
    Index n() const { return rows > cols ? rows : cols; }
    Index size() const { return rows * cols; }
    bool contains(Index r, Index c) const { return r >= 0 && c >= 0 && r < rows && c < cols; }

    friend bool operator==(const Dimensions&, const Dimensions&) = default;
};

struct Entry {
    Index row = 0;
    Index col = 0;

    friend auto operator<=>(const Entry&, const Entry&) = default;
};

/// Observed index set. The sorted entry list is authoritative; the dense 0/1
/// indicator is derived from it so that projection is an element-wise product.
class Mask {
public:
    /// Entries are sorted row-major and deduplicated. Throws DimensionMismatch
    /// when an entry lies outside dims.
    Mask(Dimensions dims, std::vector<Entry> observed);

    static Mask full(Dimensions dims);
    static Mask empty(Dimensions dims);
    /// Every nonzero cell of the indicator becomes an observed entry.
    static Mask from_indicator(const Matrix& indicator);

    const Dimensions& dims() const { return dims_; }
    const std::vector<Entry>& entries() const { return entries_; }
    const Matrix& indicator() const { return indicator_; }

    std::size_t count() const { return entries_.size(); }
    double sampling_rate() const;
    bool contains(Index r, Index c) const;

    Mask complement() const;
    Mask intersect(const Mask& other) const;

    friend bool operator==(const Mask& a, const Mask& b) {
        return a.dims_ == b.dims_ && a.entries_ == b.entries_;
    }

private:
    Dimensions dims_;
    std::vector<Entry> entries_;
    Matrix indicator_;
};

/// Checks the canonical-form invariants of an observation: values shaped like
/// the mask, all finite, zero off the mask.
void validate_observation(const Matrix& values, const Mask& mask);

/// Partially observed data matrix M = P_O(R) with its mask.
class ObservationMatrix {
public:
    /// Validates; use canonicalize() to build one from an arbitrary grid.
    ObservationMatrix(Matrix values, Mask mask);

    const Matrix& values() const { return values_; }
    const Mask& mask() const { return mask_; }
    const Dimensions& dims() const { return mask_.dims(); }

private:
    Matrix values_;
    Mask mask_;
};

/// Zeroes every off-mask entry; masked entries are copied bit-exactly.
/// Throws NonFinite if a masked entry is NaN or infinite.
ObservationMatrix canonicalize(const Matrix& values, const Mask& mask);

/// Synthetic truth R = L + S + Z with the anomaly support.
struct GroundTruth {
    Matrix low_rank;
    Matrix sparse;
    Matrix noise;
    std::vector<Entry> support;
    Index rank = 0;

    Dimensions dims() const { return Dimensions::of(low_rank); }
    /// (L + S) + Z, evaluated in that order.
    Matrix corrupted() const { return (low_rank + sparse) + noise; }
    double noise_level() const { return noise.norm(); }
};

enum class SparseInit { Zero, Ones };

/// Resolved parameters of the accelerated proximal gradient solvers.
struct SolverConfig {
    double lambda = 0.1;
    double mu_initial = 1.0;
    double mu_floor = 1e-4;
    double continuation_factor = 0.9;
    int max_iterations = 1000;
    double objective_tolerance = 1e-7;
    std::uint64_t seed = 0;
    SparseInit sparse_init = SparseInit::Zero;

    /// Throws InvalidConfig on violated invariants.
    void validate() const;
};

/// User-facing solver knobs; unset fields resolve to data-dependent defaults.
struct SolverOptions {
    std::optional<double> lambda;
    std::optional<double> mu_initial;
    double mu_floor_ratio = 1e-4;
    double continuation_factor = 0.9;
    int max_iterations = 1000;
    double objective_tolerance = 1e-7;
    std::uint64_t seed = 0;
    SparseInit sparse_init = SparseInit::Zero;
};

/// lambda = 1/sqrt(max(N,T)); mu0 = 0.99 * ||P_O(M)||_2; mu_floor = ratio * mu0.
SolverConfig resolve_config(const ObservationMatrix& obs, const SolverOptions& options = {});

struct DecompositionResult {
    Matrix l_hat;
    Matrix s_hat;
    int iterations = 0;
    std::vector<double> objective_trace;
    bool converged = false;
};

}  // namespace lsdr
