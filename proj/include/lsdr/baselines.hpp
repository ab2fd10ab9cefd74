#pragma once

#include <vector>

#include "lsdr/core.hpp"

namespace lsdr::baselines {

/// Nuclear-norm matrix completion: the APG solver with S pinned at zero.
DecompositionResult solve_mc(const ObservationMatrix& obs, const SolverConfig& cfg);

/// D_x(i, j) = L(i, j+1) - L(i, j); requires T >= 2.
Matrix diff_horizontal(const Matrix& l);
/// D_y(i, j) = L(i+1, j) - L(i, j); requires N >= 2.
Matrix diff_vertical(const Matrix& l);

/// ||D_x L||_F^2 + ||D_y L||_F^2
double smooth_penalty(const Matrix& l);

/// Gradient of smooth_penalty: 2 (D_x^T D_x + D_y^T D_y) L, i.e. twice the
/// grid-graph Laplacian of L.
Matrix smooth_penalty_gradient(const Matrix& l);

inline constexpr double kDefaultSmoothWeight = 0.01;

/// Smoothness-regularized completion: nuclear norm plus smooth_weight times
/// the spatio-temporal difference penalty, solved by accelerated proximal
/// gradient. s_hat is zero. With smooth_weight = 0 the iterates coincide
/// with solve_mc.
DecompositionResult solve_srmf(const ObservationMatrix& obs, const SolverConfig& cfg,
                               double smooth_weight = kDefaultSmoothWeight);

/// Known anomaly support and low-rank row/column spaces.
class OracleSpec {
public:
    /// Throws DimensionMismatch unless the bases are orthonormal within 1e-10
    /// and the support lies inside dims.
    OracleSpec(Dimensions dims, std::vector<Entry> support, Matrix col_basis, Matrix row_basis);

    /// Support of S and the top-rank singular subspaces of L.
    static OracleSpec from_truth(const GroundTruth& truth);

    const Dimensions& dims() const { return dims_; }
    const std::vector<Entry>& support() const { return support_; }
    const Matrix& col_basis() const { return col_basis_; }
    const Matrix& row_basis() const { return row_basis_; }

private:
    Dimensions dims_;
    std::vector<Entry> support_;
    Matrix col_basis_;
    Matrix row_basis_;
};

/// P_T(X) = UU^T X + X VV^T - UU^T X VV^T
Matrix project_tangent(const Matrix& x, const Matrix& col_basis, const Matrix& row_basis);

struct OracleControls {
    double tolerance = 1e-10;
    int max_sweeps = 10000;
};

/// Least squares min ||P_O(M - L - S)||_F over L in T and supp(S) inside the
/// known support intersected with the mask, by alternating projections.
/// Throws NonConvergence when the sweep cap is reached. The objective trace
/// holds the residual norm after every sweep.
DecompositionResult solve_oracle(const ObservationMatrix& obs, const OracleSpec& spec,
                                 const OracleControls& controls = {});

}  // namespace lsdr::baselines
