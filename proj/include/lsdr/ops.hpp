#pragma once

#include "lsdr/core.hpp"

namespace lsdr::ops {

/// Singular values sorted nonincreasing, length min(N, T).
class SingularSpectrum {
public:
    SingularSpectrum() = default;
    /// Throws DimensionMismatch if values are negative or not sorted.
    explicit SingularSpectrum(Vector values);

    const Vector& values() const { return values_; }
    Index size() const { return values_.size(); }
    double largest() const { return values_.size() ? values_(0) : 0.0; }
    double sum() const { return values_.sum(); }

private:
    Vector values_;
};

/// Thin SVD x = U diag(s) V^T.
struct Svd {
    Matrix u;
    SingularSpectrum spectrum;
    Matrix v;
};

Svd svd(const Matrix& x);
SingularSpectrum singular_values(const Matrix& x);

Matrix project(const Mask& mask, const Matrix& x);

/// Element-wise shrinkage: x - eps above eps, x + eps below -eps, 0 otherwise.
Matrix soft_threshold(const Matrix& x, double eps);

struct SvtResult {
    Matrix value;
    SingularSpectrum spectrum;  // of the input, before thresholding
    double nuclear_norm = 0.0;  // of value, sum_i max(sigma_i - tau, 0)
};

/// Singular value thresholding, the proximal map of tau * ||.||_*.
SvtResult svt(const Matrix& x, double tau);

double nuclear_norm(const Matrix& x);
double l1_norm(const Matrix& x);
double frobenius_norm(const Matrix& x);
double spectral_norm(const Matrix& x);

/// mu ||L||_* + mu lambda ||S||_1 + 1/2 ||P_O(M - L - S)||_F^2
double objective(const Matrix& l, const Matrix& s, const ObservationMatrix& obs,
                 double mu, double lambda);

}  // namespace lsdr::ops
