#include "lsdr/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lsdr::ops {
namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw Error(ErrorKind::DimensionMismatch, std::string(what) + ": shape mismatch");
    }
}

Svd decompose(const Matrix& x, bool with_vectors) {
    if (!x.allFinite()) throw Error(ErrorKind::NonFinite, "svd input contains NaN or Inf");
    const unsigned options = with_vectors ? (Eigen::ComputeThinU | Eigen::ComputeThinV) : 0u;
    Eigen::BDCSVD<Matrix> f(x, options);
    if (f.info() != Eigen::Success) throw Error(ErrorKind::SvdFailure, "SVD did not converge");
    Svd out;
    if (with_vectors) {
        out.u = f.matrixU();
        out.v = f.matrixV();
    }
    out.spectrum = SingularSpectrum(f.singularValues());
    return out;
}

}  // namespace

SingularSpectrum::SingularSpectrum(Vector values) : values_(std::move(values)) {
    for (Index i = 0; i < values_.size(); ++i) {
        if (!(values_(i) >= 0.0) || (i > 0 && values_(i) > values_(i - 1))) {
            throw Error(ErrorKind::DimensionMismatch,
                        "singular spectrum must be nonnegative and nonincreasing");
        }
    }
}

Svd svd(const Matrix& x) { return decompose(x, true); }

SingularSpectrum singular_values(const Matrix& x) { return decompose(x, false).spectrum; }

Matrix project(const Mask& mask, const Matrix& x) {
    require_same_shape(mask.indicator(), x, "project");
    return x.cwiseProduct(mask.indicator());
}

Matrix soft_threshold(const Matrix& x, double eps) {
    if (!(eps >= 0.0)) throw Error(ErrorKind::NegativeThreshold, "threshold must be nonnegative");
    return x.unaryExpr([eps](double v) {
        if (v > eps) return v - eps;
        if (v < -eps) return v + eps;
        return 0.0;
    });
}

SvtResult svt(const Matrix& x, double tau) {
    if (!(tau >= 0.0)) throw Error(ErrorKind::NegativeThreshold, "threshold must be nonnegative");
    Svd f = svd(x);
    const Vector& sigma = f.spectrum.values();
    Index keep = 0;
    while (keep < sigma.size() && sigma(keep) > tau) ++keep;

    SvtResult out;
    Vector shrunk = (sigma.head(keep).array() - tau).matrix();
    out.nuclear_norm = shrunk.sum();
    out.value = f.u.leftCols(keep) * shrunk.asDiagonal() * f.v.leftCols(keep).transpose();
    out.spectrum = std::move(f.spectrum);
    return out;
}

double nuclear_norm(const Matrix& x) { return singular_values(x).sum(); }

double l1_norm(const Matrix& x) { return x.cwiseAbs().sum(); }

double frobenius_norm(const Matrix& x) { return x.norm(); }

double spectral_norm(const Matrix& x) { return singular_values(x).largest(); }

double objective(const Matrix& l, const Matrix& s, const ObservationMatrix& obs, double mu,
                 double lambda) {
    require_same_shape(l, obs.values(), "objective");
    require_same_shape(s, obs.values(), "objective");
    const double residual = project(obs.mask(), obs.values() - l - s).squaredNorm();
    return mu * nuclear_norm(l) + mu * lambda * l1_norm(s) + 0.5 * residual;
}

}  // namespace lsdr::ops
