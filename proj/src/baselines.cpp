#include "lsdr/baselines.hpp"

#include <cmath>
#include <string>

#include "lsdr/ops.hpp"
#include "lsdr/solver.hpp"

namespace lsdr::baselines {
namespace {

void require_orthonormal(const Matrix& basis, const char* what) {
    const Matrix gram = basis.transpose() * basis;
    if ((gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() > 1e-10) {
        throw Error(ErrorKind::DimensionMismatch, std::string(what) + " is not orthonormal");
    }
}

}  // namespace

DecompositionResult solve_mc(const ObservationMatrix& obs, const SolverConfig& cfg) {
    return solver::run(obs, cfg, solver::Model::LowRankOnly);
}

Matrix diff_horizontal(const Matrix& l) {
    if (l.cols() < 2) throw Error(ErrorKind::DegenerateDimension, "horizontal difference needs T >= 2");
    return l.rightCols(l.cols() - 1) - l.leftCols(l.cols() - 1);
}

Matrix diff_vertical(const Matrix& l) {
    if (l.rows() < 2) throw Error(ErrorKind::DegenerateDimension, "vertical difference needs N >= 2");
    return l.bottomRows(l.rows() - 1) - l.topRows(l.rows() - 1);
}

double smooth_penalty(const Matrix& l) {
    return diff_horizontal(l).squaredNorm() + diff_vertical(l).squaredNorm();
}

Matrix smooth_penalty_gradient(const Matrix& l) {
    const Matrix dx = diff_horizontal(l);
    const Matrix dy = diff_vertical(l);
    const Index n = l.rows();
    const Index t = l.cols();
    // Adjoint of the forward differences.
    Matrix g = Matrix::Zero(n, t);
    g.leftCols(t - 1) -= dx;
    g.rightCols(t - 1) += dx;
    g.topRows(n - 1) -= dy;
    g.bottomRows(n - 1) += dy;
    return 2.0 * g;
}

DecompositionResult solve_srmf(const ObservationMatrix& obs, const SolverConfig& cfg,
                               double smooth_weight) {
    if (!(smooth_weight >= 0.0)) throw Error(ErrorKind::InvalidConfig, "smooth_weight must be >= 0");
    if (smooth_weight > 0.0 && (obs.dims().rows < 2 || obs.dims().cols < 2)) {
        throw Error(ErrorKind::DegenerateDimension, "smoothness penalty needs N, T >= 2");
    }
    cfg.validate();
    // Data term contributes 1, the penalty gradient 2 * 8 * weight; the factor 2
    // on the data term matches the L_f = 2 step of the pair solver.
    const double lipschitz = 2.0 * (1.0 + 8.0 * smooth_weight);

    solver::ApgState st = solver::init_state(obs, cfg, solver::Model::LowRankOnly);
    DecompositionResult result;
    result.objective_trace.push_back(st.objective);
    while (st.iteration < cfg.max_iterations) {
        const double momentum = (st.t_prev - 1.0) / st.t_curr;
        const Matrix y = st.l_curr + momentum * (st.l_curr - st.l_prev);
        Matrix grad = ops::project(obs.mask(), y - obs.values());
        if (smooth_weight > 0.0) grad += smooth_weight * smooth_penalty_gradient(y);
        const Matrix step = (1.0 / lipschitz) * grad;

        const double mu = st.mu;
        ops::SvtResult low = ops::svt(y - step, mu / lipschitz);

        const double prev_objective = st.objective;
        const double prev_mu = st.mu_used;
        st.l_prev = std::move(st.l_curr);
        st.l_curr = std::move(low.value);
        st.t_prev = st.t_curr;
        st.t_curr = solver::update_t(st.t_curr);
        st.mu_used = mu;
        st.mu = solver::update_mu(mu, cfg);
        ++st.iteration;

        const double residual = ops::project(obs.mask(), obs.values() - st.l_curr).squaredNorm();
        st.objective = mu * low.nuclear_norm + 0.5 * residual;
        if (smooth_weight > 0.0) st.objective += smooth_weight * smooth_penalty(st.l_curr);
        result.objective_trace.push_back(st.objective);
        if (st.iteration > 1 &&
            solver::objective_settled(prev_objective, st.objective, prev_mu, st.mu_used, cfg)) {
            result.converged = true;
            break;
        }
    }
    result.iterations = st.iteration;
    result.l_hat = std::move(st.l_curr);
    result.s_hat = Matrix::Zero(obs.dims().rows, obs.dims().cols);
    return result;
}

OracleSpec::OracleSpec(Dimensions dims, std::vector<Entry> support, Matrix col_basis,
                       Matrix row_basis)
    : dims_(dims),
      support_(std::move(support)),
      col_basis_(std::move(col_basis)),
      row_basis_(std::move(row_basis)) {
    if (col_basis_.rows() != dims_.rows || row_basis_.rows() != dims_.cols ||
        col_basis_.cols() != row_basis_.cols()) {
        throw Error(ErrorKind::DimensionMismatch, "oracle bases do not match dims");
    }
    require_orthonormal(col_basis_, "column basis");
    require_orthonormal(row_basis_, "row basis");
    for (const auto& e : support_) {
        if (!dims_.contains(e.row, e.col)) {
            throw Error(ErrorKind::DimensionMismatch, "oracle support entry outside dims");
        }
    }
}

OracleSpec OracleSpec::from_truth(const GroundTruth& truth) {
    const ops::Svd f = ops::svd(truth.low_rank);
    const Index r = truth.rank;
    return OracleSpec(truth.dims(), truth.support, f.u.leftCols(r), f.v.leftCols(r));
}

Matrix project_tangent(const Matrix& x, const Matrix& col_basis, const Matrix& row_basis) {
    const Matrix ux = col_basis * (col_basis.transpose() * x);
    const Matrix xv = (x * row_basis) * row_basis.transpose();
    const Matrix uxv = col_basis * ((col_basis.transpose() * x * row_basis) * row_basis.transpose());
    return ux + xv - uxv;
}

DecompositionResult solve_oracle(const ObservationMatrix& obs, const OracleSpec& spec,
                                 const OracleControls& controls) {
    if (!(spec.dims() == obs.dims())) {
        throw Error(ErrorKind::DimensionMismatch, "oracle spec does not match observation");
    }
    const Mask& observed = obs.mask();
    const Mask sparse_support = Mask(spec.dims(), spec.support()).intersect(observed);
    const Matrix& m = obs.values();

    Matrix l = Matrix::Zero(m.rows(), m.cols());
    Matrix s = Matrix::Zero(m.rows(), m.cols());
    DecompositionResult result;
    double residual = ops::project(observed, m - l - s).norm();
    result.objective_trace.push_back(residual);
    for (int sweep = 1; sweep <= controls.max_sweeps; ++sweep) {
        // Unit-step projected gradient on L inside T, then the exact S block.
        l = project_tangent(l + ops::project(observed, m - s - l), spec.col_basis(), spec.row_basis());
        s = ops::project(sparse_support, m - l);
        const double next = ops::project(observed, m - l - s).norm();
        result.objective_trace.push_back(next);
        const double change = std::abs(residual - next);
        residual = next;
        if (change < controls.tolerance) {
            result.iterations = sweep;
            result.converged = true;
            result.l_hat = std::move(l);
            result.s_hat = std::move(s);
            return result;
        }
    }
    throw Error(ErrorKind::NonConvergence,
                "oracle alternating projection hit " + std::to_string(controls.max_sweeps) +
                    " sweeps");
}

}  // namespace lsdr::baselines
