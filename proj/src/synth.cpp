#include "lsdr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace lsdr::synth {
namespace {

Index rounded_count(double fraction, Index total) {
    return static_cast<Index>(std::llround(fraction * static_cast<double>(total)));
}

Vector uniform_vector(Index n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = unit(rng);
    return v;
}

// Affine map of v onto [lo, hi]; constant input maps to the midpoint.
Vector rescale(const Vector& v, double lo, double hi) {
    const double vmin = v.minCoeff();
    const double vmax = v.maxCoeff();
    if (vmax == vmin) return Vector::Constant(v.size(), 0.5 * (lo + hi));
    const double a = (hi - lo) / (vmax - vmin);
    Vector out = ((v.array() - vmin) * a + lo).matrix();
    Index imin = 0, imax = 0;
    v.minCoeff(&imin);
    v.maxCoeff(&imax);
    out(imin) = lo;
    out(imax) = hi;
    return out;
}

// Rank one: u v^T with factor ranges chosen so the product range is [lo, hi].
Matrix rank_one_field(const SynthSpec& spec, std::mt19937_64& rng) {
    const double lo = spec.value_low;
    const double hi = spec.value_high;
    Vector u = uniform_vector(spec.dims.rows, rng);
    Vector v = uniform_vector(spec.dims.cols, rng);
    if (lo <= 0.0 && hi >= 0.0) {
        u = rescale(u, 0.0, 1.0);
        if (spec.dims.rows == 1) u.setOnes();
        v = rescale(v, lo, hi);
    } else if (lo > 0.0) {
        const double rho = std::sqrt(lo / hi);
        u = rescale(u, rho, 1.0);
        if (spec.dims.rows == 1) u.setOnes();
        v = rescale(v, lo / rho, hi);
    } else {
        const double rho = std::sqrt(hi / lo);
        u = rescale(u, rho, 1.0);
        if (spec.dims.rows == 1) u.setOnes();
        v = rescale(v, lo, hi / rho);
    }
    return u * v.transpose();
}

}  // namespace

void SynthSpec::validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidConfig, what); };
    Dimensions::make(dims.rows, dims.cols);
    if (rank < 1 || rank > std::min(dims.rows, dims.cols)) fail("rank must lie in [1, min(N,T)]");
    if (!(value_low < value_high)) fail("value range requires low < high");
    if (!(anomaly_ratio >= 0.0 && anomaly_ratio <= 1.0)) fail("anomaly_ratio must lie in [0,1]");
    if (!std::isfinite(anomaly_value)) fail("anomaly_value must be finite");
    if (!(noise_delta >= 0.0) || !std::isfinite(noise_delta)) fail("noise_delta must be >= 0");
    if (!(sampling_rate > 0.0 && sampling_rate <= 1.0)) fail("sampling_rate must lie in (0,1]");
}

std::size_t SynthSpec::anomaly_count() const {
    return static_cast<std::size_t>(rounded_count(anomaly_ratio, dims.size()));
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
    return splitmix64(splitmix64(master) ^ (tag * 0xD1B54A32D192ED03ULL));
}

std::uint64_t derive_seed(std::uint64_t master, Stream stream) {
    return derive_seed(master, static_cast<std::uint64_t>(stream));
}

std::vector<Index> sample_without_replacement(Index n, Index k, std::mt19937_64& rng) {
    if (k < 0 || k > n) throw Error(ErrorKind::InvalidConfig, "sample size exceeds population");
    std::vector<Index> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), Index{0});
    // Partial Fisher-Yates: the first k slots end up a uniform k-subset.
    for (Index i = 0; i < k; ++i) {
        std::uniform_int_distribution<Index> pick(i, n - 1);
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
    }
    pool.resize(static_cast<std::size_t>(k));
    return pool;
}

Matrix gen_lowrank(const SynthSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(derive_seed(spec.seed, Stream::LowRank));
    if (spec.rank == 1) return rank_one_field(spec, rng);

    const Index r = spec.rank;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Matrix a(spec.dims.rows, r);
    Matrix b(spec.dims.cols, r);
    for (Index j = 0; j < r; ++j)
        for (Index i = 0; i < a.rows(); ++i) a(i, j) = unit(rng);
    for (Index j = 0; j < r; ++j)
        for (Index i = 0; i < b.rows(); ++i) b(i, j) = unit(rng);
    // A constant first factor column on both sides puts the all-ones matrix
    // inside the factor span, so the affine rescale below keeps rank r.
    a.col(0).setOnes();
    b.col(0).setOnes();

    const Matrix base = a * b.transpose();
    const double lo = base.minCoeff();
    const double hi = base.maxCoeff();
    const double scale = (spec.value_high - spec.value_low) / (hi - lo);
    Matrix core = scale * Matrix::Identity(r, r);
    core(0, 0) += spec.value_low - scale * lo;
    return a * core * b.transpose();
}

Corruption inject_anomalies(const Matrix& l, const SynthSpec& spec) {
    spec.validate();
    if (l.rows() != spec.dims.rows || l.cols() != spec.dims.cols) {
        throw Error(ErrorKind::DimensionMismatch, "low-rank field does not match spec dims");
    }
    std::mt19937_64 rng(derive_seed(spec.seed, Stream::Anomalies));
    const auto cells = sample_without_replacement(
        spec.dims.size(), static_cast<Index>(spec.anomaly_count()), rng);

    Corruption out;
    out.sparse = Matrix::Zero(l.rows(), l.cols());
    for (Index cell : cells) {
        const Index r = cell % l.rows();
        const Index c = cell / l.rows();
        out.sparse(r, c) = spec.anomaly_mode == AnomalyMode::Replace ? spec.anomaly_value - l(r, c)
                                                                    : spec.anomaly_value;
        out.support.push_back({r, c});
    }
    std::sort(out.support.begin(), out.support.end());
    out.corrupted = l + out.sparse;
    return out;
}

Matrix gen_noise(const SynthSpec& spec) {
    spec.validate();
    Matrix z = Matrix::Zero(spec.dims.rows, spec.dims.cols);
    if (spec.noise_delta == 0.0) return z;
    std::mt19937_64 rng(derive_seed(spec.seed, Stream::Noise));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Index c = 0; c < z.cols(); ++c)
        for (Index r = 0; r < z.rows(); ++r) z(r, c) = normal(rng);
    return spec.noise_delta * z / z.norm();
}

Matrix add_noise(const Matrix& r, const SynthSpec& spec) {
    if (r.rows() != spec.dims.rows || r.cols() != spec.dims.cols) {
        throw Error(ErrorKind::DimensionMismatch, "matrix does not match spec dims");
    }
    return r + gen_noise(spec);
}

Mask gen_mask(Dimensions dims, double sampling_rate, std::uint64_t seed) {
    if (!(sampling_rate > 0.0 && sampling_rate <= 1.0)) {
        throw Error(ErrorKind::InvalidConfig, "sampling_rate must lie in (0,1]");
    }
    std::mt19937_64 rng(seed);
    const auto cells = sample_without_replacement(dims.size(), rounded_count(sampling_rate, dims.size()), rng);
    std::vector<Entry> observed;
    observed.reserve(cells.size());
    for (Index cell : cells) observed.push_back({cell % dims.rows, cell / dims.rows});
    return Mask(dims, std::move(observed));
}

Instance make_instance(const SynthSpec& spec) {
    spec.validate();
    GroundTruth truth;
    truth.rank = spec.rank;
    truth.low_rank = gen_lowrank(spec);
    Corruption corruption = inject_anomalies(truth.low_rank, spec);
    truth.sparse = std::move(corruption.sparse);
    truth.support = std::move(corruption.support);
    truth.noise = gen_noise(spec);
    const Mask mask = gen_mask(spec.dims, spec.sampling_rate, derive_seed(spec.seed, Stream::Mask));
    ObservationMatrix obs = canonicalize(truth.corrupted(), mask);
    return Instance{std::move(obs), std::move(truth)};
}

}  // namespace lsdr::synth
