#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "lsdr/core.hpp"

namespace lsdr::synth {

/// How anomaly entries combine with the low-rank field. Replace makes the
/// corrupted reading equal anomaly_value (S = value - L on the support);
/// Add makes S = value on the support.
enum class AnomalyMode { Replace, Add };

struct SynthSpec {
    Dimensions dims{100, 100};
    Index rank = 5;
    double value_low = 0.0;
    double value_high = 100.0;
    double anomaly_ratio = 0.0;
    double anomaly_value = 100.0;
    AnomalyMode anomaly_mode = AnomalyMode::Replace;
    double noise_delta = 0.0;
    double sampling_rate = 1.0;
    std::uint64_t seed = 0;

    /// Throws InvalidConfig on violated invariants.
    void validate() const;
    std::size_t anomaly_count() const;
};

/// Independent random streams derived from one master seed.
enum class Stream : std::uint64_t { LowRank = 1, Anomalies = 2, Noise = 3, Mask = 4 };

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, Stream stream);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag);

/// k distinct cell indices (column-major linear) drawn uniformly from [0, n).
std::vector<Index> sample_without_replacement(Index n, Index k, std::mt19937_64& rng);

/// Exactly-rank-r field spanning [value_low, value_high].
Matrix gen_lowrank(const SynthSpec& spec);

struct Corruption {
    Matrix corrupted;  // L + S
    Matrix sparse;     // S
    std::vector<Entry> support;
};

/// Places round(ratio * N * T) anomalies at a uniformly random support.
Corruption inject_anomalies(const Matrix& l, const SynthSpec& spec);

/// Z with ||Z||_F = noise_delta exactly (Z = 0 when delta = 0).
Matrix gen_noise(const SynthSpec& spec);
Matrix add_noise(const Matrix& r, const SynthSpec& spec);

/// Uniformly random mask with exactly round(rate * N * T) entries.
Mask gen_mask(Dimensions dims, double sampling_rate, std::uint64_t seed);

struct Instance {
    ObservationMatrix observation;
    GroundTruth truth;
};

Instance make_instance(const SynthSpec& spec);

}  // namespace lsdr::synth
