#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "lsdr/core.hpp"
#include "lsdr/synth.hpp"

namespace lsdr::io {

namespace fs = std::filesystem;

inline constexpr const char* kMatrixFile = "matrix.csv";
inline constexpr const char* kMaskFile = "mask.csv";
inline constexpr const char* kTripletFile = "triplets.csv";
inline constexpr const char* kInstanceFile = "instance.json";
inline constexpr const char* kTruthLowRankFile = "truth_low_rank.csv";
inline constexpr const char* kTruthSparseFile = "truth_sparse.csv";
inline constexpr const char* kTruthNoiseFile = "truth_noise.csv";

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// Dense row-major CSV with a `# rows=N cols=T` header line.
void write_matrix_csv(std::ostream& out, const Matrix& m);
Matrix read_matrix_csv(std::istream& in);

/// `row,col` header followed by one 0-based index pair per line.
void write_mask_csv(std::ostream& out, const Mask& mask);
Mask read_mask_csv(std::istream& in, Dimensions dims);

/// `# rows=N cols=T` header, optional `row,col,value` line, then triplets;
/// the listed cells form the mask.
ObservationMatrix read_triplets(std::istream& in);

void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);
void write_json(const fs::path& path, const nlohmann::json& j);
nlohmann::json read_json(const fs::path& path);
void save_matrix(const fs::path& path, const Matrix& m);
Matrix load_matrix(const fs::path& path);

/// matrix.csv + mask.csv into dir.
void save_observation(const fs::path& dir, const ObservationMatrix& obs);
/// matrix.csv + mask.csv, or triplets.csv; throws MissingInput otherwise.
ObservationMatrix load_observation(const fs::path& dir);

nlohmann::json to_json(const synth::SynthSpec& spec);
synth::SynthSpec synth_spec_from_json(const nlohmann::json& j);

/// Observation files, the three truth matrices and instance.json carrying the
/// spec, the anomaly support and the rank.
void save_instance(const fs::path& dir, const synth::Instance& instance,
                   const synth::SynthSpec& spec);

struct LoadedInstance {
    ObservationMatrix observation;
    std::optional<GroundTruth> truth;
    std::optional<synth::SynthSpec> spec;
};

LoadedInstance load_instance(const fs::path& dir);

}  // namespace lsdr::io
