#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "lsdr/core.hpp"

namespace lsdr::ingest {

/// One sensor reading as delivered by the collection network.
struct SensorRecord {
    double reading = 0.0;
    std::string node_id;
    std::int64_t timestamp = 0;  // epoch seconds
    double longitude = 0.0;
    double latitude = 0.0;
};

inline constexpr const char* kRecordHeader = "reading,node_id,timestamp,longitude,latitude";

/// Parses the CSV record format; the first non-empty line must be the header.
/// Blank lines are skipped. Throws MissingHeader or MalformedLineError.
std::vector<SensorRecord> parse_records(std::istream& in);

enum class CellReduce { RandomPick, Mean };

struct MatrixBuildSpec {
    std::int64_t slot_seconds = 1;
    std::int64_t start = 0;
    Index n_slots = 1;
    /// Explicit row order; first-appearance order when unset.
    std::optional<std::vector<std::string>> node_order;
    std::uint64_t seed = 0;
    CellReduce reduce = CellReduce::RandomPick;

    void validate() const;
};

struct BuildResult {
    ObservationMatrix observation;
    std::vector<std::string> node_order;
    std::size_t dropped_records = 0;  // timestamps outside the window
};

/// Buckets records into node x slot cells, slot t covering
/// [start + t*slot_seconds, start + (t+1)*slot_seconds). A cell holds one of
/// its readings chosen uniformly with a generator seeded from (seed, node,
/// slot), or their mean; empty cells are unobserved. Throws UnknownNode.
BuildResult build_matrix(const std::vector<SensorRecord>& records, const MatrixBuildSpec& spec);

/// Sidecar {node_order, dropped_records, spec}.
nlohmann::json sidecar(const BuildResult& result, const MatrixBuildSpec& spec);

}  // namespace lsdr::ingest
