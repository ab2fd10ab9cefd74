#include "lsdr/ingest.hpp"

#include <charconv>
#include <cmath>
#include <random>
#include <string_view>
#include <unordered_map>

#include "lsdr/synth.hpp"

namespace lsdr::ingest {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t comma = line.find(',', pos);
        out.push_back(trim(line.substr(pos, comma - pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

std::uint64_t cell_seed(std::uint64_t seed, Index node, Index slot) {
    using synth::splitmix64;
    return splitmix64(splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(node)) ^
                      static_cast<std::uint64_t>(slot));
}

}  // namespace

std::vector<SensorRecord> parse_records(std::istream& in) {
    std::vector<SensorRecord> records;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view view = trim(line);
        if (view.empty()) continue;
        if (!header_seen) {
            if (view != kRecordHeader) {
                throw Error(ErrorKind::MissingHeader,
                            std::string("expected header '") + kRecordHeader + "'");
            }
            header_seen = true;
            continue;
        }
        const auto fields = split(view);
        if (fields.size() != 5) throw MalformedLineError(line_no, "expected 5 fields");
        SensorRecord rec;
        if (!parse_number(fields[0], rec.reading) || !std::isfinite(rec.reading))
            throw MalformedLineError(line_no, "bad reading");
        if (fields[1].empty()) throw MalformedLineError(line_no, "empty node_id");
        rec.node_id = std::string(fields[1]);
        if (!parse_number(fields[2], rec.timestamp) || rec.timestamp < 0)
            throw MalformedLineError(line_no, "bad timestamp");
        if (!parse_number(fields[3], rec.longitude)) throw MalformedLineError(line_no, "bad longitude");
        if (!parse_number(fields[4], rec.latitude)) throw MalformedLineError(line_no, "bad latitude");
        records.push_back(std::move(rec));
    }
    if (!header_seen) throw Error(ErrorKind::MissingHeader, "empty record stream");
    return records;
}

void MatrixBuildSpec::validate() const {
    if (slot_seconds < 1) throw Error(ErrorKind::InvalidConfig, "slot_seconds must be >= 1");
    if (n_slots < 1) throw Error(ErrorKind::InvalidConfig, "n_slots must be >= 1");
    if (start < 0) throw Error(ErrorKind::InvalidConfig, "start must be >= 0");
    if (node_order && node_order->empty()) throw Error(ErrorKind::InvalidConfig, "empty node order");
}

BuildResult build_matrix(const std::vector<SensorRecord>& records, const MatrixBuildSpec& spec) {
    spec.validate();
    std::vector<std::string> order;
    std::unordered_map<std::string, Index> row_of;
    if (spec.node_order) {
        for (const auto& id : *spec.node_order) {
            if (row_of.emplace(id, static_cast<Index>(order.size())).second) order.push_back(id);
        }
        for (const auto& rec : records) {
            if (!row_of.count(rec.node_id)) {
                throw Error(ErrorKind::UnknownNode, "node '" + rec.node_id + "' not in node order");
            }
        }
    } else {
        for (const auto& rec : records) {
            if (row_of.emplace(rec.node_id, static_cast<Index>(order.size())).second) {
                order.push_back(rec.node_id);
            }
        }
        if (order.empty()) throw Error(ErrorKind::MissingInput, "no records and no node order");
    }

    const Index rows = static_cast<Index>(order.size());
    const Index cols = spec.n_slots;
    const std::int64_t end = spec.start + spec.slot_seconds * cols;
    // Readings per cell in file order, column-major cell index.
    std::vector<std::vector<double>> cells(static_cast<std::size_t>(rows * cols));
    std::size_t dropped = 0;
    for (const auto& rec : records) {
        if (rec.timestamp < spec.start || rec.timestamp >= end) {
            ++dropped;
            continue;
        }
        const Index slot = static_cast<Index>((rec.timestamp - spec.start) / spec.slot_seconds);
        const Index row = row_of.at(rec.node_id);
        cells[static_cast<std::size_t>(slot * rows + row)].push_back(rec.reading);
    }

    Matrix values = Matrix::Zero(rows, cols);
    std::vector<Entry> observed;
    for (Index c = 0; c < cols; ++c) {
        for (Index r = 0; r < rows; ++r) {
            const auto& bucket = cells[static_cast<std::size_t>(c * rows + r)];
            if (bucket.empty()) continue;
            double v = 0.0;
            if (spec.reduce == CellReduce::Mean) {
                for (double x : bucket) v += x;
                v /= static_cast<double>(bucket.size());
            } else {
                std::mt19937_64 rng(cell_seed(spec.seed, r, c));
                std::uniform_int_distribution<std::size_t> pick(0, bucket.size() - 1);
                v = bucket[pick(rng)];
            }
            values(r, c) = v;
            observed.push_back({r, c});
        }
    }
    Mask mask(Dimensions::make(rows, cols), std::move(observed));
    return BuildResult{ObservationMatrix(std::move(values), std::move(mask)), std::move(order), dropped};
}

nlohmann::json sidecar(const BuildResult& result, const MatrixBuildSpec& spec) {
    nlohmann::json s = {
        {"slot_seconds", spec.slot_seconds},
        {"start", spec.start},
        {"n_slots", spec.n_slots},
        {"seed", spec.seed},
        {"reduce", spec.reduce == CellReduce::Mean ? "mean" : "pick"},
        {"node_order_explicit", spec.node_order.has_value()},
    };
    return nlohmann::json{{"node_order", result.node_order},
                          {"dropped_records", result.dropped_records},
                          {"spec", s}};
}

}  // namespace lsdr::ingest
