#include "lsdr/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

namespace lsdr::io {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <class T>
T parse_field(std::string_view s, std::size_t line_no) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    T out{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
        throw MalformedLineError(line_no, "cannot parse '" + std::string(s) + "'");
    }
    return out;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t comma = line.find(',', pos);
        out.push_back(line.substr(pos, comma - pos));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

// Reads `# rows=N cols=T`, skipping leading blank lines.
Dimensions read_shape_header(std::istream& in, std::size_t& line_no) {
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view v = trim(line);
        if (v.empty()) continue;
        long long rows = 0, cols = 0;
        if (std::sscanf(std::string(v).c_str(), "# rows=%lld cols=%lld", &rows, &cols) != 2) {
            throw Error(ErrorKind::MissingHeader, "expected '# rows=N cols=T' header");
        }
        return Dimensions::make(rows, cols);
    }
    throw Error(ErrorKind::MissingHeader, "empty matrix file");
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::MissingInput, "cannot open " + path.string());
    return in;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
    out << "# rows=" << m.rows() << " cols=" << m.cols() << '\n';
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) {
            if (c) out << ',';
            out << format_double(m(r, c));
        }
        out << '\n';
    }
}

Matrix read_matrix_csv(std::istream& in) {
    std::size_t line_no = 0;
    const Dimensions dims = read_shape_header(in, line_no);
    Matrix m(dims.rows, dims.cols);
    Index r = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view v = trim(line);
        if (v.empty()) continue;
        if (r >= dims.rows) throw MalformedLineError(line_no, "more rows than header declares");
        const auto fields = split(v);
        if (static_cast<Index>(fields.size()) != dims.cols) {
            throw MalformedLineError(line_no, "expected " + std::to_string(dims.cols) + " columns");
        }
        for (Index c = 0; c < dims.cols; ++c) m(r, c) = parse_field<double>(fields[c], line_no);
        ++r;
    }
    if (r != dims.rows) throw MalformedLineError(line_no, "fewer rows than header declares");
    return m;
}

void write_mask_csv(std::ostream& out, const Mask& mask) {
    out << "row,col\n";
    for (const auto& e : mask.entries()) out << e.row << ',' << e.col << '\n';
}

Mask read_mask_csv(std::istream& in, Dimensions dims) {
    std::vector<Entry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view v = trim(line);
        if (v.empty() || v == "row,col") continue;
        const auto fields = split(v);
        if (fields.size() != 2) throw MalformedLineError(line_no, "expected row,col");
        entries.push_back({parse_field<Index>(fields[0], line_no), parse_field<Index>(fields[1], line_no)});
    }
    return Mask(dims, std::move(entries));
}

ObservationMatrix read_triplets(std::istream& in) {
    std::size_t line_no = 0;
    const Dimensions dims = read_shape_header(in, line_no);
    Matrix values = Matrix::Zero(dims.rows, dims.cols);
    std::vector<Entry> entries;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view v = trim(line);
        if (v.empty() || v == "row,col,value") continue;
        const auto fields = split(v);
        if (fields.size() != 3) throw MalformedLineError(line_no, "expected row,col,value");
        const Entry e{parse_field<Index>(fields[0], line_no), parse_field<Index>(fields[1], line_no)};
        if (!dims.contains(e.row, e.col)) {
            throw Error(ErrorKind::DimensionMismatch, "triplet index outside declared shape");
        }
        values(e.row, e.col) = parse_field<double>(fields[2], line_no);
        entries.push_back(e);
    }
    Mask mask(dims, std::move(entries));
    return canonicalize(values, mask);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoFailure, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorKind::IoFailure, "write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream in = open_in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

nlohmann::json read_json(const fs::path& path) {
    try {
        return nlohmann::json::parse(read_text(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::MalformedLine, path.string() + ": " + e.what());
    }
}

void save_matrix(const fs::path& path, const Matrix& m) {
    std::ostringstream ss;
    write_matrix_csv(ss, m);
    write_text(path, ss.str());
}

Matrix load_matrix(const fs::path& path) {
    std::ifstream in = open_in(path);
    return read_matrix_csv(in);
}

void save_observation(const fs::path& dir, const ObservationMatrix& obs) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::IoFailure, "cannot create " + dir.string());
    save_matrix(dir / kMatrixFile, obs.values());
    std::ostringstream ss;
    write_mask_csv(ss, obs.mask());
    write_text(dir / kMaskFile, ss.str());
}

ObservationMatrix load_observation(const fs::path& dir) {
    if (fs::exists(dir / kMatrixFile) && fs::exists(dir / kMaskFile)) {
        Matrix values = load_matrix(dir / kMatrixFile);
        std::ifstream in = open_in(dir / kMaskFile);
        Mask mask = read_mask_csv(in, Dimensions::of(values));
        return ObservationMatrix(std::move(values), std::move(mask));
    }
    if (fs::exists(dir / kTripletFile)) {
        std::ifstream in = open_in(dir / kTripletFile);
        return read_triplets(in);
    }
    throw Error(ErrorKind::MissingInput, "no matrix.csv+mask.csv or triplets.csv in " + dir.string());
}

nlohmann::json to_json(const synth::SynthSpec& spec) {
    return nlohmann::json{
        {"rows", spec.dims.rows},
        {"cols", spec.dims.cols},
        {"rank", spec.rank},
        {"value_low", spec.value_low},
        {"value_high", spec.value_high},
        {"anomaly_ratio", spec.anomaly_ratio},
        {"anomaly_value", spec.anomaly_value},
        {"anomaly_mode", spec.anomaly_mode == synth::AnomalyMode::Add ? "add" : "replace"},
        {"noise_delta", spec.noise_delta},
        {"sampling_rate", spec.sampling_rate},
        {"seed", spec.seed},
    };
}

synth::SynthSpec synth_spec_from_json(const nlohmann::json& j) {
    synth::SynthSpec spec;
    try {
        spec.dims = Dimensions::make(j.at("rows").get<Index>(), j.at("cols").get<Index>());
        spec.rank = j.at("rank").get<Index>();
        spec.value_low = j.at("value_low").get<double>();
        spec.value_high = j.at("value_high").get<double>();
        spec.anomaly_ratio = j.at("anomaly_ratio").get<double>();
        spec.anomaly_value = j.at("anomaly_value").get<double>();
        spec.anomaly_mode = j.value("anomaly_mode", "replace") == "add" ? synth::AnomalyMode::Add
                                                                       : synth::AnomalyMode::Replace;
        spec.noise_delta = j.at("noise_delta").get<double>();
        spec.sampling_rate = j.at("sampling_rate").get<double>();
        spec.seed = j.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::MalformedLine, std::string("bad synth spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

void save_instance(const fs::path& dir, const synth::Instance& instance,
                   const synth::SynthSpec& spec) {
    save_observation(dir, instance.observation);
    const GroundTruth& t = instance.truth;
    save_matrix(dir / kTruthLowRankFile, t.low_rank);
    save_matrix(dir / kTruthSparseFile, t.sparse);
    save_matrix(dir / kTruthNoiseFile, t.noise);
    nlohmann::json support = nlohmann::json::array();
    for (const auto& e : t.support) support.push_back({e.row, e.col});
    write_json(dir / kInstanceFile,
               nlohmann::json{{"spec", to_json(spec)}, {"rank", t.rank}, {"support", support}});
}

LoadedInstance load_instance(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error(ErrorKind::MissingInput, "no instance directory " + dir.string());
    LoadedInstance out{load_observation(dir), std::nullopt, std::nullopt};
    if (!fs::exists(dir / kInstanceFile)) return out;

    const nlohmann::json meta = read_json(dir / kInstanceFile);
    if (meta.contains("spec")) out.spec = synth_spec_from_json(meta.at("spec"));
    if (fs::exists(dir / kTruthLowRankFile)) {
        GroundTruth t;
        t.low_rank = load_matrix(dir / kTruthLowRankFile);
        t.sparse = load_matrix(dir / kTruthSparseFile);
        t.noise = load_matrix(dir / kTruthNoiseFile);
        t.rank = meta.value("rank", Index{0});
        for (const auto& pair : meta.value("support", nlohmann::json::array())) {
            t.support.push_back({pair.at(0).get<Index>(), pair.at(1).get<Index>()});
        }
        out.truth = std::move(t);
    }
    return out;
}

}  // namespace lsdr::io
