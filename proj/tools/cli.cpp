#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "lsdr/baselines.hpp"
#include "lsdr/ingest.hpp"
#include "lsdr/io.hpp"
#include "lsdr/metrics.hpp"
#include "lsdr/ops.hpp"
#include "lsdr/solver.hpp"
#include "lsdr/theory.hpp"

namespace lsdr::cli {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr double kAuto = std::numeric_limits<double>::quiet_NaN();
constexpr const char* kConfigFile = "config.json";
constexpr const char* kIngestSidecar = "ingest.json";

Error invalid_flag(const std::string& msg) { return Error(ErrorKind::InvalidFlag, msg); }

// Options that may also come from the JSON config file. A flag given on the
// command line wins over the config, which wins over the built-in default.
class Params {
public:
    template <class T>
    CLI::Option* add(CLI::App* app, const std::string& flags, const std::string& key, T& var,
                     const std::string& desc) {
        CLI::Option* opt = app->add_option(flags, var, desc)->capture_default_str();
        entries_.push_back({key, opt, [&var](const json& j) { var = j.get<T>(); },
                            [&var] { return json(var); }});
        return opt;
    }

    // Double where NaN stands for "derive from the data"; null in JSON.
    CLI::Option* add_auto(CLI::App* app, const std::string& flags, const std::string& key, double& var,
                          const std::string& desc) {
        CLI::Option* opt = app->add_option(flags, var, desc);
        entries_.push_back({key, opt,
                            [&var](const json& j) { var = j.is_null() ? kAuto : j.get<double>(); },
                            [&var] { return std::isnan(var) ? json(nullptr) : json(var); }});
        return opt;
    }

    bool knows(const std::string& key) const {
        return std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.key == key; });
    }

    void apply(const std::string& key, const json& value) {
        for (auto& e : entries_) {
            if (e.key != key || e.opt->count() > 0) continue;
            try {
                e.set(value);
            } catch (const json::exception&) {
                throw invalid_flag("config key '" + key + "' has the wrong type");
            }
        }
    }

    json resolved() const {
        json j = json::object();
        for (const auto& e : entries_) j[e.key] = e.get();
        return j;
    }

private:
    struct Entry {
        std::string key;
        CLI::Option* opt;
        std::function<void(const json&)> set;
        std::function<json()> get;
    };
    std::vector<Entry> entries_;
};

struct Globals {
    std::uint64_t seed = 0;
    std::string out;
    std::string config;
    int threads = 1;
};

struct SynthFlags {
    Index rows = 100;
    Index cols = 100;
    Index rank = 5;
    std::vector<double> range{0.0, 100.0};
    double anomaly_ratio = 0.0;
    double anomaly_value = 100.0;
    std::string anomaly_mode = "replace";
    double noise = 0.0;
    double sampling = 1.0;

    void bind(CLI::App* app, Params& p) {
        p.add(app, "--rows", "rows", rows, "number of nodes N");
        p.add(app, "--cols", "cols", cols, "number of time slots T");
        p.add(app, "--rank", "rank", rank, "rank of the low-rank field");
        p.add(app, "--range", "range", range, "value range lo,hi")->delimiter(',')->expected(2);
        p.add(app, "--anomaly-ratio", "anomaly-ratio", anomaly_ratio, "fraction of anomalous cells");
        p.add(app, "--anomaly-value", "anomaly-value", anomaly_value, "anomaly reading");
        p.add(app, "--anomaly-mode", "anomaly-mode", anomaly_mode, "replace|add");
        p.add(app, "--noise", "noise", noise, "Frobenius norm of the dense noise");
        p.add(app, "--sampling", "sampling", sampling, "sampling rate in (0,1]");
    }

    synth::SynthSpec spec(std::uint64_t seed) const {
        if (range.size() != 2) throw invalid_flag("--range needs lo,hi");
        if (anomaly_mode != "replace" && anomaly_mode != "add") {
            throw invalid_flag("--anomaly-mode must be replace or add");
        }
        synth::SynthSpec s;
        s.dims = Dimensions{rows, cols};
        s.rank = rank;
        s.value_low = range[0];
        s.value_high = range[1];
        s.anomaly_ratio = anomaly_ratio;
        s.anomaly_value = anomaly_value;
        s.anomaly_mode = anomaly_mode == "add" ? synth::AnomalyMode::Add : synth::AnomalyMode::Replace;
        s.noise_delta = noise;
        s.sampling_rate = sampling;
        s.seed = seed;
        try {
            s.validate();
        } catch (const Error& e) {
            throw invalid_flag(e.what());
        }
        return s;
    }
};

struct SolverFlags {
    std::string solver = "lsd";
    double lambda = kAuto;
    double mu0 = kAuto;
    double mu_floor_ratio = 1e-4;
    double eta = 0.9;
    int max_iter = 1000;
    double tol = 1e-7;
    double smooth_weight = baselines::kDefaultSmoothWeight;
    std::string sparse_init = "zero";

    void bind(CLI::App* app, Params& p, bool with_solver) {
        if (with_solver) p.add(app, "--solver", "solver", solver, "lsd|mc|srmf|oracle");
        p.add_auto(app, "--lambda", "lambda", lambda, "sparsity weight (default 1/sqrt(max(N,T)))");
        p.add_auto(app, "--mu0", "mu0", mu0, "initial mu (default 0.99 ||P_O M||_2)");
        p.add(app, "--mu-floor-ratio", "mu-floor-ratio", mu_floor_ratio, "mu floor as a fraction of mu0");
        p.add(app, "--eta", "eta", eta, "continuation factor");
        p.add(app, "--max-iter", "max-iter", max_iter, "iteration cap");
        p.add(app, "--tol", "tol", tol, "relative objective tolerance");
        p.add(app, "--smooth-weight", "smooth-weight", smooth_weight, "srmf smoothness weight");
        p.add(app, "--sparse-init", "sparse-init", sparse_init, "zero|ones");
    }

    SolverParams params(std::uint64_t seed) const {
        if (sparse_init != "zero" && sparse_init != "ones") throw invalid_flag("--sparse-init must be zero or ones");
        if (smooth_weight < 0.0) throw invalid_flag("--smooth-weight must be >= 0");
        SolverParams p;
        if (!std::isnan(lambda)) p.options.lambda = lambda;
        if (!std::isnan(mu0)) p.options.mu_initial = mu0;
        p.options.mu_floor_ratio = mu_floor_ratio;
        p.options.continuation_factor = eta;
        p.options.max_iterations = max_iter;
        p.options.objective_tolerance = tol;
        p.options.seed = seed;
        p.options.sparse_init = sparse_init == "ones" ? SparseInit::Ones : SparseInit::Zero;
        p.smooth_weight = smooth_weight;
        return p;
    }
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

fs::path output_dir(const Globals& g) {
    if (g.out.empty()) throw invalid_flag("--out is required");
    std::error_code ec;
    fs::create_directories(g.out, ec);
    if (ec) throw Error(ErrorKind::IoFailure, "cannot create " + g.out);
    return fs::path(g.out);
}

void write_csv(const fs::path& path, const std::string& header, const std::vector<std::vector<std::string>>& rows) {
    std::string text = header + "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) text += ',';
            text += row[i];
        }
        text += '\n';
    }
    io::write_text(path, text);
}

SolverConfig checked_config(const ObservationMatrix& obs, const SolverOptions& options) {
    try {
        return resolve_config(obs, options);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::InvalidConfig) throw invalid_flag(e.what());
        throw;
    }
}

// ---- commands ----

int cmd_generate(const Globals& g, const SynthFlags& f, const json& resolved, std::ostream& out) {
    const synth::SynthSpec spec = f.spec(g.seed);
    const fs::path dir = output_dir(g);
    const auto inst = synth::make_instance(spec);
    io::save_instance(dir, inst, spec);
    io::write_json(dir / kConfigFile, resolved);
    out << json{{"command", "generate"},
                {"out", dir.string()},
                {"anomalies", inst.truth.support.size()},
                {"observed", inst.observation.mask().count()}}
               .dump()
        << '\n';
    return 0;
}

int cmd_recover(const Globals& g, const std::string& input, const SolverFlags& f, const json& resolved,
                std::ostream& out) {
    const SolverKind kind = parse_solver(f.solver);
    const SolverParams params = f.params(g.seed);
    const auto loaded = io::load_instance(input);
    const fs::path dir = output_dir(g);
    checked_config(loaded.observation, params.options);
    const DecompositionResult res = recover(kind, loaded.observation, loaded.truth, params);

    io::save_matrix(dir / "l_hat.csv", res.l_hat);
    io::save_matrix(dir / "s_hat.csv", res.s_hat);
    io::write_json(dir / "trace.json", json{{"solver", solver_name(kind)},
                                            {"iterations", res.iterations},
                                            {"converged", res.converged},
                                            {"objective_trace", res.objective_trace}});
    json summary{{"command", "recover"}, {"solver", solver_name(kind)}, {"iterations", res.iterations},
                 {"converged", res.converged}};
    if (loaded.truth) {
        const double nse = metrics::nse(res.l_hat, loaded.truth->low_rank);
        std::vector<metrics::MetricRecord> records = {
            {"nse", {{"solver", solver_name(kind)}}, nse},
            {"relative_error", {{"solver", solver_name(kind)}},
             metrics::relative_error(res.l_hat, loaded.truth->low_rank)}};
        io::write_json(dir / "metrics.json", json(records));
        io::write_json(dir / "theorem1.json",
                       json(theory::check_theorem1(res, *loaded.truth, loaded.observation.mask())));
        summary["nse"] = nse;
    }
    io::write_json(dir / kConfigFile, resolved);
    out << summary.dump() << '\n';
    return 0;
}

int cmd_sweep(const Globals& g, const std::string& input, const SynthFlags& sf, const SolverFlags& f,
              const std::vector<double>& rates, const std::vector<std::string>& solvers, int trials,
              const json& resolved, std::ostream& out) {
    SweepPlan plan;
    plan.rates = rates;
    for (const auto& s : solvers) plan.solvers.push_back(parse_solver(s));
    plan.trials = trials;
    plan.params = f.params(g.seed);
    plan.threads = g.threads;
    plan.seed = g.seed;
    if (input.empty()) {
        plan.base_spec = sf.spec(g.seed);
    } else {
        auto loaded = io::load_instance(input);
        if (loaded.spec) {
            plan.base_spec = *loaded.spec;
        } else {
            plan.base_observation = std::move(loaded.observation);
        }
    }
    const fs::path dir = output_dir(g);
    const auto rows = run_sweep(plan);
    std::vector<std::vector<std::string>> table;
    for (const auto& r : rows) {
        table.push_back({solver_name(r.solver), io::format_double(r.rate), std::to_string(r.trial),
                         io::format_double(r.nse)});
    }
    write_csv(dir / "sweep.csv", "solver,rate,trial,nse", table);
    std::vector<std::vector<std::string>> means;
    for (const auto& s : summarize(rows)) {
        means.push_back({solver_name(s.solver), io::format_double(s.rate), io::format_double(s.mean_nse),
                         std::to_string(s.trials)});
    }
    write_csv(dir / "summary.csv", "solver,rate,mean_nse,trials", means);
    io::write_json(dir / kConfigFile, resolved);
    out << json{{"command", "sweep"}, {"rows", rows.size()}, {"out", dir.string()}}.dump() << '\n';
    return 0;
}

int cmd_report(const Globals& g, const std::string& input, const std::string& result_dir, const json& resolved,
               std::ostream& out) {
    const auto loaded = io::load_instance(input);
    const fs::path dir = output_dir(g);
    const ObservationMatrix& obs = loaded.observation;

    std::vector<std::pair<std::string, Matrix>> sources = {{"observed", obs.values()}};
    if (loaded.truth) {
        sources.push_back({"corrupted", loaded.truth->corrupted()});
        sources.push_back({"low_rank", loaded.truth->low_rank});
    }
    std::optional<Matrix> l_hat;
    const fs::path results = result_dir.empty() ? fs::path(input) : fs::path(result_dir);
    if (fs::exists(results / "l_hat.csv")) {
        l_hat = io::load_matrix(results / "l_hat.csv");
        sources.push_back({"l_hat", *l_hat});
    } else if (!result_dir.empty()) {
        throw Error(ErrorKind::MissingInput, "no l_hat.csv in " + result_dir);
    }

    std::vector<metrics::MetricRecord> records;
    std::vector<std::string> names;
    std::vector<std::vector<double>> cdfs;
    for (const auto& [name, m] : sources) {
        if (m.cwiseAbs().maxCoeff() == 0.0) continue;
        names.push_back(name);
        cdfs.push_back(metrics::energy_cdf(m));
        for (int k : {5, 10}) {
            const auto& c = cdfs.back();
            const double v = c[std::min<std::size_t>(c.size(), static_cast<std::size_t>(k)) - 1];
            records.push_back({"energy_top_k", {{"matrix", name}, {"k", k}}, v});
        }
    }
    std::string header = "k";
    for (const auto& n : names) header += "," + n;
    std::vector<std::vector<std::string>> rows;
    const std::size_t len = cdfs.empty() ? 0 : cdfs.front().size();
    for (std::size_t k = 0; k < len; ++k) {
        std::vector<std::string> row{std::to_string(k + 1)};
        for (const auto& c : cdfs) row.push_back(io::format_double(c[k]));
        rows.push_back(std::move(row));
    }
    write_csv(dir / "energy_cdf.csv", header, rows);

    std::vector<std::string> node_names;
    if (fs::exists(fs::path(input) / kIngestSidecar)) {
        const json side = io::read_json(fs::path(input) / kIngestSidecar);
        node_names = side.value("node_order", std::vector<std::string>{});
    }
    const auto loss = metrics::loss_rate_per_node(obs.mask());
    std::vector<std::vector<std::string>> loss_rows;
    double loss_sum = 0.0;
    for (std::size_t i = 0; i < loss.size(); ++i) {
        const std::string node = i < node_names.size() ? node_names[i] : std::to_string(i);
        loss_rows.push_back({node, io::format_double(loss[i])});
        loss_sum += loss[i];
    }
    write_csv(dir / "loss_rate.csv", "node,loss_rate", loss_rows);
    records.push_back({"loss_rate_mean", json::object(), loss_sum / double(loss.size())});
    records.push_back({"sampling_rate", json::object(), obs.mask().sampling_rate()});
    if (l_hat && loaded.truth) records.push_back({"nse", json::object(), metrics::nse(*l_hat, loaded.truth->low_rank)});

    io::write_json(dir / "report.json", json(records));
    io::write_json(dir / kConfigFile, resolved);
    out << json{{"command", "report"}, {"records", records.size()}, {"out", dir.string()}}.dump() << '\n';
    return 0;
}

int cmd_ingest(const Globals& g, const std::string& input, std::int64_t slot_seconds, std::int64_t start,
               Index slots, const std::string& node_order, const std::string& reduce, json resolved,
               std::ostream& out) {
    std::ifstream in(input, std::ios::binary);
    if (!in) throw Error(ErrorKind::MissingInput, "cannot open " + input);
    const auto records = ingest::parse_records(in);

    ingest::MatrixBuildSpec spec;
    spec.slot_seconds = slot_seconds;
    spec.seed = g.seed;
    if (reduce == "mean") {
        spec.reduce = ingest::CellReduce::Mean;
    } else if (reduce != "pick") {
        throw invalid_flag("--reduce must be pick or mean");
    }
    if (slot_seconds < 1) throw invalid_flag("--slot-seconds must be >= 1");
    if ((start < 0 || slots < 1) && records.empty()) {
        throw Error(ErrorKind::MissingInput, "no records to derive --start/--slots from");
    }
    std::int64_t first = std::numeric_limits<std::int64_t>::max();
    std::int64_t last = 0;
    for (const auto& r : records) {
        first = std::min(first, r.timestamp);
        last = std::max(last, r.timestamp);
    }
    spec.start = start >= 0 ? start : first;
    spec.n_slots = slots >= 1 ? slots : static_cast<Index>((last - spec.start) / slot_seconds + 1);
    if (spec.n_slots < 1) throw invalid_flag("--start lies after every record; give --slots");
    if (!node_order.empty()) {
        std::vector<std::string> ids;
        if (node_order.front() == '@') {
            std::istringstream lines(io::read_text(node_order.substr(1)));
            std::string line;
            while (std::getline(lines, line)) {
                while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
                if (!line.empty()) ids.push_back(line);
            }
        } else {
            ids = split_list(node_order);
        }
        if (ids.empty()) throw invalid_flag("--node-order is empty");
        spec.node_order = std::move(ids);
    }

    const auto built = ingest::build_matrix(records, spec);
    const fs::path dir = output_dir(g);
    io::save_observation(dir, built.observation);
    io::write_json(dir / kIngestSidecar, ingest::sidecar(built, spec));
    resolved["options"]["start"] = spec.start;
    resolved["options"]["slots"] = spec.n_slots;
    io::write_json(dir / kConfigFile, resolved);
    out << json{{"command", "ingest"},
                {"records", records.size()},
                {"dropped_records", built.dropped_records},
                {"rows", built.observation.dims().rows},
                {"cols", built.observation.dims().cols},
                {"observed", built.observation.mask().count()}}
               .dump()
        << '\n';
    return 0;
}

void report_error(std::ostream& err, const std::string& kind, const std::string& message,
                  std::optional<std::size_t> line = std::nullopt) {
    json j{{"error", kind}, {"message", message}};
    if (line) j["line"] = *line;
    err << j.dump() << '\n';
}

int default_threads() {
    const char* env = std::getenv("LSDR_THREADS");
    if (!env || !*env) return 1;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw invalid_flag("LSDR_THREADS must be a positive integer");
    return static_cast<int>(v);
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Low-rank plus sparse recovery of partially observed sensor matrices", "lsdr"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    g.threads = default_threads();
    Params global_params;
    global_params.add(&app, "--seed", "seed", g.seed, "master seed");
    app.add_option("-o,--out", g.out, "output directory");
    app.add_option("--config", g.config, "JSON config file");
    global_params.add(&app, "--threads", "threads", g.threads, "worker threads (default $LSDR_THREADS or 1)");

    std::map<std::string, Params> cmd_params;

    CLI::App* gen = app.add_subcommand("generate", "write a synthetic instance");
    SynthFlags gen_flags;
    gen_flags.bind(gen, cmd_params["generate"]);

    CLI::App* rec = app.add_subcommand("recover", "run a solver on an instance");
    std::string rec_input;
    rec->add_option("input", rec_input, "instance directory")->required();
    SolverFlags rec_flags;
    rec_flags.bind(rec, cmd_params["recover"], true);

    CLI::App* sweep = app.add_subcommand("sweep", "recovery error across sampling rates");
    std::string sweep_input;
    sweep->add_option("input", sweep_input, "base instance directory (synthetic flags otherwise)");
    SynthFlags sweep_synth;
    sweep_synth.bind(sweep, cmd_params["sweep"]);
    SolverFlags sweep_solver;
    sweep_solver.bind(sweep, cmd_params["sweep"], false);
    std::vector<double> rates{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    std::vector<std::string> solvers{"lsd", "mc"};
    int trials = 10;
    cmd_params["sweep"].add(sweep, "--rates", "rates", rates, "sampling rates")->delimiter(',');
    cmd_params["sweep"].add(sweep, "--solvers", "solvers", solvers, "solvers")->delimiter(',');
    cmd_params["sweep"].add(sweep, "--trials", "trials", trials, "runs per rate");

    CLI::App* rep = app.add_subcommand("report", "energy CDF and loss-rate tables");
    std::string rep_input;
    std::string rep_result;
    rep->add_option("input", rep_input, "instance or ingested directory")->required();
    cmd_params["report"].add(rep, "--result", "result", rep_result, "directory holding l_hat.csv");

    CLI::App* ing = app.add_subcommand("ingest", "build an observation matrix from sensor records");
    std::string ing_input;
    std::int64_t slot_seconds = 1;
    std::int64_t start = -1;
    Index slots = 0;
    std::string node_order;
    std::string reduce = "pick";
    ing->add_option("input", ing_input, "record CSV")->required();
    Params& ip = cmd_params["ingest"];
    ip.add(ing, "--slot-seconds", "slot-seconds", slot_seconds, "slot length in seconds");
    ip.add(ing, "--start", "start", start, "window start, epoch seconds (-1: earliest record)");
    ip.add(ing, "--slots", "slots", slots, "number of slots T (0: through the latest record)");
    ip.add(ing, "--node-order", "node-order", node_order, "comma list or @file of node ids");
    ip.add(ing, "--reduce", "reduce", reduce, "pick|mean");

    std::vector<const char*> argv{"lsdr"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        report_error(err, "InvalidFlag", e.what());
        return 2;
    }

    CLI::App* chosen = app.get_subcommands().front();
    const std::string name = chosen->get_name();
    Params& params = cmd_params[name];
    if (!g.config.empty()) {
        const json cfg = io::read_json(g.config);
        if (!cfg.is_object()) throw invalid_flag("config must be a JSON object");
        // Top-level keys first, then the command's own section, which is strict.
        for (const auto& [key, value] : cfg.items()) {
            if (cmd_params.count(key)) continue;
            if (key == "out") {
                if (app.get_option("--out")->count() == 0) g.out = value.get<std::string>();
                continue;
            }
            bool known = global_params.knows(key);
            for (const auto& [cmd, p] : cmd_params) known = known || p.knows(key);
            if (!known) throw invalid_flag("unknown config key '" + key + "'");
            global_params.apply(key, value);
            params.apply(key, value);
        }
        if (cfg.contains(name)) {
            for (const auto& [key, value] : cfg.at(name).items()) {
                if (!params.knows(key) && !global_params.knows(key)) {
                    throw invalid_flag("unknown config key '" + name + "." + key + "'");
                }
                global_params.apply(key, value);
                params.apply(key, value);
            }
        }
    }
    if (g.threads < 1) throw invalid_flag("--threads must be >= 1");

    const json resolved{{"command", name}, {"global", global_params.resolved()}, {"options", params.resolved()}};
    if (name == "generate") return cmd_generate(g, gen_flags, resolved, out);
    if (name == "recover") return cmd_recover(g, rec_input, rec_flags, resolved, out);
    if (name == "sweep") {
        return cmd_sweep(g, sweep_input, sweep_synth, sweep_solver, rates, solvers, trials, resolved, out);
    }
    if (name == "report") return cmd_report(g, rep_input, rep_result, resolved, out);
    return cmd_ingest(g, ing_input, slot_seconds, start, slots, node_order, reduce, resolved, out);
}

std::vector<double> cell_nse(const SweepPlan& plan, double rate, int trial) {
    std::vector<double> out;
    if (plan.base_spec) {
        synth::SynthSpec spec = *plan.base_spec;
        spec.sampling_rate = rate;
        spec.seed = plan.base_spec->seed + static_cast<std::uint64_t>(trial);
        const auto inst = synth::make_instance(spec);
        const std::optional<GroundTruth> truth = inst.truth;
        for (SolverKind kind : plan.solvers) {
            const auto res = recover(kind, inst.observation, truth, plan.params);
            out.push_back(metrics::nse(res.l_hat, inst.truth.low_rank));
        }
        return out;
    }
    const ObservationMatrix& base = *plan.base_observation;
    const auto& entries = base.mask().entries();
    const Index n = static_cast<Index>(entries.size());
    const Index keep = std::max<Index>(1, static_cast<Index>(std::llround(rate * double(n))));
    std::mt19937_64 rng(synth::derive_seed(plan.seed, static_cast<std::uint64_t>(trial)));
    std::vector<Entry> kept;
    for (Index i : synth::sample_without_replacement(n, keep, rng)) kept.push_back(entries[static_cast<std::size_t>(i)]);
    const auto obs = canonicalize(base.values(), Mask(base.dims(), std::move(kept)));
    for (SolverKind kind : plan.solvers) {
        const auto res = recover(kind, obs, std::nullopt, plan.params);
        out.push_back(metrics::nse(ops::project(base.mask(), res.l_hat), base.values()));
    }
    return out;
}

}  // namespace

SolverKind parse_solver(const std::string& name) {
    if (name == "lsd") return SolverKind::Lsd;
    if (name == "mc") return SolverKind::Mc;
    if (name == "srmf") return SolverKind::Srmf;
    if (name == "oracle") return SolverKind::Oracle;
    throw invalid_flag("unknown solver '" + name + "' (lsd, mc, srmf, oracle)");
}

std::string solver_name(SolverKind kind) {
    switch (kind) {
    case SolverKind::Lsd: return "lsd";
    case SolverKind::Mc: return "mc";
    case SolverKind::Srmf: return "srmf";
    case SolverKind::Oracle: return "oracle";
    }
    return "unknown";
}

DecompositionResult recover(SolverKind kind, const ObservationMatrix& obs,
                            const std::optional<GroundTruth>& truth, const SolverParams& params) {
    if (kind == SolverKind::Oracle) {
        if (!truth) throw Error(ErrorKind::OracleNeedsTruth, "oracle solver needs ground truth");
        return baselines::solve_oracle(obs, baselines::OracleSpec::from_truth(*truth));
    }
    const SolverConfig cfg = checked_config(obs, params.options);
    switch (kind) {
    case SolverKind::Mc: return baselines::solve_mc(obs, cfg);
    case SolverKind::Srmf: return baselines::solve_srmf(obs, cfg, params.smooth_weight);
    default: return solver::solve_lsd(obs, cfg);
    }
}

std::vector<SweepRow> run_sweep(const SweepPlan& plan) {
    if (plan.rates.empty()) throw invalid_flag("no sampling rates");
    for (double r : plan.rates) {
        if (!(r > 0.0 && r <= 1.0)) throw invalid_flag("sampling rates must lie in (0,1]");
    }
    if (plan.solvers.empty()) throw invalid_flag("no solvers");
    if (plan.trials < 1) throw invalid_flag("--trials must be >= 1");
    if (plan.base_spec.has_value() == plan.base_observation.has_value()) {
        throw Error(ErrorKind::MissingInput, "sweep needs exactly one of a synthetic spec or an observation");
    }
    if (!plan.base_spec && std::count(plan.solvers.begin(), plan.solvers.end(), SolverKind::Oracle)) {
        throw Error(ErrorKind::OracleNeedsTruth, "oracle solver needs a synthetic instance");
    }

    const std::size_t trials = static_cast<std::size_t>(plan.trials);
    const std::size_t cells = plan.rates.size() * trials;
    std::vector<std::vector<double>> results(cells);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_lock;
    auto worker = [&] {
        for (std::size_t i = next++; i < cells; i = next++) {
            try {
                results[i] = cell_nse(plan, plan.rates[i / trials], static_cast<int>(i % trials));
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_lock);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const std::size_t n_threads = std::clamp<std::size_t>(static_cast<std::size_t>(plan.threads), 1, cells);
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    std::vector<SweepRow> rows;
    for (std::size_t r = 0; r < plan.rates.size(); ++r) {
        for (std::size_t s = 0; s < plan.solvers.size(); ++s) {
            for (std::size_t t = 0; t < trials; ++t) {
                rows.push_back({plan.solvers[s], plan.rates[r], static_cast<int>(t), results[r * trials + t][s]});
            }
        }
    }
    return rows;
}

std::vector<SweepSummary> summarize(const std::vector<SweepRow>& rows) {
    std::vector<SweepSummary> out;
    for (const auto& row : rows) {
        auto it = std::find_if(out.begin(), out.end(),
                               [&](const SweepSummary& s) { return s.solver == row.solver && s.rate == row.rate; });
        if (it == out.end()) {
            out.push_back({row.solver, row.rate, 0.0, 0});
            it = out.end() - 1;
        }
        it->mean_nse += row.nse;
        it->trials += 1;
    }
    for (auto& s : out) s.mean_nse /= double(s.trials);
    return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        return dispatch(args, out, err);
    } catch (const MalformedLineError& e) {
        report_error(err, "MalformedLine", e.what(), e.line());
    } catch (const Error& e) {
        report_error(err, std::string(to_string(e.kind())), e.what());
        return e.kind() == ErrorKind::InvalidFlag ? 2 : 1;
    } catch (const std::exception& e) {
        report_error(err, "Internal", e.what());
    }
    return 1;
}

}  // namespace lsdr::cli
