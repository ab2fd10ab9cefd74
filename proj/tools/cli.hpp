#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lsdr/core.hpp"
#include "lsdr/synth.hpp"

namespace lsdr::cli {

/// Runs one command line (args excludes the program name). Returns the exit
/// code; errors go to err as a single JSON object.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

enum class SolverKind { Lsd, Mc, Srmf, Oracle };

SolverKind parse_solver(const std::string& name);
std::string solver_name(SolverKind kind);

struct SolverParams {
    SolverOptions options;
    double smooth_weight = 0.01;
};

/// Dispatches to the chosen solver. The oracle needs truth.
DecompositionResult recover(SolverKind kind, const ObservationMatrix& obs,
                            const std::optional<GroundTruth>& truth, const SolverParams& params);

struct SweepPlan {
    std::vector<double> rates;
    std::vector<SolverKind> solvers;
    int trials = 1;
    SolverParams params;
    int threads = 1;
    /// Synthetic mode: trial t regenerates the instance from base_spec with
    /// seed base_spec.seed + t at each rate.
    std::optional<synth::SynthSpec> base_spec;
    /// Observed-data mode: each trial keeps a random subset of the observed
    /// cells; the error is measured on all observed cells.
    std::optional<ObservationMatrix> base_observation;
    std::uint64_t seed = 0;
};

struct SweepRow {
    SolverKind solver;
    double rate = 0.0;
    int trial = 0;
    double nse = 0.0;
};

struct SweepSummary {
    SolverKind solver;
    double rate = 0.0;
    double mean_nse = 0.0;
    int trials = 0;
};

/// Rows ordered by rate, then solver, then trial.
std::vector<SweepRow> run_sweep(const SweepPlan& plan);
std::vector<SweepSummary> summarize(const std::vector<SweepRow>& rows);

}  // namespace lsdr::cli
