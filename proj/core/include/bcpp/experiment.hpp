#ifndef BCPP_EXPERIMENT_HPP
#define BCPP_EXPERIMENT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bcpp/lattice.hpp"
#include "bcpp/process.hpp"
#include "bcpp/profile.hpp"
#include "bcpp/test_function.hpp"

namespace bcpp {

enum class ExperimentKind { Simulate, Hydro, Fluct, Moments, Gamma, Report };

struct MomentsSpec {
    std::string sub = "second"; // second | fourth | cov | chain
    double t = 0.2;             // macroscopic
    int64_t walks = 100000;
    int64_t horizon = 10000;
    int radius = 0; // uniformization box (0 = auto)
    std::vector<int> separations = {2, 4, 8, 16};
    double c1 = 1.5;
};

struct GammaSpec {
    int64_t walks = 20000;
    int64_t horizon = 100000;
};

/// Declarative experiment description; round-trips losslessly through JSON
/// and rejects unknown keys (fail-closed).
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Simulate;
    ModelParams params;
    InitialLaw init;
    std::vector<std::string> test_functions = {"gauss"};
    std::vector<double> checkpoints = {0.1, 0.2, 0.3};
    std::vector<int> covariance_displacements = {};
    int replicas = 8;
    uint64_t seed = 1;
    int threads = 1;
    std::string out = "";
    MomentsSpec moments;
    GammaSpec gamma;
    std::vector<std::string> report_inputs; // for kind = Report

    static ExperimentConfig from_json_text(const std::string& text);
    static ExperimentConfig from_json_file(const std::string& path);
    std::string to_json_text() const;

    /// FNV-1a of the canonical dump; the no-seed variant identifies configs
    /// that may be pooled.
    std::string config_hash(bool include_seed = true) const;

    std::vector<TestFunction> make_test_functions() const;
};

struct ReportRow {
    std::string name;
    double predicted = 0.0;
    double measured = 0.0;
    double stderr_ = 0.0;
    double tol_abs = 0.0;    // pass iff |measured-predicted| <= tol_abs + tol_se_mult*stderr
    double tol_se_mult = 0.0;
    int64_t n = 0;
    bool enforced = false; // enforced rows gate the exit status
    bool pass = true;

    void evaluate() { pass = std::abs(measured - predicted) <= tol_abs + tol_se_mult * stderr_; }
};

struct RunReport {
    std::string kind;
    std::string config_hash;
    std::string config_hash_noseed;
    uint64_t seed = 0;
    double wall_time_s = 0.0;
    double events_per_second = 0.0;
    std::vector<ReportRow> rows;

    bool all_pass() const {
        for (const auto& r : rows)
            if (r.enforced && !r.pass) return false;
        return true;
    }
    std::string to_json_text() const;
    static RunReport from_json_file(const std::string& path);
};

/// Dispatch to the owning module, farm replicas with derived seeds, write the
/// raw data (JSON-lines / CSV keyed by the experiment kind) plus a summary
/// report. Deterministic given (config, seed) for any thread count.
RunReport run_experiment(const ExperimentConfig& config);

/// Count-weighted pooling of reports from identical configs (modulo seed);
/// refuses mismatched configs. Tolerances are re-evaluated on pooled numbers.
RunReport aggregate_reports(const std::vector<std::string>& paths);

} // namespace bcpp

#endif
