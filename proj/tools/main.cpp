#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bcpp/experiment.hpp"

namespace {

using bcpp::ExperimentConfig;
using bcpp::ExperimentKind;

void print_report(const bcpp::RunReport& rep) {
    std::printf("# %s  hash=%s  seed=%llu  wall=%.2fs", rep.kind.c_str(),
                rep.config_hash.c_str(), static_cast<unsigned long long>(rep.seed),
                rep.wall_time_s);
    if (rep.events_per_second > 0)
        std::printf("  throughput=%.3g events/s", rep.events_per_second);
    std::printf("\n");
    for (const auto& r : rep.rows) {
        std::printf("%-48s measured=%-14.6g predicted=%-14.6g stderr=%-10.3g %s%s\n",
                    r.name.c_str(), r.measured, r.predicted, r.stderr_,
                    r.enforced ? (r.pass ? "PASS" : "FAIL") : "info",
                    r.enforced ? "" : "");
    }
    std::printf("overall: %s\n", rep.all_pass() ? "PASS" : "FAIL");
}

struct CommonFlags {
    std::string config_path;
    std::string out;
    uint64_t seed = 0;
    int replicas = 0;
    int threads = 0;
    bool seed_set = false, replicas_set = false, threads_set = false, out_set = false;
};

void add_common(CLI::App* cmd, CommonFlags& cf) {
    cmd->add_option("--config", cf.config_path, "declarative JSON config file");
    cmd->add_option_function<std::string>(
        "--out", [&](const std::string& v) { cf.out = v; cf.out_set = true; },
        "output path prefix");
    cmd->add_option_function<uint64_t>(
        "--seed", [&](uint64_t v) { cf.seed = v; cf.seed_set = true; }, "master seed");
    cmd->add_option_function<int>(
        "--replicas", [&](int v) { cf.replicas = v; cf.replicas_set = true; },
        "replica count");
    cmd->add_option_function<int>(
        "--threads", [&](int v) { cf.threads = v; cf.threads_set = true; },
        "worker pool size");
}

void apply_common(ExperimentConfig& cfg, const CommonFlags& cf) {
    if (cf.seed_set) cfg.seed = cf.seed;
    if (cf.replicas_set) cfg.replicas = cf.replicas;
    if (cf.threads_set) cfg.threads = cf.threads;
    if (cf.out_set) cfg.out = cf.out;
}

bcpp::InitialLaw::Kind init_kind(const std::string& s) {
    if (s == "constant-one") return bcpp::InitialLaw::Kind::ConstantOne;
    if (s == "two-point") return bcpp::InitialLaw::Kind::TwoPoint;
    if (s == "gamma-mean-one") return bcpp::InitialLaw::Kind::GammaMeanOne;
    if (s == "profile") return bcpp::InitialLaw::Kind::Profile;
    throw CLI::ValidationError("--init", "unknown initial law: " + s);
}

bcpp::ProfileSpec::Kind profile_kind(const std::string& s) {
    if (s == "flat") return bcpp::ProfileSpec::Kind::Flat;
    if (s == "bump") return bcpp::ProfileSpec::Kind::Bump;
    if (s == "cosine") return bcpp::ProfileSpec::Kind::Cosine;
    throw CLI::ValidationError("--profile", "unknown profile: " + s);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"binary contact path process laboratory"};
    app.require_subcommand(1);

    ExperimentConfig cfg;
    CommonFlags common;
    std::string init_name = "constant-one";
    std::string profile_name = "flat";
    std::string moments_sub;
    std::vector<std::string> report_paths;

    auto add_params = [&](CLI::App* cmd) {
        cmd->add_option("--d", cfg.params.d, "dimension");
        cmd->add_option("--lambda", cfg.params.lambda, "infection rate");
        cmd->add_option("--lambda1", cfg.params.lambda1, "weak asymmetry");
        cmd->add_option("--lambda2", cfg.params.lambda2, "linear growth");
        cmd->add_option("--N", cfg.params.N, "scaling parameter");
        cmd->add_option("--L", cfg.params.L, "torus side");
        cmd->add_option("--T", cfg.params.T, "macroscopic horizon");
    };
    auto add_init = [&](CLI::App* cmd) {
        cmd->add_option("--init", init_name,
                        "initial law: constant-one|two-point|gamma-mean-one|profile");
        cmd->add_option("--shape", cfg.init.gamma_shape, "gamma-law shape");
        cmd->add_option("--profile", profile_name, "profile kind: flat|bump|cosine");
        cmd->add_option("--amplitude", cfg.init.profile.amplitude, "profile amplitude");
        cmd->add_option("--baseline", cfg.init.profile.baseline, "profile baseline");
        cmd->add_option("--kappa", cfg.init.profile.kappa, "profile bump concentration");
        cmd->add_option("--profile-shape", cfg.init.profile_shape,
                        "per-site gamma shape (<=0: deterministic)");
    };

    auto* sim = app.add_subcommand("simulate", "run the microscopic process");
    add_params(sim);
    add_init(sim);
    sim->add_option("--checkpoints", cfg.checkpoints, "macroscopic observation times");
    sim->add_option("--cov-displacements", cfg.covariance_displacements,
                    "axis-0 displacements for spatial covariance");
    add_common(sim, common);

    auto* hyd = app.add_subcommand("hydro", "empirical measure vs PDE prediction");
    add_params(hyd);
    add_init(hyd);
    hyd->add_option("--G", cfg.test_functions, "test functions (cos|gauss|hermite-like|const)");
    hyd->add_option("--checkpoints", cfg.checkpoints, "macroscopic times");
    add_common(hyd, common);

    auto* flu = app.add_subcommand("fluct", "fluctuation field instrumentation");
    add_params(flu);
    add_init(flu);
    flu->add_option("--H", cfg.test_functions, "test functions (cos|gauss|hermite-like)");
    flu->add_option("--checkpoints", cfg.checkpoints, "macroscopic times");
    add_common(flu, common);

    auto* mom = app.add_subcommand("moments", "random-walk moment representations");
    mom->add_option("sub", moments_sub, "second|fourth|cov|chain")->required();
    add_params(mom);
    add_init(mom);
    mom->add_option("--t", cfg.moments.t, "macroscopic time");
    mom->add_option("--walks", cfg.moments.walks, "walk count");
    mom->add_option("--horizon", cfg.moments.horizon, "step horizon");
    mom->add_option("--radius", cfg.moments.radius, "uniformization box radius (0=auto)");
    mom->add_option("--separations", cfg.moments.separations, "covariance separations");
    mom->add_option("--C1", cfg.moments.c1, "chain weight constant");
    add_common(mom, common);

    auto* gam = app.add_subcommand("gamma", "escape probability: Green function vs MC");
    gam->add_option("--d", cfg.params.d, "dimension");
    gam->add_option("--walks", cfg.gamma.walks, "MC walks");
    gam->add_option("--horizon", cfg.gamma.horizon, "censoring horizon (steps)");
    add_common(gam, common);

    auto* repc = app.add_subcommand("report", "pool reports from identical configs");
    repc->add_option("paths", report_paths, "report JSON files")->required();
    add_common(repc, common);

    CLI11_PARSE(app, argc, argv);

    try {
        if (!common.config_path.empty()) {
            cfg = ExperimentConfig::from_json_file(common.config_path);
        } else {
            cfg.init.kind = init_kind(init_name);
            cfg.init.profile.kind = profile_kind(profile_name);
            if (sim->parsed()) cfg.kind = ExperimentKind::Simulate;
            if (hyd->parsed()) cfg.kind = ExperimentKind::Hydro;
            if (flu->parsed()) cfg.kind = ExperimentKind::Fluct;
            if (mom->parsed()) {
                cfg.kind = ExperimentKind::Moments;
                cfg.moments.sub = moments_sub;
            }
            if (gam->parsed()) cfg.kind = ExperimentKind::Gamma;
            if (repc->parsed()) {
                cfg.kind = ExperimentKind::Report;
                cfg.report_inputs = report_paths;
            }
        }
        apply_common(cfg, common);
        auto report = bcpp::run_experiment(cfg);
        print_report(report);
        return report.all_pass() ? 0 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
