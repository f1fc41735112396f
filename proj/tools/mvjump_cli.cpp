// mvjump: catalog models, particle/limit simulation, measure-flow solver,
// bound calculators and rate experiments behind one reproducible CLI.
//
// Exit codes: 0 success, 2 validation failure, 3 non-convergence, 4 I/O.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mvjump/analysis.hpp"
#include "mvjump/engine.hpp"
#include "mvjump/experiments.hpp"
#include "mvjump/io.hpp"
#include "mvjump/noise.hpp"
#include "mvjump/parallel.hpp"
#include "mvjump/picard.hpp"
#include "mvjump/probes.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNonConvergence = 3;
constexpr int kExitIo = 4;

struct CliError {
    int code;
    std::string message;
};

/// Collects output files in memory and commits them atomically: everything
/// is written into a staging directory that is renamed onto the target only
/// after every file succeeded.
class OutputDir {
public:
    explicit OutputDir(std::string path) : path_(std::move(path)) {}

    bool enabled() const { return !path_.empty(); }
    void add(const std::string& name, std::string content) { files_[name] = std::move(content); }

    void commit(bool force) const {
        if (!enabled()) return;
        try {
            const fs::path target(path_);
            if (fs::exists(target)) {
                if (!force)
                    throw CliError{kExitIo, "output directory '" + path_ +
                                                "' exists (use --force to replace it)"};
                fs::remove_all(target);
            }
            const fs::path staging = target.string() + ".partial";
            fs::remove_all(staging);
            fs::create_directories(staging);
            for (const auto& [name, content] : files_) {
                std::ofstream out(staging / name, std::ios::binary);
                if (!out) throw CliError{kExitIo, "cannot write " + (staging / name).string()};
                out << content;
                if (!out) throw CliError{kExitIo, "short write on " + (staging / name).string()};
            }
            fs::rename(staging, target);
        } catch (const fs::filesystem_error& e) {
            throw CliError{kExitIo, std::string("filesystem error: ") + e.what()};
        }
    }

private:
    std::string path_;
    std::map<std::string, std::string> files_;
};

std::string json_text(const ordered_json& j) { return j.dump(2) + "\n"; }

// Recorded run parameters are location-independent: the same config and seed
// must produce byte-identical outputs no matter where they are written.
std::string metadata_text(mvj::RunConfig cfg) {
    cfg.out_dir.clear();
    return json_text(mvj::run_config_json(cfg));
}

template <typename Fn>
std::string csv_text(Fn&& writer) {
    std::ostringstream os;
    writer(os);
    return os.str();
}

int cmd_validate(const mvj::RunConfig& cfg, OutputDir& out, bool force) {
    const mvj::ModelSpec spec = mvj::build_model(cfg);
    const auto bounded = mvj::probe_boundedness(spec, mvj::default_point_sampler(4.0), 400,
                                                cfg.seed, 256);
    const auto lipschitz = mvj::probe_local_lipschitz(spec, mvj::default_pair_sampler(4.0), 400,
                                                      cfg.seed, 256);
    ordered_json report{
        {"model", spec.id},
        {"boundedness",
         {{"pass", bounded.pass},
          {"max_drift_abs", bounded.max_drift_abs},
          {"max_diffusion_abs", bounded.max_diffusion_abs},
          {"max_rate", bounded.max_rate},
          {"violations", bounded.violations.size()},
          {"note", bounded.note}}},
        {"local_lipschitz",
         {{"pass", lipschitz.pass},
          {"max_ratio", lipschitz.max_ratio},
          {"note", lipschitz.note}}},
        {"pass", bounded.pass && lipschitz.pass}};
    for (const auto& v : bounded.violations)
        report["boundedness"]["witnesses"].push_back(
            {{"quantity", v.quantity}, {"observed", v.observed}, {"declared", v.declared},
             {"at_x", v.at_x}});
    std::cout << json_text(report);
    out.add("validate.json", json_text(report));
    out.add("metadata.json", metadata_text(cfg));
    out.commit(force);
    return (bounded.pass && lipschitz.pass) ? kExitOk : kExitValidation;
}

int cmd_solve(const mvj::RunConfig& cfg, OutputDir& out, bool force) {
    const mvj::ModelSpec spec = mvj::build_model(cfg);
    const mvj::TimeGrid grid = mvj::TimeGrid::uniform(cfg.t_end, cfg.dt);
    mvj::PicardOptions opts;
    opts.n_samples = cfg.m;
    opts.tol = cfg.tol;
    opts.max_iter = cfg.max_iter;
    opts.seed = cfg.seed;
    auto [flow, diag] = mvj::solve_flow(spec, grid, opts);

    const ordered_json dj = mvj::picard_diagnostics_json(diag);
    std::cout << json_text(dj);
    out.add("flow.csv", csv_text([&](std::ostream& os) { mvj::write_flow_csv(os, flow); }));
    out.add("diagnostics.json", json_text(dj));
    out.add("metadata.json", metadata_text(cfg));
    out.commit(force);
    return diag.converged ? kExitOk : kExitNonConvergence;
}

int cmd_simulate(const mvj::RunConfig& cfg, OutputDir& out, bool force) {
    const mvj::ModelSpec spec = mvj::build_model(cfg);
    const mvj::TimeGrid grid = mvj::TimeGrid::uniform(cfg.t_end, cfg.dt);
    mvj::NoiseBundle bundle(cfg.seed, cfg.n, grid, mvj::dominating_rate(spec), spec.mark_law);
    const mvj::PathEnsemble ens = mvj::simulate_particle_system(spec, cfg.n, bundle);

    ordered_json summary{{"model", spec.id},
                         {"n", cfg.n},
                         {"steps", grid.n_steps()},
                         {"events", ens.jump_log.size()},
                         {"terminal_mean", ens.measure_at(ens.n_nodes() - 1).mean()}};
    std::cout << json_text(summary);
    out.add("ensemble.csv",
            csv_text([&](std::ostream& os) { mvj::write_ensemble_csv(os, ens); }));
    out.add("jump_log.csv",
            csv_text([&](std::ostream& os) { mvj::write_jump_log_csv(os, ens.jump_log); }));
    out.add("terminal_measure.csv", csv_text([&](std::ostream& os) {
                mvj::write_measure_csv(os, ens.measure_at(ens.n_nodes() - 1));
            }));
    out.add("summary.json", json_text(summary));
    out.add("metadata.json", metadata_text(cfg));
    out.commit(force);
    return kExitOk;
}

int cmd_chaos(const mvj::RunConfig& cfg, OutputDir& out, bool force) {
    const mvj::ModelSpec spec = mvj::build_model(cfg);
    mvj::ChaosConfig ccfg;
    if (!cfg.ns.empty()) ccfg.ns = cfg.ns;
    ccfg.t_end = cfg.t_end;
    ccfg.dt = cfg.dt;
    ccfg.replicas = cfg.replicas;
    ccfg.seed = cfg.seed;
    ccfg.shared_initial = cfg.shared_initial;
    ccfg.picard.n_samples = cfg.m;
    ccfg.picard.tol = cfg.tol;
    ccfg.picard.max_iter = cfg.max_iter;
    ccfg.n_threads = cfg.threads;
    const mvj::ChaosResult res = mvj::run_chaos(spec, ccfg);

    const ordered_json summary = mvj::chaos_summary_json(res);
    std::cout << json_text(summary);
    out.add("chaos.csv", csv_text([&](std::ostream& os) { mvj::write_chaos_csv(os, res); }));
    out.add("summary.json", json_text(summary));
    out.add("metadata.json", metadata_text(cfg));
    out.commit(force);
    return kExitOk;
}

int cmd_rates(const mvj::RunConfig& cfg, OutputDir& out, bool force) {
    mvj::RateConfig rcfg;
    rcfg.replicas = cfg.replicas;
    rcfg.seed = cfg.seed;
    rcfg.t_end = cfg.t_end;
    rcfg.dt = cfg.dt;
    rcfg.n_threads = cfg.threads;

    mvj::RateResult res;
    if (cfg.rates_kind == "gn") {
        rcfg.ns = cfg.ns.empty() ? std::vector<std::size_t>{25, 100, 400} : cfg.ns;
        res = mvj::run_gn_rate(mvj::build_model(cfg), rcfg);
    } else if (cfg.rates_kind == "fournier") {
        rcfg.ns = cfg.ns.empty() ? std::vector<std::size_t>{100, 1000, 10000} : cfg.ns;
        res = mvj::run_fournier_check(mvj::named_law(cfg.law), rcfg);
    } else {
        throw CliError{kExitValidation, "unknown rates kind '" + cfg.rates_kind + "'"};
    }

    const ordered_json summary = mvj::rate_summary_json(res);
    std::cout << json_text(summary);
    out.add("rates.csv", csv_text([&](std::ostream& os) { mvj::write_rate_csv(os, res); }));
    out.add("summary.json", json_text(summary));
    out.add("metadata.json", metadata_text(cfg));
    out.commit(force);
    return kExitOk;
}

int cmd_bounds(const mvj::RunConfig& cfg, OutputDir& out, bool force) {
    const mvj::ModelSpec spec = mvj::build_model(cfg);
    mvj::MomentAuditConfig acfg;
    acfg.n = cfg.n;
    acfg.t_end = cfg.t_end;
    acfg.dt = cfg.dt;
    acfg.replicas = cfg.replicas;
    acfg.seed = cfg.seed;
    acfg.n_threads = cfg.threads;
    const mvj::MomentAuditResult res = mvj::run_moment_audit(spec, acfg);

    ordered_json report = mvj::moment_audit_json(res);
    report["bound_at_t_end"] =
        mvj::gronwall_exp_moment_bound(spec, res.e_exp_x0, cfg.t_end);
    std::cout << json_text(report);
    out.add("bounds.json", json_text(report));
    out.add("metadata.json", metadata_text(cfg));
    out.commit(force);
    return res.saturated ? kExitValidation : kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"McKean-Vlasov jump-diffusion simulator"};
    app.require_subcommand(1);

    std::string config_path, model, out_dir, rates_kind, law;
    double t_end = 0.0, dt = 0.0, tol = 0.0;
    std::size_t n = 0, m = 0, max_iter = 0, replicas = 0;
    std::vector<std::size_t> ns;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    bool force = false;
    bool independent_initial = false;

    // per-subcommand option handles; Option::count() reports whether the
    // user actually passed the option, which decides config-file overrides
    struct CommonOpts {
        CLI::Option *model, *t_end, *dt, *n, *ns, *m, *tol, *max_iter, *replicas, *seed,
            *rates_kind, *law, *threads, *out;
    };
    std::map<CLI::App*, CommonOpts> common;

    auto add_common = [&](CLI::App* sub) {
        CommonOpts o;
        sub->add_option("--config", config_path, "JSON config file (flags override it)");
        o.model = sub->add_option("--model", model, "catalog model id");
        o.t_end = sub->add_option("--t-end", t_end, "time horizon");
        o.dt = sub->add_option("--dt", dt, "grid step");
        o.n = sub->add_option("--n", n, "particle count");
        o.ns = sub->add_option("--ns", ns, "particle counts for rate experiments");
        o.m = sub->add_option("--m", m, "law atoms for the flow solver");
        o.tol = sub->add_option("--tol", tol, "solver tolerance");
        o.max_iter = sub->add_option("--max-iter", max_iter, "solver iteration cap per window");
        o.replicas = sub->add_option("--replicas", replicas, "independent replicas");
        o.seed = sub->add_option("--seed", seed, "master seed");
        o.rates_kind = sub->add_option("--rates-kind", rates_kind, "gn | fournier");
        o.law = sub->add_option("--law", law, "sample law for the fournier check");
        sub->add_flag("--independent-initial", independent_initial,
                      "draw particle and limit initial states independently");
        o.threads = sub->add_option("--threads", threads, "worker threads (0 = hardware)");
        o.out = sub->add_option("--out", out_dir, "output directory (atomic rename on success)");
        sub->add_flag("--force", force, "replace an existing output directory");
        common[sub] = o;
        return sub;
    };

    CLI::App* validate = add_common(app.add_subcommand("validate", "probe model assumptions"));
    CLI::App* solve = add_common(app.add_subcommand("solve", "solve the limit measure flow"));
    CLI::App* simulate = add_common(app.add_subcommand("simulate", "run the particle system"));
    CLI::App* chaos = add_common(app.add_subcommand("chaos", "coupling-error experiment"));
    CLI::App* rates = add_common(app.add_subcommand("rates", "convergence-rate experiments"));
    CLI::App* bounds = add_common(app.add_subcommand("bounds", "moment-bound calculator/audit"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        mvj::RunConfig cfg;
        if (!config_path.empty()) {
            try {
                cfg = mvj::load_run_config(config_path);
            } catch (const std::runtime_error& e) {
                throw CliError{kExitIo, e.what()};
            }
        }

        // flags win over the config file
        CLI::App* sub = app.get_subcommands().front();
        if (sub == validate) cfg.command = "validate";
        else if (sub == solve) cfg.command = "solve";
        else if (sub == simulate) cfg.command = "simulate";
        else if (sub == chaos) cfg.command = "chaos";
        else if (sub == rates) cfg.command = "rates";
        else if (sub == bounds) cfg.command = "bounds";
        const CommonOpts& o = common.at(sub);
        if (o.model->count()) cfg.model = model;
        if (o.t_end->count()) cfg.t_end = t_end;
        if (o.dt->count()) cfg.dt = dt;
        if (o.n->count()) cfg.n = n;
        if (o.ns->count()) cfg.ns = ns;
        if (o.m->count()) cfg.m = m;
        if (o.tol->count()) cfg.tol = tol;
        if (o.max_iter->count()) cfg.max_iter = max_iter;
        if (o.replicas->count()) cfg.replicas = replicas;
        if (o.seed->count()) cfg.seed = seed;
        if (o.rates_kind->count()) cfg.rates_kind = rates_kind;
        if (o.law->count()) cfg.law = law;
        if (independent_initial) cfg.shared_initial = false;
        if (o.threads->count()) cfg.threads = threads;
        if (o.out->count()) cfg.out_dir = out_dir;

        mvj::worker_threads() = cfg.threads;
        OutputDir out(cfg.out_dir);

        if (cfg.command == "validate") return cmd_validate(cfg, out, force);
        if (cfg.command == "solve") return cmd_solve(cfg, out, force);
        if (cfg.command == "simulate") return cmd_simulate(cfg, out, force);
        if (cfg.command == "chaos") return cmd_chaos(cfg, out, force);
        if (cfg.command == "rates") return cmd_rates(cfg, out, force);
        if (cfg.command == "bounds") return cmd_bounds(cfg, out, force);
        throw CliError{kExitValidation, "unknown command '" + cfg.command + "'"};
    } catch (const CliError& e) {
        std::cerr << "error: " << e.message << "\n";
        return e.code;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::runtime_error& e) {
        // non-convergence and simulation aborts surface here
        std::cerr << "error: " << e.what() << "\n";
        return kExitNonConvergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
}
