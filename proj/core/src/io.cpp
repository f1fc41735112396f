#include "mvjump/io.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <set>
#include <stdexcept>

#include "mvjump/parallel.hpp"
#include "mvjump/rng.hpp"

namespace mvj {

unsigned& worker_threads() {
    static unsigned n = 0;
    return n;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_measure_csv(std::ostream& os, const EmpiricalMeasure& m) {
    os << "position,weight\n";
    for (std::size_t i = 0; i < m.size(); ++i)
        os << format_double(m.position(i)) << ',' << format_double(m.weight(i)) << '\n';
}

void write_flow_csv(std::ostream& os, const MeasureFlow& flow) {
    os << "t,position,weight\n";
    for (std::size_t k = 0; k < flow.n_nodes(); ++k) {
        const std::string t = format_double(flow.grid().node(k));
        const EmpiricalMeasure& m = flow.at(k);
        for (std::size_t i = 0; i < m.size(); ++i)
            os << t << ',' << format_double(m.position(i)) << ','
               << format_double(m.weight(i)) << '\n';
    }
}

void write_ensemble_csv(std::ostream& os, const PathEnsemble& ens) {
    os << "t,particle,state\n";
    for (std::size_t k = 0; k < ens.n_nodes(); ++k) {
        const std::string t = format_double(ens.times[k]);
        for (std::size_t i = 0; i < ens.n_particles(); ++i)
            os << t << ',' << i << ',' << format_double(ens.state(k, i)) << '\n';
    }
}

void write_jump_log_csv(std::ostream& os, const std::vector<JumpLogEntry>& log) {
    os << "t,owner,accepted,psi,theta_mean\n";
    for (const JumpLogEntry& e : log)
        os << format_double(e.time) << ',' << e.owner << ',' << (e.accepted ? 1 : 0) << ','
           << format_double(e.psi) << ',' << format_double(e.theta_mean) << '\n';
}

void write_chaos_csv(std::ostream& os, const ChaosResult& res) {
    os << "n,replica,sup_distance\n";
    for (const ChaosRow& r : res.rows)
        os << r.n << ',' << r.replica << ',' << format_double(r.sup_distance) << '\n';
}

void write_rate_csv(std::ostream& os, const RateResult& res) {
    os << "n,replica,value\n";
    for (const RateRow& r : res.rows)
        os << r.n << ',' << r.replica << ',' << format_double(r.value) << '\n';
}

namespace {

nlohmann::ordered_json summary_points_json(const std::vector<SummaryPoint>& points) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const SummaryPoint& p : points)
        arr.push_back({{"x", p.x}, {"mean", p.mean}, {"std_error", p.std_error},
                       {"count", p.count}});
    return arr;
}

nlohmann::ordered_json fit_json(const PowerLawFit& fit) {
    return {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r2", fit.r2}};
}

} // namespace

nlohmann::ordered_json picard_diagnostics_json(const PicardDiagnostics& diag) {
    nlohmann::ordered_json windows = nlohmann::ordered_json::array();
    for (const WindowDiagnostics& w : diag.windows)
        windows.push_back({{"first_step", w.first_step},
                           {"n_steps", w.n_steps},
                           {"iterations", w.distances.size()},
                           {"distances", w.distances},
                           {"converged", w.converged}});
    return {{"converged", diag.converged},
            {"total_iterations", diag.total_iterations},
            {"final_distance", diag.final_distance},
            {"windows", std::move(windows)}};
}

nlohmann::ordered_json chaos_summary_json(const ChaosResult& res) {
    return {{"model", res.model_id},
            {"seed", res.seed},
            {"generator", kGeneratorId},
            {"dt", res.dt},
            {"t_end", res.t_end},
            {"replicas", res.replicas},
            {"per_n", summary_points_json(res.per_n)},
            {"fit", fit_json(res.fit)},
            {"window_end_times", res.window_end_times},
            {"window_errors", res.window_errors},
            {"recursion",
             {{"c1", res.c1},
              {"c2", res.c2},
              {"window3_predicted", res.window3_predicted},
              {"window3_observed", res.window3_observed},
              {"within_factor3", res.recursion_within_factor3},
              {"note", res.recursion_note}}},
            {"flow_diagnostics", picard_diagnostics_json(res.flow_diagnostics)}};
}

nlohmann::ordered_json rate_summary_json(const RateResult& res) {
    return {{"id", res.id},
            {"seed", res.seed},
            {"generator", kGeneratorId},
            {"per_n", summary_points_json(res.per_n)},
            {"fit", fit_json(res.fit)},
            {"warning", res.warning},
            {"note", res.note}};
}

nlohmann::ordered_json moment_audit_json(const MomentAuditResult& res) {
    return {{"model", res.model_id},
            {"k_constant", res.k_constant},
            {"e_exp_x0", res.e_exp_x0},
            {"max_ratio", res.max_ratio},
            {"witness_time", res.witness_time},
            {"max_excess_sigmas", res.max_excess_sigmas},
            {"saturated", res.saturated},
            {"pass", res.pass},
            {"times", res.times},
            {"observed", summary_points_json(res.observed)},
            {"bound", res.bound}};
}

namespace {

std::vector<BasisTerm> parse_terms(const nlohmann::json& j, const std::string& what) {
    if (!j.is_array()) throw std::invalid_argument("config: " + what + " must be an array");
    std::vector<BasisTerm> terms;
    for (const auto& t : j) {
        BasisTerm term;
        term.basis = t.at("basis").get<std::string>();
        term.scale = t.value("scale", 1.0);
        terms.push_back(std::move(term));
    }
    return terms;
}

nlohmann::ordered_json terms_json(const std::vector<BasisTerm>& terms) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const BasisTerm& t : terms) arr.push_back({{"basis", t.basis}, {"scale", t.scale}});
    return arr;
}

void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& known,
                         const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + where);
}

CustomModelConfig parse_custom(const nlohmann::json& j) {
    reject_unknown_keys(j,
                        {"id", "drift", "diffusion", "rate", "self_jump", "collective_jump",
                         "mark_law", "initial", "lipschitz", "exp_exponent", "bounds",
                         "collective_mark_free", "collective_target_free"},
                        "model block");
    CustomModelConfig c;
    c.present = true;
    c.id = j.value("id", std::string("custom"));
    if (j.contains("drift")) c.drift = parse_terms(j["drift"], "drift");
    if (j.contains("diffusion")) c.diffusion = parse_terms(j["diffusion"], "diffusion");
    if (j.contains("rate")) c.rate = parse_terms(j["rate"], "rate");
    if (j.contains("self_jump")) c.self_jump = parse_terms(j["self_jump"], "self_jump");
    if (j.contains("collective_jump"))
        c.collective_jump = parse_terms(j["collective_jump"], "collective_jump");
    c.mark_law = j.value("mark_law", std::string("uniform"));
    if (j.contains("initial")) {
        const auto& init = j["initial"];
        reject_unknown_keys(init, {"kind", "a", "b"}, "initial block");
        c.initial_kind = init.value("kind", std::string("uniform"));
        c.initial_a = init.value("a", -0.5);
        c.initial_b = init.value("b", 0.5);
    }
    c.lipschitz = j.value("lipschitz", 1.0);
    c.exp_exponent = j.value("exp_exponent", 1.0);
    if (j.contains("bounds")) {
        const auto& b = j["bounds"];
        reject_unknown_keys(
            b, {"drift_sup", "diffusion_sup", "rate_sup", "self_jump_exp_sup",
                "collective_jump_exp_sup"},
            "bounds block");
        c.bounds.drift_sup = b.value("drift_sup", 0.0);
        c.bounds.diffusion_sup = b.value("diffusion_sup", 0.0);
        c.bounds.rate_sup = b.value("rate_sup", 0.0);
        c.bounds.self_jump_exp_sup = b.value("self_jump_exp_sup", 1.0);
        c.bounds.collective_jump_exp_sup = b.value("collective_jump_exp_sup", 1.0);
    }
    c.collective_mark_free = j.value("collective_mark_free", false);
    c.collective_target_free = j.value("collective_target_free", false);
    return c;
}

nlohmann::ordered_json custom_json(const CustomModelConfig& c) {
    nlohmann::ordered_json j;
    j["id"] = c.id;
    j["drift"] = terms_json(c.drift);
    j["diffusion"] = terms_json(c.diffusion);
    j["rate"] = terms_json(c.rate);
    if (!c.self_jump.empty()) j["self_jump"] = terms_json(c.self_jump);
    if (!c.collective_jump.empty()) j["collective_jump"] = terms_json(c.collective_jump);
    j["mark_law"] = c.mark_law;
    j["initial"] = {{"kind", c.initial_kind}, {"a", c.initial_a}, {"b", c.initial_b}};
    j["lipschitz"] = c.lipschitz;
    j["exp_exponent"] = c.exp_exponent;
    j["bounds"] = {{"drift_sup", c.bounds.drift_sup},
                   {"diffusion_sup", c.bounds.diffusion_sup},
                   {"rate_sup", c.bounds.rate_sup},
                   {"self_jump_exp_sup", c.bounds.self_jump_exp_sup},
                   {"collective_jump_exp_sup", c.bounds.collective_jump_exp_sup}};
    j["collective_mark_free"] = c.collective_mark_free;
    j["collective_target_free"] = c.collective_target_free;
    return j;
}

} // namespace

RunConfig parse_run_config(const nlohmann::json& j) {
    reject_unknown_keys(j,
                        {"command", "model", "custom_model", "t_end", "dt", "n", "ns", "m",
                         "tol", "max_iter", "replicas", "seed", "rates_kind", "law",
                         "shared_initial", "threads", "out_dir"},
                        "config");
    RunConfig cfg;
    cfg.command = j.value("command", std::string("simulate"));
    cfg.model = j.value("model", std::string("lin-lip"));
    if (j.contains("custom_model")) cfg.custom = parse_custom(j["custom_model"]);
    cfg.t_end = j.value("t_end", 1.0);
    cfg.dt = j.value("dt", 1e-3);
    cfg.n = j.value("n", std::size_t{100});
    if (j.contains("ns")) cfg.ns = j["ns"].get<std::vector<std::size_t>>();
    cfg.m = j.value("m", std::size_t{5000});
    cfg.tol = j.value("tol", 0.02);
    cfg.max_iter = j.value("max_iter", std::size_t{50});
    cfg.replicas = j.value("replicas", std::size_t{50});
    cfg.seed = j.value("seed", std::uint64_t{1});
    cfg.rates_kind = j.value("rates_kind", std::string("gn"));
    cfg.law = j.value("law", std::string("gaussian"));
    cfg.shared_initial = j.value("shared_initial", true);
    cfg.threads = j.value("threads", 0u);
    cfg.out_dir = j.value("out_dir", std::string());

    if (!(cfg.dt > 0.0)) throw std::invalid_argument("config: dt must be positive");
    if (!(cfg.t_end > 0.0)) throw std::invalid_argument("config: t_end must be positive");
    if (!(cfg.tol > 0.0)) throw std::invalid_argument("config: tol must be positive");
    if (cfg.n < 1 || cfg.m < 1 || cfg.max_iter < 1 || cfg.replicas < 1)
        throw std::invalid_argument("config: counts must be >= 1");
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
    nlohmann::json j;
    in >> j;
    return parse_run_config(j);
}

nlohmann::ordered_json run_config_json(const RunConfig& cfg) {
    nlohmann::ordered_json j;
    j["command"] = cfg.command;
    j["model"] = cfg.model;
    if (cfg.custom.present) j["custom_model"] = custom_json(cfg.custom);
    j["t_end"] = cfg.t_end;
    j["dt"] = cfg.dt;
    j["n"] = cfg.n;
    if (!cfg.ns.empty()) j["ns"] = cfg.ns;
    j["m"] = cfg.m;
    j["tol"] = cfg.tol;
    j["max_iter"] = cfg.max_iter;
    j["replicas"] = cfg.replicas;
    j["seed"] = cfg.seed;
    j["rates_kind"] = cfg.rates_kind;
    j["law"] = cfg.law;
    j["shared_initial"] = cfg.shared_initial;
    j["threads"] = cfg.threads;
    j["out_dir"] = cfg.out_dir;
    return j;
}

InitialLaw named_law(const std::string& id) {
    if (id == "gaussian") return initial_gaussian(0.0, 1.0);
    if (id == "uniform") return initial_uniform(0.0, 1.0);
    if (id == "dirac") return initial_dirac(0.0);
    throw std::invalid_argument("unknown sample law '" + id + "'");
}

ModelSpec build_model(const RunConfig& cfg) {
    if (!cfg.custom.present) return catalog_model(cfg.model);

    const CustomModelConfig& c = cfg.custom;
    ModelSpec spec;
    spec.id = c.id;
    spec.drift = make_state_coefficient(c.drift);
    spec.diffusion = make_state_coefficient(c.diffusion);
    spec.rate = make_state_coefficient(c.rate);
    if (!c.self_jump.empty()) spec.self_jump = make_self_jump_coefficient(c.self_jump);
    if (!c.collective_jump.empty())
        spec.collective_jump = make_collective_coefficient(c.collective_jump);

    if (c.mark_law == "uniform") spec.mark_law = MarkLaw::uniform_symmetric();
    else if (c.mark_law == "gaussian") spec.mark_law = MarkLaw::standard_gaussian();
    else throw std::invalid_argument("config: unknown mark_law '" + c.mark_law + "'");

    if (c.initial_kind == "uniform") spec.initial_law = initial_uniform(c.initial_a, c.initial_b);
    else if (c.initial_kind == "gaussian")
        spec.initial_law = initial_gaussian(c.initial_a, c.initial_b);
    else if (c.initial_kind == "dirac") spec.initial_law = initial_dirac(c.initial_a);
    else throw std::invalid_argument("config: unknown initial kind '" + c.initial_kind + "'");

    spec.lipschitz_const = c.lipschitz;
    spec.exp_exponent = c.exp_exponent;
    spec.bounds = c.bounds;
    spec.collective_mark_free = c.collective_mark_free;
    spec.collective_target_free = c.collective_target_free;
    return spec;
}

} // namespace mvj
