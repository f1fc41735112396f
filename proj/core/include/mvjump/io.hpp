#ifndef MVJUMP_IO_HPP
#define MVJUMP_IO_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "mvjump/catalog.hpp"
#include "mvjump/engine.hpp"
#include "mvjump/experiments.hpp"
#include "mvjump/measure.hpp"
#include "mvjump/model.hpp"
#include "mvjump/picard.hpp"

namespace mvj {

/// Shortest decimal representation that round-trips the double exactly;
/// output bytes are a pure function of the value.
std::string format_double(double v);

// CSV writers; each emits a header line then one row per record.
void write_measure_csv(std::ostream& os, const EmpiricalMeasure& m);          // position,weight
void write_flow_csv(std::ostream& os, const MeasureFlow& flow);               // t,position,weight
void write_ensemble_csv(std::ostream& os, const PathEnsemble& ens);           // t,particle,state
void write_jump_log_csv(std::ostream& os, const std::vector<JumpLogEntry>&);  // t,owner,accepted,psi,theta_mean
void write_chaos_csv(std::ostream& os, const ChaosResult& res);               // n,replica,sup_distance
void write_rate_csv(std::ostream& os, const RateResult& res);                 // n,replica,value

// JSON summaries (ordered keys for byte-stable output).
nlohmann::ordered_json picard_diagnostics_json(const PicardDiagnostics& diag);
nlohmann::ordered_json chaos_summary_json(const ChaosResult& res);
nlohmann::ordered_json rate_summary_json(const RateResult& res);
nlohmann::ordered_json moment_audit_json(const MomentAuditResult& res);

/// Inline parametric model: affine combinations of the catalog's basis
/// terms, never arbitrary code.
struct CustomModelConfig {
    bool present = false;
    std::string id = "custom";
    std::vector<BasisTerm> drift;
    std::vector<BasisTerm> diffusion;
    std::vector<BasisTerm> rate;
    std::vector<BasisTerm> self_jump;       // empty => no own jumps
    std::vector<BasisTerm> collective_jump; // empty => no collective jumps
    std::string mark_law = "uniform";       // uniform | gaussian
    std::string initial_kind = "uniform";   // uniform | gaussian | dirac
    double initial_a = -0.5;  // lo / mean / atom
    double initial_b = 0.5;   // hi / stddev / unused
    double lipschitz = 1.0;
    double exp_exponent = 1.0;
    ModelBounds bounds;
    bool collective_mark_free = false;
    bool collective_target_free = false;
};

struct RunConfig {
    std::string command = "simulate";  // validate|solve|simulate|chaos|rates|bounds
    std::string model = "lin-lip";
    CustomModelConfig custom;

    double t_end = 1.0;
    double dt = 1e-3;
    std::size_t n = 100;            // particles (simulate, bounds audit)
    std::vector<std::size_t> ns;    // particle counts (chaos, rates)
    std::size_t m = 5000;           // law atoms (solve)
    double tol = 0.02;
    std::size_t max_iter = 50;
    std::size_t replicas = 50;
    std::uint64_t seed = 1;
    std::string rates_kind = "gn";  // gn | fournier
    std::string law = "gaussian";   // fournier sample law: gaussian | uniform
    bool shared_initial = true;
    unsigned threads = 0;
    std::string out_dir;
};

/// Parses a config object; unknown keys are rejected so typos surface.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

/// Inverse of parse_run_config: re-parsing the emitted object reproduces
/// the config (metadata round-trip).
nlohmann::ordered_json run_config_json(const RunConfig& cfg);

/// Catalog lookup or inline construction from the config's custom block.
ModelSpec build_model(const RunConfig& cfg);

/// Named sample law for the empirical-measure rate experiment.
InitialLaw named_law(const std::string& id);

} // namespace mvj

#endif
