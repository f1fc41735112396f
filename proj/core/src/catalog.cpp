#include "mvjump/catalog.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace mvj {

namespace {

// integrate_cached keys; must be globally unique per integrand.
constexpr std::uint64_t kKeyArctanInt = 0x10c11f01;

double arctan_integral(const EmpiricalMeasure& m) {
    return m.integrate_cached(kKeyArctanInt, [](double y) { return std::atan(y); });
}

ModelSpec make_lin_lip() {
    ModelSpec s;
    s.id = "lin-lip";
    s.drift = [](double x, const EmpiricalMeasure& m) { return std::tanh(m.mean() - x); };
    s.diffusion = [](double x, const EmpiricalMeasure&) { return 0.5 * std::cos(x); };
    s.rate = [](double x, const EmpiricalMeasure&) { return 0.5 / (1.0 + x * x); };
    s.self_jump = [](double x, const EmpiricalMeasure&, double u) { return 0.4 * u * std::cos(x); };
    s.collective_jump = [](double x_src, double, const EmpiricalMeasure&, double, double) {
        return 0.3 * std::tanh(x_src);
    };
    s.collective_mark_free = true;
    s.collective_target_free = true;
    s.mark_law = MarkLaw::uniform_symmetric();
    s.initial_law = initial_uniform(-0.5, 0.5);
    s.lipschitz_const = 1.0;
    s.exp_exponent = 1.0;
    s.bounds.drift_sup = 1.0;
    s.bounds.diffusion_sup = 0.5;
    s.bounds.rate_sup = 0.5;
    // int_{-1}^{1} e^{0.4|u cos x|} du/2 <= (e^{0.4}-1)/0.4 ~= 1.2296,
    // declared with slack for Monte Carlo probe noise
    s.bounds.self_jump_exp_sup = 1.26;
    // |Theta| <= 0.3
    s.bounds.collective_jump_exp_sup = 1.35;
    return s;
}

ModelSpec make_loclip() {
    ModelSpec s;
    s.id = "loclip";
    s.drift = [](double x, const EmpiricalMeasure& m) {
        return std::sin(x * x) + arctan_integral(m);
    };
    s.diffusion = [](double x, const EmpiricalMeasure&) { return 0.3 * std::cos(x); };
    s.rate = [](double x, const EmpiricalMeasure&) { return 0.3 / (1.0 + x * x); };
    s.self_jump = [](double x, const EmpiricalMeasure&, double u) {
        return 0.2 * u * std::exp(-x * x);
    };
    s.mark_law = MarkLaw::uniform_symmetric();
    s.initial_law = initial_uniform(-1.0, 1.0);
    s.lipschitz_const = 1.2;
    s.exp_exponent = 1.0;
    s.bounds.drift_sup = 1.0 + M_PI / 2.0 + 1e-9;
    s.bounds.diffusion_sup = 0.3;
    s.bounds.rate_sup = 0.3;
    // (e^{0.2}-1)/0.2 ~= 1.1070, declared with slack for probe noise
    s.bounds.self_jump_exp_sup = 1.13;
    s.bounds.collective_jump_exp_sup = 1.0;
    return s;
}

ModelSpec make_pure_drift() {
    ModelSpec s;
    s.id = "pure-drift";
    s.drift = [](double x, const EmpiricalMeasure&) { return -std::tanh(x); };
    s.diffusion = [](double, const EmpiricalMeasure&) { return 0.0; };
    s.rate = [](double, const EmpiricalMeasure&) { return 0.0; };
    s.mark_law = MarkLaw::uniform_symmetric();
    s.initial_law = initial_dirac(2.0);
    s.lipschitz_const = 1.0;
    s.exp_exponent = 1.0;
    s.bounds.drift_sup = 1.0;
    s.bounds.diffusion_sup = 0.0;
    s.bounds.rate_sup = 0.0;
    s.bounds.self_jump_exp_sup = 1.0;
    s.bounds.collective_jump_exp_sup = 1.0;
    return s;
}

const std::map<std::string, ModelSpec>& catalog() {
    static const std::map<std::string, ModelSpec> models = [] {
        std::map<std::string, ModelSpec> m;
        m.emplace("lin-lip", make_lin_lip());
        m.emplace("loclip", make_loclip());
        m.emplace("pure-drift", make_pure_drift());
        return m;
    }();
    return models;
}

} // namespace

const ModelSpec& catalog_model(const std::string& id) {
    auto it = catalog().find(id);
    if (it == catalog().end())
        throw std::invalid_argument("unknown model id: " + id);
    return it->second;
}

std::vector<std::string> catalog_ids() {
    std::vector<std::string> ids;
    for (const auto& [id, _] : catalog()) ids.push_back(id);
    return ids;
}

InitialLaw initial_uniform(double lo, double hi) {
    if (!(hi > lo)) throw std::invalid_argument("initial_uniform: hi must exceed lo");
    InitialLaw law;
    law.id = "uniform[" + std::to_string(lo) + "," + std::to_string(hi) + "]";
    law.sample = [lo, hi](CounterRng& rng) { return rng.uniform(lo, hi); };
    law.exp_moment = [lo, hi](double a) {
        // int_lo^hi e^{a|x|} dx / (hi-lo), split at 0 when straddling.
        auto primitive_abs = [a](double x) {
            return x >= 0.0 ? (std::exp(a * x) - 1.0) / a : -(std::exp(-a * x) - 1.0) / a;
        };
        return (primitive_abs(hi) - primitive_abs(lo)) / (hi - lo);
    };
    return law;
}

InitialLaw initial_gaussian(double mean, double stddev) {
    if (!(stddev >= 0.0)) throw std::invalid_argument("initial_gaussian: stddev must be >= 0");
    InitialLaw law;
    law.id = "gaussian(" + std::to_string(mean) + "," + std::to_string(stddev) + ")";
    law.sample = [mean, stddev](CounterRng& rng) { return mean + stddev * rng.gaussian(); };
    law.exp_moment = [mean, stddev](double a) {
        if (stddev == 0.0) return std::exp(a * std::abs(mean));
        // E e^{a|X|} = e^{a mu + a^2 s^2/2} Phi(mu/s + a s) + e^{-a mu + a^2 s^2/2} Phi(-mu/s + a s)
        auto Phi = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };
        const double g = std::exp(a * a * stddev * stddev / 2.0);
        return g * (std::exp(a * mean) * Phi(mean / stddev + a * stddev) +
                    std::exp(-a * mean) * Phi(-mean / stddev + a * stddev));
    };
    return law;
}

InitialLaw initial_dirac(double x) {
    InitialLaw law;
    law.id = "dirac(" + std::to_string(x) + ")";
    law.sample = [x](CounterRng&) { return x; };
    law.exp_moment = [x](double a) { return std::exp(a * std::abs(x)); };
    return law;
}

namespace {

using StateBasis = std::function<double(double, const EmpiricalMeasure&)>;

const std::map<std::string, StateBasis>& state_bases() {
    static const std::map<std::string, StateBasis> bases = {
        {"const", [](double, const EmpiricalMeasure&) { return 1.0; }},
        {"x", [](double x, const EmpiricalMeasure&) { return x; }},
        {"sin_x", [](double x, const EmpiricalMeasure&) { return std::sin(x); }},
        {"cos_x", [](double x, const EmpiricalMeasure&) { return std::cos(x); }},
        {"tanh_x", [](double x, const EmpiricalMeasure&) { return std::tanh(x); }},
        {"sin_x2", [](double x, const EmpiricalMeasure&) { return std::sin(x * x); }},
        {"inv_1px2", [](double x, const EmpiricalMeasure&) { return 1.0 / (1.0 + x * x); }},
        {"mean", [](double, const EmpiricalMeasure& m) { return m.mean(); }},
        {"tanh_mean_minus_x",
         [](double x, const EmpiricalMeasure& m) { return std::tanh(m.mean() - x); }},
        {"arctan_int", [](double, const EmpiricalMeasure& m) { return arctan_integral(m); }},
    };
    return bases;
}

StateBasis lookup_state_basis(const std::string& name) {
    auto it = state_bases().find(name);
    if (it == state_bases().end())
        throw std::invalid_argument("unknown coefficient basis: " + name);
    return it->second;
}

} // namespace

DriftFn make_state_coefficient(const std::vector<BasisTerm>& terms) {
    std::vector<std::pair<StateBasis, double>> parts;
    parts.reserve(terms.size());
    for (const auto& t : terms) parts.emplace_back(lookup_state_basis(t.basis), t.scale);
    return [parts](double x, const EmpiricalMeasure& m) {
        double s = 0.0;
        for (const auto& [g, c] : parts) s += c * g(x, m);
        return s;
    };
}

SelfJumpFn make_self_jump_coefficient(const std::vector<BasisTerm>& terms) {
    using MarkBasis = std::function<double(double, const EmpiricalMeasure&, double)>;
    static const std::map<std::string, MarkBasis> mark_bases = {
        {"u", [](double, const EmpiricalMeasure&, double u) { return u; }},
        {"u_cos_x", [](double x, const EmpiricalMeasure&, double u) { return u * std::cos(x); }},
        {"u_exp_negx2",
         [](double x, const EmpiricalMeasure&, double u) { return u * std::exp(-x * x); }},
    };
    std::vector<std::pair<MarkBasis, double>> parts;
    parts.reserve(terms.size());
    for (const auto& t : terms) {
        auto it = mark_bases.find(t.basis);
        if (it != mark_bases.end()) {
            parts.emplace_back(it->second, t.scale);
        } else {
            auto g = lookup_state_basis(t.basis);
            parts.emplace_back(
                [g](double x, const EmpiricalMeasure& m, double) { return g(x, m); }, t.scale);
        }
    }
    return [parts](double x, const EmpiricalMeasure& m, double u) {
        double s = 0.0;
        for (const auto& [g, c] : parts) s += c * g(x, m, u);
        return s;
    };
}

CollectiveJumpFn make_collective_coefficient(const std::vector<BasisTerm>& terms) {
    using CollBasis = std::function<double(double, double, double, double)>;
    static const std::map<std::string, CollBasis> bases = {
        {"const", [](double, double, double, double) { return 1.0; }},
        {"tanh_src", [](double xs, double, double, double) { return std::tanh(xs); }},
        {"tanh_tgt", [](double, double xt, double, double) { return std::tanh(xt); }},
        {"tanh_src_minus_tgt",
         [](double xs, double xt, double, double) { return std::tanh(xs - xt); }},
        {"v_src", [](double, double, double vs, double) { return vs; }},
        {"v_tgt", [](double, double, double, double vt) { return vt; }},
        {"v_src_cos_src",
         [](double xs, double, double vs, double) { return vs * std::cos(xs); }},
    };
    std::vector<std::pair<CollBasis, double>> parts;
    parts.reserve(terms.size());
    for (const auto& t : terms) {
        auto it = bases.find(t.basis);
        if (it == bases.end())
            throw std::invalid_argument("unknown collective-jump basis: " + t.basis);
        parts.emplace_back(it->second, t.scale);
    }
    return [parts](double xs, double xt, const EmpiricalMeasure&, double vs, double vt) {
        double s = 0.0;
        for (const auto& [g, c] : parts) s += c * g(xs, xt, vs, vt);
        return s;
    };
}

} // namespace mvj
