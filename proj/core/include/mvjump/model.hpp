#ifndef MVJUMP_MODEL_HPP
#define MVJUMP_MODEL_HPP

#include <functional>
#include <string>

#include "mvjump/measure.hpp"
#include "mvjump/rng.hpp"

namespace mvj {

/// Base distribution on the mark space (fixed to the real line). Marks of a
/// collective-jump event are i.i.d. coordinates from this law, drawn lazily:
/// only the owner's and each affected particle's coordinate is ever sampled.
struct MarkLaw {
    std::string id;
    std::function<double(CounterRng&)> sample;

    static MarkLaw uniform_symmetric();  // Uniform(-1, 1)
    static MarkLaw standard_gaussian();
};

struct InitialLaw {
    std::string id;
    std::function<double(CounterRng&)> sample;
    /// Closed-form E exp(a|X_0|) as a function of a (used by bound reports).
    std::function<double(double)> exp_moment;
};

/// Declared sup-norms and exponential-integral bounds; probe-checked, the
/// Gronwall constant K is assembled from these.
struct ModelBounds {
    double drift_sup = 0.0;      // ||b||_inf
    double diffusion_sup = 0.0;  // ||sigma||_inf
    double rate_sup = 0.0;       // ||f||_inf
    double self_jump_exp_sup = 1.0;        // sup_x,m int e^{a|Phi|} drho
    double collective_jump_exp_sup = 1.0;  // sup int e^{a|Theta|} dnu
};

using DriftFn = std::function<double(double, const EmpiricalMeasure&)>;
using RateFn = DriftFn;
using SelfJumpFn = std::function<double(double, const EmpiricalMeasure&, double)>;
using CollectiveJumpFn =
    std::function<double(double, double, const EmpiricalMeasure&, double, double)>;

/// A McKean-Vlasov jump-diffusion model as data. Evaluators must be pure
/// functions of their arguments; the spec is immutable after construction
/// and safe to share across threads.
struct ModelSpec {
    std::string id;

    DriftFn drift;            // b(x, m)
    DriftFn diffusion;        // sigma(x, m)
    RateFn rate;              // f(x, m) >= 0
    SelfJumpFn self_jump;     // Phi / Psi (x, m, mark); null => no own jumps
    CollectiveJumpFn collective_jump;  // Theta(x_src, x_tgt, m, v_src, v_tgt); null => none

    MarkLaw mark_law;
    InitialLaw initial_law;

    double lipschitz_const = 1.0;  // L
    double exp_exponent = 1.0;     // a
    ModelBounds bounds;

    // Structure hints for the compensator estimator; declaring them wrongly
    // only costs accuracy, never correctness of the generic path.
    bool collective_mark_free = false;    // Theta ignores both marks
    bool collective_target_free = false;  // Theta ignores x_tgt

    bool has_self_jump() const { return static_cast<bool>(self_jump); }
    bool has_collective_jump() const { return static_cast<bool>(collective_jump); }
};

/// b(x, m) = int bt(x, y) dm(y) for a kernel bt ("true McKean-Vlasov" drift).
double eval_true_mckean_drift(const std::function<double(double, double)>& kernel, double x,
                              const EmpiricalMeasure& m);

/// DriftFn wrapper around the integral form, memoizing per-measure when the
/// kernel is of the separable form g(x) + h-integral.
DriftFn make_true_mckean_drift(std::function<double(double, double)> kernel);

} // namespace mvj

#endif
