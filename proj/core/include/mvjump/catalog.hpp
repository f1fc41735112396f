#ifndef MVJUMP_CATALOG_HPP
#define MVJUMP_CATALOG_HPP

#include <string>
#include <vector>

#include "mvjump/model.hpp"

namespace mvj {

/// Built-in models addressable by id:
///   "lin-lip"    all coefficients globally Lipschitz and bounded
///   "loclip"     drift sin(x^2) + int arctan(y) dm(y), genuinely locally Lipschitz
///   "pure-drift" sigma = f = 0, deterministic ODE flow for exact oracles
const ModelSpec& catalog_model(const std::string& id);

std::vector<std::string> catalog_ids();

InitialLaw initial_uniform(double lo, double hi);
InitialLaw initial_gaussian(double mean, double stddev);
InitialLaw initial_dirac(double x);

/// One term of the parametric coefficient family: scale * basis evaluator.
/// Custom models in the structured config are affine combinations of these,
/// never arbitrary code.
struct BasisTerm {
    std::string basis;
    double scale = 1.0;
};

/// (x, m) bases: const, x, sin_x, cos_x, tanh_x, sin_x2, inv_1px2,
/// mean, tanh_mean_minus_x, arctan_int.
DriftFn make_state_coefficient(const std::vector<BasisTerm>& terms);

/// (x, m, u) bases: the state bases plus u, u_cos_x, u_exp_negx2.
SelfJumpFn make_self_jump_coefficient(const std::vector<BasisTerm>& terms);

/// (x_src, x_tgt, m, v_src, v_tgt) bases: const, tanh_src, tanh_tgt,
/// tanh_src_minus_tgt, v_src, v_tgt, v_src_cos_src.
CollectiveJumpFn make_collective_coefficient(const std::vector<BasisTerm>& terms);

} // namespace mvj

#endif
