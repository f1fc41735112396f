#ifndef MVJUMP_MEASURE_HPP
#define MVJUMP_MEASURE_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "mvjump/grid.hpp"

namespace mvj {

/// exp_moment saturates at this value instead of overflowing; blow-up is a
/// diagnostic signal, not a crash.
inline constexpr double kExpMomentSaturation = 1e300;

/// Weighted atomic probability measure on the real line. Atoms are stored
/// sorted by position; weights are positive and sum to 1 (renormalized when
/// within 1e-9 of 1, rejected beyond). Immutable after construction.
class EmpiricalMeasure {
public:
    /// Equal-weight cloud 1/n sum of Dirac masses.
    static EmpiricalMeasure from_samples(std::vector<double> samples);

    /// Weighted atoms (position, weight); positions need not be presorted.
    static EmpiricalMeasure from_atoms(std::vector<std::pair<double, double>> atoms);

    static EmpiricalMeasure dirac(double x) { return from_samples({x}); }

    std::size_t size() const { return pos_.size(); }
    double position(std::size_t i) const { return pos_[i]; }
    double weight(std::size_t i) const { return w_[i]; }
    const std::vector<double>& positions() const { return pos_; }
    const std::vector<double>& weights() const { return w_; }

    double mean() const;
    double mean_abs() const;

    /// Weighted q-th absolute moment, q > 0.
    double abs_moment(double q) const;

    /// Sum w_i exp(a|x_i|), saturating at kExpMomentSaturation.
    double exp_moment(double a) const;

    double integrate(const std::function<double(double)>& g) const;

    /// As integrate, but memoized under the caller-chosen key. Intended for
    /// coefficient evaluators that hit the same frozen measure many times
    /// per step; keys must identify the integrand globally.
    double integrate_cached(std::uint64_t key, const std::function<double(double)>& g) const;

    EmpiricalMeasure translated(double h) const;

    /// Quantile-compressed approximation with at most q atoms (equal weights
    /// at the midpoint quantiles). Returns *this when already small enough.
    EmpiricalMeasure compressed(std::size_t q) const;

    /// Quantile function (generalized inverse CDF) at level u in [0,1].
    double quantile(double u) const;

    EmpiricalMeasure(const EmpiricalMeasure& o) : pos_(o.pos_), w_(o.w_) {}
    EmpiricalMeasure& operator=(const EmpiricalMeasure& o) {
        pos_ = o.pos_;
        w_ = o.w_;
        return *this;
    }
    EmpiricalMeasure(EmpiricalMeasure&&) = default;
    EmpiricalMeasure& operator=(EmpiricalMeasure&&) = default;

private:
    EmpiricalMeasure(std::vector<double> pos, std::vector<double> w)
        : pos_(std::move(pos)), w_(std::move(w)) {}

    std::vector<double> pos_;
    std::vector<double> w_;

    mutable std::mutex cache_mutex_;
    mutable std::map<std::uint64_t, double> cache_;
    mutable bool mean_cached_ = false;
    mutable double mean_ = 0.0;
};

/// Exact 1-D Wasserstein-1 distance via quantile coupling.
double w1(const EmpiricalMeasure& m1, const EmpiricalMeasure& m2);

/// Exact 1-D Wasserstein-2 distance (quantile coupling with squared cost).
double w2(const EmpiricalMeasure& m1, const EmpiricalMeasure& m2);

/// Time grid with one measure per node; carrier for measure flows and
/// Picard iterates.
class MeasureFlow {
public:
    MeasureFlow() = default;
    MeasureFlow(TimeGrid grid, std::vector<EmpiricalMeasure> measures);

    const TimeGrid& grid() const { return grid_; }
    std::size_t n_nodes() const { return measures_.size(); }
    const EmpiricalMeasure& at(std::size_t k) const { return measures_[k]; }

    /// Constant-in-time flow frozen at one measure.
    static MeasureFlow constant(const TimeGrid& grid, const EmpiricalMeasure& m);

private:
    TimeGrid grid_;
    std::vector<EmpiricalMeasure> measures_;
};

/// max over grid nodes of w1; grids must be identical.
double flow_sup_w1(const MeasureFlow& f1, const MeasureFlow& f2);

} // namespace mvj

#endif
