#include "mvjump/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mvj {

namespace {

void validate_and_normalize(std::vector<double>& pos, std::vector<double>& w) {
    if (pos.empty())
        throw std::domain_error("EmpiricalMeasure: empty measure");
    for (double x : pos)
        if (!std::isfinite(x))
            throw std::invalid_argument("EmpiricalMeasure: non-finite position");
    double total = 0.0;
    for (double wi : w) {
        if (!(wi > 0.0) || !std::isfinite(wi))
            throw std::invalid_argument("EmpiricalMeasure: weights must be positive");
        total += wi;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("EmpiricalMeasure: weights sum to " + std::to_string(total) +
                                    ", outside the 1e-9 normalization band");
    if (total != 1.0)
        for (double& wi : w) wi /= total;
    // keep sorted by position
    bool sorted = std::is_sorted(pos.begin(), pos.end());
    if (!sorted) {
        std::vector<std::size_t> idx(pos.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return pos[a] < pos[b]; });
        std::vector<double> p2(pos.size()), w2v(pos.size());
        for (std::size_t i = 0; i < idx.size(); ++i) {
            p2[i] = pos[idx[i]];
            w2v[i] = w[idx[i]];
        }
        pos = std::move(p2);
        w = std::move(w2v);
    }
}

} // namespace

EmpiricalMeasure EmpiricalMeasure::from_samples(std::vector<double> samples) {
    std::vector<double> w(samples.size(), samples.empty() ? 0.0 : 1.0 / static_cast<double>(samples.size()));
    validate_and_normalize(samples, w);
    return EmpiricalMeasure(std::move(samples), std::move(w));
}

EmpiricalMeasure EmpiricalMeasure::from_atoms(std::vector<std::pair<double, double>> atoms) {
    std::vector<double> pos, w;
    pos.reserve(atoms.size());
    w.reserve(atoms.size());
    for (auto& [p, wi] : atoms) {
        pos.push_back(p);
        w.push_back(wi);
    }
    validate_and_normalize(pos, w);
    return EmpiricalMeasure(std::move(pos), std::move(w));
}

double EmpiricalMeasure::mean() const {
    {
        std::lock_guard<std::mutex> lk(cache_mutex_);
        if (mean_cached_) return mean_;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < pos_.size(); ++i) s += w_[i] * pos_[i];
    std::lock_guard<std::mutex> lk(cache_mutex_);
    mean_ = s;
    mean_cached_ = true;
    return s;
}

double EmpiricalMeasure::mean_abs() const {
    double s = 0.0;
    for (std::size_t i = 0; i < pos_.size(); ++i) s += w_[i] * std::abs(pos_[i]);
    return s;
}

double EmpiricalMeasure::abs_moment(double q) const {
    if (!(q > 0.0)) throw std::domain_error("abs_moment: q must be positive");
    double s = 0.0;
    for (std::size_t i = 0; i < pos_.size(); ++i) s += w_[i] * std::pow(std::abs(pos_[i]), q);
    return s;
}

double EmpiricalMeasure::exp_moment(double a) const {
    if (!(a > 0.0)) throw std::domain_error("exp_moment: a must be positive");
    double s = 0.0;
    for (std::size_t i = 0; i < pos_.size(); ++i) {
        s += w_[i] * std::exp(a * std::abs(pos_[i]));
        if (!(s < kExpMomentSaturation)) return kExpMomentSaturation;
    }
    return s;
}

double EmpiricalMeasure::integrate(const std::function<double(double)>& g) const {
    double s = 0.0;
    for (std::size_t i = 0; i < pos_.size(); ++i) s += w_[i] * g(pos_[i]);
    return s;
}

double EmpiricalMeasure::integrate_cached(std::uint64_t key,
                                          const std::function<double(double)>& g) const {
    {
        std::lock_guard<std::mutex> lk(cache_mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    const double v = integrate(g);
    std::lock_guard<std::mutex> lk(cache_mutex_);
    cache_.emplace(key, v);
    return v;
}

EmpiricalMeasure EmpiricalMeasure::translated(double h) const {
    std::vector<double> pos(pos_);
    for (double& x : pos) x += h;
    return EmpiricalMeasure(std::move(pos), std::vector<double>(w_));
}

double EmpiricalMeasure::quantile(double u) const {
    if (u <= 0.0) return pos_.front();
    double cum = 0.0;
    for (std::size_t i = 0; i < pos_.size(); ++i) {
        cum += w_[i];
        if (u <= cum) return pos_[i];
    }
    return pos_.back();
}

EmpiricalMeasure EmpiricalMeasure::compressed(std::size_t q) const {
    if (q == 0) throw std::domain_error("compressed: q must be positive");
    if (pos_.size() <= q) return *this;
    std::vector<double> samples(q);
    for (std::size_t i = 0; i < q; ++i)
        samples[i] = quantile((static_cast<double>(i) + 0.5) / static_cast<double>(q));
    return from_samples(std::move(samples));
}

namespace {

// Merge the cumulative-weight partitions of the two quantile functions and
// accumulate cost(F1^{-1}(q) - F2^{-1}(q)) over each merged segment.
template <typename Cost>
double quantile_coupling(const EmpiricalMeasure& m1, const EmpiricalMeasure& m2, Cost cost) {
    std::size_t i = 0, j = 0;
    double a = m1.weight(0), b = m2.weight(0);
    double total = 0.0;
    const std::size_t n = m1.size(), m = m2.size();
    while (i < n && j < m) {
        const double seg = std::min(a, b);
        total += seg * cost(m1.position(i) - m2.position(j));
        a -= seg;
        b -= seg;
        if (a <= 0.0) {
            ++i;
            if (i < n) a = m1.weight(i);
        }
        if (b <= 0.0) {
            ++j;
            if (j < m) b = m2.weight(j);
        }
    }
    return total;
}

} // namespace

double w1(const EmpiricalMeasure& m1, const EmpiricalMeasure& m2) {
    return quantile_coupling(m1, m2, [](double d) { return std::abs(d); });
}

double w2(const EmpiricalMeasure& m1, const EmpiricalMeasure& m2) {
    return std::sqrt(quantile_coupling(m1, m2, [](double d) { return d * d; }));
}

MeasureFlow::MeasureFlow(TimeGrid grid, std::vector<EmpiricalMeasure> measures)
    : grid_(std::move(grid)), measures_(std::move(measures)) {
    if (grid_.n_nodes() != measures_.size())
        throw std::invalid_argument("MeasureFlow: one measure per grid node required");
}

MeasureFlow MeasureFlow::constant(const TimeGrid& grid, const EmpiricalMeasure& m) {
    return MeasureFlow(grid, std::vector<EmpiricalMeasure>(grid.n_nodes(), m));
}

double flow_sup_w1(const MeasureFlow& f1, const MeasureFlow& f2) {
    if (!(f1.grid() == f2.grid()))
        throw std::domain_error("flow_sup_w1: grids differ");
    double sup = 0.0;
    for (std::size_t k = 0; k < f1.n_nodes(); ++k)
        sup = std::max(sup, w1(f1.at(k), f2.at(k)));
    return sup;
}

} // namespace mvj
