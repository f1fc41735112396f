#include "mvjump/model.hpp"

#include <cmath>
#include <stdexcept>

namespace mvj {

MarkLaw MarkLaw::uniform_symmetric() {
    return MarkLaw{"uniform[-1,1]", [](CounterRng& rng) { return rng.uniform(-1.0, 1.0); }};
}

MarkLaw MarkLaw::standard_gaussian() {
    return MarkLaw{"gaussian(0,1)", [](CounterRng& rng) { return rng.gaussian(); }};
}

double eval_true_mckean_drift(const std::function<double(double, double)>& kernel, double x,
                              const EmpiricalMeasure& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) s += m.weight(i) * kernel(x, m.position(i));
    return s;
}

DriftFn make_true_mckean_drift(std::function<double(double, double)> kernel) {
    return [kernel = std::move(kernel)](double x, const EmpiricalMeasure& m) {
        return eval_true_mckean_drift(kernel, x, m);
    };
}

} // namespace mvj
