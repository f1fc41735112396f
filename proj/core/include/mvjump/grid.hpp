#ifndef MVJUMP_GRID_HPP
#define MVJUMP_GRID_HPP

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace mvj {

/// Strictly increasing time points starting at 0. Step k covers
/// (node(k), node(k+1)].
class TimeGrid {
public:
    TimeGrid() = default;

    explicit TimeGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
        if (nodes_.size() < 2)
            throw std::invalid_argument("TimeGrid: need at least two nodes");
        if (nodes_.front() != 0.0)
            throw std::invalid_argument("TimeGrid: grid must start at t=0");
        for (std::size_t k = 1; k < nodes_.size(); ++k)
            if (!(nodes_[k] > nodes_[k - 1]))
                throw std::invalid_argument("TimeGrid: nodes must be strictly increasing");
    }

    static TimeGrid uniform(double t_end, double dt) {
        if (!(t_end > 0.0) || !(dt > 0.0))
            throw std::invalid_argument("TimeGrid::uniform: t_end and dt must be positive");
        const auto n = static_cast<std::size_t>(t_end / dt + 0.5);
        std::vector<double> nodes(n + 1);
        for (std::size_t k = 0; k <= n; ++k)
            nodes[k] = static_cast<double>(k) * dt;
        nodes.back() = t_end;
        return TimeGrid(std::move(nodes));
    }

    std::size_t n_nodes() const { return nodes_.size(); }
    std::size_t n_steps() const { return nodes_.size() - 1; }
    double node(std::size_t k) const { return nodes_[k]; }
    double dt(std::size_t step) const { return nodes_[step + 1] - nodes_[step]; }
    double t_end() const { return nodes_.back(); }
    const std::vector<double>& nodes() const { return nodes_; }

    /// Sub-grid on [node(first), node(last)], re-based so the slice still
    /// indexes the parent's steps via `first + k`.
    TimeGrid slice(std::size_t first, std::size_t last) const {
        std::vector<double> sub(nodes_.begin() + static_cast<std::ptrdiff_t>(first),
                                nodes_.begin() + static_cast<std::ptrdiff_t>(last) + 1);
        const double t0 = sub.front();
        for (double& t : sub) t -= t0;
        return TimeGrid(std::move(sub));
    }

    bool operator==(const TimeGrid& other) const { return nodes_ == other.nodes_; }

private:
    std::vector<double> nodes_;
};

} // namespace mvj

#endif
