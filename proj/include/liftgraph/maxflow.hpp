#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace liftgraph::maxflow {

/// Directed capacitated s-t network. Internal nodes are 0..n-1; the
/// terminals are addressed through the `source` and `sink` sentinels.
class FlowNetwork {
public:
    static constexpr std::size_t source = std::numeric_limits<std::size_t>::max() - 1;
    static constexpr std::size_t sink = std::numeric_limits<std::size_t>::max();

    struct Arc {
        std::size_t from;
        std::size_t to;
        double capacity;
    };

    explicit FlowNetwork(std::size_t nodes);

    /// Arc from -> to; from may be `source`, to may be `sink`. Arcs leaving
    /// the sink or entering the source are rejected, as are negative or
    /// non-finite capacities.
    void add_arc(std::size_t from, std::size_t to, double capacity);

    /// Pair of opposite arcs a -> b (cap_ab) and b -> a (cap_ba).
    void add_edge(std::size_t a, std::size_t b, double cap_ab, double cap_ba);

    /// Shorthand for source -> node and node -> sink arcs.
    void add_terminal(std::size_t node, double source_cap, double sink_cap);

    std::size_t node_count() const noexcept { return nodes_; }

    /// All arcs: internal arcs first (in insertion order, edge pairs expanded
    /// to two arcs), then one source arc and one sink arc per node with
    /// non-zero terminal capacity, then the direct source -> sink arc if any.
    /// Parallel terminal arcs appear merged.
    std::vector<Arc> arcs() const;

private:
    friend class BkSolver;

    struct Link {
        std::size_t a;
        std::size_t b;
        double cap_ab;
        double cap_ba;
        bool paired;
    };

    static void check_capacity(double capacity);

    std::size_t nodes_;
    std::vector<Link> links_;
    std::vector<double> source_cap_;
    std::vector<double> sink_cap_;
    double direct_ = 0.0; // source -> sink
};

struct CutResult {
    double flow_value = 0.0;
    /// true = node is on the source side (reachable from the source in the
    /// final residual graph).
    std::vector<bool> source_side;
};

/// Exact maximum flow and the canonical minimum cut (source-reachable set of
/// the final residual graph). Boykov-Kolmogorov augmenting paths on two
/// search trees.
CutResult max_flow(const FlowNetwork& network);

/// Total capacity of arcs leaving the source side of `source_side`.
double cut_capacity(const FlowNetwork& network, const std::vector<bool>& source_side);

} // namespace liftgraph::maxflow
