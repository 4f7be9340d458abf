#include "liftgraph/maxflow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>

#include <fmt/format.h>

#include "liftgraph/error.hpp"

namespace liftgraph::maxflow {

FlowNetwork::FlowNetwork(std::size_t nodes)
    : nodes_(nodes), source_cap_(nodes, 0.0), sink_cap_(nodes, 0.0)
{
    if (nodes >= std::numeric_limits<std::uint32_t>::max())
        throw InvalidInput("flow network: too many nodes");
}

void FlowNetwork::check_capacity(double capacity)
{
    if (!std::isfinite(capacity) || capacity < 0.0)
        throw InvalidInput(fmt::format(
            "flow network: capacity {} must be finite and non-negative", capacity));
}

void FlowNetwork::add_arc(std::size_t from, std::size_t to, double capacity)
{
    check_capacity(capacity);
    if (from == sink) throw InvalidInput("flow network: arc leaves the sink");
    if (to == source) throw InvalidInput("flow network: arc enters the source");
    if ((from != source && from >= nodes_) || (to != sink && to >= nodes_))
        throw InvalidInput("flow network: node index out of range");
    if (from == source && to == sink)
        direct_ += capacity;
    else if (from == source)
        source_cap_[to] += capacity;
    else if (to == sink)
        sink_cap_[from] += capacity;
    else if (from != to)
        links_.push_back({from, to, capacity, 0.0, false});
}

void FlowNetwork::add_edge(std::size_t a, std::size_t b, double cap_ab, double cap_ba)
{
    check_capacity(cap_ab);
    check_capacity(cap_ba);
    if (a >= nodes_ || b >= nodes_)
        throw InvalidInput("flow network: node index out of range");
    if (a != b) links_.push_back({a, b, cap_ab, cap_ba, true});
}

void FlowNetwork::add_terminal(std::size_t node, double source_cap, double sink_cap)
{
    add_arc(source, node, source_cap);
    add_arc(node, sink, sink_cap);
}

std::vector<FlowNetwork::Arc> FlowNetwork::arcs() const
{
    std::vector<Arc> out;
    for (const Link& l : links_) {
        out.push_back({l.a, l.b, l.cap_ab});
        if (l.paired) out.push_back({l.b, l.a, l.cap_ba});
    }
    for (std::size_t i = 0; i < nodes_; ++i) {
        if (source_cap_[i] > 0.0) out.push_back({source, i, source_cap_[i]});
        if (sink_cap_[i] > 0.0) out.push_back({i, sink, sink_cap_[i]});
    }
    if (direct_ > 0.0) out.push_back({source, sink, direct_});
    return out;
}

// Search-tree augmenting path solver. Terminal arcs are folded into a signed
// residual per node (tr_cap > 0: residual from the source, < 0: residual to
// the sink).
class BkSolver {
public:
    explicit BkSolver(const FlowNetwork& net) : n_(net.nodes_)
    {
        nodes_.resize(n_);
        std::vector<std::uint32_t> degree(n_ + 1, 0);
        for (const auto& l : net.links_) {
            ++degree[l.a];
            ++degree[l.b];
        }
        for (std::size_t i = 0; i < n_; ++i) {
            nodes_[i].first = i == 0 ? 0 : nodes_[i - 1].last;
            nodes_[i].last = nodes_[i].first + degree[i];
        }
        arcs_.resize(2 * net.links_.size());
        std::vector<std::uint32_t> fill(n_);
        for (std::size_t i = 0; i < n_; ++i) fill[i] = nodes_[i].first;
        for (const auto& l : net.links_) {
            const std::uint32_t ab = fill[l.a]++;
            const std::uint32_t ba = fill[l.b]++;
            arcs_[ab] = {static_cast<std::uint32_t>(l.b), ba, l.cap_ab};
            arcs_[ba] = {static_cast<std::uint32_t>(l.a), ab, l.cap_ba};
        }
        flow_ = net.direct_;
        for (std::size_t i = 0; i < n_; ++i) {
            const double s = net.source_cap_[i], t = net.sink_cap_[i];
            flow_ += std::min(s, t);
            nodes_[i].tr_cap = s - t;
        }
    }

    CutResult run()
    {
        for (std::uint32_t i = 0; i < n_; ++i) {
            Node& node = nodes_[i];
            if (node.tr_cap > 0.0) {
                node.is_sink = false;
                node.parent = terminal;
                set_active(i);
                node.ts = 0;
                node.dist = 1;
            } else if (node.tr_cap < 0.0) {
                node.is_sink = true;
                node.parent = terminal;
                set_active(i);
                node.ts = 0;
                node.dist = 1;
            }
        }

        std::uint32_t current = none;
        for (;;) {
            std::uint32_t i = current;
            if (i != none && nodes_[i].parent == none) i = none;
            if (i == none) {
                i = next_active();
                if (i == none) break;
            }
            const std::uint32_t joint = grow(i);
            ++time_;
            if (joint != none) {
                current = i;
                augment(joint);
                adopt_orphans();
            } else {
                current = none;
            }
        }
        return extract_cut();
    }

private:
    static constexpr std::uint32_t none = std::numeric_limits<std::uint32_t>::max();
    static constexpr std::uint32_t terminal = none - 1;
    static constexpr std::uint32_t orphan = none - 2;
    static constexpr std::uint32_t infinite_dist = std::numeric_limits<std::uint32_t>::max();

    struct Node {
        std::uint32_t first = 0;
        std::uint32_t last = 0;
        std::uint32_t parent = none; // arc from this node towards its parent
        std::uint32_t ts = 0;
        std::uint32_t dist = 0;
        double tr_cap = 0.0;
        bool is_sink = false;
        bool active = false;
    };

    struct BkArc {
        std::uint32_t head = 0;
        std::uint32_t sister = 0;
        double r_cap = 0.0;
    };

    bool has_parent(std::uint32_t i) const { return nodes_[i].parent != none; }

    void set_active(std::uint32_t i)
    {
        if (!nodes_[i].active) {
            nodes_[i].active = true;
            queue_.push_back(i);
        }
    }

    std::uint32_t next_active()
    {
        while (!queue_.empty()) {
            const std::uint32_t i = queue_.front();
            queue_.pop_front();
            nodes_[i].active = false;
            if (has_parent(i)) return i;
        }
        return none;
    }

    // Expands the tree of node i; returns the arc joining the source tree
    // to the sink tree (oriented source -> sink), or `none`.
    std::uint32_t grow(std::uint32_t i)
    {
        Node& ni = nodes_[i];
        for (std::uint32_t a = ni.first; a < ni.last; ++a) {
            BkArc& arc = arcs_[a];
            const double residual = ni.is_sink ? arcs_[arc.sister].r_cap : arc.r_cap;
            if (residual <= 0.0) continue;
            const std::uint32_t j = arc.head;
            Node& nj = nodes_[j];
            if (nj.parent == none) {
                nj.is_sink = ni.is_sink;
                nj.parent = arc.sister;
                nj.ts = ni.ts;
                nj.dist = ni.dist + 1;
                set_active(j);
            } else if (nj.is_sink != ni.is_sink) {
                return ni.is_sink ? arc.sister : a;
            } else if (nj.ts <= ni.ts && nj.dist > ni.dist) {
                nj.parent = arc.sister;
                nj.ts = ni.ts;
                nj.dist = ni.dist + 1;
            }
        }
        return none;
    }

    void make_orphan(std::uint32_t i)
    {
        nodes_[i].parent = orphan;
        orphans_.push_back(i);
    }

    void augment(std::uint32_t middle)
    {
        const std::uint32_t tail = arcs_[arcs_[middle].sister].head;
        const std::uint32_t head = arcs_[middle].head;

        double bottleneck = arcs_[middle].r_cap;
        std::uint32_t i = tail;
        while (nodes_[i].parent != terminal) {
            const BkArc& up = arcs_[nodes_[i].parent];
            bottleneck = std::min(bottleneck, arcs_[up.sister].r_cap);
            i = up.head;
        }
        bottleneck = std::min(bottleneck, nodes_[i].tr_cap);
        i = head;
        while (nodes_[i].parent != terminal) {
            const BkArc& up = arcs_[nodes_[i].parent];
            bottleneck = std::min(bottleneck, up.r_cap);
            i = up.head;
        }
        bottleneck = std::min(bottleneck, -nodes_[i].tr_cap);

        arcs_[arcs_[middle].sister].r_cap += bottleneck;
        arcs_[middle].r_cap -= bottleneck;

        i = tail;
        while (nodes_[i].parent != terminal) {
            BkArc& up = arcs_[nodes_[i].parent];
            BkArc& down = arcs_[up.sister];
            up.r_cap += bottleneck;
            down.r_cap -= bottleneck;
            const std::uint32_t next = up.head;
            if (down.r_cap <= 0.0) {
                down.r_cap = 0.0;
                make_orphan(i);
            }
            i = next;
        }
        nodes_[i].tr_cap -= bottleneck;
        if (nodes_[i].tr_cap <= 0.0) {
            nodes_[i].tr_cap = 0.0;
            make_orphan(i);
        }

        i = head;
        while (nodes_[i].parent != terminal) {
            BkArc& up = arcs_[nodes_[i].parent];
            arcs_[up.sister].r_cap += bottleneck;
            up.r_cap -= bottleneck;
            const std::uint32_t next = up.head;
            if (up.r_cap <= 0.0) {
                up.r_cap = 0.0;
                make_orphan(i);
            }
            i = next;
        }
        nodes_[i].tr_cap += bottleneck;
        if (nodes_[i].tr_cap >= 0.0) {
            nodes_[i].tr_cap = 0.0;
            make_orphan(i);
        }

        flow_ += bottleneck;
    }

    void adopt_orphans()
    {
        while (!orphans_.empty()) {
            const std::uint32_t i = orphans_.front();
            orphans_.pop_front();
            process_orphan(i);
        }
    }

    void process_orphan(std::uint32_t i)
    {
        Node& ni = nodes_[i];
        const bool sink_tree = ni.is_sink;
        std::uint32_t best_arc = none;
        std::uint32_t best_dist = infinite_dist;

        for (std::uint32_t a = ni.first; a < ni.last; ++a) {
            const BkArc& arc = arcs_[a];
            // Residual capacity from the candidate parent into i (source tree)
            // or from i into the candidate parent (sink tree).
            const double residual = sink_tree ? arc.r_cap : arcs_[arc.sister].r_cap;
            if (residual <= 0.0) continue;
            std::uint32_t j = arc.head;
            if (nodes_[j].is_sink != sink_tree || !has_parent(j)) continue;

            std::uint32_t d = 0;
            for (;;) {
                Node& nj = nodes_[j];
                if (nj.ts == time_) {
                    d += nj.dist;
                    break;
                }
                ++d;
                if (nj.parent == terminal) {
                    nj.ts = time_;
                    nj.dist = 1;
                    break;
                }
                if (nj.parent == orphan) {
                    d = infinite_dist;
                    break;
                }
                j = arcs_[nj.parent].head;
            }
            if (d == infinite_dist) continue;
            if (d < best_dist) {
                best_arc = a;
                best_dist = d;
            }
            for (j = arc.head; nodes_[j].ts != time_; j = arcs_[nodes_[j].parent].head) {
                nodes_[j].ts = time_;
                nodes_[j].dist = d;
                --d;
            }
        }

        if (best_arc != none) {
            ni.parent = best_arc;
            ni.ts = time_;
            ni.dist = best_dist + 1;
            return;
        }

        ni.parent = none;
        for (std::uint32_t a = ni.first; a < ni.last; ++a) {
            const BkArc& arc = arcs_[a];
            const std::uint32_t j = arc.head;
            Node& nj = nodes_[j];
            if (nj.is_sink != sink_tree || !has_parent(j)) continue;
            const double residual = sink_tree ? arc.r_cap : arcs_[arc.sister].r_cap;
            if (residual > 0.0) set_active(j);
            if (nj.parent != terminal && nj.parent != orphan && arcs_[nj.parent].head == i)
                make_orphan(j);
        }
    }

    CutResult extract_cut() const
    {
        CutResult result;
        result.flow_value = flow_;
        result.source_side.assign(n_, false);
        std::vector<std::uint32_t> stack;
        for (std::uint32_t i = 0; i < n_; ++i) {
            if (nodes_[i].tr_cap > 0.0) {
                result.source_side[i] = true;
                stack.push_back(i);
            }
        }
        while (!stack.empty()) {
            const std::uint32_t i = stack.back();
            stack.pop_back();
            for (std::uint32_t a = nodes_[i].first; a < nodes_[i].last; ++a) {
                const BkArc& arc = arcs_[a];
                if (arc.r_cap > 0.0 && !result.source_side[arc.head]) {
                    result.source_side[arc.head] = true;
                    stack.push_back(arc.head);
                }
            }
        }
        return result;
    }

    std::size_t n_;
    std::vector<Node> nodes_;
    std::vector<BkArc> arcs_;
    std::deque<std::uint32_t> queue_;
    std::deque<std::uint32_t> orphans_;
    std::uint32_t time_ = 0;
    double flow_ = 0.0;
};

CutResult max_flow(const FlowNetwork& network)
{
    return BkSolver(network).run();
}

double cut_capacity(const FlowNetwork& network, const std::vector<bool>& source_side)
{
    if (source_side.size() != network.node_count())
        throw InvalidInput("cut capacity: side vector does not match network");
    auto on_source = [&](std::size_t v) {
        if (v == FlowNetwork::source) return true;
        if (v == FlowNetwork::sink) return false;
        return static_cast<bool>(source_side[v]);
    };
    double total = 0.0;
    for (const auto& arc : network.arcs())
        if (on_source(arc.from) && !on_source(arc.to)) total += arc.capacity;
    return total;
}

} // namespace liftgraph::maxflow
