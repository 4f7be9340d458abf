#include "liftgraph/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <random>

#include <fmt/format.h>

#include "liftgraph/error.hpp"

namespace liftgraph::solver {

namespace {

void project_simplex_with(std::span<double> v, std::vector<double>& sorted)
{
    const std::size_t n = v.size();
    if (!std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); })) {
        std::fill(v.begin(), v.end(), std::numeric_limits<double>::quiet_NaN());
        return;
    }
    sorted.assign(v.begin(), v.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0;
    double theta = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        cumulative += sorted[k];
        const double t = (cumulative - 1.0) / static_cast<double>(k + 1);
        if (k + 1 == n || sorted[k + 1] <= t) {
            theta = t;
            break;
        }
    }
    for (double& x : v) x = std::max(x - theta, 0.0);
}

// Incident edges of one node with the sign of the node in (D c)_e = c_j - c_i.
struct Incidence {
    std::vector<std::uint32_t> offset;
    std::vector<std::uint32_t> edge;
    std::vector<signed char> sign;
};

Incidence build_incidence(const ReducedGraph& graph)
{
    const std::size_t m = graph.node_count();
    Incidence inc;
    inc.offset.assign(m + 1, 0);
    for (const Edge& e : graph.edges()) {
        ++inc.offset[e.i + 1];
        ++inc.offset[e.j + 1];
    }
    for (std::size_t i = 0; i < m; ++i) inc.offset[i + 1] += inc.offset[i];
    inc.edge.resize(inc.offset[m]);
    inc.sign.resize(inc.offset[m]);
    std::vector<std::uint32_t> fill(inc.offset.begin(), inc.offset.end() - 1);
    auto edges = graph.edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto id = static_cast<std::uint32_t>(e);
        inc.edge[fill[edges[e].i]] = id;
        inc.sign[fill[edges[e].i]++] = -1;
        inc.edge[fill[edges[e].j]] = id;
        inc.sign[fill[edges[e].j]++] = +1;
    }
    return inc;
}

double uniform01(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double simplex_violation(std::span<const double> c, std::size_t labels)
{
    double worst = 0.0;
    for (std::size_t i = 0; i < c.size(); i += labels) {
        double sum = 0.0;
        for (std::size_t k = 0; k < labels; ++k) {
            worst = std::max(worst, -c[i + k]);
            worst = std::max(worst, c[i + k] - 1.0);
            sum += c[i + k];
        }
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    return worst;
}

} // namespace

void project_simplex(std::span<double> v)
{
    if (v.empty()) throw InvalidInput("project_simplex: empty vector");
    std::vector<double> scratch;
    project_simplex_with(v, scratch);
}

std::vector<double> simplex_projection(std::span<const double> v)
{
    std::vector<double> out(v.begin(), v.end());
    project_simplex(std::span<double>(out));
    return out;
}

std::vector<std::uint32_t> round_assignment(const Assignment& assignment)
{
    std::vector<std::uint32_t> labels(assignment.node_count());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto c = assignment.node(i);
        labels[i] = static_cast<std::uint32_t>(
            std::max_element(c.begin(), c.end()) - c.begin());
    }
    return labels;
}

double dual_bound(const ReducedGraph& graph, std::span<const double> dual)
{
    const std::size_t nl = graph.labels();
    if (dual.size() != graph.edge_count() * nl)
        throw InvalidInput("dual bound: dual size mismatch");
    std::vector<double> g(graph.node_potentials().begin(), graph.node_potentials().end());
    auto edges = graph.edges();
    for (std::size_t e = 0; e < edges.size(); ++e)
        for (std::size_t k = 0; k < nl; ++k) {
            g[edges[e].i * nl + k] -= dual[e * nl + k];
            g[edges[e].j * nl + k] += dual[e * nl + k];
        }
    double bound = 0.0;
    for (std::size_t i = 0; i < graph.node_count(); ++i)
        bound += *std::min_element(g.begin() + static_cast<std::ptrdiff_t>(i * nl),
                                   g.begin() + static_cast<std::ptrdiff_t>((i + 1) * nl));
    return bound;
}

SolveResult solve_relaxation(const ReducedGraph& graph, double lambda,
                             const SolverOptions& options)
{
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();

    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw InvalidInput("solve: lambda must be finite and non-negative");
    if (options.max_iters < 0) throw InvalidInput("solve: max_iters must be >= 0");
    if (options.check_every < 1) throw InvalidInput("solve: check_every must be >= 1");
    if (!(options.tolerance > 0.0)) throw InvalidInput("solve: tolerance must be positive");
    if (!(options.precondition_alpha >= 0.0 && options.precondition_alpha <= 2.0))
        throw InvalidInput("solve: precondition_alpha must be in [0, 2]");
    if (options.threads < 1) throw InvalidInput("solve: threads must be >= 1");

    const std::size_t m = graph.node_count();
    const std::size_t nl = graph.labels();
    const std::size_t ne = graph.edge_count();
    auto edges = graph.edges();
    auto f = graph.node_potentials();
    const double alpha = options.precondition_alpha;
    const bool weighted = options.scaling == OperatorScaling::weighted && lambda > 0.0;

    // Operator entries +-scale[e], dual box |q| <= bound[e].
    std::vector<double> scale(ne), bound(ne), sigma(ne);
    for (std::size_t e = 0; e < ne; ++e) {
        const double half = 0.5 * lambda * edges[e].weight;
        scale[e] = weighted ? half : 1.0;
        bound[e] = weighted ? 1.0 : half;
        sigma[e] = 1.0 / (2.0 * std::pow(scale[e], alpha));
    }
    const Incidence inc = build_incidence(graph);
    std::vector<double> tau(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (std::uint32_t a = inc.offset[i]; a < inc.offset[i + 1]; ++a)
            s += std::pow(scale[inc.edge[a]], 2.0 - alpha);
        tau[i] = s > 0.0 ? 1.0 / s : 0.0; // 0 marks an isolated node
    }

    std::vector<double> c(m * nl, 1.0 / static_cast<double>(nl));
    if (options.random_init) {
        std::mt19937_64 rng(options.seed);
        for (std::size_t i = 0; i < m; ++i) {
            double sum = 0.0;
            for (std::size_t k = 0; k < nl; ++k) {
                c[i * nl + k] = -std::log1p(-uniform01(rng));
                sum += c[i * nl + k];
            }
            for (std::size_t k = 0; k < nl; ++k) c[i * nl + k] /= sum;
        }
    }
    std::vector<double> q(ne * nl, 0.0);
    std::vector<double> c_bar(m * nl);
    std::vector<double> p_scaled(ne * nl);

    // Isolated nodes decouple: they take the pointwise minimizer.
    for (std::size_t i = 0; i < m; ++i) {
        if (tau[i] > 0.0) continue;
        auto fi = f.subspan(i * nl, nl);
        const auto best = static_cast<std::size_t>(std::min_element(fi.begin(), fi.end()) - fi.begin());
        for (std::size_t k = 0; k < nl; ++k) c[i * nl + k] = k == best ? 1.0 : 0.0;
    }

    SolveResult result;
    SolveDiagnostics& diag = result.diagnostics;
    std::vector<double> last_good = c;

    auto checkpoint = [&](int iteration) {
        for (std::size_t e = 0; e < ne; ++e)
            for (std::size_t k = 0; k < nl; ++k)
                p_scaled[e * nl + k] = scale[e] * q[e * nl + k];
        GapSample s;
        s.iteration = iteration;
        s.simplex_violation = simplex_violation(c, nl);
        bool finite = std::all_of(c.begin(), c.end(), [](double v) { return std::isfinite(v); });
        if (finite) {
            s.primal = energy(graph, Assignment(m, nl, c), lambda);
            s.dual = dual_bound(graph, p_scaled);
            s.gap = (s.primal - s.dual) / (std::abs(s.primal) + 1.0);
            finite = std::isfinite(s.primal) && std::isfinite(s.dual);
        }
        s.seconds = std::chrono::duration<double>(clock::now() - start).count();
        if (!finite) {
            s.primal = s.dual = s.gap = std::numeric_limits<double>::quiet_NaN();
            diag.history.push_back(s);
            diag.status = SolveStatus::numerical_failure;
            return true;
        }
        diag.history.push_back(s);
        diag.primal = s.primal;
        diag.dual = s.dual;
        last_good = c;
        if (s.gap <= options.tolerance) {
            diag.status = SolveStatus::converged;
            return true;
        }
        return false;
    };

    const auto mm = static_cast<std::ptrdiff_t>(m);
    const auto nne = static_cast<std::ptrdiff_t>(ne);
    int it = 0;
    bool stop = checkpoint(0);
    while (!stop && it < options.max_iters) {
#pragma omp parallel num_threads(options.threads)
        {
            std::vector<double> grad(nl), scratch;
#pragma omp for schedule(static)
            for (std::ptrdiff_t ii = 0; ii < mm; ++ii) {
                const auto i = static_cast<std::size_t>(ii);
                double* ci = c.data() + i * nl;
                double* bar = c_bar.data() + i * nl;
                if (tau[i] == 0.0) {
                    std::copy_n(ci, nl, bar);
                    continue;
                }
                for (std::size_t k = 0; k < nl; ++k) grad[k] = f[i * nl + k];
                for (std::uint32_t a = inc.offset[i]; a < inc.offset[i + 1]; ++a) {
                    const std::uint32_t e = inc.edge[a];
                    const double w = inc.sign[a] * scale[e];
                    const double* qe = q.data() + static_cast<std::size_t>(e) * nl;
                    for (std::size_t k = 0; k < nl; ++k) grad[k] += w * qe[k];
                }
                for (std::size_t k = 0; k < nl; ++k) {
                    bar[k] = ci[k];
                    grad[k] = ci[k] - tau[i] * grad[k];
                }
                project_simplex_with(grad, scratch);
                for (std::size_t k = 0; k < nl; ++k) {
                    bar[k] = 2.0 * grad[k] - bar[k];
                    ci[k] = grad[k];
                }
            }
#pragma omp for schedule(static)
            for (std::ptrdiff_t ee = 0; ee < nne; ++ee) {
                const auto e = static_cast<std::size_t>(ee);
                const double* bi = c_bar.data() + edges[e].i * nl;
                const double* bj = c_bar.data() + edges[e].j * nl;
                double* qe = q.data() + e * nl;
                const double step = sigma[e] * scale[e];
                for (std::size_t k = 0; k < nl; ++k)
                    qe[k] = std::clamp(qe[k] + step * (bj[k] - bi[k]), -bound[e], bound[e]);
            }
        }
        ++it;
        if (it % options.check_every == 0 || it == options.max_iters) stop = checkpoint(it);
    }
    diag.iterations = it;
    diag.seconds = std::chrono::duration<double>(clock::now() - start).count();
    if (diag.status == SolveStatus::numerical_failure) c = last_good;
    else if (diag.status != SolveStatus::converged) diag.status = SolveStatus::max_iterations;
    result.assignment = Assignment(m, nl, std::move(c));
    return result;
}

void write_diagnostics_csv(std::ostream& out, const SolveDiagnostics& diagnostics)
{
    out << "iteration,primal,dual,gap,seconds\n";
    for (const GapSample& s : diagnostics.history)
        out << fmt::format("{},{},{},{},{}\n", s.iteration, s.primal, s.dual, s.gap, s.seconds);
}

const char* to_string(SolveStatus status)
{
    switch (status) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iterations: return "max_iterations";
    case SolveStatus::numerical_failure: return "numerical_failure";
    }
    return "unknown";
}

} // namespace liftgraph::solver
