#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "liftgraph/core.hpp"

namespace liftgraph::solver {

/// How the graph-gradient operator of the saddle-point problem is scaled.
///  incidence: K = D (entries +-1), dual box |p_ek| <= lambda w_e / 2.
///  weighted:  K = diag(lambda w_e / 2) D, dual box |q_ek| <= 1.
/// Both describe the same problem; they differ only in what the diagonal
/// preconditioner sees, and therefore in step sizes.
enum class OperatorScaling { incidence, weighted };

struct SolverOptions {
    int max_iters = 20000;
    int check_every = 25;
    double tolerance = 1e-5;          ///< relative primal-dual gap
    double precondition_alpha = 1.0;  ///< in [0, 2]
    std::uint64_t seed = 0;
    bool random_init = false;         ///< seed-driven feasible start instead of the barycenter
    OperatorScaling scaling = OperatorScaling::weighted;
    int threads = 1;
};

enum class SolveStatus { converged, max_iterations, numerical_failure };

struct GapSample {
    int iteration = 0;
    double primal = 0.0;
    double dual = 0.0;
    double gap = 0.0;
    double seconds = 0.0;
    double simplex_violation = 0.0; ///< max deviation of any c_i from the simplex
};

struct SolveDiagnostics {
    SolveStatus status = SolveStatus::max_iterations;
    int iterations = 0;
    double primal = 0.0;
    double dual = 0.0;
    std::vector<GapSample> history;
    double seconds = 0.0;
};

struct SolveResult {
    Assignment assignment;
    SolveDiagnostics diagnostics;
};

/// Euclidean projection onto the unit simplex (sort-based), in place or
/// into a copy.
void project_simplex(std::span<double> v);
std::vector<double> simplex_projection(std::span<const double> v);

/// Diagonally preconditioned primal-dual iteration for
///   min_{c in C} sum_i <c_i, f_i> + (lambda / 2) sum_e w_e |c_i - c_j|_1.
/// On a non-finite iterate the status is numerical_failure and the returned
/// assignment is the last checkpointed feasible iterate.
SolveResult solve_relaxation(const ReducedGraph& graph, double lambda,
                             const SolverOptions& options = {});

/// label_i = argmax_k c_ik, ties to the smallest k.
std::vector<std::uint32_t> round_assignment(const Assignment& assignment);

/// Lower bound sum_i min_k (f_i + D^T p)_k for a dual-feasible p given in
/// incidence scaling (|p_ek| <= lambda w_e / 2), edge-major.
double dual_bound(const ReducedGraph& graph, std::span<const double> dual);

/// CSV with header "iteration,primal,dual,gap,seconds".
void write_diagnostics_csv(std::ostream& out, const SolveDiagnostics& diagnostics);

const char* to_string(SolveStatus status);

} // namespace liftgraph::solver
