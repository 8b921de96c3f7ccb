#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "capagg/event.hpp"

namespace capagg {

// One probability per event; entries live in [0,1] up to rounding.
using ProbVector = std::vector<double>;

// Every numeric threshold the coherence machinery uses, in one place.
struct Tolerances {
    double membership = 1e-9;   // treat a point this close to a set as a member
    double kkt = 1e-9;          // variational-inequality certificate slack
    double oracle = 1e-6;       // agreement expected between solver routes
    double solver = 1e-12;      // internal QP termination threshold
    double stationarity = 1e-10;  // projected-gradient stopping for the oracle
};

// The local coherence set of an event list: the convex hull of the 0/1
// truth-indicator vectors, one vertex per distinct induced truth pattern.
// Projections minimize the weighted squared deviation sum_i w_i (c_i - x_i)^2.
class VertexPolytope {
public:
    // Shapes with closed-form projections; everything else takes the generic
    // min-norm-point route.
    enum class Shape { General, Interval, NegationPair, ConjunctionTriple, DisjunctionTriple };

    static VertexPolytope build(std::vector<EventExpr> events,
                                std::vector<double> weights,
                                std::size_t cap = kDefaultSupportCap);

    std::size_t dim() const { return events_.size(); }
    const std::vector<EventExpr>& events() const { return events_; }
    const std::vector<std::vector<double>>& vertices() const { return vertices_; }
    const std::vector<double>& weights() const { return weights_; }
    Shape shape() const { return shape_; }

private:
    VertexPolytope() = default;
    void detect_shape();

    std::vector<EventExpr> events_;
    std::vector<std::vector<double>> vertices_;
    std::vector<double> weights_;
    Shape shape_ = Shape::General;
    // Shape metadata: coordinate roles and pattern->vertex index maps.
    std::size_t conn_coord_ = 0;               // triple: position of the connective
    std::size_t arg_coord_[2] = {0, 0};        // triple: positions of the arguments
    std::vector<std::size_t> pattern_vertex_;  // pattern id -> vertex index

    friend struct ProjectionImpl;
};

// A projection together with its convex-combination certificate:
// point == sum_k lambda[k] * vertices()[k] up to rounding, lambda >= 0, sum 1.
struct Projection {
    ProbVector point;
    std::vector<double> lambda;
};

// Weighted least-squares projection of x onto conv(vertices). The result is
// self-certified: membership (via lambda) and the variational inequality
// <x - P(x), v - P(x)>_W <= tol.kkt are checked against every vertex before
// returning, and SolverError is thrown if either check fails. Inputs already
// within tol.membership of the hull are returned unchanged, so projecting a
// member point is exactly the identity.
Projection project_onto_detailed(const VertexPolytope& poly, const ProbVector& x,
                                 const Tolerances& tol = {});
ProbVector project_onto(const VertexPolytope& poly, const ProbVector& x,
                        const Tolerances& tol = {});

// Forces the min-norm-point solver even when a closed-form shape applies;
// the reference route the fast paths are validated against.
ProbVector project_onto_generic(const VertexPolytope& poly, const ProbVector& x,
                                const Tolerances& tol = {});

// TRUE iff the Euclidean distance from x to the hull is at most `tol`.
bool is_coherent(const VertexPolytope& poly, const ProbVector& x, double tol);

// A polytope acting on a subset of a shared working vector: local coordinate
// i constrains global coordinate indices[i].
struct IndexedPolytope {
    VertexPolytope poly;
    std::vector<std::size_t> indices;
};

// Trace of one Dykstra (or cyclic) pass over a family of sets.
struct DykstraResult {
    ProbVector point;
    int sweeps_run = 0;
    bool converged = false;
    double residual = 0.0;  // final sweep's correction-change norm
    std::vector<double> max_move_per_sweep;
};

// Dykstra's algorithm over the family, in the weighted inner product the
// member polytopes share. Converges to the exact weighted projection of x
// onto the intersection; the stopping rule is the correction-change norm
// sqrt(sum_j ||p_j - p_j_prev||^2) <= tol over a full sweep.
DykstraResult dykstra_detailed(std::span<const IndexedPolytope> sets, const ProbVector& x,
                               int max_sweeps, double tol, const Tolerances& tols = {});

// As above but throws SolverError when max_sweeps passes do not reach tol.
// With a single set this reduces to project_onto.
ProbVector project_onto_dykstra(std::span<const IndexedPolytope> sets, const ProbVector& x,
                                int max_sweeps, double tol, const Tolerances& tols = {});

// Exact small-instance reference: solves the full coherent-approximation
// program by projected gradient over the simplex of 2^n joint-assignment
// probabilities (n = joint support size, capped), returning the event-space
// image A*mu of the optimal atom vector. Deliberately independent of the
// vertex-hull projection path.
ProbVector global_cap_oracle(std::span<const EventExpr> events,
                             std::span<const double> weights, const ProbVector& x,
                             std::size_t cap = kDefaultSupportCap,
                             const Tolerances& tol = {});

// Euclidean projection onto the probability simplex {y >= 0, sum y = 1}.
std::vector<double> project_simplex(std::vector<double> y);

} // namespace capagg
