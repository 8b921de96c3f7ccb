#include "capagg/coherence.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <set>

namespace capagg {

namespace {

void check_dims(std::size_t poly_dim, std::size_t x_dim) {
    if (poly_dim != x_dim)
        throw UsageError("dimension mismatch: polytope has " + std::to_string(poly_dim) +
                         " events, vector has " + std::to_string(x_dim));
}

void check_finite(const ProbVector& x) {
    for (double v : x)
        if (!std::isfinite(v)) throw UsageError("non-finite probability value");
}

double inf_norm_diff(const ProbVector& a, const ProbVector& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

// Gaussian elimination with partial pivoting; A is n x n row-major.
// Returns false when a pivot collapses (singular system).
bool solve_dense(std::vector<double> A, std::vector<double>& b, std::size_t n) {
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(A[r * n + col]) > std::abs(A[piv * n + col])) piv = r;
        if (std::abs(A[piv * n + col]) < 1e-13) return false;
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(A[piv * n + c], A[col * n + c]);
            std::swap(b[piv], b[col]);
        }
        const double inv = 1.0 / A[col * n + col];
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = A[r * n + col] * inv;
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) A[r * n + c] -= f * A[col * n + c];
            b[r] -= f * b[col];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= A[i * n + c] * b[c];
        b[i] = s / A[i * n + i];
    }
    return true;
}

// ---------------------------------------------------------------------------
// Minimum-norm point in conv{p_0, ..., p_{K-1}} (Wolfe's algorithm).
// Returns barycentric coordinates; the caller rebuilds the point.
// ---------------------------------------------------------------------------

struct Corral {
    std::vector<std::size_t> members;
    std::vector<double> lambda;
};

std::vector<double> wolfe_min_norm(const std::vector<std::vector<double>>& pts, double eps) {
    const std::size_t K = pts.size();
    const std::size_t m = pts[0].size();

    auto dot = [m](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += a[i] * b[i];
        return s;
    };

    std::vector<double> lambda(K, 0.0);
    if (K == 1) {
        lambda[0] = 1.0;
        return lambda;
    }

    // Start from the shortest point (lowest index on ties).
    std::size_t start = 0;
    double best = dot(pts[0], pts[0]);
    for (std::size_t k = 1; k < K; ++k) {
        const double d = dot(pts[k], pts[k]);
        if (d < best - 1e-18) {
            best = d;
            start = k;
        }
    }

    Corral S;
    S.members = {start};
    S.lambda = {1.0};
    std::vector<double> z = pts[start];

    const std::size_t max_major = 16 * K + 64;
    const double drop_tol = 1e-14;

    for (std::size_t major = 0; major < max_major; ++major) {
        const double zz = dot(z, z);
        std::size_t jbest = 0;
        double dbest = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < K; ++k) {
            const double d = dot(z, pts[k]);
            if (d < dbest - 1e-18) {
                dbest = d;
                jbest = k;
            }
        }
        if (dbest >= zz - eps) break;
        if (std::find(S.members.begin(), S.members.end(), jbest) != S.members.end())
            break;  // no progress possible at this precision
        S.members.push_back(jbest);
        S.lambda.push_back(0.0);

        // Minor loop: pull the affine minimizer back inside the simplex,
        // dropping members that hit zero. Affine independence of the corral
        // keeps the bordered Gram system nonsingular.
        for (std::size_t minor = 0; minor <= K + 4; ++minor) {
            const std::size_t s = S.members.size();
            std::vector<double> M((s + 1) * (s + 1), 0.0);
            std::vector<double> rhs(s + 1, 0.0);
            for (std::size_t a = 0; a < s; ++a) {
                for (std::size_t b = a; b < s; ++b) {
                    const double g = dot(pts[S.members[a]], pts[S.members[b]]);
                    M[a * (s + 1) + b] = g;
                    M[b * (s + 1) + a] = g;
                }
                M[a * (s + 1) + s] = 1.0;
                M[s * (s + 1) + a] = 1.0;
            }
            rhs[s] = 1.0;
            std::vector<double> sol = rhs;
            if (!solve_dense(M, sol, s + 1)) {
                // Nearly dependent corral: drop the smallest-weight member.
                std::size_t drop = 0;
                for (std::size_t a = 1; a < s; ++a)
                    if (S.lambda[a] < S.lambda[drop]) drop = a;
                if (s <= 1) break;
                S.members.erase(S.members.begin() + static_cast<std::ptrdiff_t>(drop));
                S.lambda.erase(S.lambda.begin() + static_cast<std::ptrdiff_t>(drop));
                continue;
            }
            const std::vector<double> alpha(sol.begin(), sol.begin() + static_cast<std::ptrdiff_t>(s));

            bool interior = true;
            for (double a : alpha)
                if (a <= drop_tol) {
                    interior = false;
                    break;
                }
            if (interior) {
                S.lambda = alpha;
                break;
            }
            double theta = 1.0;
            for (std::size_t a = 0; a < s; ++a) {
                const double denom = S.lambda[a] - alpha[a];
                if (alpha[a] <= drop_tol && denom > 1e-18)
                    theta = std::min(theta, S.lambda[a] / denom);
            }
            theta = std::clamp(theta, 0.0, 1.0);
            for (std::size_t a = 0; a < s; ++a)
                S.lambda[a] = (1.0 - theta) * S.lambda[a] + theta * alpha[a];
            // Remove zeroed members (keep at least one).
            for (std::size_t a = S.members.size(); a-- > 0 && S.members.size() > 1;) {
                if (S.lambda[a] <= drop_tol) {
                    S.members.erase(S.members.begin() + static_cast<std::ptrdiff_t>(a));
                    S.lambda.erase(S.lambda.begin() + static_cast<std::ptrdiff_t>(a));
                }
            }
        }

        std::fill(z.begin(), z.end(), 0.0);
        for (std::size_t a = 0; a < S.members.size(); ++a)
            for (std::size_t i = 0; i < m; ++i) z[i] += S.lambda[a] * pts[S.members[a]][i];
    }

    for (std::size_t a = 0; a < S.members.size(); ++a) lambda[S.members[a]] = S.lambda[a];
    return lambda;
}

// Accelerated projected gradient over the barycentric simplex; used only to
// polish a solution whose certificate is marginal.
std::vector<double> fista_polish(const std::vector<std::vector<double>>& pts,
                                 std::vector<double> lambda, int iters) {
    const std::size_t K = pts.size();
    const std::size_t m = pts[0].size();
    double L = 0.0;
    for (const auto& p : pts) {
        double s = 0.0;
        for (double v : p) s += v * v;
        L += s;
    }
    L = std::max(2.0 * L, 1e-12);
    const double step = 1.0 / L;

    std::vector<double> y = lambda, prev = lambda, z(m), grad(K);
    double t = 1.0;
    for (int it = 0; it < iters; ++it) {
        std::fill(z.begin(), z.end(), 0.0);
        for (std::size_t k = 0; k < K; ++k)
            if (y[k] != 0.0)
                for (std::size_t i = 0; i < m; ++i) z[i] += y[k] * pts[k][i];
        for (std::size_t k = 0; k < K; ++k) {
            double g = 0.0;
            for (std::size_t i = 0; i < m; ++i) g += pts[k][i] * z[i];
            grad[k] = 2.0 * g;
        }
        std::vector<double> next(K);
        for (std::size_t k = 0; k < K; ++k) next[k] = y[k] - step * grad[k];
        next = project_simplex(std::move(next));
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        for (std::size_t k = 0; k < K; ++k)
            y[k] = next[k] + ((t - 1.0) / t_next) * (next[k] - prev[k]);
        y = project_simplex(std::move(y));
        prev = next;
        t = t_next;
    }
    return prev;
}

// Project x onto {y : N y <= r} in the diagonal metric W, for tiny systems,
// by enumerating candidate active sets in index order. The unique projection
// is the first candidate passing both primal feasibility and dual sign.
bool project_small_polyhedron(const std::vector<std::array<double, 3>>& normals,
                              const std::vector<double>& rhs, const std::array<double, 3>& w,
                              const std::array<double, 3>& x, std::array<double, 3>& out) {
    const std::size_t F = normals.size();
    const double feas_tol = 1e-11;
    std::vector<std::vector<std::size_t>> candidates;
    candidates.push_back({});
    for (std::size_t i = 0; i < F; ++i) candidates.push_back({i});
    for (std::size_t i = 0; i < F; ++i)
        for (std::size_t j = i + 1; j < F; ++j) candidates.push_back({i, j});
    for (std::size_t i = 0; i < F; ++i)
        for (std::size_t j = i + 1; j < F; ++j)
            for (std::size_t k = j + 1; k < F; ++k) candidates.push_back({i, j, k});

    for (const auto& act : candidates) {
        const std::size_t s = act.size();
        std::array<double, 3> y = x;
        std::vector<double> mu(s, 0.0);
        if (s > 0) {
            std::vector<double> M(s * s, 0.0);
            std::vector<double> b(s, 0.0);
            for (std::size_t a = 0; a < s; ++a) {
                for (std::size_t c = 0; c < s; ++c) {
                    double g = 0.0;
                    for (std::size_t i = 0; i < 3; ++i)
                        g += normals[act[a]][i] * normals[act[c]][i] / w[i];
                    M[a * s + c] = g;
                }
                double gx = 0.0;
                for (std::size_t i = 0; i < 3; ++i) gx += normals[act[a]][i] * x[i];
                b[a] = gx - rhs[act[a]];
            }
            if (!solve_dense(M, b, s)) continue;
            mu = b;
            bool dual_ok = true;
            for (double v : mu)
                if (v < -feas_tol) {
                    dual_ok = false;
                    break;
                }
            if (!dual_ok) continue;
            for (std::size_t i = 0; i < 3; ++i) {
                double corr = 0.0;
                for (std::size_t a = 0; a < s; ++a) corr += normals[act[a]][i] * mu[a];
                y[i] = x[i] - corr / w[i];
            }
        }
        bool feasible = true;
        for (std::size_t f = 0; f < F; ++f) {
            double v = 0.0;
            for (std::size_t i = 0; i < 3; ++i) v += normals[f][i] * y[i];
            if (v > rhs[f] + feas_tol) {
                feasible = false;
                break;
            }
        }
        if (feasible) {
            out = y;
            return true;
        }
    }
    return false;
}

} // namespace

// --- simplex projection ------------------------------------------------------

std::vector<double> project_simplex(std::vector<double> y) {
    std::vector<double> u = y;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double css = 0.0;
    double tau = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        css += u[j];
        const double t = (css - 1.0) / static_cast<double>(j + 1);
        if (u[j] - t > 0.0) tau = t;
    }
    for (double& v : y) v = std::max(v - tau, 0.0);
    return y;
}

// --- VertexPolytope -----------------------------------------------------------

VertexPolytope VertexPolytope::build(std::vector<EventExpr> events, std::vector<double> weights,
                                     std::size_t cap) {
    if (events.empty()) throw UsageError("polytope requires at least one event");
    if (weights.size() != events.size())
        throw UsageError("one weight per event required");
    for (double w : weights)
        if (!(w > 0.0) || !std::isfinite(w)) throw UsageError("weights must be positive");

    const std::vector<std::string> vars = joint_support(events);
    const std::size_t n = vars.size();
    if (n > cap) throw SupportCapError(n, cap);

    std::vector<detail::CompiledExpr> compiled;
    compiled.reserve(events.size());
    for (const auto& e : events) compiled.emplace_back(e, vars);

    VertexPolytope poly;
    poly.events_ = std::move(events);
    poly.weights_ = std::move(weights);

    std::set<std::vector<double>> seen;
    const std::uint64_t count = std::uint64_t{1} << n;
    for (std::uint64_t mask = 0; mask < count; ++mask) {
        std::vector<double> v(poly.events_.size());
        for (std::size_t i = 0; i < compiled.size(); ++i)
            v[i] = compiled[i].eval(static_cast<std::uint32_t>(mask)) ? 1.0 : 0.0;
        if (seen.insert(v).second) poly.vertices_.push_back(std::move(v));
    }
    poly.detect_shape();
    return poly;
}

void VertexPolytope::detect_shape() {
    shape_ = Shape::General;
    const std::size_t m = events_.size();
    const std::size_t K = vertices_.size();

    if (m == 1) {
        shape_ = Shape::Interval;
        pattern_vertex_.assign(2, SIZE_MAX);
        for (std::size_t k = 0; k < K; ++k)
            pattern_vertex_[vertices_[k][0] > 0.5 ? 1 : 0] = k;
        return;
    }
    if (m == 2 && K == 2) {
        std::size_t i10 = SIZE_MAX, i01 = SIZE_MAX;
        for (std::size_t k = 0; k < 2; ++k) {
            if (vertices_[k][0] > 0.5 && vertices_[k][1] < 0.5) i10 = k;
            if (vertices_[k][0] < 0.5 && vertices_[k][1] > 0.5) i01 = k;
        }
        if (i10 != SIZE_MAX && i01 != SIZE_MAX) {
            shape_ = Shape::NegationPair;
            pattern_vertex_ = {i01, i10};  // pattern = value of the first event
        }
        return;
    }
    if (m == 3 && K == 4) {
        for (std::size_t c = 0; c < 3 && shape_ == Shape::General; ++c) {
            const std::size_t a0 = (c == 0) ? 1 : 0;
            const std::size_t a1 = (c == 2) ? 1 : 2;
            for (int op = 0; op < 2; ++op) {
                std::vector<std::size_t> pat(4, SIZE_MAX);
                bool ok = true;
                for (std::size_t k = 0; k < 4 && ok; ++k) {
                    const bool va = vertices_[k][a0] > 0.5;
                    const bool vb = vertices_[k][a1] > 0.5;
                    const bool vc = vertices_[k][c] > 0.5;
                    const bool expect = (op == 0) ? (va && vb) : (va || vb);
                    if (vc != expect) ok = false;
                    const std::size_t id = (static_cast<std::size_t>(va) << 1) |
                                           static_cast<std::size_t>(vb);
                    if (pat[id] != SIZE_MAX) ok = false;
                    pat[id] = k;
                }
                if (ok) {
                    shape_ = (op == 0) ? Shape::ConjunctionTriple : Shape::DisjunctionTriple;
                    conn_coord_ = c;
                    arg_coord_[0] = a0;
                    arg_coord_[1] = a1;
                    pattern_vertex_ = std::move(pat);
                    break;
                }
            }
        }
    }
}

// --- projection ---------------------------------------------------------------

struct ProjectionImpl {
    static Projection generic(const VertexPolytope& poly, const ProbVector& x,
                              const Tolerances& tol);
    static bool fast_path(const VertexPolytope& poly, const ProbVector& x, Projection& out);
    static double vi_residual(const VertexPolytope& poly, const ProbVector& x,
                              const ProbVector& y);
    static Projection finish(const VertexPolytope& poly, const ProbVector& x, Projection proj,
                             const Tolerances& tol);
};

double ProjectionImpl::vi_residual(const VertexPolytope& poly, const ProbVector& x,
                                   const ProbVector& y) {
    const auto& w = poly.weights();
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& v : poly.vertices()) {
        double s = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i)
            s += w[i] * (x[i] - y[i]) * (v[i] - y[i]);
        worst = std::max(worst, s);
    }
    return worst;
}

Projection ProjectionImpl::generic(const VertexPolytope& poly, const ProbVector& x,
                                   const Tolerances& tol) {
    const auto& verts = poly.vertices();
    const auto& w = poly.weights();
    const std::size_t m = x.size();

    // Transform so the weighted problem becomes an unweighted min-norm-point
    // search: p_k = sqrt(W) (v_k - x).
    std::vector<double> sw(m);
    for (std::size_t i = 0; i < m; ++i) sw[i] = std::sqrt(w[i]);
    std::vector<std::vector<double>> pts(verts.size(), std::vector<double>(m));
    double scale = 1.0;
    for (std::size_t k = 0; k < verts.size(); ++k) {
        double nrm = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            pts[k][i] = sw[i] * (verts[k][i] - x[i]);
            nrm += pts[k][i] * pts[k][i];
        }
        scale = std::max(scale, nrm);
    }

    // Stopping slack: scale-relative but capped well under the certificate
    // budget, with a floor at the floating-point noise of the dot products.
    const double eps = std::max(std::min(tol.solver * scale, 1e-10), 1e-15 * scale);
    std::vector<double> lambda = wolfe_min_norm(pts, eps);

    Projection proj;
    proj.lambda = std::move(lambda);
    proj.point.assign(m, 0.0);
    for (std::size_t k = 0; k < verts.size(); ++k)
        if (proj.lambda[k] != 0.0)
            for (std::size_t i = 0; i < m; ++i) proj.point[i] += proj.lambda[k] * verts[k][i];

    if (vi_residual(poly, x, proj.point) > tol.kkt) {
        proj.lambda = fista_polish(pts, proj.lambda, 20000);
        std::fill(proj.point.begin(), proj.point.end(), 0.0);
        for (std::size_t k = 0; k < verts.size(); ++k)
            if (proj.lambda[k] != 0.0)
                for (std::size_t i = 0; i < m; ++i) proj.point[i] += proj.lambda[k] * verts[k][i];
    }
    return proj;
}

bool ProjectionImpl::fast_path(const VertexPolytope& poly, const ProbVector& x,
                               Projection& out) {
    const auto& w = poly.weights();
    const std::size_t K = poly.vertices().size();

    switch (poly.shape()) {
    case VertexPolytope::Shape::Interval: {
        const std::size_t k0 = poly.pattern_vertex_[0];
        const std::size_t k1 = poly.pattern_vertex_[1];
        out.lambda.assign(K, 0.0);
        if (k0 != SIZE_MAX && k1 != SIZE_MAX) {
            const double y = std::clamp(x[0], 0.0, 1.0);
            out.point = {y};
            out.lambda[k1] = y;
            out.lambda[k0] = 1.0 - y;
        } else {
            const std::size_t k = (k1 != SIZE_MAX) ? k1 : k0;
            out.point = {poly.vertices()[k][0]};
            out.lambda[k] = 1.0;
        }
        return true;
    }
    case VertexPolytope::Shape::NegationPair: {
        const double t =
            std::clamp((w[0] * x[0] + w[1] * (1.0 - x[1])) / (w[0] + w[1]), 0.0, 1.0);
        out.point = {t, 1.0 - t};
        out.lambda.assign(K, 0.0);
        out.lambda[poly.pattern_vertex_[1]] = t;
        out.lambda[poly.pattern_vertex_[0]] = 1.0 - t;
        return true;
    }
    case VertexPolytope::Shape::ConjunctionTriple:
    case VertexPolytope::Shape::DisjunctionTriple: {
        const bool conj = poly.shape() == VertexPolytope::Shape::ConjunctionTriple;
        const std::size_t a0 = poly.arg_coord_[0];
        const std::size_t a1 = poly.arg_coord_[1];
        const std::size_t cc = poly.conn_coord_;
        // Facets in permuted coordinates (y[0]=arg0, y[1]=arg1, y[2]=conn).
        std::vector<std::array<double, 3>> normals;
        std::vector<double> rhs;
        if (conj) {
            normals = {{-1, 0, 1}, {0, -1, 1}, {1, 1, -1}, {0, 0, -1}};
            rhs = {0, 0, 1, 0};
        } else {
            normals = {{1, 0, -1}, {0, 1, -1}, {-1, -1, 1}, {0, 0, 1}};
            rhs = {0, 0, 0, 1};
        }
        const std::array<double, 3> wp = {w[a0], w[a1], w[cc]};
        const std::array<double, 3> xp = {x[a0], x[a1], x[cc]};
        std::array<double, 3> yp{};
        if (!project_small_polyhedron(normals, rhs, wp, xp, yp)) return false;

        out.point.assign(3, 0.0);
        out.point[a0] = yp[0];
        out.point[a1] = yp[1];
        out.point[cc] = yp[2];
        const double a = yp[0], b = yp[1], c = yp[2];
        std::array<double, 4> pat{};
        if (conj) {
            pat[0b00] = 1.0 - a - b + c;
            pat[0b01] = b - c;
            pat[0b10] = a - c;
            pat[0b11] = c;
        } else {
            pat[0b00] = 1.0 - c;
            pat[0b01] = c - a;
            pat[0b10] = c - b;
            pat[0b11] = a + b - c;
        }
        out.lambda.assign(K, 0.0);
        double sum = 0.0;
        for (std::size_t id = 0; id < 4; ++id) {
            const double l = std::max(pat[id], 0.0);
            out.lambda[poly.pattern_vertex_[id]] = l;
            sum += l;
        }
        if (sum > 0.0)
            for (double& l : out.lambda) l /= sum;
        return true;
    }
    case VertexPolytope::Shape::General:
        return false;
    }
    return false;
}

Projection ProjectionImpl::finish(const VertexPolytope& poly, const ProbVector& x,
                                  Projection proj, const Tolerances& tol) {
    // Tidy the certificate: clamp rounding negatives and renormalize.
    double sum = 0.0;
    for (double& l : proj.lambda) {
        l = std::max(l, 0.0);
        sum += l;
    }
    if (sum > 0.0)
        for (double& l : proj.lambda) l /= sum;

    const double vi = vi_residual(poly, x, proj.point);
    if (vi > tol.kkt)
        throw SolverError("projection failed its optimality certificate", vi);

    if (inf_norm_diff(proj.point, x) <= tol.membership) proj.point = x;
    return proj;
}

Projection project_onto_detailed(const VertexPolytope& poly, const ProbVector& x,
                                 const Tolerances& tol) {
    check_dims(poly.dim(), x.size());
    check_finite(x);
    Projection proj;
    if (!ProjectionImpl::fast_path(poly, x, proj))
        proj = ProjectionImpl::generic(poly, x, tol);
    return ProjectionImpl::finish(poly, x, std::move(proj), tol);
}

ProbVector project_onto(const VertexPolytope& poly, const ProbVector& x, const Tolerances& tol) {
    return project_onto_detailed(poly, x, tol).point;
}

ProbVector project_onto_generic(const VertexPolytope& poly, const ProbVector& x,
                                const Tolerances& tol) {
    check_dims(poly.dim(), x.size());
    check_finite(x);
    return ProjectionImpl::finish(poly, x, ProjectionImpl::generic(poly, x, tol), tol).point;
}

bool is_coherent(const VertexPolytope& poly, const ProbVector& x, double tol) {
    const ProbVector y = project_onto(poly, x);
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
    return std::sqrt(d2) <= tol;
}

// --- Dykstra -------------------------------------------------------------------

DykstraResult dykstra_detailed(std::span<const IndexedPolytope> sets, const ProbVector& x,
                               int max_sweeps, double tol, const Tolerances& tols) {
    if (sets.empty()) throw UsageError("dykstra requires at least one set");
    if (max_sweeps < 1) throw UsageError("max_sweeps must be >= 1");
    check_finite(x);
    for (const auto& s : sets) {
        if (s.indices.size() != s.poly.dim())
            throw UsageError("index map size must match polytope dimension");
        for (std::size_t idx : s.indices)
            if (idx >= x.size()) throw UsageError("index map out of range");
    }

    DykstraResult res;
    res.point = x;
    std::vector<std::vector<double>> corr(sets.size());
    for (std::size_t j = 0; j < sets.size(); ++j) corr[j].assign(sets[j].indices.size(), 0.0);

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double move = 0.0;
        double corr_change2 = 0.0;
        for (std::size_t j = 0; j < sets.size(); ++j) {
            const auto& idx = sets[j].indices;
            ProbVector u(idx.size());
            for (std::size_t i = 0; i < idx.size(); ++i) u[i] = res.point[idx[i]] + corr[j][i];
            const ProbVector y = project_onto(sets[j].poly, u, tols);
            for (std::size_t i = 0; i < idx.size(); ++i) {
                const double p_new = u[i] - y[i];
                const double dc = p_new - corr[j][i];
                corr_change2 += dc * dc;
                move = std::max(move, std::abs(y[i] - res.point[idx[i]]));
                corr[j][i] = p_new;
                res.point[idx[i]] = y[i];
            }
        }
        res.max_move_per_sweep.push_back(move);
        res.sweeps_run = sweep + 1;
        res.residual = std::sqrt(corr_change2);
        if (res.residual <= tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

ProbVector project_onto_dykstra(std::span<const IndexedPolytope> sets, const ProbVector& x,
                                int max_sweeps, double tol, const Tolerances& tols) {
    DykstraResult res = dykstra_detailed(sets, x, max_sweeps, tol, tols);
    if (!res.converged)
        throw SolverError("dykstra did not converge in " + std::to_string(max_sweeps) + " sweeps",
                          res.residual);
    return res.point;
}

// --- global oracle ---------------------------------------------------------------

ProbVector global_cap_oracle(std::span<const EventExpr> events, std::span<const double> weights,
                             const ProbVector& x, std::size_t cap, const Tolerances& tol) {
    if (events.empty()) throw UsageError("oracle requires at least one event");
    if (weights.size() != events.size() || x.size() != events.size())
        throw UsageError("events, weights and probabilities must align");
    check_finite(x);

    const std::vector<std::string> vars = joint_support(events);
    const std::size_t n = vars.size();
    if (n > cap) throw SupportCapError(n, cap);

    const std::size_t m = events.size();
    const std::size_t T = std::size_t{1} << n;

    // A[i][t] = 1 iff event i holds under joint assignment t.
    std::vector<std::vector<double>> A(m, std::vector<double>(T));
    {
        std::vector<detail::CompiledExpr> compiled;
        compiled.reserve(m);
        for (const auto& e : events) compiled.emplace_back(e, vars);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t t = 0; t < T; ++t)
                A[i][t] = compiled[i].eval(static_cast<std::uint32_t>(t)) ? 1.0 : 0.0;
    }

    double wmax = 0.0;
    for (double w : weights) {
        if (!(w > 0.0)) throw UsageError("weights must be positive");
        wmax = std::max(wmax, w);
    }
    double row_sum_max = 0.0;
    std::vector<double> col_sums(T, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        double rs = 0.0;
        for (std::size_t t = 0; t < T; ++t) {
            rs += A[i][t];
            col_sums[t] += A[i][t];
        }
        row_sum_max = std::max(row_sum_max, rs);
    }
    const double col_sum_max = *std::max_element(col_sums.begin(), col_sums.end());
    const double L = std::max(2.0 * wmax * row_sum_max * col_sum_max, 1e-12);
    const double step = 1.0 / L;

    std::vector<double> mu(T, 1.0 / static_cast<double>(T));
    std::vector<double> resid(m), grad(T);
    const int max_iters = 2000000;
    double stat = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iters; ++it) {
        for (std::size_t i = 0; i < m; ++i) {
            double s = -x[i];
            const auto& row = A[i];
            for (std::size_t t = 0; t < T; ++t) s += row[t] * mu[t];
            resid[i] = weights[i] * s;
        }
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            const double r2 = 2.0 * resid[i];
            if (r2 == 0.0) continue;
            const auto& row = A[i];
            for (std::size_t t = 0; t < T; ++t) grad[t] += r2 * row[t];
        }
        std::vector<double> next(T);
        for (std::size_t t = 0; t < T; ++t) next[t] = mu[t] - step * grad[t];
        next = project_simplex(std::move(next));
        stat = 0.0;
        for (std::size_t t = 0; t < T; ++t) stat = std::max(stat, std::abs(next[t] - mu[t]));
        mu = std::move(next);
        if (stat <= tol.stationarity) break;
    }
    if (stat > tol.stationarity)
        throw SolverError("oracle projected gradient did not reach stationarity", stat);

    ProbVector y(m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t t = 0; t < T; ++t) y[i] += A[i][t] * mu[t];
    return y;
}

} // namespace capagg
