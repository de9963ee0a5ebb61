#include "metriccalc/derivation.hpp"
#include "metriccalc/errors.hpp"

#include <algorithm>
#include <cmath>

namespace mc {

Derivation::Derivation(const Space& space, std::vector<std::vector<std::pair<int, double>>> stencils)
    : space_(&space) {
    if (stencils.size() != static_cast<std::size_t>(space.size()))
        throw std::invalid_argument("derivation: one stencil per point required");
    stencil_.resize(stencils.size());
    for (int x = 0; x < space.size(); ++x) {
        for (const auto& [y, w] : stencils[x]) {
            if (y < 0 || y >= space.size())
                throw std::invalid_argument("derivation: stencil neighbor out of range at point " +
                                            std::to_string(x));
            if (y == x) throw std::invalid_argument("derivation: stencil neighbor equals center at point " +
                                                    std::to_string(x));
            const double d = space.dist(x, y);
            if (!(d > 0.0))
                throw std::invalid_argument("derivation: zero-distance neighbor at point " +
                                            std::to_string(x));
            if (!std::isfinite(w)) throw std::invalid_argument("derivation: non-finite stencil weight");
            stencil_[x].push_back({y, w, d});
            reach_ = std::max(reach_, d);
        }
    }
}

Derivation make_axis_derivation(const Space& space, int axis, double step) {
    if (!space.has_coords()) throw std::invalid_argument("axis derivation requires coordinates");
    if (axis < 0 || axis >= space.dim()) throw std::invalid_argument("axis derivation: bad axis");
    if (space.snowflake_alpha() != 1.0)
        throw std::invalid_argument("axis derivation: snowflaked metric has no grid step");
    if (step == 0.0) {
        step = space.median_nn_dist();
        if (!(step > 0.0)) throw std::invalid_argument("axis derivation: degenerate spacing");
    }
    const int n = space.size();
    const double tol = 1e-9 * step;
    auto find_at = [&](int x, double offset) -> int {
        for (int y = 0; y < n; ++y) {
            if (y == x) continue;
            bool match = true;
            for (int k = 0; k < space.dim(); ++k) {
                const double want = space.coord(x, k) + (k == axis ? offset : 0.0);
                if (std::abs(space.coord(y, k) - want) > tol) {
                    match = false;
                    break;
                }
            }
            if (match) return y;
        }
        return -1;
    };
    std::vector<std::vector<std::pair<int, double>>> st(n);
    for (int x = 0; x < n; ++x) {
        int y = find_at(x, step);
        if (y < 0) y = find_at(x, -step); // far boundary: flip to backward
        if (y < 0)
            throw std::invalid_argument("axis derivation: no neighbor at step " + std::to_string(step) +
                                        " from point " + std::to_string(x));
        st[x].push_back({y, 1.0});
    }
    return Derivation(space, std::move(st));
}

Derivation make_knn_derivation(const Space& space, int k, double radius) {
    if (k < 1) throw std::invalid_argument("knn derivation: k must be >= 1");
    const int n = space.size();
    std::vector<std::vector<std::pair<int, double>>> st(n);
    for (int x = 0; x < n; ++x) {
        std::vector<std::pair<double, int>> cand;
        for (int y = 0; y < n; ++y) {
            if (y == x) continue;
            const double d = space.dist(x, y);
            if (radius > 0.0 && d > radius) continue;
            cand.push_back({d, y});
        }
        std::sort(cand.begin(), cand.end());
        const int take = std::min<int>(k, static_cast<int>(cand.size()));
        for (int i = 0; i < take; ++i) st[x].push_back({cand[i].second, 1.0 / k});
    }
    return Derivation(space, std::move(st));
}

ScalarField apply(const Derivation& D, const ScalarField& f) {
    if (f.space != &D.space()) throw std::invalid_argument("apply: field lives on a different space");
    const int n = D.space().size();
    std::vector<double> out(n);
#pragma omp parallel for schedule(static)
    for (int x = 0; x < n; ++x) out[x] = D.apply_at(f, x);
    return ScalarField(D.space(), std::move(out));
}

LeibnizReport leibniz_residual(const Derivation& D, const ScalarField& f, const ScalarField& g) {
    if (f.space != &D.space() || g.space != &D.space())
        throw std::invalid_argument("leibniz_residual: space mismatch");
    const int n = D.space().size();
    std::vector<double> fg(n);
    for (int x = 0; x < n; ++x) fg[x] = f[x] * g[x];
    const ScalarField prod(D.space(), std::move(fg));

    const double gf = glip(f), gg = glip(g);
    std::vector<double> res(n);
    double maxabs = 0.0;
    bool ok = true;
#pragma omp parallel for schedule(static) reduction(max : maxabs) reduction(&& : ok)
    for (int x = 0; x < n; ++x) {
        const double r = D.apply_at(prod, x) - f[x] * D.apply_at(g, x) - g[x] * D.apply_at(f, x);
        res[x] = r;
        maxabs = std::max(maxabs, std::abs(r));
        const double bound = D.weight_mass(x) * gf * gg * D.reach();
        ok = ok && (std::abs(r) <= bound * (1.0 + 1e-12) + 1e-300);
    }
    return {ScalarField(D.space(), std::move(res)), ok, maxabs};
}

LocalityReport locality_residual(const Derivation& D, const ScalarField& f, const ScalarField& g,
                                 const std::vector<int>& A) {
    if (f.space != &D.space() || g.space != &D.space())
        throw std::invalid_argument("locality_residual: space mismatch");
    std::vector<char> in(D.space().size(), 0);
    for (int a : A) {
        if (a < 0 || a >= D.space().size())
            throw std::invalid_argument("locality_residual: bad subset index");
        in[a] = 1;
        if (f[a] != g[a])
            throw std::invalid_argument("locality_residual: f != g on A at point " + std::to_string(a));
    }
    LocalityReport rep;
    rep.domain = A;
    rep.residual.resize(A.size());
    rep.interior.resize(A.size());
    rep.max_interior_abs = 0.0;
    for (std::size_t i = 0; i < A.size(); ++i) {
        const int x = A[i];
        rep.residual[i] = D.apply_at(f, x) - D.apply_at(g, x);
        bool inside = true;
        for (const auto& e : D.stencil(x)) inside = inside && in[e.neighbor];
        rep.interior[i] = inside ? 1 : 0;
        if (inside) rep.max_interior_abs = std::max(rep.max_interior_abs, std::abs(rep.residual[i]));
    }
    return rep;
}

double operator_norm_bound(const Derivation& D) {
    double m = 0.0;
    for (int x = 0; x < D.space().size(); ++x) m = std::max(m, D.weight_mass(x));
    return m;
}

OperatorNormReport operator_norm_empirical(const Derivation& D, const std::vector<ScalarField>& probes,
                                           const ResolutionContext& ctx) {
    if (probes.empty()) throw std::invalid_argument("operator_norm_empirical: empty probe set");
    OperatorNormReport rep;
    rep.exact_bound = operator_norm_bound(D);
    rep.empirical = 0.0;
    for (int pi = 0; pi < static_cast<int>(probes.size()); ++pi) {
        const ScalarField& f = probes[pi];
        if (f.space != &D.space()) throw std::invalid_argument("operator_norm_empirical: space mismatch");
        for (int x = 0; x < D.space().size(); ++x) {
            const double df = std::abs(D.apply_at(f, x));
            const double lip = ctx.isolated(x) ? 0.0 : ctx.upper_at(f, x);
            if (lip == 0.0) {
                if (df > 1e-12) rep.violations.push_back({pi, x, df});
                continue;
            }
            rep.empirical = std::max(rep.empirical, df / lip);
        }
    }
    return rep;
}

Derivation combine(const std::vector<ScalarField>& lambdas, const std::vector<Derivation>& derivations) {
    if (lambdas.size() != derivations.size() || lambdas.empty())
        throw std::invalid_argument("combine: coefficient/derivation length mismatch");
    const Space& space = derivations.front().space();
    for (const auto& d : derivations)
        if (&d.space() != &space) throw std::invalid_argument("combine: derivations on different spaces");
    for (const auto& l : lambdas)
        if (l.space != &space) throw std::invalid_argument("combine: coefficient field on a different space");
    const int n = space.size();
    std::vector<std::vector<std::pair<int, double>>> st(n);
    for (int x = 0; x < n; ++x) {
        for (std::size_t i = 0; i < derivations.size(); ++i) {
            const double c = lambdas[i][x];
            if (c == 0.0) continue;
            for (const auto& e : derivations[i].stencil(x)) st[x].push_back({e.neighbor, c * e.weight});
        }
    }
    return Derivation(space, std::move(st));
}

ComponentTable component_table(const std::vector<Derivation>& derivations,
                               const std::vector<ScalarField>& generators) {
    if (derivations.empty() || generators.empty())
        throw std::invalid_argument("component_table: empty inputs");
    const Space& space = derivations.front().space();
    for (const auto& d : derivations)
        if (&d.space() != &space) throw std::invalid_argument("component_table: space mismatch");
    for (const auto& g : generators)
        if (g.space != &space) throw std::invalid_argument("component_table: space mismatch");
    ComponentTable t;
    t.n_derivations = static_cast<int>(derivations.size());
    t.n_generators = static_cast<int>(generators.size());
    t.n_points = space.size();
    t.values.assign(static_cast<std::size_t>(t.n_points) * t.n_derivations * t.n_generators, 0.0);
#pragma omp parallel for schedule(static)
    for (int x = 0; x < t.n_points; ++x) {
        double* blk = &t.values[static_cast<std::size_t>(x) * t.n_derivations * t.n_generators];
        for (int i = 0; i < t.n_derivations; ++i)
            for (int k = 0; k < t.n_generators; ++k)
                blk[i * t.n_generators + k] = derivations[i].apply_at(generators[k], x);
    }
    return t;
}

ComponentTable transpose_table(const ComponentTable& table) {
    ComponentTable t;
    t.n_derivations = table.n_generators;
    t.n_generators = table.n_derivations;
    t.n_points = table.n_points;
    t.values.resize(table.values.size());
    for (int x = 0; x < t.n_points; ++x)
        for (int i = 0; i < t.n_derivations; ++i)
            for (int k = 0; k < t.n_generators; ++k)
                t.values[(static_cast<std::size_t>(x) * t.n_derivations + i) * t.n_generators + k] =
                    table.at(x, k, i);
    return t;
}

} // namespace mc
