#include "metriccalc/mds.hpp"
#include "metriccalc/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace mc {

namespace {

std::vector<const ScalarField*> pick(const std::vector<ScalarField>& generators,
                                     const std::vector<int>& functions) {
    std::vector<const ScalarField*> out;
    out.reserve(functions.size());
    for (int j : functions) {
        if (j < 0 || j >= static_cast<int>(generators.size()))
            throw std::invalid_argument("chart function index out of range");
        out.push_back(&generators[j]);
    }
    return out;
}

double combo_residual(const ResolutionContext& ctx, const ScalarField& f,
                      const std::vector<const ScalarField*>& funcs, const double* c, int x) {
    // Lip(f - sum_j c_j x^j)(x) with the coefficients frozen at x.
    double best = 0.0;
    for (const auto& nb : ctx.neighbors(x)) {
        double diff = f[nb.point] - f[x];
        for (std::size_t j = 0; j < funcs.size(); ++j)
            diff -= c[j] * ((*funcs[j])[nb.point] - (*funcs[j])[x]);
        best = std::max(best, std::abs(diff) / nb.dist);
    }
    return best;
}

} // namespace

PartialDerivativeTable partial_derivatives_lsq(const ScalarField& f,
                                               const std::vector<ScalarField>& generators,
                                               const std::vector<int>& functions,
                                               const std::vector<int>& domain, double radius,
                                               const ResolutionContext& ctx) {
    const Space& space = *f.space;
    const auto funcs = pick(generators, functions);
    const int nf = static_cast<int>(funcs.size());
    PartialDerivativeTable pd;
    pd.domain = domain;
    pd.functions = functions;
    pd.method = PdMethod::lsq;
    pd.lsq_radius = radius;
    pd.coeff.assign(domain.size() * nf, 0.0);
    pd.residual.assign(domain.size(), 0.0);
    if (nf == 0) return pd;

    std::vector<std::string> underdetermined;
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t di = 0; di < static_cast<std::int64_t>(domain.size()); ++di) {
        const int x = domain[di];
        const std::vector<int> ball = space.ball(x, radius);
        if (static_cast<int>(ball.size()) < nf + 1) {
#pragma omp critical
            underdetermined.push_back(std::to_string(x));
            continue;
        }
        Eigen::MatrixXd G = Eigen::MatrixXd::Zero(nf, nf);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(nf);
        Eigen::VectorXd phi(nf);
        for (int y : ball) {
            if (y == x) continue;
            const double w = space.weight(y);
            for (int j = 0; j < nf; ++j) phi(j) = (*funcs[j])[y] - (*funcs[j])[x];
            G.noalias() += w * phi * phi.transpose();
            b.noalias() += (w * (f[y] - f[x])) * phi;
        }
        const double ridge = 1e-12 * G.trace() / nf;
        for (int j = 0; j < nf; ++j) G(j, j) += ridge;
        const Eigen::VectorXd c = G.ldlt().solve(b);
        for (int j = 0; j < nf; ++j) pd.coeff[di * nf + j] = c(j);
        pd.residual[di] = ctx.isolated(x) ? 0.0 : combo_residual(ctx, f, funcs, &pd.coeff[di * nf], x);
    }
    if (!underdetermined.empty())
        throw std::invalid_argument("partial_derivatives_lsq: ball(x," + std::to_string(radius) +
                                    ") is underdetermined at point " + underdetermined.front());
    return pd;
}

PartialDerivativeTable partial_derivatives_dual(const ScalarField& f,
                                                const std::vector<ScalarField>& generators,
                                                const DualBasisRecord& rec,
                                                const ResolutionContext& ctx) {
    const auto funcs = pick(generators, rec.generators);
    const int nf = static_cast<int>(funcs.size());
    PartialDerivativeTable pd;
    pd.domain = rec.domain;
    pd.functions = rec.generators;
    pd.method = PdMethod::dual;
    pd.coeff.assign(rec.domain.size() * nf, 0.0);
    pd.residual.assign(rec.domain.size(), 0.0);
#pragma omp parallel for schedule(static)
    for (std::int64_t di = 0; di < static_cast<std::int64_t>(rec.domain.size()); ++di) {
        const int x = rec.domain[di];
        for (int j = 0; j < nf; ++j) pd.coeff[di * nf + j] = rec.duals[j].apply_at(f, x);
        pd.residual[di] = ctx.isolated(x) ? 0.0 : combo_residual(ctx, f, funcs, &pd.coeff[di * nf], x);
    }
    return pd;
}

CotangentField differential(const PartialDerivativeTable& pd) {
    return {pd.domain, pd.functions, pd.coeff};
}

double cot_norm(const ResolutionContext& ctx, const std::vector<ScalarField>& generators,
                const std::vector<int>& functions, const std::vector<double>& v, int x) {
    if (v.size() != functions.size()) throw std::invalid_argument("cot_norm: coefficient length mismatch");
    if (functions.empty() || ctx.isolated(x)) return 0.0;
    return ctx.upper_combo_at(pick(generators, functions), v, x);
}

SobolevNorm sobolev_norm(const ScalarField& f, const Atlas& atlas,
                         const std::vector<ScalarField>& generators, double p,
                         const ResolutionContext& ctx) {
    if (!(p >= 1.0)) throw std::invalid_argument("sobolev_norm: p must be >= 1");
    const Space& space = *f.space;
    std::vector<int> chart_of(space.size(), -1);
    for (int ci = 0; ci < static_cast<int>(atlas.charts.size()); ++ci)
        for (int x : atlas.charts[ci].domain) chart_of[x] = ci;
    for (int x = 0; x < space.size(); ++x)
        if (chart_of[x] < 0)
            throw std::invalid_argument("sobolev_norm: atlas does not cover point " + std::to_string(x));

    std::vector<double> dnorm(space.size(), 0.0);
#pragma omp parallel for schedule(static)
    for (int x = 0; x < space.size(); ++x) {
        const Chart& chart = atlas.charts[chart_of[x]];
        if (chart.functions.empty()) continue; // 0-dimensional chart
        const DualBasisRecord& rec = atlas.duals[chart.dual_record];
        std::vector<double> v(chart.functions.size());
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = rec.duals[j].apply_at(f, x);
        dnorm[x] = cot_norm(ctx, generators, chart.functions, v, x);
    }

    SobolevNorm out;
    double s1 = 0.0, s2 = 0.0;
    for (int x = 0; x < space.size(); ++x) {
        s1 += space.weight(x) * std::pow(std::abs(f[x]), p);
        s2 += space.weight(x) * std::pow(dnorm[x], p);
    }
    out.lp_term = std::pow(s1, 1.0 / p);
    out.dlp_term = std::pow(s2, 1.0 / p);
    out.value = out.lp_term + out.dlp_term;
    return out;
}

RepresentationResidual representation_residual(const Derivation& D, const ScalarField& f,
                                               const std::vector<ScalarField>& generators,
                                               const PartialDerivativeTable& pd) {
    const Space& space = D.space();
    const auto funcs = pick(generators, pd.functions);
    RepresentationResidual rr;
    rr.domain = pd.domain;
    rr.values.assign(pd.domain.size(), 0.0);
    double wsum = 0.0, wabs = 0.0;
    for (std::size_t di = 0; di < pd.domain.size(); ++di) {
        const int x = pd.domain[di];
        double v = D.apply_at(f, x);
        for (std::size_t j = 0; j < funcs.size(); ++j)
            v -= pd.at(di, static_cast<int>(j)) * D.apply_at(*funcs[j], x);
        rr.values[di] = v;
        rr.max_abs = std::max(rr.max_abs, std::abs(v));
        wsum += space.weight(x);
        wabs += space.weight(x) * std::abs(v);
    }
    rr.weighted_mean_abs = wsum > 0.0 ? wabs / wsum : 0.0;
    return rr;
}

InequalityReport inequality_report(const std::vector<Derivation>& derivations,
                                   const std::vector<ScalarField>& corpus, const ResolutionContext& ctx,
                                   const ScalarField* given_lambda) {
    if (corpus.empty()) throw std::invalid_argument("inequality_report: empty corpus");
    const Space& space = ctx.space();
    const int n = space.size();
    const int nd = static_cast<int>(derivations.size());

    InequalityReport rep;
    rep.exact_bounds.resize(nd);
    for (int j = 0; j < nd; ++j) rep.exact_bounds[j] = operator_norm_bound(derivations[j]);

    rep.lambda.assign(n, std::numeric_limits<double>::infinity());
    rep.lambda_defined.assign(n, 0);

    for (int fi = 0; fi < static_cast<int>(corpus.size()); ++fi) {
        const ScalarField& f = corpus[fi];
        if (f.space != &space) throw std::invalid_argument("inequality_report: space mismatch");
        for (int x = 0; x < n; ++x) {
            const double lip = ctx.isolated(x) ? 0.0 : ctx.upper_at(f, x);
            double maxdf = 0.0;
            for (int j = 0; j < nd; ++j) {
                const double df = std::abs(derivations[j].apply_at(f, x));
                maxdf = std::max(maxdf, df);
                const double rhs = rep.exact_bounds[j] * lip;
                if (df > rhs * (1.0 + 1e-12) + 1e-300)
                    rep.upper_violations.push_back(
                        {j, fi, x, df, rhs, derivations[j].reach() <= ctx.scale(x)});
            }
            if (lip == 0.0) {
                if (maxdf > 1e-12) rep.reverse_violations.push_back({fi, x, maxdf});
                continue;
            }
            const double ratio = maxdf / lip;
            rep.lambda[x] = std::min(rep.lambda[x], ratio);
            rep.lambda_defined[x] = 1;
            if (given_lambda) {
                const double rhs = (*given_lambda)[x] * lip;
                if (maxdf < rhs * (1.0 - 1e-12) - 1e-300)
                    rep.given_violations.push_back({fi, x, maxdf, rhs});
            }
        }
    }

    bool any = false;
    for (int x = 0; x < n; ++x) {
        if (rep.lambda_defined[x]) {
            any = true;
            rep.min_lambda = std::min(rep.min_lambda, rep.lambda[x]);
        }
    }
    rep.degenerate_corpus = !any;
    return rep;
}

Atlas build_atlas(const std::vector<ScalarField>& generators,
                  const std::vector<Derivation>& derivations, double tau, double eps_floor,
                  const ResolutionContext& ctx) {
    const Space& space = ctx.space();
    Atlas atlas;
    if (derivations.empty()) {
        Chart chart;
        chart.domain.resize(space.size());
        for (int x = 0; x < space.size(); ++x) chart.domain[x] = x;
        atlas.charts.push_back(std::move(chart));
        atlas.dimension = 0;
        return atlas;
    }
    if (generators.empty()) throw std::invalid_argument("build_atlas: no generators");

    const ComponentTable table = component_table(derivations, generators);
    const Stratification strat = stratify(table, tau);

    if (!strat.strata[0].empty()) {
        Chart chart;
        chart.domain = strat.strata[0];
        atlas.charts.push_back(std::move(chart));
    }

    for (int r = strat.max_rank; r >= 1; --r) {
        auto it = strat.bases.find(r);
        if (it == strat.bases.end()) continue;
        for (const StratumPiece& piece : it->second) {
            std::vector<int> remaining = piece.points;
            while (!remaining.empty()) {
                const MinorResult minor =
                    find_nonsingular_minor(table, remaining, piece.basis, eps_floor);
                if (!minor.found)
                    throw ViolationError("atlas_minor_not_found",
                                         "no generator subset clears the determinant floor "
                                         "(tau and eps_floor inconsistent)",
                                         {{"rank", std::to_string(r)},
                                          {"piece_first_point", std::to_string(remaining.front())},
                                          {"remaining", std::to_string(remaining.size())}});
                DualBasisRecord rec = dual_basis(derivations, generators, table, minor, eps_floor);
                Chart chart;
                chart.domain = minor.points;
                chart.functions = minor.generators;
                chart.dual_record = static_cast<int>(atlas.duals.size());
                atlas.duals.push_back(std::move(rec));
                atlas.charts.push_back(std::move(chart));
                atlas.dimension = std::max(atlas.dimension, r);

                std::vector<int> rest;
                rest.reserve(remaining.size() - minor.points.size());
                std::set_difference(remaining.begin(), remaining.end(), minor.points.begin(),
                                    minor.points.end(), std::back_inserter(rest));
                remaining = std::move(rest);
            }
        }
    }
    return atlas;
}

DimensionProbeReport dimension_probe(const std::vector<Derivation>& derivations,
                                     const std::vector<ScalarField>& candidates, double tau,
                                     const ResolutionContext& ctx, int sphere_samples) {
    if (candidates.empty()) throw std::invalid_argument("dimension_probe: no candidate fields");
    const int m = static_cast<int>(candidates.size());
    const int n = ctx.space().size();
    if (sphere_samples <= 0) sphere_samples = 64 * m;

    DimensionProbeReport rep;
    rep.declined = m <= static_cast<int>(derivations.size());
    rep.dependent.assign(n, 0);

    std::vector<const ScalarField*> fields;
    for (const ScalarField& f : candidates) fields.push_back(&f);
#pragma omp parallel for schedule(dynamic, 16)
    for (int x = 0; x < n; ++x) {
        const IndependenceResult res = independence_test(ctx, fields, x, tau, sphere_samples);
        rep.dependent[x] = res.independent ? 0 : 1;
    }
    int count = 0;
    for (int x = 0; x < n; ++x) count += rep.dependent[x];
    rep.dependent_fraction = static_cast<double>(count) / n;

    // Kernel witnesses where the transposed table has corank exactly one.
    if (!derivations.empty()) {
        const ComponentTable t = transpose_table(component_table(derivations, candidates));
        const std::vector<int> ranks = pointwise_ranks(t, tau > 0.0 && tau < 1.0 ? tau : 1e-6);
        for (int x = 0; x < n; ++x)
            if (ranks[x] == m - 1) rep.witness_domain.push_back(x);
        if (!rep.witness_domain.empty())
            rep.witnesses = kernel_select(t, rep.witness_domain, tau > 0.0 && tau < 1.0 ? tau : 1e-6);
    }
    return rep;
}

} // namespace mc
