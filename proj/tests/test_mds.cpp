#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "metriccalc/mds.hpp"
#include "oracles.hpp"

#include <cmath>
#include <random>

using namespace mc;

namespace {

ScalarField coordinate_field(const Space& s, int axis) {
    std::vector<double> v(s.size());
    for (int i = 0; i < s.size(); ++i) v[i] = s.coord(i, axis);
    return {s, std::move(v)};
}

struct GridSetup {
    Space space;
    double h;
    std::vector<Derivation> derivations;
    std::vector<ScalarField> generators; // (x, y)
    ScaleLadder ladder;
    ResolutionContext ctx;

    explicit GridSetup(int side)
        : space(make_grid(2, side, 1.0)),
          h(1.0 / (side - 1)),
          ladder(ScaleLadder::geometric(space.diameter() / 4.0, 0.5, 2.0 / (side - 1))),
          ctx(space, ladder) {
        derivations.push_back(make_axis_derivation(space, 0, h));
        derivations.push_back(make_axis_derivation(space, 1, h));
        generators.push_back(coordinate_field(space, 0));
        generators.push_back(coordinate_field(space, 1));
    }

    std::vector<int> all_points() const {
        std::vector<int> v(space.size());
        for (int i = 0; i < space.size(); ++i) v[i] = i;
        return v;
    }
};

} // namespace

TEST_CASE("partial derivatives of a chart function are delta with zero residual") {
    GridSetup gs(17);
    const std::vector<int> domain = gs.all_points();
    const PartialDerivativeTable lsq = partial_derivatives_lsq(gs.generators[0], gs.generators,
                                                               {0, 1}, domain, 4.0 * gs.h, gs.ctx);
    const Atlas atlas = build_atlas(gs.generators, gs.derivations, 1e-6, 1e-3, gs.ctx);
    REQUIRE(atlas.charts.size() == 1);
    const PartialDerivativeTable dual =
        partial_derivatives_dual(gs.generators[0], gs.generators, atlas.duals[0], gs.ctx);
    for (std::size_t di = 0; di < domain.size(); ++di) {
        CHECK(lsq.at(di, 0) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(std::abs(lsq.at(di, 1)) <= 1e-9);
        CHECK(lsq.residual[di] <= 1e-8);
        CHECK(dual.at(di, 0) == doctest::Approx(1.0).epsilon(1e-11));
        CHECK(std::abs(dual.at(di, 1)) <= 1e-11);
        CHECK(dual.residual[di] <= 1e-10);
    }
}

TEST_CASE("partial derivatives of a linear field are its coefficients, both methods") {
    GridSetup gs(17);
    std::vector<double> v(gs.space.size());
    for (int i = 0; i < gs.space.size(); ++i)
        v[i] = 3.0 * gs.space.coord(i, 0) - 2.0 * gs.space.coord(i, 1);
    const ScalarField f(gs.space, std::move(v));
    const std::vector<int> domain = gs.all_points();

    const PartialDerivativeTable lsq =
        partial_derivatives_lsq(f, gs.generators, {0, 1}, domain, 4.0 * gs.h, gs.ctx);
    const Atlas atlas = build_atlas(gs.generators, gs.derivations, 1e-6, 1e-3, gs.ctx);
    const PartialDerivativeTable dual =
        partial_derivatives_dual(f, gs.generators, atlas.duals[0], gs.ctx);
    for (std::size_t di = 0; di < domain.size(); ++di) {
        CHECK(lsq.at(di, 0) == doctest::Approx(3.0).epsilon(1e-8));
        CHECK(lsq.at(di, 1) == doctest::Approx(-2.0).epsilon(1e-8));
        CHECK(dual.at(di, 0) == doctest::Approx(3.0).epsilon(1e-8));
        CHECK(dual.at(di, 1) == doctest::Approx(-2.0).epsilon(1e-8));
        CHECK(lsq.residual[di] <= 1e-8);
        CHECK(dual.residual[di] <= 1e-8);
    }
}

TEST_CASE("lsq partial derivative of x^2 tracks the analytic slope") {
    GridSetup gs(33);
    std::vector<double> v(gs.space.size());
    for (int i = 0; i < gs.space.size(); ++i) v[i] = gs.space.coord(i, 0) * gs.space.coord(i, 0);
    const ScalarField f(gs.space, std::move(v));
    const int x0 = grid_index(2, 33, {16, 16}); // (0.5, 0.5)
    const double r = 4.0 * gs.h;
    const PartialDerivativeTable pd =
        partial_derivatives_lsq(f, gs.generators, {0, 1}, {x0}, r, gs.ctx);
    CHECK(std::abs(pd.at(0, 0) - 1.0) <= r + gs.h); // d/dx x^2 at 0.5
    CHECK(std::abs(pd.at(0, 1)) <= 1e-9);
}

TEST_CASE("lsq and dual methods agree on a smooth corpus") {
    GridSetup gs(33);
    const Atlas atlas = build_atlas(gs.generators, gs.derivations, 1e-6, 1e-3, gs.ctx);
    std::vector<ScalarField> corpus;
    for (auto [a, b] : {std::pair{1.0, 0.5}, {0.3, -2.0}}) {
        std::vector<double> v(gs.space.size());
        for (int i = 0; i < gs.space.size(); ++i) {
            const double x = gs.space.coord(i, 0), y = gs.space.coord(i, 1);
            v[i] = a * x * x + b * x * y;
        }
        corpus.emplace_back(gs.space, std::move(v));
    }
    const std::vector<int> domain = gs.all_points();
    for (const ScalarField& f : corpus) {
        const PartialDerivativeTable lsq =
            partial_derivatives_lsq(f, gs.generators, {0, 1}, domain, 4.0 * gs.h, gs.ctx);
        const PartialDerivativeTable dual =
            partial_derivatives_dual(f, gs.generators, atlas.duals[0], gs.ctx);
        // Second differences of the corpus are O(1); methods differ by
        // O(reach + radius).
        const double bound = 10.0 * (gs.derivations[0].reach() + 4.0 * gs.h) * 4.0;
        for (std::size_t di = 0; di < domain.size(); ++di)
            for (int j = 0; j < 2; ++j) CHECK(std::abs(lsq.at(di, j) - dual.at(di, j)) <= bound);
    }
}

TEST_CASE("cotangent norms") {
    GridSetup gs(33);
    CHECK(cot_norm(gs.ctx, gs.generators, {0, 1}, {0.0, 0.0}, 5) == 0.0);

    const int mid = grid_index(2, 33, {16, 16});
    const double n11 = cot_norm(gs.ctx, gs.generators, {0, 1}, {1.0, 1.0}, mid);
    CHECK(std::abs(n11 - std::sqrt(2.0)) / std::sqrt(2.0) <= 0.05);
    const double n10 = cot_norm(gs.ctx, gs.generators, {0, 1}, {1.0, 0.0}, mid);
    CHECK(n10 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cot_norm of the differential matches the upper Lipschitz field") {
    GridSetup gs(33);
    const Atlas atlas = build_atlas(gs.generators, gs.derivations, 1e-6, 1e-3, gs.ctx);
    std::vector<double> v(gs.space.size());
    for (int i = 0; i < gs.space.size(); ++i) {
        const double x = gs.space.coord(i, 0), y = gs.space.coord(i, 1);
        v[i] = x * x + y * y;
    }
    const ScalarField f(gs.space, std::move(v));
    const PartialDerivativeTable pd = partial_derivatives_dual(f, gs.generators, atlas.duals[0], gs.ctx);
    const CotangentField df = differential(pd);
    // ||df||(x) tracks Lip f(x) within the chart tolerance
    // (1e-3 + 2 * ladder floor * second-difference bound, here f'' = 2).
    const double tol = 1e-3 + 2.0 * gs.ladder.floor() * 2.0;
    for (std::size_t di = 0; di < df.domain.size(); ++di) {
        const int x = df.domain[di];
        std::vector<double> coeff(df.coeff.begin() + di * 2, df.coeff.begin() + di * 2 + 2);
        const double nd = cot_norm(gs.ctx, gs.generators, df.functions, coeff, x);
        const double lip = gs.ctx.upper_at(f, x);
        CHECK(std::abs(nd - lip) <= tol);
    }
}

TEST_CASE("sobolev norm") {
    GridSetup gs(33);
    const Atlas atlas = build_atlas(gs.generators, gs.derivations, 1e-6, 1e-3, gs.ctx);

    const SobolevNorm zero = sobolev_norm(ScalarField(gs.space, 0.0), atlas, gs.generators, 2.0, gs.ctx);
    CHECK(zero.value == 0.0);

    const SobolevNorm cnst = sobolev_norm(ScalarField(gs.space, -1.5), atlas, gs.generators, 2.0, gs.ctx);
    CHECK(cnst.value == doctest::Approx(1.5).epsilon(1e-12));

    const SobolevNorm fx = sobolev_norm(gs.generators[0], atlas, gs.generators, 2.0, gs.ctx);
    CHECK(std::abs(fx.value - (1.0 / std::sqrt(3.0) + 1.0)) / (1.0 / std::sqrt(3.0) + 1.0) <= 0.02);

    // Norm axioms on random triples at fixed atlas and p.
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 5; ++t) {
        std::vector<double> a(gs.space.size()), b(gs.space.size());
        for (int i = 0; i < gs.space.size(); ++i) {
            a[i] = u(rng);
            b[i] = u(rng);
        }
        const ScalarField fa(gs.space, a), fb(gs.space, b);
        std::vector<double> sum(gs.space.size());
        for (int i = 0; i < gs.space.size(); ++i) sum[i] = a[i] + b[i];
        const ScalarField fsum(gs.space, std::move(sum));
        const double na = sobolev_norm(fa, atlas, gs.generators, 2.0, gs.ctx).value;
        const double nb = sobolev_norm(fb, atlas, gs.generators, 2.0, gs.ctx).value;
        const double ns = sobolev_norm(fsum, atlas, gs.generators, 2.0, gs.ctx).value;
        CHECK(ns <= na + nb + 1e-10);
        std::vector<double> scaled(gs.space.size());
        for (int i = 0; i < gs.space.size(); ++i) scaled[i] = 2.0 * a[i];
        const double n2 = sobolev_norm(ScalarField(gs.space, std::move(scaled)), atlas, gs.generators,
                                       2.0, gs.ctx)
                              .value;
        CHECK(n2 == doctest::Approx(2.0 * na).epsilon(1e-10));
    }
}

TEST_CASE("sobolev norm rejects uncovered points and zeroes 0-dim charts") {
    const Space g = make_grid(1, 9, 1.0);
    const ResolutionContext ctx(g, ScaleLadder::for_space(g));
    const std::vector<ScalarField> gens = {coordinate_field(g, 0)};

    Atlas partial;
    Chart c0;
    c0.domain = {0, 1, 2}; // leaves the rest uncovered
    partial.charts.push_back(c0);
    CHECK_THROWS_AS(sobolev_norm(gens[0], partial, gens, 2.0, ctx), std::invalid_argument);

    // All points in a 0-dimensional chart: the differential term vanishes.
    const Atlas zerodim = build_atlas(gens, {}, 1e-6, 1e-3, ctx);
    const SobolevNorm n = sobolev_norm(gens[0], zerodim, gens, 2.0, ctx);
    CHECK(n.dlp_term == 0.0);
    CHECK(n.value == n.lp_term);
}

TEST_CASE("representation residual") {
    GridSetup gs(33);
    const std::vector<int> domain = gs.all_points();

    // Chart function: delta structure, residual ~ 0.
    const PartialDerivativeTable pdx =
        partial_derivatives_lsq(gs.generators[0], gs.generators, {0, 1}, domain, 4.0 * gs.h, gs.ctx);
    const RepresentationResidual r0 =
        representation_residual(gs.derivations[0], gs.generators[0], gs.generators, pdx);
    CHECK(r0.max_abs <= 1e-10);

    // Linear field: exact linearity.
    std::vector<double> lin(gs.space.size());
    for (int i = 0; i < gs.space.size(); ++i)
        lin[i] = 2.0 * gs.space.coord(i, 0) + 5.0 * gs.space.coord(i, 1);
    const ScalarField flin(gs.space, std::move(lin));
    const PartialDerivativeTable pdlin =
        partial_derivatives_lsq(flin, gs.generators, {0, 1}, domain, 4.0 * gs.h, gs.ctx);
    const RepresentationResidual r1 =
        representation_residual(gs.derivations[0], flin, gs.generators, pdlin);
    CHECK(r1.max_abs <= 1e-8);

    // f = x^2: Taylor-scale residual.
    std::vector<double> sq(gs.space.size());
    for (int i = 0; i < gs.space.size(); ++i) sq[i] = gs.space.coord(i, 0) * gs.space.coord(i, 0);
    const ScalarField fsq(gs.space, std::move(sq));
    const PartialDerivativeTable pdsq =
        partial_derivatives_lsq(fsq, gs.generators, {0, 1}, domain, 4.0 * gs.h, gs.ctx);
    const RepresentationResidual r2 =
        representation_residual(gs.derivations[0], fsq, gs.generators, pdsq);
    CHECK(r2.max_abs <= 4.5 * gs.h); // boundary one-sided lsq bias scales with h
}

TEST_CASE("inequality report") {
    GridSetup gs(17);

    // Degenerate corpus.
    const InequalityReport deg = inequality_report(gs.derivations, {ScalarField(gs.space, 1.0)}, gs.ctx);
    CHECK(deg.degenerate_corpus);

    // Linear corpus: fitted lambda >= 1/sqrt(2) (max(|a|,|b|) >= |(a,b)|/sqrt(2)).
    std::vector<ScalarField> corpus;
    for (auto [a, b] : {std::pair{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}, {2.0, -1.0}, {0.3, 0.7}}) {
        std::vector<double> v(gs.space.size());
        for (int i = 0; i < gs.space.size(); ++i)
            v[i] = a * gs.space.coord(i, 0) + b * gs.space.coord(i, 1);
        corpus.emplace_back(gs.space, std::move(v));
    }
    const InequalityReport rep = inequality_report(gs.derivations, corpus, gs.ctx);
    CHECK_FALSE(rep.degenerate_corpus);
    CHECK(rep.min_lambda >= 1.0 / std::sqrt(2.0) - 0.05);
    for (const auto& v : rep.upper_violations) CHECK_FALSE(v.within_reach);
    CHECK(rep.reverse_violations.empty());

    // 1-D: single axis derivation on the coordinate gives ratio 1.
    const Space line = make_grid(1, 33, 1.0);
    const ResolutionContext lctx(line, ScaleLadder::for_space(line));
    const InequalityReport lrep = inequality_report({make_axis_derivation(line, 0, 1.0 / 32.0)},
                                                    {coordinate_field(line, 0)}, lctx);
    CHECK(lrep.min_lambda == doctest::Approx(1.0).epsilon(1e-10));

    // Given-lambda mode: lambda = 1/2 passes on the linear corpus.
    const ScalarField half(gs.space, 0.5);
    const InequalityReport given = inequality_report(gs.derivations, corpus, gs.ctx, &half);
    CHECK(given.given_violations.empty());
    const ScalarField two(gs.space, 2.0);
    const InequalityReport fail = inequality_report(gs.derivations, corpus, gs.ctx, &two);
    CHECK_FALSE(fail.given_violations.empty());
}

TEST_CASE("build_atlas from corner landmarks covers the grid in dimension 2") {
    const Space g = make_grid(2, 33, 1.0);
    const double h = 1.0 / 32.0;
    const ScaleLadder lad = ScaleLadder::geometric(g.diameter() / 4.0, 0.5, 2.0 * h);
    const ResolutionContext ctx(g, lad);
    std::vector<Derivation> ds;
    ds.push_back(make_axis_derivation(g, 0, h));
    ds.push_back(make_axis_derivation(g, 1, h));
    const std::vector<int> corners = {grid_index(2, 33, {0, 0}), grid_index(2, 33, {32, 0}),
                                      grid_index(2, 33, {0, 32})};
    const std::vector<ScalarField> gens = landmark_generators(g, corners);
    const Atlas atlas = build_atlas(gens, ds, 1e-6, 1e-3, ctx);

    CHECK(atlas.dimension == 2);
    std::vector<char> covered(g.size(), 0);
    for (const Chart& c : atlas.charts) {
        CHECK(static_cast<int>(c.functions.size()) == 2);
        for (int j : c.functions) CHECK(j < 3);
        for (int x : c.domain) covered[x] = 1;
    }
    for (char c : covered) CHECK(c == 1);

    // Freeness witness: every supplied derivation reconstructs from the
    // duals with coefficients D g'_j.
    const ComponentTable table = component_table(ds, gens);
    const ScalarField probe = gens[2];
    for (const Chart& c : atlas.charts) {
        const DualBasisRecord& rec = atlas.duals[c.dual_record];
        for (std::size_t di = 0; di < ds.size(); ++di) {
            for (int x : c.domain) {
                double recon = 0.0;
                for (std::size_t j = 0; j < rec.generators.size(); ++j)
                    recon += table.at(x, static_cast<int>(di), rec.generators[j]) *
                             rec.duals[j].apply_at(probe, x);
                const double direct = ds[di].apply_at(probe, x);
                CHECK(std::abs(recon - direct) <= 1e-6 * std::max(1.0, std::abs(direct)));
            }
        }
    }
}

TEST_CASE("build_atlas edge cases") {
    const Space g = make_grid(1, 9, 1.0);
    const ResolutionContext ctx(g, ScaleLadder::for_space(g));

    // Zero derivations: a single 0-dimensional chart.
    const Atlas empty = build_atlas({coordinate_field(g, 0)}, {}, 1e-6, 1e-3, ctx);
    REQUIRE(empty.charts.size() == 1);
    CHECK(empty.dimension == 0);
    CHECK(empty.charts[0].functions.empty());
    CHECK(static_cast<int>(empty.charts[0].domain.size()) == g.size());

    // 1-D grid with the coordinate generator: one chart, N = 1, derivative
    // recovered.
    const Derivation dx = make_axis_derivation(g, 0, 1.0 / 8.0);
    const Atlas one = build_atlas({coordinate_field(g, 0)}, {dx}, 1e-6, 1e-3, ctx);
    CHECK(one.dimension == 1);
    std::vector<double> sq(g.size());
    for (int i = 0; i < g.size(); ++i) sq[i] = g.coord(i, 0) * g.coord(i, 0);
    const ScalarField fsq(g, std::move(sq));
    for (const Chart& c : one.charts) {
        const PartialDerivativeTable pd =
            partial_derivatives_dual(fsq, {coordinate_field(g, 0)}, one.duals[c.dual_record], ctx);
        for (std::size_t di = 0; di < pd.domain.size(); ++di) {
            const double x = g.coord(pd.domain[di], 0);
            CHECK(std::abs(std::abs(pd.at(di, 0)) - 2.0 * x) <= 1.0 / 8.0 + 1e-12);
        }
    }
}

TEST_CASE("dimension probe") {
    const Space g = make_grid(2, 17, 1.0);
    const double h = 1.0 / 16.0;
    const ScaleLadder lad = ScaleLadder::geometric(g.diameter() / 4.0, 0.5, 2.0 * h);
    const ResolutionContext ctx(g, lad);
    std::vector<Derivation> ds;
    ds.push_back(make_axis_derivation(g, 0, h));
    ds.push_back(make_axis_derivation(g, 1, h));

    const ScalarField fx = coordinate_field(g, 0), fy = coordinate_field(g, 1);
    std::vector<double> sum(g.size());
    for (int i = 0; i < g.size(); ++i) sum[i] = fx[i] + fy[i];
    const ScalarField fxy(g, std::move(sum));

    const DimensionProbeReport exact = dimension_probe(ds, {fx, fy, fxy}, 2.0 * h, ctx);
    CHECK_FALSE(exact.declined);
    CHECK(exact.dependent_fraction == 1.0);
    CHECK_FALSE(exact.witness_domain.empty());
    // Witness kernels annihilate the transposed rows.
    CHECK(exact.witnesses.max_residual <= 1e-8);

    std::vector<double> prod(g.size());
    for (int i = 0; i < g.size(); ++i) prod[i] = fx[i] * fy[i];
    const ScalarField fprod(g, std::move(prod));
    const DimensionProbeReport generic = dimension_probe(ds, {fx, fy, fprod}, 2.0 * h, ctx);
    int interior = 0, dep = 0;
    for (int i = 0; i < g.size(); ++i) {
        const double x = g.coord(i, 0), y = g.coord(i, 1);
        if (x == 0.0 || x == 1.0 || y == 0.0 || y == 1.0) continue;
        ++interior;
        dep += generic.dependent[i];
    }
    CHECK(static_cast<double>(dep) / interior >= 0.99);

    // Two fields against two derivations: declines the verdict.
    const DimensionProbeReport declined = dimension_probe(ds, {fx, fy}, 0.1, ctx);
    CHECK(declined.declined);
    CHECK(declined.dependent_fraction == 0.0);
}
