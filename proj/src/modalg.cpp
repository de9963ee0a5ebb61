#include "metriccalc/modalg.hpp"
#include "metriccalc/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace mc {

namespace {

using Matrix = Eigen::MatrixXd;
using ConstMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

ConstMap point_matrix(const ComponentTable& t, int x) {
    return ConstMap(t.block(x), t.n_derivations, t.n_generators);
}

int rank_of(const Matrix& m, double tau, double sigma_ref = -1.0) {
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0) return 0;
    const double ref = sigma_ref > 0.0 ? sigma_ref : sv(0);
    if (ref == 0.0) return 0;
    int r = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > tau * ref) ++r;
    return r;
}

} // namespace

int pointwise_rank(const ComponentTable& table, int x, double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("pointwise_rank: tau must lie in (0,1)");
    return rank_of(point_matrix(table, x), tau);
}

std::vector<int> pointwise_ranks(const ComponentTable& table, double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("pointwise_ranks: tau must lie in (0,1)");
    std::vector<int> r(table.n_points);
#pragma omp parallel for schedule(static)
    for (int x = 0; x < table.n_points; ++x) r[x] = rank_of(point_matrix(table, x), tau);
    return r;
}

KernelSelection kernel_select(const ComponentTable& table, const std::vector<int>& domain, double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("kernel_select: tau must lie in (0,1)");
    const int m = table.n_derivations;
    KernelSelection sel;
    sel.domain = domain;
    sel.lambda.resize(domain.size());
    sel.pivot.resize(domain.size());
    sel.last_in_span.resize(domain.size());

    double max_residual = 0.0;
#pragma omp parallel for schedule(static) reduction(max : max_residual)
    for (std::int64_t di = 0; di < static_cast<std::int64_t>(domain.size()); ++di) {
        const int x = domain[di];
        const Matrix v = point_matrix(table, x);
        const int r = rank_of(v, tau);
        if (r != m - 1) {
            // Witness surfaced after the loop; record and skip.
            sel.lambda[di].clear();
            sel.pivot[di] = -1;
            continue;
        }
        Eigen::VectorXd u;
        if (v.isZero(0.0)) {
            u = Eigen::VectorXd::Zero(m);
            u(0) = 1.0; // M = 1, V_1 = 0: kernel is all of R^1
        } else {
            Eigen::JacobiSVD<Matrix> svd(v, Eigen::ComputeFullU);
            u = svd.matrixU().col(m - 1);
        }
        int pivot = 0;
        for (int i = 1; i < m; ++i)
            if (std::abs(u(i)) > std::abs(u(pivot))) pivot = i;
        const double piv = u(pivot);
        std::vector<double> lam(m);
        for (int i = 0; i < m; ++i) lam[i] = u(i) / piv;
        lam[pivot] = 1.0;

        double rownorm = 0.0;
        for (int i = 0; i < m; ++i) rownorm = std::max(rownorm, v.row(i).norm());
        Eigen::VectorXd comb = Eigen::VectorXd::Zero(table.n_generators);
        for (int i = 0; i < m; ++i) comb += lam[i] * v.row(i).transpose();
        if (rownorm > 0.0) max_residual = std::max(max_residual, comb.norm() / rownorm);

        // Strengthening hypothesis: dropping the last row keeps the rank.
        bool last_in_span = false;
        if (m >= 2) {
            Eigen::JacobiSVD<Matrix> ref(v);
            last_in_span = rank_of(v.topRows(m - 1), tau, ref.singularValues()(0)) == m - 1;
        }
        sel.lambda[di] = std::move(lam);
        sel.pivot[di] = pivot;
        sel.last_in_span[di] = last_in_span ? 1 : 0;
    }
    for (std::size_t di = 0; di < domain.size(); ++di) {
        if (sel.pivot[di] < 0)
            throw ViolationError("kernel_rank_mismatch", "pointwise rank is not M-1 on the domain",
                                 {{"point", std::to_string(domain[di])},
                                  {"expected_rank", std::to_string(m - 1)}});
    }
    sel.max_residual = max_residual;
    return sel;
}

Stratification stratify(const std::vector<Derivation>& derivations,
                        const std::vector<ScalarField>& generators, double tau) {
    return stratify(component_table(derivations, generators), tau);
}

Stratification stratify(const ComponentTable& table, double tau) {
    Stratification s;
    s.rank = pointwise_ranks(table, tau);
    const int nder = table.n_derivations;
    s.strata.assign(nder + 1, {});
    for (int x = 0; x < table.n_points; ++x) {
        s.strata[s.rank[x]].push_back(x);
        s.max_rank = std::max(s.max_rank, s.rank[x]);
    }

    // Greedy per-point basis selection in derivation-index order; points
    // sharing a selection form a piece (the finite form of the countable
    // partition in the freeness proof).
    std::vector<std::vector<int>> signature(table.n_points);
#pragma omp parallel for schedule(static)
    for (int x = 0; x < table.n_points; ++x) {
        if (s.rank[x] == 0) continue;
        const Matrix full = point_matrix(table, x);
        Eigen::JacobiSVD<Matrix> ref(full);
        const double sigma_ref = ref.singularValues()(0);
        std::vector<int> chosen;
        for (int i = 0; i < nder && static_cast<int>(chosen.size()) < s.rank[x]; ++i) {
            std::vector<int> trial = chosen;
            trial.push_back(i);
            Matrix sub(trial.size(), table.n_generators);
            for (std::size_t t = 0; t < trial.size(); ++t) sub.row(t) = full.row(trial[t]);
            if (rank_of(sub, tau, sigma_ref) == static_cast<int>(trial.size())) chosen = std::move(trial);
        }
        signature[x] = std::move(chosen);
    }

    for (int r = 1; r <= nder; ++r) {
        if (s.strata[r].empty()) continue;
        std::map<std::vector<int>, std::vector<int>> groups;
        for (int x : s.strata[r]) groups[signature[x]].push_back(x);
        std::vector<StratumPiece> pieces;
        for (auto& [sig, pts] : groups) pieces.push_back({std::move(pts), sig});
        std::sort(pieces.begin(), pieces.end(),
                  [](const StratumPiece& a, const StratumPiece& b) { return a.points[0] < b.points[0]; });
        s.bases[r] = std::move(pieces);
    }
    return s;
}

namespace {

MinorResult try_subset(const ComponentTable& table, const std::vector<int>& domain,
                       const std::vector<int>& rows, const std::vector<int>& gens, double eps_floor) {
    const int n = static_cast<int>(rows.size());
    MinorResult res;
    res.rows = rows;
    res.generators = gens;
    for (int x : domain) {
        Matrix b(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) b(i, j) = table.at(x, rows[i], gens[j]);
        double scale = 1.0;
        for (int i = 0; i < n; ++i) scale *= b.row(i).norm();
        if (scale > 0.0 && std::abs(b.determinant()) >= eps_floor * scale) res.points.push_back(x);
    }
    res.found = !res.points.empty();
    return res;
}

} // namespace

MinorResult find_nonsingular_minor(const ComponentTable& table, const std::vector<int>& domain,
                                   const std::vector<int>& rows, double eps_floor) {
    const int n = static_cast<int>(rows.size());
    if (n < 1 || n > table.n_derivations)
        throw std::invalid_argument("find_nonsingular_minor: bad target size");
    const int m = table.n_generators;
    if (n > m) return {};

    // Doubling prefix blocks over the generator list; inside a block,
    // subsets in lexicographic index order, skipping ones already tried.
    int prev_limit = 0;
    for (int limit = std::min(n, m);; limit = std::min(2 * limit, m)) {
        std::vector<int> comb(n);
        for (int i = 0; i < n; ++i) comb[i] = i;
        while (true) {
            if (comb.back() >= prev_limit) { // at least one new generator
                MinorResult res = try_subset(table, domain, rows, comb, eps_floor);
                if (res.found) return res;
            }
            int i = n - 1;
            while (i >= 0 && comb[i] == limit - n + i) --i;
            if (i < 0) break;
            ++comb[i];
            for (int j = i + 1; j < n; ++j) comb[j] = comb[j - 1] + 1;
        }
        if (limit == m) break;
        prev_limit = limit;
    }
    return {};
}

MinorResult find_nonsingular_minor(const ComponentTable& table, const std::vector<int>& domain, int n,
                                   double eps_floor) {
    std::vector<int> rows(n);
    for (int i = 0; i < n; ++i) rows[i] = i;
    return find_nonsingular_minor(table, domain, rows, eps_floor);
}

DualBasisRecord dual_basis(const std::vector<Derivation>& derivations,
                           const std::vector<ScalarField>& generators, const ComponentTable& table,
                           const MinorResult& minor, double eps_floor) {
    if (!minor.found) throw std::invalid_argument("dual_basis: minor not found");
    const int n = static_cast<int>(minor.rows.size());
    const Space& space = derivations.front().space();

    DualBasisRecord rec;
    rec.rows = minor.rows;
    rec.generators = minor.generators;
    rec.domain = minor.points;
    rec.eps_floor = eps_floor;

    std::vector<std::vector<double>> coeff(n * n, std::vector<double>(space.size(), 0.0));
    double max_inv_err = 0.0;
    for (int x : minor.points) {
        Matrix b(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) b(i, j) = table.at(x, minor.rows[i], minor.generators[j]);
        double scale = 1.0;
        for (int i = 0; i < n; ++i) scale *= b.row(i).norm();
        if (!(std::abs(b.determinant()) >= eps_floor * scale))
            throw ViolationError("determinant_below_floor", "det B(x) fell below the floor on V",
                                 {{"point", std::to_string(x)},
                                  {"det", std::to_string(b.determinant())}});
        const Matrix a = b.inverse();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) coeff[i * n + j][x] = a(i, j);
        max_inv_err = std::max(max_inv_err, (a * b - Matrix::Identity(n, n)).cwiseAbs().maxCoeff());
    }
    rec.max_inverse_error = max_inv_err;

    rec.coeff.reserve(n * n);
    for (auto& c : coeff) rec.coeff.emplace_back(space, std::move(c));

    std::vector<Derivation> base;
    base.reserve(n);
    for (int i : minor.rows) base.push_back(derivations[i]);
    for (int i = 0; i < n; ++i) {
        std::vector<ScalarField> lam(rec.coeff.begin() + i * n, rec.coeff.begin() + (i + 1) * n);
        rec.duals.push_back(combine(lam, base));
    }

    double max_delta = 0.0;
    for (int x : minor.points)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double v = rec.duals[i].apply_at(generators[minor.generators[j]], x);
                max_delta = std::max(max_delta, std::abs(v - (i == j ? 1.0 : 0.0)));
            }
    rec.max_delta_error = max_delta;
    return rec;
}

} // namespace mc
