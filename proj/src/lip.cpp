#include "metriccalc/lip.hpp"
#include "metriccalc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mc {

namespace {

struct Pair {
    double dist;
    double absdiff;
};

// |f(x)-f(y)|/d over the collected pairs.
double upper_from_pairs(const std::vector<Pair>& pairs) {
    double best = 0.0;
    for (const Pair& p : pairs) best = std::max(best, p.absdiff / p.dist);
    return best;
}

// inf_{s in [d_1, r]} M(s)/s with M(s) = max_{d(x,y) <= s} |f(x)-f(y)|,
// pairs sorted by distance ascending, all distances <= r.
double lower_from_pairs(const std::vector<Pair>& pairs, double r) {
    double best = std::numeric_limits<double>::infinity();
    double runmax = 0.0;
    const std::size_t m = pairs.size();
    for (std::size_t i = 0; i < m; ++i) {
        runmax = std::max(runmax, pairs[i].absdiff);
        if (i + 1 < m && pairs[i + 1].dist > pairs[i].dist)
            best = std::min(best, runmax / pairs[i + 1].dist);
    }
    best = std::min(best, runmax / r);
    return best;
}

void check_same_space(const std::vector<const ScalarField*>& fields) {
    for (std::size_t i = 1; i < fields.size(); ++i)
        if (fields[i]->space != fields[0]->space)
            throw std::invalid_argument("fields live on different spaces");
}

} // namespace

ResolutionContext::ResolutionContext(const Space& space, ScaleLadder ladder)
    : space_(&space), ladder_(std::move(ladder)) {
    const int n = space.size();
    scale_.assign(n, 0.0);
    isolated_.assign(n, 0);
    nbrs_.resize(n);
#pragma omp parallel for schedule(static)
    for (int x = 0; x < n; ++x) {
        const double nn = space.nn_dist(x);
        if (!(nn > 0.0) || nn > ladder_.top()) {
            isolated_[x] = 1;
            continue;
        }
        int k = ladder_.levels() - 1;
        while (k >= 0 && ladder_.radii[k] < nn) --k;
        scale_[x] = ladder_.radii[k];
        std::vector<Neighbor>& nb = nbrs_[x];
        for (int y = 0; y < n; ++y) {
            if (y == x) continue;
            const double d = space.dist(x, y);
            if (d <= scale_[x]) nb.push_back({y, d});
        }
        std::sort(nb.begin(), nb.end(), [](const Neighbor& a, const Neighbor& b) {
            return a.dist < b.dist || (a.dist == b.dist && a.point < b.point);
        });
    }
}

double ResolutionContext::upper_at(const ScalarField& f, int x) const {
    double best = 0.0;
    for (const Neighbor& nb : nbrs_[x]) best = std::max(best, std::abs(f[x] - f[nb.point]) / nb.dist);
    return best;
}

double ResolutionContext::upper_combo_at(const std::vector<const ScalarField*>& fields,
                                         const std::vector<double>& coeff, int x) const {
    double best = 0.0;
    for (const Neighbor& nb : nbrs_[x]) {
        double diff = 0.0;
        for (std::size_t i = 0; i < fields.size(); ++i)
            diff += coeff[i] * ((*fields[i])[nb.point] - (*fields[i])[x]);
        best = std::max(best, std::abs(diff) / nb.dist);
    }
    return best;
}

double varlip(const ScalarField& f, int x, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("varlip: radius must be positive");
    const Space& s = *f.space;
    double m = 0.0;
    for (int y = 0; y < s.size(); ++y)
        if (s.dist(x, y) <= r) m = std::max(m, std::abs(f[x] - f[y]));
    return m / r;
}

double local_lipschitz(const ScalarField& f, int x, double r, LipKind kind) {
    const Space& s = *f.space;
    const double floor_scale = s.nn_dist(x);
    if (!(floor_scale > 0.0))
        throw std::invalid_argument("local_lipschitz: point " + std::to_string(x) +
                                    " has no neighbors at any scale");
    if (r < floor_scale)
        throw std::invalid_argument("local_lipschitz: r=" + std::to_string(r) +
                                    " is below the scale floor " + std::to_string(floor_scale) +
                                    " of point " + std::to_string(x));
    std::vector<Pair> pairs;
    for (int y = 0; y < s.size(); ++y) {
        if (y == x) continue;
        const double d = s.dist(x, y);
        if (d <= r) pairs.push_back({d, std::abs(f[x] - f[y])});
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.dist < b.dist; });
    return kind == LipKind::upper ? upper_from_pairs(pairs) : lower_from_pairs(pairs, r);
}

LipProfile lip_profile(const ScalarField& f, const ScaleLadder& ladder) {
    const Space& s = *f.space;
    const int n = s.size();
    LipProfile out;
    out.ladder = ladder;
    out.upper.assign(n, 0.0);
    out.lower.assign(n, 0.0);
    out.isolated.assign(n, 0);
    std::vector<std::vector<LipProfile::Row>> rows(n);

#pragma omp parallel for schedule(dynamic, 16)
    for (int x = 0; x < n; ++x) {
        const double nn = s.nn_dist(x);
        if (!(nn > 0.0) || nn > ladder.top()) {
            out.isolated[x] = 1;
            continue;
        }
        std::vector<Pair> pairs;
        for (int y = 0; y < n; ++y) {
            if (y == x) continue;
            const double d = s.dist(x, y);
            if (d <= ladder.top()) pairs.push_back({d, std::abs(f[x] - f[y])});
        }
        std::sort(pairs.begin(), pairs.end(),
                  [](const Pair& a, const Pair& b) { return a.dist < b.dist; });

        std::vector<Pair> within;
        within.reserve(pairs.size());
        for (int k = 0; k < ladder.levels(); ++k) {
            const double r = ladder.radii[k];
            if (r < nn) break; // scales below are inadmissible at x
            within.clear();
            double maxabs = 0.0;
            for (const Pair& p : pairs)
                if (p.dist <= r) {
                    within.push_back(p);
                    maxabs = std::max(maxabs, p.absdiff);
                }
            LipProfile::Row row;
            row.point = x;
            row.r = r;
            row.varlip = maxabs / r;
            row.upper = upper_from_pairs(within);
            row.lower = lower_from_pairs(within, r);
            rows[x].push_back(row);
        }
        out.upper[x] = rows[x].back().upper;
        out.lower[x] = rows[x].back().lower;
    }

    std::size_t total = 0;
    for (const auto& v : rows) total += v.size();
    out.rows.reserve(total);
    for (const auto& v : rows) out.rows.insert(out.rows.end(), v.begin(), v.end());
    return out;
}

void lip_resolved(const ScalarField& f, const ResolutionContext& ctx, std::vector<double>& upper,
                  std::vector<double>& lower) {
    const int n = ctx.space().size();
    upper.assign(n, 0.0);
    lower.assign(n, 0.0);
#pragma omp parallel for schedule(static)
    for (int x = 0; x < n; ++x) {
        if (ctx.isolated(x)) continue;
        const auto& nbs = ctx.neighbors(x);
        std::vector<Pair> pairs;
        pairs.reserve(nbs.size());
        for (const auto& nb : nbs) pairs.push_back({nb.dist, std::abs(f[x] - f[nb.point])});
        upper[x] = upper_from_pairs(pairs);
        lower[x] = lower_from_pairs(pairs, ctx.scale(x));
    }
}

ScalarField lip_field(const ScalarField& f, LipKind kind, const ScaleLadder& ladder) {
    LipProfile prof = lip_profile(f, ladder);
    return ScalarField(*f.space, kind == LipKind::upper ? std::move(prof.upper) : std::move(prof.lower));
}

double glip(const ScalarField& f) {
    const Space& s = *f.space;
    const int n = s.size();
    double best = 0.0;
#pragma omp parallel for schedule(dynamic, 32) reduction(max : best)
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            best = std::max(best, std::abs(f[i] - f[j]) / s.dist(i, j));
    return best;
}

double lip_norm(const ScalarField& f) {
    double sup = 0.0;
    for (double v : f.values) sup = std::max(sup, std::abs(v));
    return std::max(sup, glip(f));
}

double partial_glip(const Space& space, const std::vector<int>& A, const std::vector<double>& f_on_A) {
    double best = 0.0;
    for (std::size_t i = 0; i < A.size(); ++i)
        for (std::size_t j = i + 1; j < A.size(); ++j)
            best = std::max(best, std::abs(f_on_A[i] - f_on_A[j]) / space.dist(A[i], A[j]));
    return best;
}

ScalarField mcshane_extend(const Space& space, const std::vector<int>& A,
                           const std::vector<double>& f_on_A, double L) {
    if (A.empty()) throw std::invalid_argument("mcshane_extend: empty subset");
    if (A.size() != f_on_A.size()) throw std::invalid_argument("mcshane_extend: data size mismatch");
    for (int a : A)
        if (a < 0 || a >= space.size()) throw std::invalid_argument("mcshane_extend: bad subset index");
    for (std::size_t i = 0; i < A.size(); ++i) {
        for (std::size_t j = i + 1; j < A.size(); ++j) {
            if (A[i] == A[j]) throw std::invalid_argument("mcshane_extend: duplicate subset index");
            const double lip = std::abs(f_on_A[i] - f_on_A[j]) / space.dist(A[i], A[j]);
            if (lip > L * (1.0 + 1e-12))
                throw ViolationError("mcshane_constant_too_small",
                                     "L is below the Lipschitz constant of the data",
                                     {{"a", std::to_string(A[i])},
                                      {"b", std::to_string(A[j])},
                                      {"pair_lip", std::to_string(lip)},
                                      {"L", std::to_string(L)}});
        }
    }
    std::vector<double> g(space.size());
#pragma omp parallel for schedule(static)
    for (int y = 0; y < space.size(); ++y) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < A.size(); ++i)
            best = std::min(best, f_on_A[i] + L * space.dist(A[i], y));
        g[y] = best;
    }
    return ScalarField(space, std::move(g));
}

double independence_seminorm(const ResolutionContext& ctx, const std::vector<const ScalarField*>& fields,
                             const std::vector<double>& lambda, int x) {
    if (fields.empty() || fields.size() != lambda.size())
        throw std::invalid_argument("independence_seminorm: field/coefficient length mismatch");
    check_same_space(fields);
    return ctx.upper_combo_at(fields, lambda, x);
}

namespace {

double halton(int index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * (index % base);
        index /= base;
    }
    return r;
}

} // namespace

std::vector<std::vector<double>> sphere_sample(int dim, int count) {
    std::vector<std::vector<double>> out;
    out.reserve(count);
    if (dim == 1) {
        for (int i = 0; i < count; ++i) out.push_back({i % 2 == 0 ? 1.0 : -1.0});
        return out;
    }
    if (dim == 2) {
        for (int i = 0; i < count; ++i) {
            const double t = 2.0 * M_PI * i / count;
            out.push_back({std::cos(t), std::sin(t)});
        }
        return out;
    }
    static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    const int ngauss = (dim + 1) / 2 * 2;
    for (int i = 1; out.size() < static_cast<std::size_t>(count); ++i) {
        std::vector<double> v(dim);
        for (int p = 0; p < ngauss / 2; ++p) {
            const double u1 = halton(i, primes[(2 * p) % 12]);
            const double u2 = halton(i, primes[(2 * p + 1) % 12]);
            const double rad = std::sqrt(-2.0 * std::log(u1 > 0.0 ? u1 : 0.5));
            const double z1 = rad * std::cos(2.0 * M_PI * u2);
            const double z2 = rad * std::sin(2.0 * M_PI * u2);
            if (2 * p < dim) v[2 * p] = z1;
            if (2 * p + 1 < dim) v[2 * p + 1] = z2;
        }
        double norm = 0.0;
        for (double c : v) norm += c * c;
        norm = std::sqrt(norm);
        if (norm < 1e-12) continue;
        for (double& c : v) c /= norm;
        out.push_back(std::move(v));
    }
    return out;
}

IndependenceResult independence_test(const ResolutionContext& ctx,
                                     const std::vector<const ScalarField*>& fields, int x, double tau,
                                     int sphere_samples) {
    const int m = static_cast<int>(fields.size());
    if (m < 1) throw std::invalid_argument("independence_test: no fields");
    if (sphere_samples < 2 * m)
        throw std::invalid_argument("independence_test: need at least 2*|fields| sphere samples");
    check_same_space(fields);

    IndependenceResult res;
    if (tau > 0.0) {
        res.tau = tau;
    } else {
        double maxlip = 0.0;
        for (const ScalarField* f : fields) maxlip = std::max(maxlip, ctx.upper_at(*f, x));
        res.tau = 1e-3 * maxlip;
    }

    auto phi = [&](const std::vector<double>& lam) { return ctx.upper_combo_at(fields, lam, x); };

    const auto samples = sphere_sample(m, sphere_samples);
    // Best handful of samples seed the local descent.
    const int nstarts = std::min<int>(8, static_cast<int>(samples.size()));
    std::vector<std::pair<double, int>> scored(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) scored[i] = {phi(samples[i]), static_cast<int>(i)};
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    double best_val = scored.front().first;
    std::vector<double> best_vec = samples[scored.front().second];

    for (int s = 0; s < nstarts; ++s) {
        std::vector<double> lam = samples[scored[s].second];
        double val = scored[s].first;
        double step = 0.3;
        for (int sweep = 0; sweep < 20; ++sweep) {
            for (int i = 0; i < m; ++i) {
                for (int sgn = -1; sgn <= 1; sgn += 2) {
                    std::vector<double> cand = lam;
                    cand[i] += sgn * step;
                    double norm = 0.0;
                    for (double c : cand) norm += c * c;
                    norm = std::sqrt(norm);
                    if (norm < 1e-12) continue;
                    for (double& c : cand) c /= norm;
                    const double v = phi(cand);
                    if (v < val) {
                        val = v;
                        lam = std::move(cand);
                    }
                }
            }
            step *= 0.65;
        }
        if (val < best_val) {
            best_val = val;
            best_vec = lam;
        }
    }

    res.min_value = best_val;
    res.argmin = std::move(best_vec);
    res.independent = best_val > res.tau;
    return res;
}

} // namespace mc
