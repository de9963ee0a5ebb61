#include "metriccalc/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mc::reference {

double glip(const ScalarField& f) {
    const Space& s = *f.space;
    double best = 0.0;
    for (int i = 0; i < s.size(); ++i)
        for (int j = i + 1; j < s.size(); ++j)
            best = std::max(best, std::abs(f[i] - f[j]) / s.dist(i, j));
    return best;
}

void lip_resolved(const ScalarField& f, const ScaleLadder& ladder, std::vector<double>& upper,
                  std::vector<double>& lower) {
    const Space& s = *f.space;
    const int n = s.size();
    upper.assign(n, 0.0);
    lower.assign(n, 0.0);
    for (int x = 0; x < n; ++x) {
        const double nn = s.nn_dist(x);
        if (!(nn > 0.0) || nn > ladder.top()) continue; // isolated at resolution

        double scale = 0.0;
        for (double r : ladder.radii)
            if (r >= nn) scale = r;

        std::vector<std::pair<double, double>> pairs; // (distance, |f(x)-f(y)|)
        for (int y = 0; y < n; ++y) {
            if (y == x) continue;
            const double d = s.dist(x, y);
            if (d <= scale) pairs.push_back({d, std::abs(f[x] - f[y])});
        }
        std::sort(pairs.begin(), pairs.end());

        double up = 0.0;
        for (const auto& [d, a] : pairs) up = std::max(up, a / d);
        upper[x] = up;

        double lo = std::numeric_limits<double>::infinity();
        double runmax = 0.0;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            runmax = std::max(runmax, pairs[i].second);
            if (i + 1 < pairs.size() && pairs[i + 1].first > pairs[i].first)
                lo = std::min(lo, runmax / pairs[i + 1].first);
        }
        lo = std::min(lo, runmax / scale);
        lower[x] = lo;
    }
}

ComponentTable component_table(const std::vector<Derivation>& derivations,
                               const std::vector<ScalarField>& generators) {
    ComponentTable t;
    t.n_derivations = static_cast<int>(derivations.size());
    t.n_generators = static_cast<int>(generators.size());
    t.n_points = derivations.front().space().size();
    t.values.assign(static_cast<std::size_t>(t.n_points) * t.n_derivations * t.n_generators, 0.0);
    for (int x = 0; x < t.n_points; ++x)
        for (int i = 0; i < t.n_derivations; ++i)
            for (int k = 0; k < t.n_generators; ++k)
                t.values[(static_cast<std::size_t>(x) * t.n_derivations + i) * t.n_generators + k] =
                    derivations[i].apply_at(generators[k], x);
    return t;
}

ScalarField mcshane_extend(const Space& space, const std::vector<int>& A,
                           const std::vector<double>& f_on_A, double L) {
    std::vector<double> g(space.size());
    for (int y = 0; y < space.size(); ++y) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < A.size(); ++i)
            best = std::min(best, f_on_A[i] + L * space.dist(A[i], y));
        g[y] = best;
    }
    return ScalarField(space, std::move(g));
}

} // namespace mc::reference
