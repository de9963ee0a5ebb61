#include "metriccalc/space.hpp"
#include "metriccalc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace mc {

namespace {

double euclid(const double* a, const double* b, int dim) {
    double s = 0.0;
    for (int k = 0; k < dim; ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return std::sqrt(s);
}

std::string num(double v) { return std::to_string(v); }

} // namespace

void Space::check_point(int i, const char* what) const {
    if (i < 0 || i >= n_)
        throw std::invalid_argument(std::string(what) + ": point index " + std::to_string(i) +
                                    " out of range [0," + std::to_string(n_) + ")");
}

double Space::rule_dist(int i, int j) const {
    const double d = euclid(&coords_[static_cast<std::size_t>(i) * dim_],
                            &coords_[static_cast<std::size_t>(j) * dim_], dim_);
    return alpha_ == 1.0 ? d : std::pow(d, alpha_);
}

Space Space::from_matrix(std::vector<double> dist, std::vector<double> weights,
                         std::vector<std::string> labels) {
    const int n = static_cast<int>(weights.size());
    if (n == 0) throw std::invalid_argument("space: empty point set");
    if (dist.size() != static_cast<std::size_t>(n) * n)
        throw std::invalid_argument("space: distance matrix size mismatch");
    Space s;
    s.n_ = n;
    s.weights_ = std::move(weights);
    s.labels_ = std::move(labels);
    s.dist_ = std::move(dist);
    s.finalize();
    return s;
}

Space Space::from_coords(std::vector<double> coords, int dim, std::vector<double> weights,
                         double snowflake_alpha, std::vector<std::string> labels) {
    const int n = static_cast<int>(weights.size());
    if (n == 0) throw std::invalid_argument("space: empty point set");
    if (dim < 1 || coords.size() != static_cast<std::size_t>(n) * dim)
        throw std::invalid_argument("space: coordinate array size mismatch");
    if (snowflake_alpha <= 0.0 || snowflake_alpha > 1.0)
        throw std::invalid_argument("space: snowflake exponent must lie in (0,1]");
    Space s;
    s.n_ = n;
    s.weights_ = std::move(weights);
    s.labels_ = std::move(labels);
    s.coords_ = std::move(coords);
    s.dim_ = dim;
    s.alpha_ = snowflake_alpha;
    if (n <= kMatrixLimit) {
        s.dist_.assign(static_cast<std::size_t>(n) * n, 0.0);
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                s.dist_[static_cast<std::size_t>(i) * n + j] = s.rule_dist(i, j);
    }
    s.finalize();
    return s;
}

void Space::finalize() {
    for (int i = 0; i < n_; ++i) {
        if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i]))
            throw ViolationError("nonpositive_weight", "weight must be strictly positive",
                                 {{"point", std::to_string(i)}, {"weight", num(weights_[i])}});
    }
    if (!labels_.empty() && labels_.size() != static_cast<std::size_t>(n_))
        throw std::invalid_argument("space: label count mismatch");
    total_weight_ = 0.0;
    for (int i = 0; i < n_; ++i) total_weight_ += weights_[i];

    if (!dist_.empty()) {
        for (int i = 0; i < n_; ++i) {
            if (dist_[static_cast<std::size_t>(i) * n_ + i] != 0.0)
                throw ViolationError("nonzero_diagonal", "d(i,i) must be 0",
                                     {{"point", std::to_string(i)}});
            for (int j = i + 1; j < n_; ++j) {
                const double dij = dist_[static_cast<std::size_t>(i) * n_ + j];
                const double dji = dist_[static_cast<std::size_t>(j) * n_ + i];
                if (!(dij >= 0.0) || !std::isfinite(dij))
                    throw ViolationError("bad_distance", "distances must be finite nonnegative",
                                         {{"i", std::to_string(i)}, {"j", std::to_string(j)}});
                if (dij != dji)
                    throw ViolationError("asymmetric_distance", "d(i,j) != d(j,i)",
                                         {{"i", std::to_string(i)}, {"j", std::to_string(j)}});
            }
        }
    }

    // Triangle inequality: exhaustive up to 512 points, 10n sampled triples above.
    auto check_triple = [&](int i, int j, int k) {
        const double dik = dist(i, k), dij = dist(i, j), djk = dist(j, k);
        if (dik > dij + djk + 1e-12 * (dij + djk) + 1e-300)
            throw ViolationError("triangle_violation", "d(i,k) > d(i,j) + d(j,k)",
                                 {{"i", std::to_string(i)},
                                  {"j", std::to_string(j)},
                                  {"k", std::to_string(k)},
                                  {"d_ik", num(dik)},
                                  {"d_ij", num(dij)},
                                  {"d_jk", num(djk)}});
    };
    if (n_ <= 512) {
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                for (int k = 0; k < n_; ++k) check_triple(i, j, k);
    } else {
        std::mt19937_64 rng(0x5EEDULL);
        std::uniform_int_distribution<int> pick(0, n_ - 1);
        for (int t = 0; t < 10 * n_; ++t) {
            const int i = pick(rng), j = pick(rng), k = pick(rng);
            check_triple(i, j, k);
        }
    }

    nn_dist_.assign(n_, 0.0);
    double diam = 0.0;
#pragma omp parallel for schedule(static) reduction(max : diam)
    for (int i = 0; i < n_; ++i) {
        double nn = 0.0;
        bool have = false;
        for (int j = 0; j < n_; ++j) {
            if (j == i) continue;
            const double d = dist(i, j);
            diam = std::max(diam, d);
            if (!have || d < nn) {
                nn = d;
                have = true;
            }
        }
        nn_dist_[i] = have ? nn : 0.0;
    }
    diameter_ = diam;
    std::vector<double> nn = nn_dist_;
    std::sort(nn.begin(), nn.end());
    median_nn_ = n_ > 0 ? nn[(n_ - 1) / 2] : 0.0;
}

std::vector<int> Space::ball(int x, double r) const {
    check_point(x, "ball");
    if (r < 0.0) throw std::invalid_argument("ball: negative radius");
    std::vector<int> out;
    for (int y = 0; y < n_; ++y)
        if (dist(x, y) <= r) out.push_back(y);
    return out;
}

double Space::ball_measure(int x, double r) const {
    check_point(x, "ball_measure");
    double m = 0.0;
    for (int y = 0; y < n_; ++y)
        if (dist(x, y) <= r) m += weights_[y];
    return m;
}

ScalarField::ScalarField(const Space& s, std::vector<double> v) : space(&s), values(std::move(v)) {
    if (values.size() != static_cast<std::size_t>(s.size()))
        throw std::invalid_argument("field: value count mismatch");
    for (double x : values)
        if (!std::isfinite(x)) throw std::invalid_argument("field: values must be finite");
}

ScalarField::ScalarField(const Space& s, double constant)
    : space(&s), values(static_cast<std::size_t>(s.size()), constant) {
    if (!std::isfinite(constant)) throw std::invalid_argument("field: values must be finite");
}

double ball_average(const ScalarField& g, int x, double r) {
    const Space& s = *g.space;
    double num = 0.0, den = 0.0;
    for (int y = 0; y < s.size(); ++y) {
        if (s.dist(x, y) <= r) {
            num += s.weight(y) * g[y];
            den += s.weight(y);
        }
    }
    return num / den; // ball contains x, den > 0
}

double density_ratio(const Space& space, const std::vector<int>& A, int x, double r) {
    std::vector<char> in(space.size(), 0);
    for (int a : A) {
        if (a < 0 || a >= space.size()) throw std::invalid_argument("density_ratio: bad subset index");
        in[a] = 1;
    }
    double inter = 0.0, full = 0.0;
    for (int y = 0; y < space.size(); ++y) {
        if (space.dist(x, y) <= r) {
            full += space.weight(y);
            if (in[y]) inter += space.weight(y);
        }
    }
    return inter / full;
}

bool local_density_check(const Space& space, const std::vector<int>& A, int x, double eps, double r) {
    if (eps <= 0.0 || r <= 0.0) throw std::invalid_argument("local_density_check: eps and r must be positive");
    std::vector<int> candidates;
    for (int a : A) {
        if (a < 0 || a >= space.size()) throw std::invalid_argument("local_density_check: bad subset index");
        if (space.dist(x, a) <= (1.0 + eps) * r) candidates.push_back(a);
    }
    for (int y = 0; y < space.size(); ++y) {
        if (space.dist(x, y) > r) continue;
        bool covered = false;
        for (int a : candidates) {
            if (space.dist(y, a) <= eps * r) {
                covered = true;
                break;
            }
        }
        if (!covered) return false;
    }
    return true;
}

DoublingProfile doubling_profile(const Space& space, int sample_count, std::uint64_t seed, double kappa_cap) {
    if (sample_count < 1) throw std::invalid_argument("doubling_profile: sample_count must be >= 1");
    DoublingProfile out;
    if (space.size() == 1) {
        out.degenerate = true;
        return out;
    }

    // Nested pairs B(w,s) in B(x,r), radii log-uniform and floored at the
    // median nearest-neighbor distance (sub-resolution scales carry no
    // information on a finite space).
    const double lo = space.median_nn_dist() > 0.0 ? space.median_nn_dist() : space.diameter() * 1e-3;
    const double hi = std::max(space.diameter(), lo * 2.0);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, space.size() - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto log_uniform = [&](double a, double b) { return a * std::exp(unit(rng) * std::log(b / a)); };

    struct Pair {
        double ratio;    // s / r
        double measures; // mu(B(x,r)) / mu(B(w,s))
    };
    std::vector<Pair> pairs, fit_pairs;
    pairs.reserve(sample_count);
    fit_pairs.reserve(sample_count);
    int attempts = 0;
    while (static_cast<int>(pairs.size()) < sample_count && attempts < 50 * sample_count) {
        ++attempts;
        const int x = pick(rng);
        const double r = log_uniform(lo, hi);
        std::vector<int> members = space.ball(x, r);
        const int w = members[static_cast<int>(unit(rng) * members.size()) % members.size()];
        const double smax = r - space.dist(x, w);
        if (smax < lo) continue;
        const double s = log_uniform(lo, smax);
        pairs.push_back({s / r, space.ball_measure(x, r) / space.ball_measure(w, s)});
        // Concentric pair away from ball saturation: boundary truncation at a
        // shared center cancels to first order, giving an unbiased exponent.
        const double rhi = std::max(space.diameter() / 4.0, 2.0 * lo);
        const double rc = log_uniform(std::min(2.0 * lo, rhi), rhi);
        const double sc = log_uniform(lo, rc);
        if (sc < rc)
            fit_pairs.push_back({sc / rc, space.ball_measure(x, rc) / space.ball_measure(x, sc)});
    }
    out.pairs = static_cast<int>(pairs.size());
    if (pairs.empty()) {
        out.degenerate = true;
        return out;
    }
    if (fit_pairs.empty()) fit_pairs = pairs;

    // Log-log fit of the measure ratio against the radius ratio; kappa is
    // the smallest grid value at or above the fitted slope, C the minimal
    // constant making the inequality hold on every sampled pair.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const Pair& p : fit_pairs) {
        const double x = std::log(p.ratio);
        const double y = -std::log(p.measures); // log(mu_s / mu_r)
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(fit_pairs.size());
    const double denom = sxx - sx * sx / n;
    const double slope = denom > 0.0 ? (sxy - sx * sy / n) / denom : 0.0;

    int k = static_cast<int>(std::ceil(std::max(slope, 0.0) * 10.0 - 1e-9));
    k = std::min(std::max(k, 1), static_cast<int>(kappa_cap * 10.0));
    out.kappa = k / 10.0;
    double c = 1.0;
    for (const Pair& p : pairs) c = std::max(c, std::pow(p.ratio, out.kappa) * p.measures);
    for (const Pair& p : fit_pairs) c = std::max(c, std::pow(p.ratio, out.kappa) * p.measures);
    out.C = c;
    return out;
}

Space make_grid(int dim, int side, double extent) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("make_grid: dim must be 1, 2 or 3");
    if (side < 1) throw std::invalid_argument("make_grid: side must be >= 1");
    if (!(extent > 0.0)) throw std::invalid_argument("make_grid: extent must be positive");
    const double h = side > 1 ? extent / (side - 1) : 0.0;
    int n = 1;
    for (int k = 0; k < dim; ++k) n *= side;
    std::vector<double> coords(static_cast<std::size_t>(n) * dim);
    for (int i = 0; i < n; ++i) {
        int rem = i;
        for (int k = 0; k < dim; ++k) {
            coords[static_cast<std::size_t>(i) * dim + k] = (rem % side) * h;
            rem /= side;
        }
    }
    const double w = std::pow(extent, dim) / n;
    return Space::from_coords(std::move(coords), dim, std::vector<double>(n, w));
}

int grid_index(int dim, int side, const std::vector<int>& steps) {
    if (static_cast<int>(steps.size()) != dim) throw std::invalid_argument("grid_index: step count mismatch");
    int idx = 0;
    for (int k = dim - 1; k >= 0; --k) {
        if (steps[k] < 0 || steps[k] >= side) throw std::invalid_argument("grid_index: step out of range");
        idx = idx * side + steps[k];
    }
    return idx;
}

Space make_standard_cantor(int depth) {
    if (depth < 1) throw std::invalid_argument("make_standard_cantor: depth must be >= 1");
    std::vector<double> pts{0.0};
    double len = 1.0;
    for (int k = 0; k < depth; ++k) {
        len /= 3.0;
        std::vector<double> next;
        next.reserve(pts.size() * 2);
        for (double a : pts) {
            next.push_back(a);
            next.push_back(a + 2.0 * len);
        }
        pts = std::move(next);
    }
    const double w = std::pow(0.5, depth);
    return Space::from_coords(std::move(pts), 1, std::vector<double>(std::size_t(1) << depth, w));
}

Space make_fat_cantor(int depth, double gap_ratio) {
    if (depth < 1) throw std::invalid_argument("make_fat_cantor: depth must be >= 1");
    if (!(gap_ratio > 0.0 && gap_ratio < 1.0))
        throw std::invalid_argument("make_fat_cantor: gap_ratio must lie in (0,1)");
    struct Interval {
        double a, len;
    };
    std::vector<Interval> iv{{0.0, 1.0}};
    double gap = 1.0;
    for (int k = 1; k <= depth; ++k) {
        gap *= gap_ratio; // relative gap at step k is gap_ratio^k
        std::vector<Interval> next;
        next.reserve(iv.size() * 2);
        for (const Interval& v : iv) {
            const double child = v.len * (1.0 - gap) / 2.0;
            next.push_back({v.a, child});
            next.push_back({v.a + v.len - child, child});
        }
        iv = std::move(next);
    }
    std::vector<double> pts, weights;
    pts.reserve(iv.size());
    weights.reserve(iv.size());
    for (const Interval& v : iv) {
        pts.push_back(v.a);
        weights.push_back(v.len);
    }
    return Space::from_coords(std::move(pts), 1, std::move(weights));
}

Space make_snowflake(const Space& base, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("make_snowflake: alpha must lie in (0,1)");
    if (base.has_coords()) {
        std::vector<double> coords(static_cast<std::size_t>(base.size()) * base.dim());
        for (int i = 0; i < base.size(); ++i)
            for (int k = 0; k < base.dim(); ++k)
                coords[static_cast<std::size_t>(i) * base.dim() + k] = base.coord(i, k);
        return Space::from_coords(std::move(coords), base.dim(), base.weights(),
                                  base.snowflake_alpha() * alpha, base.labels());
    }
    const int n = base.size();
    std::vector<double> dist(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) dist[static_cast<std::size_t>(i) * n + j] = std::pow(base.dist(i, j), alpha);
    return Space::from_matrix(std::move(dist), base.weights(), base.labels());
}

std::vector<ScalarField> landmark_generators(const Space& space, const std::vector<int>& landmarks) {
    if (landmarks.empty()) throw std::invalid_argument("landmark_generators: empty landmark set");
    std::vector<ScalarField> out;
    out.reserve(landmarks.size());
    for (int p : landmarks) {
        if (p < 0 || p >= space.size())
            throw std::invalid_argument("landmark_generators: bad landmark index");
        std::vector<double> v(space.size());
        for (int y = 0; y < space.size(); ++y) v[y] = space.dist(p, y);
        out.emplace_back(space, std::move(v));
    }
    return out;
}

} // namespace mc
