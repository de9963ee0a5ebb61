#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mc {

// Finite metric measure space: n points, a metric and strictly positive
// weights. Distances are materialized as an n x n matrix up to
// kMatrixLimit points and evaluated from coordinates above that.
class Space {
public:
    static constexpr int kMatrixLimit = 4096;

    static Space from_matrix(std::vector<double> dist, std::vector<double> weights,
                             std::vector<std::string> labels = {});
    static Space from_coords(std::vector<double> coords, int dim, std::vector<double> weights,
                             double snowflake_alpha = 1.0, std::vector<std::string> labels = {});

    int size() const { return n_; }
    double weight(int i) const { return weights_[i]; }
    const std::vector<double>& weights() const { return weights_; }
    double total_weight() const { return total_weight_; }
    const std::vector<std::string>& labels() const { return labels_; }

    bool has_coords() const { return dim_ > 0; }
    bool has_matrix() const { return !dist_.empty(); }
    int dim() const { return dim_; }
    double coord(int i, int k) const { return coords_[static_cast<std::size_t>(i) * dim_ + k]; }
    double snowflake_alpha() const { return alpha_; }

    double dist(int i, int j) const {
        if (!dist_.empty()) return dist_[static_cast<std::size_t>(i) * n_ + j];
        return rule_dist(i, j);
    }

    double diameter() const { return diameter_; }
    // Distance from i to its nearest other point (0 for a single-point space).
    double nn_dist(int i) const { return nn_dist_[i]; }
    double median_nn_dist() const { return median_nn_; }

    // Closed ball { y : d(x,y) <= r }, indices ascending. Always contains x.
    std::vector<int> ball(int x, double r) const;
    double ball_measure(int x, double r) const;

private:
    Space() = default;
    double rule_dist(int i, int j) const;
    void finalize();
    void check_point(int i, const char* what) const;

    int n_ = 0;
    std::vector<double> weights_;
    std::vector<std::string> labels_;
    std::vector<double> dist_;   // row-major n*n when materialized
    std::vector<double> coords_; // n*dim when coordinate-backed
    int dim_ = 0;
    double alpha_ = 1.0; // metric is (euclidean)^alpha when coordinate-backed
    double total_weight_ = 0.0;
    double diameter_ = 0.0;
    std::vector<double> nn_dist_;
    double median_nn_ = 0.0;

    friend double checked_dist(const Space&, int, int);
};

struct ScalarField {
    const Space* space = nullptr;
    std::vector<double> values;

    ScalarField() = default;
    ScalarField(const Space& s, std::vector<double> v);
    ScalarField(const Space& s, double constant);

    double operator[](int i) const { return values[i]; }
    double& operator[](int i) { return values[i]; }
    int size() const { return static_cast<int>(values.size()); }
};

// Weighted average of g over the closed ball B(x,r).
double ball_average(const ScalarField& g, int x, double r);

// mu(B(x,r) cap A) / mu(B(x,r)), in [0,1].
double density_ratio(const Space& space, const std::vector<int>& A, int x, double r);

// True iff every y in B(x,r) lies within eps*r of A cap B(x,(1+eps)r).
bool local_density_check(const Space& space, const std::vector<int>& A, int x, double eps, double r);

struct DoublingProfile {
    double C = 1.0;
    double kappa = 0.0;
    bool degenerate = false; // single-point space
    int pairs = 0;
};

// Fits mu(B(w,s))/mu(B(x,r)) >= (1/C)(s/r)^kappa over sampled nested ball
// pairs: log-log regression snapped up to the grid {0.1,...,6.0}, then the
// minimal C >= 1 valid on every pair. Deterministic given the seed.
DoublingProfile doubling_profile(const Space& space, int sample_count, std::uint64_t seed,
                                 double kappa_cap = 6.0);

Space make_grid(int dim, int side, double extent);
Space make_standard_cantor(int depth);
Space make_fat_cantor(int depth, double gap_ratio);
Space make_snowflake(const Space& base, double alpha);

// One distance field d(p, .) per landmark p; each has glip exactly 1.
std::vector<ScalarField> landmark_generators(const Space& space, const std::vector<int>& landmarks);

// Index of the grid point with the given per-axis steps (make_grid layout).
int grid_index(int dim, int side, const std::vector<int>& steps);

} // namespace mc
