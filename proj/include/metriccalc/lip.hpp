#pragma once

#include "metriccalc/ladder.hpp"
#include "metriccalc/space.hpp"

#include <cstdint>
#include <vector>

namespace mc {

enum class LipKind { upper, lower };

// Per-point resolution data for a (space, ladder) pair: the smallest
// admissible ladder scale (ball not reduced to {x}) and the punctured ball
// at that scale, sorted by (distance, index). Points with no admissible
// scale are flagged isolated and resolve to 0.
class ResolutionContext {
public:
    ResolutionContext(const Space& space, ScaleLadder ladder);

    const Space& space() const { return *space_; }
    const ScaleLadder& ladder() const { return ladder_; }
    bool isolated(int x) const { return isolated_[x] != 0; }
    double scale(int x) const { return scale_[x]; }

    struct Neighbor {
        int point;
        double dist;
    };
    const std::vector<Neighbor>& neighbors(int x) const { return nbrs_[x]; }

    // Resolved upper Lipschitz constant of f at x:
    //   max over the punctured resolution ball of |f(x)-f(y)| / d(x,y).
    double upper_at(const ScalarField& f, int x) const;
    // Same with f replaced by sum_i coeff[i] * fields[i], coefficients frozen.
    double upper_combo_at(const std::vector<const ScalarField*>& fields,
                          const std::vector<double>& coeff, int x) const;

private:
    const Space* space_;
    ScaleLadder ladder_;
    std::vector<double> scale_;
    std::vector<std::uint8_t> isolated_;
    std::vector<std::vector<Neighbor>> nbrs_;
};

// (1/r) * sup_{y in B(x,r)} |f(x)-f(y)|.
double varlip(const ScalarField& f, int x, double r);

// Upper / lower variation of f at x from scale r down to the point's scale
// floor (its nearest-neighbor distance):
//   upper = sup_{s <= r} varlip f(x,s) = max_{0 < d(x,y) <= r} |f(x)-f(y)|/d(x,y)
//   lower = inf_{nn(x) <= s <= r} varlip f(x,s), computed exactly from the
//           piecewise form M(s)/s.
// Throws if r is below the point's scale floor, naming the floor.
double local_lipschitz(const ScalarField& f, int x, double r, LipKind kind);

struct LipProfile {
    struct Row {
        int point;
        double r;
        double varlip;
        double upper;
        double lower;
    };
    ScaleLadder ladder;
    std::vector<Row> rows; // admissible (point, scale) pairs; point-major, r descending
    std::vector<double> upper; // resolved at the smallest admissible scale
    std::vector<double> lower;
    std::vector<std::uint8_t> isolated;
};

LipProfile lip_profile(const ScalarField& f, const ScaleLadder& ladder);
ScalarField lip_field(const ScalarField& f, LipKind kind, const ScaleLadder& ladder);
// Kernel entry point shared with the serial reference: resolved fields only.
void lip_resolved(const ScalarField& f, const ResolutionContext& ctx, std::vector<double>& upper,
                  std::vector<double>& lower);

// Global Lipschitz constant (max over pairs) and sup |f| vee glip.
double glip(const ScalarField& f);
double lip_norm(const ScalarField& f);

// Pairwise Lipschitz constant of the data on A.
double partial_glip(const Space& space, const std::vector<int>& A, const std::vector<double>& f_on_A);

// g(y) = min_{a in A} (f(a) + L * d(a,y)); agrees with f on A, glip(g) <= L.
// Throws ViolationError naming a witness pair when L < Lip(f|A).
ScalarField mcshane_extend(const Space& space, const std::vector<int>& A,
                           const std::vector<double>& f_on_A, double L);

// Phi_x(lambda) = Lip(sum_i lambda_i f_i)(x) at the resolution scale.
double independence_seminorm(const ResolutionContext& ctx, const std::vector<const ScalarField*>& fields,
                             const std::vector<double>& lambda, int x);

struct IndependenceResult {
    bool independent = false;
    double min_value = 0.0;
    std::vector<double> argmin;
    double tau = 0.0; // threshold actually used
};

// Minimizes Phi_x over the unit l2 sphere: deterministic low-discrepancy
// sample (sphere_samples points) refined by coordinate descent. Independent
// iff the minimum exceeds tau; tau <= 0 selects 1e-3 * max_i Lip f_i(x).
IndependenceResult independence_test(const ResolutionContext& ctx,
                                     const std::vector<const ScalarField*>& fields, int x, double tau,
                                     int sphere_samples);

// Deterministic low-discrepancy points on the unit sphere of R^dim.
std::vector<std::vector<double>> sphere_sample(int dim, int count);

} // namespace mc
