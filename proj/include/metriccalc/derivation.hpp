#pragma once

#include "metriccalc/lip.hpp"
#include "metriccalc/space.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mc {

// Finite-reach weighted difference-quotient operator:
//   Df(x) = sum_j w_j * (f(y_j) - f(x)) / d(x, y_j).
// Linear, kills constants, Leibniz up to a reach-scaled residual.
class Derivation {
public:
    struct Entry {
        int neighbor;
        double weight;
        double dist;
    };

    Derivation(const Space& space, std::vector<std::vector<std::pair<int, double>>> stencils);

    const Space& space() const { return *space_; }
    const std::vector<Entry>& stencil(int x) const { return stencil_[x]; }
    double reach() const { return reach_; }
    double weight_mass(int x) const {
        double m = 0.0;
        for (const Entry& e : stencil_[x]) m += std::abs(e.weight);
        return m;
    }
    double apply_at(const ScalarField& f, int x) const {
        double v = 0.0;
        for (const Entry& e : stencil_[x]) v += e.weight * (f[e.neighbor] - f[x]) / e.dist;
        return v;
    }

private:
    const Space* space_;
    std::vector<std::vector<Entry>> stencil_;
    double reach_ = 0.0;
};

// Forward difference along a coordinate axis (backward at the far boundary);
// step is the spatial step, 0 selects the grid spacing automatically.
Derivation make_axis_derivation(const Space& space, int axis, double step = 0.0);
// Stencil of the k nearest neighbors (ties by index), weights 1/k;
// radius > 0 restricts candidates to the closed ball.
Derivation make_knn_derivation(const Space& space, int k, double radius = 0.0);

ScalarField apply(const Derivation& D, const ScalarField& f);

struct LeibnizReport {
    ScalarField residual; // D(fg) - f Dg - g Df, evaluated from the definition
    bool bound_ok;        // |R(x)| <= weight_mass(x) * glip(f) * glip(g) * reach everywhere
    double max_abs;
};

LeibnizReport leibniz_residual(const Derivation& D, const ScalarField& f, const ScalarField& g);

struct LocalityReport {
    std::vector<int> domain;           // = A
    std::vector<double> residual;      // (Df - Dg) on A
    std::vector<std::uint8_t> interior; // full stencil inside A
    double max_interior_abs;
};

// Requires f = g on A; the residual vanishes exactly on the stencil interior.
LocalityReport locality_residual(const Derivation& D, const ScalarField& f, const ScalarField& g,
                                 const std::vector<int>& A);

double operator_norm_bound(const Derivation& D); // max_x weight_mass(x)

struct OperatorNormReport {
    double exact_bound;
    double empirical; // max over probes of max_x |Df(x)| / Lip f(x)
    struct Witness {
        int field;
        int point;
        double value; // |Df(x)| with Lip f(x) = 0
    };
    std::vector<Witness> violations;
};

OperatorNormReport operator_norm_empirical(const Derivation& D, const std::vector<ScalarField>& probes,
                                           const ResolutionContext& ctx);

// sum_i lambda_i(x) D_i with per-point scaled stencils.
Derivation combine(const std::vector<ScalarField>& lambdas, const std::vector<Derivation>& derivations);

// Tensor D_i g_k(x), point-major blocks of n_derivations x n_generators.
struct ComponentTable {
    int n_derivations = 0;
    int n_generators = 0;
    int n_points = 0;
    std::vector<double> values;

    double at(int x, int i, int k) const {
        return values[(static_cast<std::size_t>(x) * n_derivations + i) * n_generators + k];
    }
    const double* block(int x) const {
        return &values[static_cast<std::size_t>(x) * n_derivations * n_generators];
    }
};

ComponentTable component_table(const std::vector<Derivation>& derivations,
                               const std::vector<ScalarField>& generators);

// Swaps the roles of derivations and generators (per-point transpose).
ComponentTable transpose_table(const ComponentTable& table);

} // namespace mc
