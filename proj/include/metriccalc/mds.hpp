#pragma once

#include "metriccalc/modalg.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace mc {

enum class PdMethod { lsq, dual };

struct Chart {
    std::vector<int> domain;
    std::vector<int> functions; // indices into the generator registry; empty = 0-dimensional
    int dual_record = -1;       // index into Atlas::duals when built from a dual basis
};

struct Atlas {
    std::vector<Chart> charts;
    std::vector<DualBasisRecord> duals;
    std::vector<int> leftover; // empty on success
    int dimension = 0;
};

struct PartialDerivativeTable {
    std::vector<int> domain;
    std::vector<int> functions;
    std::vector<double> coeff;    // domain-major rows, one per chart function
    std::vector<double> residual; // Lip(f - sum_j c_j x^j)(x) with frozen c
    PdMethod method = PdMethod::lsq;
    double lsq_radius = 0.0;

    double at(std::size_t di, int j) const { return coeff[di * functions.size() + j]; }
};

// Weighted local least squares of f(y)-f(x) against the chart increments on
// B(x,radius), normal equations with a relative 1e-12 ridge.
PartialDerivativeTable partial_derivatives_lsq(const ScalarField& f,
                                               const std::vector<ScalarField>& generators,
                                               const std::vector<int>& functions,
                                               const std::vector<int>& domain, double radius,
                                               const ResolutionContext& ctx);

// c_j(x) = (D'_j f)(x) through the dual-basis derivations.
PartialDerivativeTable partial_derivatives_dual(const ScalarField& f,
                                                const std::vector<ScalarField>& generators,
                                                const DualBasisRecord& rec,
                                                const ResolutionContext& ctx);

struct CotangentField {
    std::vector<int> domain;
    std::vector<int> functions;
    std::vector<double> coeff; // domain-major
};

CotangentField differential(const PartialDerivativeTable& pd);

// ||(v_1..v_N)||(x) = Lip(sum_j v_j x^j)(x) at the resolution scale.
double cot_norm(const ResolutionContext& ctx, const std::vector<ScalarField>& generators,
                const std::vector<int>& functions, const std::vector<double>& v, int x);

struct SobolevNorm {
    double value = 0.0;
    double lp_term = 0.0;
    double dlp_term = 0.0;
};

// ||f||_{L^p} + ||df||_{L^p} over an atlas covering the space (dual method).
SobolevNorm sobolev_norm(const ScalarField& f, const Atlas& atlas,
                         const std::vector<ScalarField>& generators, double p,
                         const ResolutionContext& ctx);

struct RepresentationResidual {
    std::vector<int> domain;
    std::vector<double> values; // Df(x) - sum_j (df)_j(x) * Dx^j(x)
    double max_abs = 0.0;
    double weighted_mean_abs = 0.0;
};

RepresentationResidual representation_residual(const Derivation& D, const ScalarField& f,
                                               const std::vector<ScalarField>& generators,
                                               const PartialDerivativeTable& pd);

struct InequalityReport {
    std::vector<double> exact_bounds; // per derivation: max weight mass

    struct UpperViolation {
        int derivation;
        int field;
        int point;
        double lhs; // |D_j f(x)|
        double rhs; // bound_j * Lip f(x)
        bool within_reach; // reach_j <= resolution scale at x (no slack expected)
    };
    std::vector<UpperViolation> upper_violations;

    struct ReverseViolation {
        int field;
        int point;
        double max_df; // Lip f(x) = 0 but max_j |D_j f(x)| above tolerance
    };
    std::vector<ReverseViolation> reverse_violations;

    std::vector<double> lambda;                // fitted per point (fit mode)
    std::vector<std::uint8_t> lambda_defined;
    double min_lambda = std::numeric_limits<double>::infinity();
    bool degenerate_corpus = false;

    struct GivenViolation {
        int field;
        int point;
        double lhs; // max_j |D_j f(x)|
        double rhs; // lambda(x) * Lip f(x)
    };
    std::vector<GivenViolation> given_violations; // given-lambda mode only
};

// Upper check |D_j f(x)| <= ||D_j|| Lip f(x) plus the reverse inequality with
// lambda either fitted (per-point infimum over the corpus) or supplied.
InequalityReport inequality_report(const std::vector<Derivation>& derivations,
                                   const std::vector<ScalarField>& corpus, const ResolutionContext& ctx,
                                   const ScalarField* given_lambda = nullptr);

// Dual-basis patches over the rank strata until the space is covered;
// rank-0 points form one 0-dimensional chart.
Atlas build_atlas(const std::vector<ScalarField>& generators,
                  const std::vector<Derivation>& derivations, double tau, double eps_floor,
                  const ResolutionContext& ctx);

struct DimensionProbeReport {
    std::vector<std::uint8_t> dependent; // per point, independence_test failed
    double dependent_fraction = 0.0;
    bool declined = false; // |candidates| <= |derivations|: no dimension claim
    std::vector<int> witness_domain;
    KernelSelection witnesses; // kernels of the transposed component table
};

DimensionProbeReport dimension_probe(const std::vector<Derivation>& derivations,
                                     const std::vector<ScalarField>& candidates, double tau,
                                     const ResolutionContext& ctx, int sphere_samples = 0);

} // namespace mc
