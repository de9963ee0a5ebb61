#pragma once

#include "metriccalc/derivation.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace mc {

// Count of singular values of the per-point derivations x generators matrix
// above tau * (largest singular value); 0 for the zero matrix.
int pointwise_rank(const ComponentTable& table, int x, double tau);
std::vector<int> pointwise_ranks(const ComponentTable& table, double tau);

// Per-point coefficient vector annihilating the row vectors, lifted by the
// largest-|entry| pivot (ties: lowest index) fixed to +1, sup-norm 1.
struct KernelSelection {
    std::vector<int> domain;
    std::vector<std::vector<double>> lambda; // one vector of size n_derivations per domain point
    std::vector<int> pivot;                  // 0-based pivot index per domain point
    // True where span(V_1..V_M) = span(V_1..V_{M-1}); there lambda_M != 0.
    std::vector<std::uint8_t> last_in_span;
    double max_residual = 0.0; // max over domain of |lambda^T V| / max row norm
};

// Requires pointwise rank exactly M-1 (M = row count) on the domain.
KernelSelection kernel_select(const ComponentTable& table, const std::vector<int>& domain, double tau);

struct StratumPiece {
    std::vector<int> points;
    std::vector<int> basis; // derivation indices, ascending
};

struct Stratification {
    std::vector<int> rank;                       // per point
    std::vector<std::vector<int>> strata;        // strata[i] = { x : rank(x) = i }
    std::map<int, std::vector<StratumPiece>> bases; // per nonempty rank > 0
    int max_rank = 0;
};

Stratification stratify(const std::vector<Derivation>& derivations,
                        const std::vector<ScalarField>& generators, double tau);
Stratification stratify(const ComponentTable& table, double tau);

struct MinorResult {
    bool found = false;
    std::vector<int> rows;       // derivation indices
    std::vector<int> generators; // generator indices, |rows| of them
    std::vector<int> points;     // maximal V inside the domain
};

// Scans generator subsets of the given size in index order inside doubling
// prefix blocks; first subset with a nonempty V wins. V keeps the points
// where |det B(x)| >= eps_floor * prod of row norms.
MinorResult find_nonsingular_minor(const ComponentTable& table, const std::vector<int>& domain, int n,
                                   double eps_floor);
MinorResult find_nonsingular_minor(const ComponentTable& table, const std::vector<int>& domain,
                                   const std::vector<int>& rows, double eps_floor);

struct DualBasisRecord {
    std::vector<int> rows;       // derivation indices behind B
    std::vector<int> generators; // g'_1..g'_n
    std::vector<int> domain;     // V
    double eps_floor = 0.0;
    std::vector<ScalarField> coeff; // n*n fields, row-major: A(x) with A B = I
    std::vector<Derivation> duals;  // D'_i = sum_j A_ij D_j, via combine()
    double max_inverse_error = 0.0; // max |A(x) B(x) - I| over V
    double max_delta_error = 0.0;   // max |D'_i g'_j(x) - delta_ij| over V
};

DualBasisRecord dual_basis(const std::vector<Derivation>& derivations,
                           const std::vector<ScalarField>& generators, const ComponentTable& table,
                           const MinorResult& minor, double eps_floor);

} // namespace mc
