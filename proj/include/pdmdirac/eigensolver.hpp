#pragma once

#include "pdmdirac/grid.hpp"
#include "pdmdirac/potential.hpp"

#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace pdmdirac {

/// One eigenpair of -phi'' + V phi = lambda phi with Dirichlet ends.
struct EigenPair {
    double lambda = 0.0;            // Richardson-refined eigenvalue
    std::vector<double> phi;        // all grid nodes, zero at both ends, sum phi^2 h = 1
    int nodes = 0;                  // interior sign changes
    double grid_h = 0.0;
    double error_estimate = 0.0;    // |lambda_h - lambda_{h/2}| / 3
    double lambda_coarse = 0.0;     // raw eigenvalue on the grid of the field
    double lambda_fine = 0.0;       // raw eigenvalue on the halved grid
};

struct EnergyPair {
    double plus = 0.0;
    double minus = 0.0;
};

struct SpectrumResult {
    std::vector<EigenPair> pairs;    // ascending lambda
    std::vector<EnergyPair> energies;
    PotentialMode mode = PotentialMode::Approximate;
    std::vector<int> iterations;     // self-consistency iterations per pair (0 when not iterated)
    double offset = 0.0;             // E^2 = lambda + offset
    QGrid grid;
};

struct SolveOptions {
    bool richardson = true;
};

/// Lowest `count` eigenvalues of the symmetric tridiagonal matrix with the
/// given diagonal and constant off-diagonal, by Sturm-sequence bisection.
std::vector<double> tridiagonal_lowest(std::span<const double> diag, double offdiag, std::size_t count);

/// Eigenvector of the same matrix at a converged eigenvalue, by inverse
/// iteration. Returned with unit Euclidean norm.
std::vector<double> tridiagonal_eigenvector(std::span<const double> diag, double offdiag, double lambda);

/// Lowest k_states eigenpairs of the finite-difference operator. In
/// ConstantU mode the constant A^2 is taken off the diagonal, so lambda is
/// the free-equation eigenvalue and offset = A^2.
SpectrumResult solve_fixed(const PotentialField& potential, int k_states, const SolveOptions& options = {});

struct SelfConsistentResult {
    EigenPair pair;
    double energy = 0.0;
    int iterations = 0;
    std::vector<double> history;  // E_0 = E_init, E_1, ...
};

/// Fixed-point iteration E <- sign(E_init) sqrt(lambda_k(V_exact(E))) on the
/// given grid. `state_index` is zero-based. Relaxation by one half switches on
/// when successive updates oscillate in sign without shrinking.
SelfConsistentResult solve_self_consistent(const ModelSpec& model, const TransformMap& map, const QGrid& grid,
                                           int state_index, double E_init, double tol, int max_iter);

/// E = +/- sqrt(lambda + offset). ImaginaryEnergy error when the radicand is
/// negative.
EnergyPair energies_from_lambda(double lambda, double offset);

struct TruncationPolicy {
    std::size_t base_intervals = 2000;  // intervals across the initial box
    double initial_half_width = 4.0;    // initial |q| reach toward an infinite end
    double delta = 25.0;                // V(edge) must exceed lambda_k + delta
    double eig_tol = 1e-8;              // doubling stops once eigenvalues move less than this
    int max_expansions = 12;
    int max_doublings = 8;
};

/// Chooses a finite q-box for a map whose q-domain has at least one infinite
/// end. Finite ends are kept; each infinite end is pushed out until the
/// potential there exceeds lambda_k + delta, then doubled until the lowest
/// k_states eigenvalues settle. The spacing of the initial box is preserved.
/// NonConvergence when the potential does not confine or the eigenvalues keep
/// drifting.
QGrid truncate_domain(const TransformMap& map, const std::function<double(double)>& sampler, int k_states,
                      const TruncationPolicy& policy = {});

/// Interior sign changes, ignoring values below 1e-10 of the maximum.
int count_nodes(std::span<const double> phi);

}  // namespace pdmdirac
