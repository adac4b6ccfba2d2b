#pragma once

#include <vector>

#include "inferum/rng.hpp"
#include "inferum/types.hpp"

namespace inferum {

// (mu/mu_w, lambda) covariance matrix adaptation evolution strategy with
// log-decreasing recombination weights and cumulative step-size adaptation.
// State transitions are pure: ask() is const, tell() returns the next state.
struct CmaState {
    int dim = 0;
    int pop_size = 0;
    int num_elites = 0;
    double sigma = 1.0;
    double cov_lr_scale = 1.0; // multiplier on the rank-1/rank-mu learning rates
    std::vector<double> mean;  // dim
    std::vector<double> cov;   // dim x dim, row-major, symmetric positive definite
    std::vector<double> path_sigma;
    std::vector<double> path_cov;
    long generation = 0;

    // Derived recombination constants, fixed at init.
    std::vector<double> weights; // num_elites entries, sum 1
    double mu_eff = 1.0;
    double c_sigma = 0.0;
    double d_sigma = 1.0;
    double c_cov_path = 0.0;
    double c_rank1 = 0.0;
    double c_rankmu = 0.0;
    double chi_n = 1.0;
};

// mean 0, C = I, sigma = sigma0. num_elites <= 0 defaults to pop_size / 2.
CmaState cma_init(int dim, int pop_size, int num_elites, double sigma0,
                  double cov_lr_scale = 1.0);

// pop_size candidates mean + sigma * C^{1/2} n, n ~ N(0, I). Throws
// degenerate_covariance_error when C has lost positive-definiteness beyond
// repair; cma_repair can then be applied before retrying.
std::vector<std::vector<double>> cma_ask(const CmaState& state, Rng& rng);

// Standard update from (candidate, fitness) pairs. Rank-based: adding a
// constant to all fitnesses yields the identical next state.
CmaState cma_tell(const CmaState& state, const std::vector<std::vector<double>>& candidates,
                  const std::vector<double>& fitnesses, bool maximize);

// Re-symmetrizes C, floors its eigenvalues and clamps sigma.
CmaState cma_repair(const CmaState& state);

// Symmetric eigendecomposition by cyclic Jacobi rotations (testing and
// internal use). Returns eigenvalues ascending; eigenvectors fill the columns
// of basis (row-major dim x dim).
void jacobi_eigen(const std::vector<double>& matrix, int dim, std::vector<double>& eigenvalues,
                  std::vector<double>& basis);

} // namespace inferum
