#pragma once

#include "mlsa/problem.hpp"

#include <string>
#include <utility>
#include <vector>

namespace mlsa {

/// Markov reward process (S, P^S, r, gamma); states are 0-based.
struct Mrp {
    std::size_t nS = 0;
    Matrix PS;
    Vector r;
    double gamma = 0.0;
    std::string label;
};

/// Throws InvalidParameter unless PS is row-stochastic and gamma in [0,1).
void validate_mrp(const Mrp& mrp);

/// Four-state chain of the right-right-left-left policy on the problematic
/// MDP: r = (0, 1, 3, 0), gamma = 0.9.
Mrp problematic_mrp();

/// Row s of Phi is phi(s)^T.
struct FeatureMap {
    Matrix Phi;
};

/// phi(s) = (1, s, ..., s^degree) with s the 1-based state value; with
/// `normalize_columns`, each column is divided by its sum over states.
FeatureMap polynomial_features(std::size_t nS, std::size_t degree = 2, bool normalize_columns = true);

FeatureMap tabular_features(std::size_t nS);

/// Rescales Phi globally so that max_s ||phi(s)|| <= 1 / sqrt(1 + gamma).
FeatureMap rescale_to_unit_ball(FeatureMap features, double gamma);

/// V = (I - gamma P^S)^-1 r.
Vector value_function(const Mrp& mrp);

/// LSA instance over a pair chain. Pair x = pairs[x] = (s, s') in 0-based states.
struct TdInstance {
    FiniteChain chain;
    LsaProblem problem;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    FiniteChain state_chain;
};

/// x_k = (s_k, s_{k+1}), A(x) = phi(s)(gamma phi(s') - phi(s))^T, b(x) = r(s) phi(s).
/// Pairs with P^S[s][s'] = 0 are pruned. Throws RankDeficientFeatures.
TdInstance td_problem(const Mrp& mrp, const FeatureMap& features);

/// Tabular TD where the bootstrap state u is a fresh draw from P^S(s, .):
/// (s, u) -> (s', u') with probability P^S[s][s'] P^S[s'][u'].
TdInstance semi_simulator_problem(const Mrp& mrp);

struct ProjectedFixedPoint {
    Vector theta_star;
    Vector V;
    double value_error = 0.0;  // ||Phi theta* - V|| in L2(pi^S)
    Matrix Abar;               // Phi^T diag(pi^S) (gamma P^S - I) Phi
    Vector bbar;               // Phi^T diag(pi^S) r
};

ProjectedFixedPoint projected_fixed_point(const Mrp& mrp, const FeatureMap& features);

}  // namespace mlsa
