#pragma once

#include "mlsa/problem.hpp"

#include <utility>
#include <vector>

namespace fixtures {

using mlsa::FiniteChain;
using mlsa::LsaProblem;
using mlsa::Matrix;
using mlsa::Vector;

inline FiniteChain symmetric_two_state(double p) {
    Matrix P(2, 2);
    P << 1 - p, p, p, 1 - p;
    return FiniteChain::from_kernel(P, "two-state");
}

/// Scalar instance A = (-1, -0.5), b = (1, 0) on the symmetric two-state chain.
inline std::pair<FiniteChain, LsaProblem> two_state_scalar(double p = 0.2) {
    auto chain = symmetric_two_state(p);
    std::vector<Matrix> A{Matrix::Constant(1, 1, -1.0), Matrix::Constant(1, 1, -0.5)};
    std::vector<Vector> b{Vector::Constant(1, 1.0), Vector::Constant(1, 0.0)};
    auto problem = mlsa::build_problem(chain, std::move(A), std::move(b), false, "two-state");
    return {std::move(chain), std::move(problem)};
}

inline FiniteChain iid_chain(const Vector& pi) {
    return FiniteChain::from_kernel(Vector::Ones(pi.size()) * pi.transpose(), "iid");
}

}  // namespace fixtures
