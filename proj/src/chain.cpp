#include "mlsa/chain.hpp"

#include "mlsa/error.hpp"
#include "mlsa/rng.hpp"
#include "streams.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

namespace mlsa {

namespace {

constexpr double kPositive = 0.0;  // an edge exists iff P[x][y] > kPositive

std::vector<std::vector<char>> reachability(const Matrix& P) {
    const auto n = static_cast<std::size_t>(P.rows());
    std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
    std::vector<std::size_t> frontier;
    for (std::size_t s = 0; s < n; ++s) {
        auto& seen = reach[s];
        seen[s] = 1;
        frontier.assign(1, s);
        while (!frontier.empty()) {
            const std::size_t u = frontier.back();
            frontier.pop_back();
            for (std::size_t v = 0; v < n; ++v) {
                if (!seen[v] && P(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) > kPositive) {
                    seen[v] = 1;
                    frontier.push_back(v);
                }
            }
        }
    }
    return reach;
}

// Period of the class `members` via breadth-first levels: the gcd of
// level[u] + 1 - level[v] over all in-class edges u -> v.
std::size_t class_period(const Matrix& P, const std::vector<std::size_t>& members,
                         const std::vector<char>& in_class) {
    const auto n = static_cast<std::size_t>(P.rows());
    std::vector<long long> level(n, -1);
    std::queue<std::size_t> queue;
    level[members.front()] = 0;
    queue.push(members.front());
    while (!queue.empty()) {
        const std::size_t u = queue.front();
        queue.pop();
        for (std::size_t v = 0; v < n; ++v) {
            if (in_class[v] && level[v] < 0 &&
                P(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) > kPositive) {
                level[v] = level[u] + 1;
                queue.push(v);
            }
        }
    }
    long long g = 0;
    for (std::size_t u : members) {
        for (std::size_t v : members) {
            if (P(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) > kPositive) {
                g = std::gcd(g, std::llabs(level[u] + 1 - level[v]));
            }
        }
    }
    return static_cast<std::size_t>(g);
}

void validate_kernel(const Matrix& P) {
    if (P.rows() == 0 || P.rows() != P.cols()) {
        throw Error(ErrorCode::InvalidParameter, "kernel must be a non-empty square matrix");
    }
    for (Eigen::Index x = 0; x < P.rows(); ++x) {
        for (Eigen::Index y = 0; y < P.cols(); ++y) {
            const double p = P(x, y);
            if (!(p >= 0.0 && p <= 1.0)) {
                throw Error(ErrorCode::InvalidParameter,
                            "kernel entry (" + std::to_string(x) + "," + std::to_string(y) +
                                ") outside [0,1]");
            }
        }
        if (std::abs(P.row(x).sum() - 1.0) > kRowSumTolerance) {
            throw Error(ErrorCode::InvalidParameter,
                        "kernel row " + std::to_string(x) + " does not sum to 1");
        }
    }
}

Vector power_iteration(const Matrix& P) {
    // Lazy kernel (I + P) / 2 shares pi with P and is aperiodic.
    const Matrix lazy = 0.5 * (Matrix::Identity(P.rows(), P.cols()) + P);
    Vector pi = Vector::Constant(P.rows(), 1.0 / static_cast<double>(P.rows()));
    for (int it = 0; it < 100000; ++it) {
        Vector next = lazy.transpose() * pi;
        next /= next.sum();
        const double change = (next - pi).lpNorm<Eigen::Infinity>();
        pi = std::move(next);
        if (change < 1e-15) break;
    }
    return pi;
}

}  // namespace

ChainStructure analyze_structure(const Matrix& P) {
    const auto n = static_cast<std::size_t>(P.rows());
    const auto reach = reachability(P);
    std::vector<long long> class_of(n, -1);
    std::vector<std::vector<std::size_t>> classes;
    for (std::size_t u = 0; u < n; ++u) {
        if (class_of[u] >= 0) continue;
        classes.emplace_back();
        for (std::size_t v = 0; v < n; ++v) {
            if (reach[u][v] && reach[v][u]) {
                class_of[v] = static_cast<long long>(classes.size() - 1);
                classes.back().push_back(v);
            }
        }
    }

    ChainStructure out;
    const std::vector<std::size_t>* recurrent = nullptr;
    for (const auto& members : classes) {
        bool closed = true;
        for (std::size_t u : members) {
            for (std::size_t v = 0; v < n && closed; ++v) {
                if (reach[u][v] && class_of[v] != class_of[u]) closed = false;
            }
        }
        if (closed) {
            ++out.recurrent_classes;
            recurrent = &members;
        }
    }
    out.irreducible = classes.size() == 1;
    if (out.recurrent_classes == 1) {
        std::vector<char> in_class(n, 0);
        for (std::size_t v : *recurrent) in_class[v] = 1;
        out.recurrent.assign(in_class.begin(), in_class.end());
        out.period = class_period(P, *recurrent, in_class);
    }
    return out;
}

StationaryDistribution stationary_distribution(const Matrix& P) {
    validate_kernel(P);
    const ChainStructure structure = analyze_structure(P);
    if (structure.recurrent_classes != 1) {
        throw Error(ErrorCode::NonUniqueStationary,
                    std::to_string(structure.recurrent_classes) + " recurrent classes");
    }
    const Eigen::Index n = P.rows();
    Matrix system(n + 1, n);
    system.topRows(n) = P.transpose() - Matrix::Identity(n, n);
    system.row(n).setOnes();
    Vector rhs = Vector::Zero(n + 1);
    rhs(n) = 1.0;
    Vector pi = system.colPivHouseholderQr().solve(rhs);

    auto residual_of = [&P](const Vector& v) {
        return (P.transpose() * v - v).lpNorm<Eigen::Infinity>();
    };
    if (!pi.allFinite() || residual_of(pi) > kStationaryTolerance || pi.minCoeff() < -1e-12) {
        pi = power_iteration(P);
    }
    pi = pi.cwiseMax(0.0);
    for (Eigen::Index x = 0; x < n; ++x) {
        if (!structure.recurrent[static_cast<std::size_t>(x)]) pi(x) = 0.0;
    }
    pi /= pi.sum();
    return {pi, residual_of(pi)};
}

FiniteChain FiniteChain::from_kernel(Matrix P, std::string label) {
    FiniteChain chain;
    auto stationary = stationary_distribution(P);
    chain.structure_ = analyze_structure(P);
    chain.kernel_ = std::move(P);
    chain.pi_ = std::move(stationary.pi);
    chain.residual_ = stationary.residual;
    chain.label_ = std::move(label);
    return chain;
}

std::vector<double> FiniteChain::cumulative_rows() const {
    const auto n = size();
    std::vector<double> cdf(n * n);
    for (std::size_t x = 0; x < n; ++x) {
        double acc = 0.0;
        for (std::size_t y = 0; y < n; ++y) {
            acc += kernel_(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
            cdf[x * n + y] = acc;
        }
    }
    return cdf;
}

Matrix time_reversal(const FiniteChain& chain) {
    const Vector& pi = chain.stationary();
    if ((pi.array() <= 0.0).any()) {
        throw Error(ErrorCode::DegenerateStationary, "stationary distribution has a zero entry");
    }
    const Matrix& P = chain.kernel();
    return pi.cwiseInverse().asDiagonal() * P.transpose() * pi.asDiagonal();
}

SpectralReport spectral_report(const FiniteChain& chain) {
    const Matrix& P = chain.kernel();
    const Vector& pi = chain.stationary();
    SpectralReport report;

    const Matrix flow = pi.asDiagonal() * P;
    report.detailed_balance_violation = (flow - flow.transpose()).cwiseAbs().maxCoeff();
    report.reversible = report.detailed_balance_violation < kDetailedBalanceTolerance;

    if (report.reversible && (pi.array() > 0.0).all()) {
        const Vector lambda = reversible_eigenvalues(chain);
        for (Eigen::Index i = 0; i < lambda.size(); ++i) report.eigenvalues.emplace_back(lambda(i), 0.0);
    } else {
        Eigen::EigenSolver<Matrix> solver(P, /*computeEigenvectors=*/false);
        if (solver.info() != Eigen::Success) {
            throw Error(ErrorCode::SpectralFailure, "eigenvalue iteration did not converge");
        }
        const auto lambda = solver.eigenvalues();
        for (Eigen::Index i = 0; i < lambda.size(); ++i) report.eigenvalues.push_back(lambda(i));
    }
    std::stable_sort(report.eigenvalues.begin(), report.eigenvalues.end(),
                     [](auto a, auto b) { return std::abs(a) > std::abs(b); });

    // Drop one copy of the unit eigenvalue (the closest one), keep the rest.
    auto unit = std::min_element(report.eigenvalues.begin(), report.eigenvalues.end(),
                                 [](auto a, auto b) { return std::abs(a - 1.0) < std::abs(b - 1.0); });
    std::size_t unit_copies = 0;
    double slem = 0.0;
    for (auto it = report.eigenvalues.begin(); it != report.eigenvalues.end(); ++it) {
        if (std::abs(*it - 1.0) < 1e-9) ++unit_copies;
        if (it != unit) slem = std::max(slem, std::abs(*it));
    }
    report.slem = std::min(slem, 1.0);
    report.gap = unit_copies > 1 ? 0.0 : 1.0 - report.slem;
    return report;
}

Vector reversible_eigenvalues(const FiniteChain& chain) {
    const Vector& pi = chain.stationary();
    if ((pi.array() <= 0.0).any()) {
        throw Error(ErrorCode::DegenerateStationary, "stationary distribution has a zero entry");
    }
    const Vector root = pi.cwiseSqrt();
    Matrix S = root.asDiagonal() * chain.kernel() * root.cwiseInverse().asDiagonal();
    S = 0.5 * (S + S.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(S, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorCode::SpectralFailure, "symmetric eigensolve did not converge");
    }
    return solver.eigenvalues();
}

std::size_t mixing_time(const FiniteChain& chain, std::span<const Matrix> A,
                        std::span<const Vector> b, double eps, std::size_t k_max) {
    const std::size_t n = chain.size();
    if (!(eps > 0.0 && eps < 1.0)) {
        throw Error(ErrorCode::InvalidParameter, "mixing tolerance must lie in (0,1)");
    }
    if (A.size() != n || b.size() != n) {
        throw Error(ErrorCode::InvalidParameter, "need one A(x) and one b(x) per state");
    }
    const Eigen::Index d = A.front().rows();
    const Eigen::Index width = d * d + d;
    const Vector& pi = chain.stationary();

    // Row x of F holds (vec A(x), b(x)); F_k = P^k F.
    Matrix F(static_cast<Eigen::Index>(n), width);
    double a_max = 0.0, b_max = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
        const auto row = static_cast<Eigen::Index>(x);
        F.row(row).head(d * d) = A[x].reshaped().transpose();
        F.row(row).tail(d) = b[x].transpose();
        a_max = std::max(a_max, A[x].operatorNorm());
        b_max = std::max(b_max, b[x].norm());
    }
    if (a_max == 0.0 && b_max == 0.0) {
        throw Error(ErrorCode::InvalidParameter, "A and b are both identically zero");
    }
    const Eigen::RowVectorXd mean = pi.transpose() * F;
    const double a_tol = eps * a_max;
    const double b_tol = eps * b_max;
    const double root_d = std::sqrt(static_cast<double>(d));

    auto within = [&](const Matrix& Fk) {
        for (Eigen::Index x = 0; x < Fk.rows(); ++x) {
            const Eigen::RowVectorXd dev = Fk.row(x) - mean;
            if (dev.tail(d).norm() > b_tol) return false;
            const double fro = dev.head(d * d).norm();
            if (fro <= a_tol) continue;           // spectral <= Frobenius
            if (fro / root_d > a_tol) return false;  // spectral >= Frobenius / sqrt(d)
            const Matrix M = dev.head(d * d).reshaped(d, d);
            if (M.operatorNorm() > a_tol) return false;
        }
        return true;
    };

    Matrix Fk = F;
    for (std::size_t k = 1; k <= k_max; ++k) {
        Fk = chain.kernel() * Fk;
        if (within(Fk)) return k;
    }
    throw Error(ErrorCode::MixingTimeout, "no mixing within " + std::to_string(k_max) + " steps");
}

FiniteChain interpolate_kernel(const FiniteChain& chain, double beta) {
    if (!(beta >= 0.0 && beta <= 1.0)) {
        throw Error(ErrorCode::InvalidParameter, "beta must lie in [0,1]");
    }
    const auto n = static_cast<Eigen::Index>(chain.size());
    Matrix mixed = beta * chain.kernel() +
                   (1.0 - beta) * Vector::Ones(n) * chain.stationary().transpose();
    return FiniteChain::from_kernel(std::move(mixed), chain.label());
}

FiniteChain random_ergodic_chain(std::size_t n, std::uint64_t seed) {
    if (n < 2) throw Error(ErrorCode::InvalidParameter, "random chain needs n >= 2");
    RandomStream rng(seed, streams::kChainKernel);
    const auto size = static_cast<Eigen::Index>(n);
    while (true) {
        Matrix M(size, size);
        for (Eigen::Index x = 0; x < size; ++x) {
            for (Eigen::Index y = 0; y < size; ++y) M(x, y) = rng.uniform();
            M.row(x) /= M.row(x).sum();
        }
        const ChainStructure s = analyze_structure(M);
        if (s.irreducible && s.aperiodic()) return FiniteChain::from_kernel(std::move(M), "random");
    }
}

}  // namespace mlsa
