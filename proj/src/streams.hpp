#pragma once

#include <cstdint>

// Philox stream ids. Each generator draws from its own stream so that adding
// draws to one component never shifts another component's randomness.
namespace mlsa::streams {

inline constexpr std::uint64_t kChainKernel = 1;
inline constexpr std::uint64_t kMeanMatrix = 2;
inline constexpr std::uint64_t kNoiseMatrices = 3;
inline constexpr std::uint64_t kOffsets = 4;

inline constexpr std::uint64_t kDataStream = 16;      // x_k of a trajectory
inline constexpr std::uint64_t kCouplingBase = 1ull << 32;  // + pair index
inline constexpr std::uint64_t kCouplingInit = 1ull << 33;  // + pair index

inline constexpr std::uint64_t kCovariates = 32;   // MH proposals and accepts
inline constexpr std::uint64_t kRegressionNoise = 33;
inline constexpr std::uint64_t kReferenceRun = 34;

}  // namespace mlsa::streams
