#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace byzmac {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

// Numerical policy shared by all modules. Logarithms are base 2 everywhere;
// entropic quantities are reported in bits.
namespace tol {
inline constexpr double hermitian = 1e-10;      // max-abs of m - m^dagger
inline constexpr double eigenvalue_clamp = 1e-10;  // [-clamp, 0) clamps to 0
inline constexpr double support = 1e-12;        // eigenvalues below this carry no log contribution
inline constexpr double trace_one = 1e-9;
inline constexpr double povm_complete = 1e-9;
inline constexpr double zero_branch = 1e-12;    // Lueders posteriors undefined below this
inline constexpr double sym_feasible = 1e-8;    // LP slack at or below this counts as symmetrizable
}  // namespace tol

inline constexpr int kDimensionCap = 1 << 16;  // largest supported product dimension

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotSquare : Error { using Error::Error; };
struct NotHermitian : Error { using Error::Error; };
struct NegativeEigenvalue : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct DimensionCapExceeded : Error { using Error::Error; };
struct SymbolOutOfAlphabet : Error { using Error::Error; };
struct SlotOutOfRange : Error { using Error::Error; };
struct ZeroProbabilityBranch : Error { using Error::Error; };
struct IncompletePovm : Error { using Error::Error; };
struct InvariantViolation : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct WeightNotNormalized : Error { using Error::Error; };
struct DegenerateEnsemble : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct MissingStagePovm : Error { using Error::Error; };
struct KTooLarge : Error { using Error::Error; };

// Deterministic 64-bit generator (splitmix64 seeding + xoshiro256**).
// The standard <random> distributions are implementation-defined, so all
// sampling goes through this class to keep transcripts byte-identical
// across platforms and runs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) word = splitmix64(x);
  }

  // Independent stream for a (seed, index) pair; used for per-trial streams
  // so parallel trial scheduling cannot change results.
  Rng(std::uint64_t seed, std::uint64_t stream) : Rng(mix(seed, stream)) {}

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
  }

  // Standard normal via Box-Muller.
  double gaussian() {
    double u = uniform();
    while (u <= 0.0) u = uniform();
    const double v = uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586 * v);
  }

  // Samples an index from nonnegative weights by inverse CDF.
  int pick(const RVector& weights) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < weights.size(); ++i) total += std::max(0.0, weights[i]);
    const double u = uniform() * total;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
      acc += std::max(0.0, weights[i]);
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size() - 1);
  }

 private:
  static std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t x = seed ^ (0x2545f4914f6cdd1dULL * (stream + 1));
    return splitmix64(x);
  }
  static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

  std::uint64_t state_[4];
};

}  // namespace byzmac
