#pragma once

#include "relocsplit/operators.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace relocsplit {

enum class ProblemKind { kAffineStronglyMonotone, kAffineSkewPlusStrong, kAffinePlusBox, kCustomMatrices };

std::string to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& name);

struct ProblemSpec {
  ProblemKind kind = ProblemKind::kAffineStronglyMonotone;
  Index dim = 2;
  Index n_ops = 2;
  std::uint64_t seed = 0;
  double mu_target = 1.0;
  double lipschitz_target = 2.0;
  /// Half-width of the box [-w, w]^d used by affine_plus_box.
  double box_half_width = 1.0;
  /// custom_matrices only.
  std::vector<Matrix> matrices;
  std::vector<Vector> offsets;
};

/// Deterministic in the seed:
///   affine_strongly_monotone  every operator symmetric with spectrum linspace(mu, L)
///   affine_skew_plus_strong   A_1..A_{N-1} skew with ||S|| = L, A_N as above
///   affine_plus_box           A_1..A_{N-1} as above, A_N the box normal cone
/// Offsets are standard normal. Throws ConfigError on bad parameters.
std::vector<OperatorPtr> generate_problem(const ProblemSpec& spec);

/// Haar-distributed orthogonal matrix (QR of a Gaussian with sign fix).
Matrix random_orthogonal(Index dim, std::mt19937_64& rng);

/// Q diag(eigenvalues) Q^T for a random orthogonal Q; exactly c I when all
/// eigenvalues equal c.
Matrix symmetric_with_spectrum(const Vector& eigenvalues, std::mt19937_64& rng);

/// Skew-symmetric matrix with operator norm `norm` (zero when dim == 1).
Matrix random_skew(Index dim, double norm, std::mt19937_64& rng);

/// Parses "a b; c d" into a matrix. Throws ConfigError.
Matrix parse_matrix(const std::string& text);
/// Parses "a b c" (commas allowed) into a vector. Throws ConfigError.
Vector parse_vector(const std::string& text);

}  // namespace relocsplit
