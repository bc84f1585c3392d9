#include "relocsplit/problem.hpp"

#include "relocsplit/errors.hpp"

#include <cmath>
#include <sstream>

namespace relocsplit {

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::kAffineStronglyMonotone: return "affine_strongly_monotone";
    case ProblemKind::kAffineSkewPlusStrong: return "affine_skew_plus_strong";
    case ProblemKind::kAffinePlusBox: return "affine_plus_box";
    case ProblemKind::kCustomMatrices: return "custom_matrices";
  }
  return "unknown";
}

ProblemKind problem_kind_from_string(const std::string& name) {
  for (auto kind : {ProblemKind::kAffineStronglyMonotone, ProblemKind::kAffineSkewPlusStrong,
                    ProblemKind::kAffinePlusBox, ProblemKind::kCustomMatrices}) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("unknown problem kind '" + name + "'");
}

Matrix random_orthogonal(Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(dim, dim);
  for (Index j = 0; j < dim; ++j) {
    for (Index i = 0; i < dim; ++i) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < dim; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

Matrix symmetric_with_spectrum(const Vector& eigenvalues, std::mt19937_64& rng) {
  const Index d = eigenvalues.size();
  const Matrix q = random_orthogonal(d, rng);
  if ((eigenvalues.array() == eigenvalues(0)).all()) {
    return eigenvalues(0) * Matrix::Identity(d, d);
  }
  Matrix m = q * eigenvalues.asDiagonal() * q.transpose();
  return 0.5 * (m + m.transpose());
}

Matrix random_skew(Index dim, double norm, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(dim, dim);
  for (Index j = 0; j < dim; ++j) {
    for (Index i = 0; i < dim; ++i) g(i, j) = normal(rng);
  }
  Matrix s = g - g.transpose();
  if (dim == 1) return Matrix::Zero(1, 1);
  const double current = Eigen::JacobiSVD<Matrix>(s).singularValues()(0);
  return s * (norm / current);
}

namespace {

Vector linspace_spectrum(Index dim, double lo, double hi) {
  if (dim == 1) return Vector::Constant(1, lo);
  return Vector::LinSpaced(dim, lo, hi);
}

Vector random_offset(Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector b(dim);
  for (Index i = 0; i < dim; ++i) b(i) = normal(rng);
  return b;
}

}  // namespace

std::vector<OperatorPtr> generate_problem(const ProblemSpec& spec) {
  std::vector<OperatorPtr> ops;
  if (spec.kind == ProblemKind::kCustomMatrices) {
    if (spec.matrices.size() < 2) throw ConfigError("custom_matrices needs at least two matrices");
    if (spec.offsets.size() != spec.matrices.size() && !spec.offsets.empty()) {
      throw ConfigError("custom_matrices needs one offset per matrix (or none)");
    }
    for (std::size_t i = 0; i < spec.matrices.size(); ++i) {
      const Matrix& m = spec.matrices[i];
      Vector b = spec.offsets.empty() ? Vector::Zero(m.rows()) : spec.offsets[i];
      try {
        ops.push_back(make_affine(m, std::move(b)));
      } catch (const Error& e) {
        throw ConfigError("custom matrix " + std::to_string(i + 1) + ": " + e.what());
      }
    }
    return ops;
  }

  if (spec.dim < 1) throw ConfigError("problem.dim must be >= 1");
  if (spec.n_ops < 2) throw ConfigError("problem.N must be >= 2");
  if (!(spec.mu_target > 0.0) || !(spec.lipschitz_target >= spec.mu_target)) {
    throw ConfigError("need 0 < mu_target <= L_target");
  }
  std::mt19937_64 rng(spec.seed);
  const Vector spectrum = linspace_spectrum(spec.dim, spec.mu_target, spec.lipschitz_target);
  for (Index i = 0; i < spec.n_ops; ++i) {
    const bool last = (i + 1 == spec.n_ops);
    switch (spec.kind) {
      case ProblemKind::kAffineStronglyMonotone: {
        Matrix m = symmetric_with_spectrum(spectrum, rng);
        ops.push_back(make_affine(std::move(m), random_offset(spec.dim, rng)));
        break;
      }
      case ProblemKind::kAffineSkewPlusStrong: {
        Matrix m = last ? symmetric_with_spectrum(spectrum, rng)
                        : random_skew(spec.dim, spec.lipschitz_target, rng);
        ops.push_back(make_affine(std::move(m), random_offset(spec.dim, rng)));
        break;
      }
      case ProblemKind::kAffinePlusBox: {
        if (last) {
          if (!(spec.box_half_width > 0.0)) throw ConfigError("box half-width must be positive");
          const Vector w = Vector::Constant(spec.dim, spec.box_half_width);
          ops.push_back(make_box(-w, w));
        } else {
          Matrix m = symmetric_with_spectrum(spectrum, rng);
          ops.push_back(make_affine(std::move(m), random_offset(spec.dim, rng)));
        }
        break;
      }
      case ProblemKind::kCustomMatrices: break;
    }
  }
  return ops;
}

Matrix parse_matrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::stringstream all(text);
  std::string row_text;
  while (std::getline(all, row_text, ';')) {
    std::vector<double> row;
    for (char& c : row_text) {
      if (c == ',') c = ' ';
    }
    std::istringstream in(row_text);
    double v = 0.0;
    while (in >> v) row.push_back(v);
    if (!in.eof()) throw ConfigError("bad number in matrix '" + text + "'");
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("empty matrix");
  const std::size_t cols = rows.front().size();
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) throw ConfigError("ragged matrix '" + text + "'");
    for (std::size_t j = 0; j < cols; ++j) m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  }
  return m;
}

Vector parse_vector(const std::string& text) {
  std::string clean = text;
  for (char& c : clean) {
    if (c == ',' || c == ';') c = ' ';
  }
  std::istringstream in(clean);
  std::vector<double> values;
  double v = 0.0;
  while (in >> v) values.push_back(v);
  if (!in.eof()) throw ConfigError("bad number in vector '" + text + "'");
  if (values.empty()) throw ConfigError("empty vector");
  return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

}  // namespace relocsplit
