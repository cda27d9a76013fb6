#pragma once

#include "acacg/composite.hpp"

#include <functional>
#include <stdexcept>

namespace acacg {

/// Eigen- or singular-value decomposition with values sorted descending
/// (ties keep the original order) and orthonormal basis columns.
struct SpectralDecomposition {
    Matrix basis;
    Vector values;
};

class NumericalError : public std::runtime_error {
  public:
    explicit NumericalError(const std::string& what, double best_estimate = 0.0)
        : std::runtime_error(what), best_estimate_(best_estimate) {}
    double best_estimate() const { return best_estimate_; }

  private:
    double best_estimate_;
};

/// Symmetric eigendecomposition, values descending.
SpectralDecomposition eigen_decompose(const Matrix& symmetric);

/// Euclidean projection onto { s >= 0, sum(s) = radius }.
Vector project_simplex(const Vector& v, double radius);

/// Euclidean projection onto { 0 <= s <= 1, sum(s) = r }; requires r <= length(v).
Vector project_capped_simplex(const Vector& v, double r);

/// Projection onto the spectraplex { Z PSD, tr(Z) = 1 }. Symmetrizes the input.
Matrix project_spectraplex(const Matrix& Z);

/// Projection onto the Fantope { 0 <= X <= I, tr(X) = r }. Symmetrizes the input.
Matrix project_fantope(const Matrix& X, int r);

Vector soft_threshold(const Vector& v, double tau);
Matrix soft_threshold(const Matrix& v, double tau);

/// Prox of tau*||.||_* + indicator of the Frobenius ball of radius R:
/// soft-threshold the singular values, then scale radially into the ball.
Matrix prox_nuclear_ball(const Matrix& Z, double tau, double R);

Vector project_ball(const Vector& z, double R);
Vector project_nonneg(const Vector& z);

using LinearOperator = std::function<Vector(const Vector&)>;

enum class WhichEigenvalue { Largest, Smallest };

/// Extreme eigenvalue of a symmetric operator via Lanczos iteration with
/// full reorthogonalization. Relative tolerance is measured against the
/// operator scale for eigenvalues near zero. Throws NumericalError with the
/// best estimate attached on non-convergence.
double extreme_eigenvalue(const LinearOperator& op, int dim, WhichEigenvalue which,
                          double rel_tol = 1e-6, unsigned seed = 12345);

}  // namespace acacg
