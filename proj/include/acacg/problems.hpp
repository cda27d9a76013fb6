#pragma once

#include "acacg/composite.hpp"
#include "acacg/prox.hpp"

#include <Eigen/SparseCore>

#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

namespace acacg {

using SparseMatrix = Eigen::SparseMatrix<double>;

// ---------------------------------------------------------------- QP

struct QpParams {
    int l = 20;
    int n = 60;
    double density = 0.05;
    double target_upper = 1e4;  // lambda_max of the Hessian
    double target_lower = 1e3;  // -lambda_min of the Hessian
};

struct QpInstance {
    QpParams params;
    std::uint64_t seed = 0;
    std::vector<SparseMatrix> A_ops;  // l sparse PSD matrices
    std::vector<SparseMatrix> B_ops;  // n sparse PSD matrices
    Vector d_diag;                    // diagonal of D, entries in {1..1000}
    Vector b;                         // entries U[0,1]
    double alpha1 = 0.0, alpha2 = 0.0;
    double measured_upper = 0.0;  // lambda_max of the assembled Hessian
    double measured_lower = 0.0;  // -lambda_min
};

/// Builds a spectraplex-constrained indefinite quadratic whose Hessian
/// extremes hit (target_upper, -target_lower) within 1%. Failed eigenvalue
/// estimation or a zero operator resamples with seed+1 (at most 3 retries).
QpInstance qp_generate(const QpParams& params, std::uint64_t seed);
CompositeProblem qp_oracles(const QpInstance& inst);

/// Hessian of the QP smooth part as an operator on flattened n x n matrices.
LinearOperator qp_hessian_operator(const QpInstance& inst);

// ---------------------------------------------------------------- SVM

struct SvmParams {
    int n = 200;  // feature dimension
    int p = 100;  // number of data points
    double radius = 50.0;
    double sparsity = 0.05;
};

struct SvmInstance {
    SvmParams params;
    std::uint64_t seed = 0;
    Matrix points;  // p x n, one data point per row
    Vector labels;  // entries in {-1, +1}
    double lambda = 0.0;  // 1/p
    Vector z0;
};

SvmInstance svm_generate(const SvmParams& params, std::uint64_t seed);
/// M = (1/p) sum_i (4 sqrt(3)/9) ||x_i||^2 + lambda.
double svm_lipschitz(const SvmInstance& inst);
CompositeProblem svm_oracles(const SvmInstance& inst);

// ---------------------------------------------------------------- sparse PCA

struct SpcaParams {
    int s = 10;  // sparsity of the leading eigenvectors
    int r = 5;   // subspace dimension / Fantope rank
    int p = 60;  // matrix dimension
    double b = 3.0;
    double beta = 0.33;
    double mu = 1.67;
    double lambda = 0.25;
    int samples = 80;
};

/// The four synthetic designs (1..4) with an overridable dimension.
SpcaParams spca_dataset_preset(int which, int p = 60);

struct SpcaInstance {
    SpcaParams params;
    std::uint64_t seed = 0;
    Matrix sigma_hat;  // sample covariance, symmetric PSD
};

SpcaInstance spca_generate(const SpcaParams& params, std::uint64_t seed);
CompositeProblem spca_oracles(const SpcaInstance& inst);

// ---------------------------------------------------------------- matrix completion

struct McParams {
    int rows = 40;
    int cols = 60;
    double observe_fraction = 0.3;
    double mu = 2.2;
    double beta = 1.0;
    double theta = 1.0;
};

struct McInstance {
    McParams params;
    std::uint64_t seed = 0;
    std::vector<std::pair<int, int>> omega;
    Vector observed;  // values on omega, same order
    double radius = 0.0;

    double tau() const { return params.beta / (params.theta * params.theta); }
    double p0() const { return params.beta / params.theta; }
};

struct RatingsData {
    std::vector<std::tuple<int, int, double>> entries;  // (user, item, rating), 1-based
    int max_user = 0;
    int max_item = 0;
};

/// Tab-separated (user, item, rating, timestamp) integer records.
RatingsData read_ratings_tsv(const std::string& path);

McInstance mc_generate(const McParams& params, std::uint64_t seed);
McInstance mc_from_ratings(const RatingsData& data, const McParams& params);
CompositeProblem mc_oracles(const McInstance& inst);

// ---------------------------------------------------------------- NMF

struct NmfParams {
    int rows = 80;   // n
    int cols = 40;   // l
    int inner = 5;   // p, factorization rank
    double noise = 0.01;
};

struct NmfInstance {
    NmfParams params;
    std::uint64_t seed = 0;
    Matrix data;  // n x l, nonnegative
    double curvature_estimate = 0.0;  // 100 |C((X0,Y0); (0,0))|
};

NmfInstance nmf_generate(const NmfParams& params, std::uint64_t seed);
NmfInstance nmf_from_matrix(const Matrix& data, int inner);
CompositeProblem nmf_oracles(const NmfInstance& inst);

// ---------------------------------------------------------------- file readers

/// Dense matrix as CSV of reals, one row per line.
Matrix read_matrix_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Matrix& m);

}  // namespace acacg
