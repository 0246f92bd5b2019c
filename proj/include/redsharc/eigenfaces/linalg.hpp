#pragma once

#include <cstddef>
#include <vector>

namespace redsharc::eigenfaces {

/// Dense row-major matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    static Matrix identity(std::size_t n);
    Matrix transposed() const;
    std::vector<double> row(std::size_t r) const;
    std::vector<double> column(std::size_t c) const;
};

Matrix operator*(const Matrix& a, const Matrix& b);
/// Frobenius norm.
double frobenius(const Matrix& a);

/// One image per row; columns are pixels.
using ImageMatrix = Matrix;
using FeatureVector = std::vector<double>;

/// A = U * diag(S) * V^T with r = min(rows, cols) retained triplets.
struct SvdResult {
    Matrix U;
    std::vector<double> S;
    Matrix V;
};

/// Per-pixel arithmetic mean over the images, summed in image order.
std::vector<double> computeMean(const ImageMatrix& imgs);
/// Subtracts `mean` from every image. Throws DIMENSION_MISMATCH.
ImageMatrix meanSubtract(const ImageMatrix& imgs, const std::vector<double>& mean);

inline constexpr int kJacobiMaxSweeps = 60;
inline constexpr double kJacobiTolerance = 1e-12;

/// One-sided Jacobi SVD. Throws NO_CONVERGENCE after kJacobiMaxSweeps.
SvdResult svd(const Matrix& a);
/// First k columns of U. Throws K_OUT_OF_RANGE unless 1 <= k <= r.
Matrix selectComponents(const SvdResult& s, std::size_t k);
/// basis^T * centered. Throws DIMENSION_MISMATCH.
FeatureVector project(const Matrix& basis, const std::vector<double>& centered);
/// sqrt(mean((a - b)^2)). Throws DIMENSION_MISMATCH.
double rmsDistance(const FeatureVector& a, const FeatureVector& b);

struct MatchResult {
    /// Index of the closest reference feature vector.
    std::size_t reference = 0;
    /// Subject that reference belongs to.
    std::size_t subject = 0;
    double distance = 0.0;

    friend bool operator==(const MatchResult&, const MatchResult&) = default;
};

/// Closest reference by RMS distance; ties go to the lowest index.
/// `subject` is set to the reference index. Throws EMPTY_REFERENCES.
MatchResult classify(const FeatureVector& sample, const std::vector<FeatureVector>& refs);

} // namespace redsharc::eigenfaces
