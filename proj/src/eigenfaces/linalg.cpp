#include "redsharc/eigenfaces/linalg.hpp"

#include "redsharc/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace redsharc::eigenfaces {

Matrix Matrix::identity(std::size_t n)
{
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

Matrix Matrix::transposed() const
{
    Matrix t(cols, rows);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            t(c, r) = (*this)(r, c);
        }
    }
    return t;
}

std::vector<double> Matrix::row(std::size_t r) const
{
    return {data.begin() + static_cast<std::ptrdiff_t>(r * cols),
            data.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols)};
}

std::vector<double> Matrix::column(std::size_t c) const
{
    std::vector<double> out(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        out[r] = (*this)(r, c);
    }
    return out;
}

Matrix operator*(const Matrix& a, const Matrix& b)
{
    if (a.cols != b.rows) {
        throw Error(ErrorCode::DimensionMismatch, "cannot multiply " + std::to_string(a.rows) + "x" +
                                                      std::to_string(a.cols) + " by " + std::to_string(b.rows) + "x" +
                                                      std::to_string(b.cols));
    }
    Matrix out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols; ++j) {
                out(i, j) += aik * b(k, j);
            }
        }
    }
    return out;
}

double frobenius(const Matrix& a)
{
    double s = 0.0;
    for (double x : a.data) {
        s += x * x;
    }
    return std::sqrt(s);
}

std::vector<double> computeMean(const ImageMatrix& imgs)
{
    if (imgs.rows == 0) {
        throw Error(ErrorCode::InvalidArgument, "mean of zero images");
    }
    std::vector<double> mean(imgs.cols, 0.0);
    for (std::size_t i = 0; i < imgs.rows; ++i) {
        for (std::size_t j = 0; j < imgs.cols; ++j) {
            mean[j] += imgs(i, j);
        }
    }
    for (double& m : mean) {
        m /= static_cast<double>(imgs.rows);
    }
    return mean;
}

ImageMatrix meanSubtract(const ImageMatrix& imgs, const std::vector<double>& mean)
{
    if (mean.size() != imgs.cols) {
        throw Error(ErrorCode::DimensionMismatch, "mean has " + std::to_string(mean.size()) + " pixels, images have " +
                                                      std::to_string(imgs.cols));
    }
    ImageMatrix out(imgs.rows, imgs.cols);
    for (std::size_t i = 0; i < imgs.rows; ++i) {
        for (std::size_t j = 0; j < imgs.cols; ++j) {
            out(i, j) = imgs(i, j) - mean[j];
        }
    }
    return out;
}

namespace {

// Hestenes iteration on the columns of `w` (rows >= cols); `v` accumulates rotations.
void orthogonalizeColumns(Matrix& w, Matrix& v)
{
    const std::size_t n = w.rows;
    const std::size_t m = w.cols;
    for (int sweep = 0; sweep < kJacobiMaxSweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < m; ++p) {
            for (std::size_t q = p + 1; q < m; ++q) {
                double a = 0.0;
                double b = 0.0;
                double c = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    a += w(i, p) * w(i, p);
                    b += w(i, q) * w(i, q);
                    c += w(i, p) * w(i, q);
                }
                if (std::abs(c) <= kJacobiTolerance * std::sqrt(a * b)) {
                    continue;
                }
                rotated = true;
                const double zeta = (b - a) / (2.0 * c);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double cs = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = cs * t;
                for (std::size_t i = 0; i < n; ++i) {
                    const double wp = w(i, p);
                    const double wq = w(i, q);
                    w(i, p) = cs * wp - sn * wq;
                    w(i, q) = sn * wp + cs * wq;
                }
                for (std::size_t i = 0; i < m; ++i) {
                    const double vp = v(i, p);
                    const double vq = v(i, q);
                    v(i, p) = cs * vp - sn * vq;
                    v(i, q) = sn * vp + cs * vq;
                }
            }
        }
        if (!rotated) {
            return;
        }
    }
    throw Error(ErrorCode::NoConvergence,
                "Jacobi SVD did not converge in " + std::to_string(kJacobiMaxSweeps) + " sweeps");
}

// Replaces column `c` of `u` with a unit vector orthogonal to the columns in `basis`.
void completeColumn(Matrix& u, std::size_t c, const std::vector<std::size_t>& basis)
{
    for (std::size_t e = 0; e < u.rows; ++e) {
        std::vector<double> x(u.rows, 0.0);
        x[e] = 1.0;
        for (int pass = 0; pass < 2; ++pass) {
            for (auto b : basis) {
                double d = 0.0;
                for (std::size_t i = 0; i < u.rows; ++i) {
                    d += u(i, b) * x[i];
                }
                for (std::size_t i = 0; i < u.rows; ++i) {
                    x[i] -= d * u(i, b);
                }
            }
        }
        double norm = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
        if (norm > 0.5) {
            for (std::size_t i = 0; i < u.rows; ++i) {
                u(i, c) = x[i] / norm;
            }
            return;
        }
    }
}

SvdResult svdTall(const Matrix& a)
{
    const std::size_t n = a.rows;
    const std::size_t m = a.cols;
    Matrix w = a;
    Matrix v = Matrix::identity(m);
    orthogonalizeColumns(w, v);

    std::vector<double> norms(m);
    for (std::size_t j = 0; j < m; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s += w(i, j) * w(i, j);
        }
        norms[j] = std::sqrt(s);
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return norms[x] > norms[y]; });

    SvdResult out{Matrix(n, m), std::vector<double>(m), Matrix(m, m)};
    const double smax = m == 0 ? 0.0 : norms[order.front()];
    const double cutoff = smax * static_cast<double>(std::max(n, m)) * std::numeric_limits<double>::epsilon();
    std::vector<std::size_t> accepted;
    std::vector<std::size_t> deficient;
    for (std::size_t k = 0; k < m; ++k) {
        const auto j = order[k];
        out.S[k] = norms[j];
        for (std::size_t i = 0; i < m; ++i) {
            out.V(i, k) = v(i, j);
        }
        if (norms[j] > cutoff && norms[j] > 0.0) {
            for (std::size_t i = 0; i < n; ++i) {
                out.U(i, k) = w(i, j) / norms[j];
            }
            accepted.push_back(k);
        } else {
            deficient.push_back(k);
        }
    }
    // Directions with negligible singular values carry no information from
    // the matrix; any orthonormal completion keeps the factorization valid.
    for (auto k : deficient) {
        completeColumn(out.U, k, accepted);
        accepted.push_back(k);
    }
    return out;
}

} // namespace

SvdResult svd(const Matrix& a)
{
    if (a.rows == 0 || a.cols == 0) {
        throw Error(ErrorCode::DimensionMismatch, "svd of an empty matrix");
    }
    for (double x : a.data) {
        if (!std::isfinite(x)) {
            throw Error(ErrorCode::InvalidArgument, "svd input has non-finite entries");
        }
    }
    if (a.rows >= a.cols) {
        return svdTall(a);
    }
    auto t = svdTall(a.transposed());
    return {std::move(t.V), std::move(t.S), std::move(t.U)};
}

Matrix selectComponents(const SvdResult& s, std::size_t k)
{
    const std::size_t r = s.S.size();
    if (k < 1 || k > r) {
        throw Error(ErrorCode::KOutOfRange, "k=" + std::to_string(k) + " outside [1, " + std::to_string(r) + "]");
    }
    Matrix basis(s.U.rows, k);
    for (std::size_t i = 0; i < s.U.rows; ++i) {
        for (std::size_t c = 0; c < k; ++c) {
            basis(i, c) = s.U(i, c);
        }
    }
    return basis;
}

FeatureVector project(const Matrix& basis, const std::vector<double>& centered)
{
    if (centered.size() != basis.rows) {
        throw Error(ErrorCode::DimensionMismatch, "vector has " + std::to_string(centered.size()) + " entries, basis has " +
                                                      std::to_string(basis.rows) + " rows");
    }
    FeatureVector w(basis.cols, 0.0);
    for (std::size_t c = 0; c < basis.cols; ++c) {
        for (std::size_t j = 0; j < basis.rows; ++j) {
            w[c] += basis(j, c) * centered[j];
        }
    }
    return w;
}

double rmsDistance(const FeatureVector& a, const FeatureVector& b)
{
    if (a.size() != b.size() || a.empty()) {
        throw Error(ErrorCode::DimensionMismatch, "feature vectors of length " + std::to_string(a.size()) + " and " +
                                                      std::to_string(b.size()));
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(a.size()));
}

MatchResult classify(const FeatureVector& sample, const std::vector<FeatureVector>& refs)
{
    if (refs.empty()) {
        throw Error(ErrorCode::EmptyReferences, "no reference feature vectors");
    }
    MatchResult best{0, 0, rmsDistance(sample, refs[0])};
    for (std::size_t i = 1; i < refs.size(); ++i) {
        const double d = rmsDistance(sample, refs[i]);
        if (d < best.distance) {
            best = {i, i, d};
        }
    }
    return best;
}

} // namespace redsharc::eigenfaces
