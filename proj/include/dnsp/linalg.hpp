#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "image.hpp"

namespace dnsp {

/// Thin SVD Y = U diag(sigma) Z^T with R = min(rows, cols) columns in U and Z.
struct SvdResult {
    Eigen::MatrixXd U;
    std::vector<double> sigma; // descending, non-negative
    Eigen::MatrixXd Z;
};

inline Eigen::MatrixXd to_matrix(const Image& img) {
    Eigen::MatrixXd m(img.height(), img.width());
    for (std::size_t r = 0; r < img.height(); ++r)
        for (std::size_t c = 0; c < img.width(); ++c) m(r, c) = img(r, c);
    return m;
}

inline Image from_matrix(const Eigen::MatrixXd& m) {
    Image img(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
    for (std::size_t r = 0; r < img.height(); ++r)
        for (std::size_t c = 0; c < img.width(); ++c) img(r, c) = m(r, c);
    return img;
}

/// One-sided Jacobi SVD (Eigen). Throws ArgumentError on non-finite input
/// and NumericalError when the factorization does not come back clean.
inline SvdResult svd(const Image& img) {
    if (!all_finite(img.values()))
        throw ArgumentError("svd: input contains non-finite entries");
    const Eigen::MatrixXd m = to_matrix(img);
    Eigen::JacobiSVD<Eigen::MatrixXd> solver(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    // Eigen does not expose its sweep count; report the matrix order instead.
    const auto order = static_cast<std::size_t>(std::min(m.rows(), m.cols()));
    if (solver.info() != Eigen::Success)
        throw NumericalError("svd: Jacobi iteration did not converge", order);
    SvdResult out{solver.matrixU(), {}, solver.matrixV()};
    const Eigen::VectorXd& s = solver.singularValues();
    out.sigma.assign(s.data(), s.data() + s.size());
    if (!all_finite(out.sigma) || !out.U.allFinite() || !out.Z.allFinite())
        throw NumericalError("svd: non-finite factors", order);
    return out;
}

/// U diag(weights) Z^T.
inline Image svd_compose(const SvdResult& f, const std::vector<double>& weights) {
    Eigen::MatrixXd scaled = f.U;
    for (Eigen::Index i = 0; i < scaled.cols(); ++i) scaled.col(i) *= weights[static_cast<std::size_t>(i)];
    return from_matrix(scaled * f.Z.transpose());
}

/// Best rank-`rank` approximation in the Frobenius norm, obtained by zeroing
/// the smallest singular values. rank == min(rows, cols) returns the input.
inline Image truncate_svd(const Image& img, std::size_t rank) {
    const std::size_t full = std::min(img.height(), img.width());
    if (rank > full)
        throw ArgumentError("truncate_svd: rank " + std::to_string(rank) + " exceeds " + std::to_string(full));
    if (rank == full) return img;
    if (rank == 0) return Image(img.height(), img.width());
    const SvdResult f = svd(img);
    std::vector<double> kept(f.sigma.size(), 0.0);
    std::copy_n(f.sigma.begin(), rank, kept.begin());
    return svd_compose(f, kept);
}

} // namespace dnsp
