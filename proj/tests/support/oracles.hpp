#pragma once

// Slow reference implementations. Everything here recomputes covariances
// from the retained rows directly, with no shared sums or downdates, so the
// library's fast paths are checked against an unrelated code path.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct IndexPair {
    std::size_t i, j;
};

struct Sets {
    std::vector<IndexPair> pairs;
    std::vector<std::size_t> singles;
};

Sets all_pairs(std::size_t p);
Sets diagonal(std::size_t p);

/// Rows of x whose index is not in `excluded`.
Matrix drop_rows(const Matrix& x, const std::vector<std::size_t>& excluded);

/// Unbiased sample covariance (denominator m - 1) of the rows.
Matrix covariance(const Matrix& rows);

Vector mean(const Matrix& rows);

/// Dense sum of E' inv(S_block) E over pairs plus e e' / s_ii over singles.
Matrix projector(const Matrix& s, const Sets& sets);

/// Naive concordance count, tau-a.
double kendall(const Vector& a, const Vector& b);

double w1(const Matrix& x, const Vector& mu0);
double t1(const Matrix& x, const Vector& mu0, const Sets& sets);
double trace1(const Matrix& x, const Sets& sets);

/// Two-sample pieces; `verbatim` selects the (n1-2) S1 + n2 S2 pooling,
/// otherwise (n1-3) S1 + (n2-1) S2 over N - 4.
double w2(const Matrix& x, const Matrix& y);
double t2(const Matrix& x, const Matrix& y, const Sets& sets, bool verbatim = true);
double trace2(const Matrix& x, const Matrix& y, const Sets& sets, bool verbatim = true);

/// Diagonal-only T2 written with scalar loops and no matrices at all.
double t2_diagonal(const std::vector<std::vector<double>>& x,
                   const std::vector<std::vector<double>>& y);

std::vector<std::vector<double>> to_rows(const Matrix& m);

}  // namespace oracle
