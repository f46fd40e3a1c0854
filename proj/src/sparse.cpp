#include "dynbc/sparse.hpp"

#include "dynbc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace dynbc {

SparseMatrix::SparseMatrix(int n) : n_(n), row_offsets_(static_cast<std::size_t>(n) + 1, 0) {
    if (n < 0) throw InvalidArgument("SparseMatrix: negative dimension");
}

SparseMatrix SparseMatrix::from_triplets(int n, std::vector<Triplet> triplets) {
    SparseMatrix m(n);
    for (const auto& t : triplets) {
        if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n)
            throw InvalidArgument("SparseMatrix: triplet index out of range");
    }
    // Stable sort keeps the summation order of duplicates equal to insertion order.
    std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    m.col_indices_.reserve(triplets.size());
    m.values_.reserve(triplets.size());
    std::size_t k = 0;
    for (int r = 0; r < n; ++r) {
        while (k < triplets.size() && triplets[k].row == r) {
            const int c = triplets[k].col;
            double sum = 0.0;
            while (k < triplets.size() && triplets[k].row == r && triplets[k].col == c) {
                sum += triplets[k].value;
                ++k;
            }
            m.col_indices_.push_back(c);
            m.values_.push_back(sum);
        }
        m.row_offsets_[static_cast<std::size_t>(r) + 1] = static_cast<int>(m.col_indices_.size());
    }
    return m;
}

SparseMatrix SparseMatrix::diagonal(std::span<const double> diag) {
    const int n = static_cast<int>(diag.size());
    SparseMatrix m(n);
    m.col_indices_.resize(diag.size());
    m.values_.assign(diag.begin(), diag.end());
    for (int i = 0; i < n; ++i) {
        m.col_indices_[static_cast<std::size_t>(i)] = i;
        m.row_offsets_[static_cast<std::size_t>(i) + 1] = i + 1;
    }
    return m;
}

SparseMatrix SparseMatrix::identity(int n) {
    return diagonal(Vector(static_cast<std::size_t>(n), 1.0));
}

double SparseMatrix::at(int row, int col) const {
    const auto begin = col_indices_.begin() + row_offsets_[static_cast<std::size_t>(row)];
    const auto end = col_indices_.begin() + row_offsets_[static_cast<std::size_t>(row) + 1];
    const auto it = std::lower_bound(begin, end, col);
    if (it == end || *it != col) return 0.0;
    return values_[static_cast<std::size_t>(it - col_indices_.begin())];
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    if (x.size() != static_cast<std::size_t>(n_) || y.size() != static_cast<std::size_t>(n_))
        throw InvalidArgument("SparseMatrix::multiply: dimension mismatch");
    for (int r = 0; r < n_; ++r) {
        double s = 0.0;
        for (int k = row_offsets_[static_cast<std::size_t>(r)]; k < row_offsets_[static_cast<std::size_t>(r) + 1]; ++k)
            s += values_[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(col_indices_[static_cast<std::size_t>(k)])];
        y[static_cast<std::size_t>(r)] = s;
    }
}

Vector SparseMatrix::operator*(std::span<const double> x) const {
    Vector y(static_cast<std::size_t>(n_));
    multiply(x, y);
    return y;
}

double SparseMatrix::bilinear(std::span<const double> x, std::span<const double> y) const {
    const Vector ay = (*this) * y;
    return dot(x, ay);
}

Vector SparseMatrix::diagonal_entries() const {
    Vector d(static_cast<std::size_t>(n_), 0.0);
    for (int r = 0; r < n_; ++r) d[static_cast<std::size_t>(r)] = at(r, r);
    return d;
}

Vector SparseMatrix::row_sums() const {
    Vector s(static_cast<std::size_t>(n_), 0.0);
    for (int r = 0; r < n_; ++r)
        for (int k = row_offsets_[static_cast<std::size_t>(r)]; k < row_offsets_[static_cast<std::size_t>(r) + 1]; ++k)
            s[static_cast<std::size_t>(r)] += values_[static_cast<std::size_t>(k)];
    return s;
}

bool SparseMatrix::is_diagonal() const {
    for (int r = 0; r < n_; ++r)
        for (int k = row_offsets_[static_cast<std::size_t>(r)]; k < row_offsets_[static_cast<std::size_t>(r) + 1]; ++k)
            if (col_indices_[static_cast<std::size_t>(k)] != r && values_[static_cast<std::size_t>(k)] != 0.0) return false;
    return true;
}

double SparseMatrix::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double SparseMatrix::asymmetry() const {
    double d = 0.0;
    for (int r = 0; r < n_; ++r)
        for (int k = row_offsets_[static_cast<std::size_t>(r)]; k < row_offsets_[static_cast<std::size_t>(r) + 1]; ++k)
            d = std::max(d, std::abs(values_[static_cast<std::size_t>(k)] - at(col_indices_[static_cast<std::size_t>(k)], r)));
    return d;
}

SparseMatrix SparseMatrix::scaled(double s) const {
    SparseMatrix m = *this;
    for (double& v : m.values_) v *= s;
    return m;
}

Eigen::MatrixXd SparseMatrix::dense_block(std::span<const int> rows, std::span<const int> cols) const {
    std::vector<int> col_pos(static_cast<std::size_t>(n_), -1);
    for (std::size_t j = 0; j < cols.size(); ++j) col_pos[static_cast<std::size_t>(cols[j])] = static_cast<int>(j);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const int r = rows[i];
        for (int k = row_offsets_[static_cast<std::size_t>(r)]; k < row_offsets_[static_cast<std::size_t>(r) + 1]; ++k) {
            const int j = col_pos[static_cast<std::size_t>(col_indices_[static_cast<std::size_t>(k)])];
            if (j >= 0) d(static_cast<Eigen::Index>(i), j) = values_[static_cast<std::size_t>(k)];
        }
    }
    return d;
}

SparseMatrix SparseMatrix::submatrix(std::span<const int> rows, std::span<const int> cols) const {
    if (rows.size() != cols.size()) throw InvalidArgument("submatrix: only square blocks are supported");
    std::vector<int> col_pos(static_cast<std::size_t>(n_), -1);
    for (std::size_t j = 0; j < cols.size(); ++j) col_pos[static_cast<std::size_t>(cols[j])] = static_cast<int>(j);
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const int r = rows[i];
        for (int k = row_offsets_[static_cast<std::size_t>(r)]; k < row_offsets_[static_cast<std::size_t>(r) + 1]; ++k) {
            const int j = col_pos[static_cast<std::size_t>(col_indices_[static_cast<std::size_t>(k)])];
            if (j >= 0) t.push_back({static_cast<int>(i), j, values_[static_cast<std::size_t>(k)]});
        }
    }
    return from_triplets(static_cast<int>(rows.size()), std::move(t));
}

Eigen::MatrixXd SparseMatrix::to_dense() const {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n_, n_);
    for (int r = 0; r < n_; ++r)
        for (int k = row_offsets_[static_cast<std::size_t>(r)]; k < row_offsets_[static_cast<std::size_t>(r) + 1]; ++k)
            d(r, col_indices_[static_cast<std::size_t>(k)]) = values_[static_cast<std::size_t>(k)];
    return d;
}

Eigen::SparseMatrix<double> SparseMatrix::to_eigen() const {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(values_.size());
    for (int r = 0; r < n_; ++r)
        for (int k = row_offsets_[static_cast<std::size_t>(r)]; k < row_offsets_[static_cast<std::size_t>(r) + 1]; ++k)
            t.emplace_back(r, col_indices_[static_cast<std::size_t>(k)], values_[static_cast<std::size_t>(k)]);
    Eigen::SparseMatrix<double> e(n_, n_);
    e.setFromTriplets(t.begin(), t.end());
    return e;
}

void SparseMatrix::write_coordinate(std::ostream& os) const {
    const auto old_precision = os.precision();
    os << std::setprecision(17);
    for (int r = 0; r < n_; ++r)
        for (int k = row_offsets_[static_cast<std::size_t>(r)]; k < row_offsets_[static_cast<std::size_t>(r) + 1]; ++k)
            os << r << ' ' << col_indices_[static_cast<std::size_t>(k)] << ' ' << values_[static_cast<std::size_t>(k)] << '\n';
    os.precision(old_precision);
}

SparseMatrix add_scaled(const SparseMatrix& a, double s, const SparseMatrix& b) {
    if (a.size() != b.size()) throw InvalidArgument("add_scaled: dimension mismatch");
    std::vector<Triplet> t;
    t.reserve(a.nonzeros() + b.nonzeros());
    const auto push = [&t](const SparseMatrix& m, double scale) {
        const auto off = m.row_offsets();
        const auto col = m.col_indices();
        const auto val = m.values();
        for (int r = 0; r < m.size(); ++r)
            for (int k = off[static_cast<std::size_t>(r)]; k < off[static_cast<std::size_t>(r) + 1]; ++k)
                t.push_back({r, col[static_cast<std::size_t>(k)], scale * val[static_cast<std::size_t>(k)]});
    };
    push(a, 1.0);
    push(b, s);
    return SparseMatrix::from_triplets(a.size(), std::move(t));
}

SparseMatrix operator+(const SparseMatrix& a, const SparseMatrix& b) { return add_scaled(a, 1.0, b); }

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InvalidArgument("dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm_inf(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

void axpy(double s, std::span<const double> x, std::span<double> y) {
    if (x.size() != y.size()) throw InvalidArgument("axpy: dimension mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += s * x[i];
}

}  // namespace dynbc
