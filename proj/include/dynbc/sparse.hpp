#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace dynbc {

using Vector = std::vector<double>;

/// One (row, col, value) contribution; duplicates are summed on assembly.
struct Triplet {
    int row;
    int col;
    double value;
};

/// Square sparse matrix in compressed row storage.
///
/// Column indices are sorted and unique inside every row. Explicit zeros are
/// allowed (they appear when contributions cancel) and carry no meaning.
class SparseMatrix {
public:
    SparseMatrix() = default;
    explicit SparseMatrix(int n);

    /// Builds from triplets. Duplicates are summed in a fixed order, so the
    /// result does not depend on how the triplets were produced.
    static SparseMatrix from_triplets(int n, std::vector<Triplet> triplets);
    static SparseMatrix diagonal(std::span<const double> diag);
    static SparseMatrix identity(int n);

    int size() const noexcept { return n_; }
    std::size_t nonzeros() const noexcept { return values_.size(); }

    std::span<const int> row_offsets() const noexcept { return row_offsets_; }
    std::span<const int> col_indices() const noexcept { return col_indices_; }
    std::span<const double> values() const noexcept { return values_; }

    /// Entry lookup by binary search; zero when not stored.
    double at(int row, int col) const;

    void multiply(std::span<const double> x, std::span<double> y) const;
    Vector operator*(std::span<const double> x) const;
    Vector operator*(const Vector& x) const { return (*this) * std::span<const double>(x); }

    /// x^T A y
    double bilinear(std::span<const double> x, std::span<const double> y) const;

    Vector diagonal_entries() const;
    Vector row_sums() const;
    bool is_diagonal() const;
    double max_abs() const;
    /// max |A_ij - A_ji| over stored entries.
    double asymmetry() const;

    SparseMatrix scaled(double s) const;
    /// Principal submatrix rows/cols `rows` x `cols`, re-indexed in the given order.
    Eigen::MatrixXd dense_block(std::span<const int> rows, std::span<const int> cols) const;
    SparseMatrix submatrix(std::span<const int> rows, std::span<const int> cols) const;

    Eigen::MatrixXd to_dense() const;
    Eigen::SparseMatrix<double> to_eigen() const;

    /// Coordinate text export, `i j value` per line, lexicographic, 17 digits.
    void write_coordinate(std::ostream& os) const;

    friend SparseMatrix operator+(const SparseMatrix& a, const SparseMatrix& b);

private:
    int n_ = 0;
    std::vector<int> row_offsets_{0};
    std::vector<int> col_indices_;
    std::vector<double> values_;
};

/// a + s * b
SparseMatrix add_scaled(const SparseMatrix& a, double s, const SparseMatrix& b);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm_inf(std::span<const double> a);
/// y += s * x
void axpy(double s, std::span<const double> x, std::span<double> y);

}  // namespace dynbc
