#pragma once

#include <cstddef>
#include <vector>

namespace cvae {

// Dense symmetric matrix, row-major storage. Symmetry is enforced at
// construction and preserved by set().
class SymMatrix {
public:
    explicit SymMatrix(std::size_t n);
    SymMatrix(std::size_t n, const std::vector<double>& entries);

    std::size_t size() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
    void set(std::size_t i, std::size_t j, double v) {
        data_[i * n_ + j] = v;
        data_[j * n_ + i] = v;
    }
    const std::vector<double>& data() const { return data_; }
    double frobenius_norm() const;

private:
    std::size_t n_;
    std::vector<double> data_;
};

struct EigenDecomp {
    std::vector<double> eigenvalues;        // ascending
    std::vector<std::vector<double>> eigenvectors;  // eigenvectors[k] pairs with eigenvalues[k]
};

// Cyclic Jacobi rotations; deterministic, eigenvalues ascending.
EigenDecomp sym_eigendecomp(const SymMatrix& a);

// Moore-Penrose pseudoinverse through the eigendecomposition. Eigenvalues with
// |lambda| <= rank_tol * max|lambda| are treated as zero.
SymMatrix pinv(const SymMatrix& a, double rank_tol = 1e-10);

// Determinant by LU with partial pivoting on a dense copy.
double determinant(const SymMatrix& a);

struct PrincipalComponent {
    std::vector<double> direction;  // unit norm, d entries
    std::vector<double> scores;     // n entries, centered rows projected onto direction
};

// First principal component of the n x d row matrix x.
PrincipalComponent first_principal_component(const std::vector<std::vector<double>>& x);

}  // namespace cvae
