#include "actmc/linsolve.hpp"

namespace actmc {

std::vector<Rational> solve_exact(const Matrix& A, const std::vector<Rational>& b) {
    const size_t n = A.size();
    if (b.size() != n) throw std::invalid_argument("solve_exact: dimension mismatch");
    for (const auto& row : A)
        if (row.size() != n) throw std::invalid_argument("solve_exact: matrix is not square");

    // integer augmented matrix [A | b]
    std::vector<std::vector<Integer>> M(n, std::vector<Integer>(n + 1));
    for (size_t i = 0; i < n; ++i) {
        std::vector<Rational> row = A[i];
        row.push_back(b[i]);
        Integer den = common_denominator(row);
        for (size_t j = 0; j <= n; ++j) {
            Rational s = row[j] * den;
            M[i][j] = s.get_num();
        }
    }

    Integer prev = 1;
    for (size_t k = 0; k < n; ++k) {
        size_t piv = k;
        while (piv < n && M[piv][k] == 0) ++piv;
        if (piv == n)
            throw SingularMatrix(k, "singular matrix: no pivot in column " + std::to_string(k) + " (row " +
                                        std::to_string(k) + ")");
        if (piv != k) std::swap(M[piv], M[k]);
        for (size_t i = k + 1; i < n; ++i) {
            for (size_t j = k + 1; j <= n; ++j) {
                Integer t = M[k][k] * M[i][j] - M[i][k] * M[k][j];
                mpz_divexact(M[i][j].get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
            }
            M[i][k] = 0;
        }
        prev = M[k][k];
    }

    std::vector<Rational> x(n);
    for (size_t i = n; i-- > 0;) {
        Rational s(M[i][n]);
        for (size_t j = i + 1; j < n; ++j) s -= Rational(M[i][j]) * x[j];
        x[i] = s / Rational(M[i][i]);
        x[i].canonicalize();
    }
    return x;
}

}  // namespace actmc
