#pragma once

#include "actmc/rational.hpp"

#include <stdexcept>
#include <vector>

namespace actmc {

using Matrix = std::vector<std::vector<Rational>>;

struct SingularMatrix : std::runtime_error {
    SingularMatrix(size_t col, const std::string& what) : std::runtime_error(what), column(col) {}
    size_t column;
};

// Exact solution of A x = b.  Rows are cleared of denominators and reduced by
// fraction-free (Bareiss) elimination with row pivoting.
std::vector<Rational> solve_exact(const Matrix& A, const std::vector<Rational>& b);

}  // namespace actmc
