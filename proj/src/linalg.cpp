#include "qlat/linalg.hpp"

#include "qlat/errors.hpp"

#include <cmath>
#include <cstdlib>

namespace qlat {

Matrix operator*(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) {
                out(i, j) += aik * b(k, j);
            }
        }
    }
    return out;
}

double one_norm(const Matrix& a) {
    double best = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) col += std::abs(a(i, j));
        if (col > best) best = col;
    }
    return best;
}

double symmetry_defect(const Matrix& a) {
    double defect = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            scale = std::max(scale, std::abs(a(i, j)));
            if (j > i) defect = std::max(defect, std::abs(a(i, j) - a(j, i)));
        }
    }
    if (scale == 0.0) return 0.0;
    return defect / scale;
}

LuDecomposition lu_factor(Matrix a) {
    const std::size_t n = a.rows();
    LuDecomposition dec;
    dec.pivot.resize(n);
    for (std::size_t i = 0; i < n; ++i) dec.pivot[i] = i;

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::abs(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(a(i, k));
            if (v > best) {
                best = v;
                p = i;
            }
        }
        if (best == 0.0) throw NumericError("lu_factor: matrix is singular");
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
            std::swap(dec.pivot[k], dec.pivot[p]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            a(i, k) /= a(k, k);
            const double lik = a(i, k);
            if (lik == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= lik * a(k, j);
        }
    }
    dec.lu = std::move(a);
    return dec;
}

std::vector<double> LuDecomposition::solve(const std::vector<double>& rhs) const {
    const std::size_t n = lu.rows();
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = rhs[pivot[i]];
    for (std::size_t i = 1; i < n; ++i) {
        double s = x[i];
        for (std::size_t j = 0; j < i; ++j) s -= lu(i, j) * x[j];
        x[i] = s;
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = x[ii];
        for (std::size_t j = ii + 1; j < n; ++j) s -= lu(ii, j) * x[j];
        x[ii] = s / lu(ii, ii);
    }
    return x;
}

Matrix invert(const Matrix& a) {
    const std::size_t n = a.rows();
    const LuDecomposition dec = lu_factor(a);
    Matrix inv(n, n);
    std::vector<double> e(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        const std::vector<double> col = dec.solve(e);
        e[j] = 0.0;
        for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
    }
    return inv;
}

double condition_1norm(const Matrix& a, const Matrix& a_inv) {
    return one_norm(a) * one_norm(a_inv);
}

} // namespace qlat
