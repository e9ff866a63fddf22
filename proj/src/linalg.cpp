#include "lagdyn/linalg.hpp"

#include <cmath>
#include <sstream>

#include "lagdyn/errors.hpp"

namespace lagdyn::linalg {

void matmul(const double* a, const double* b, double* out, int r, int k, int c,
            bool accumulate) {
    for (int i = 0; i < r; ++i) {
        double* oi = out + static_cast<size_t>(i) * c;
        if (!accumulate)
            for (int j = 0; j < c; ++j) oi[j] = 0.0;
        const double* ai = a + static_cast<size_t>(i) * k;
        for (int p = 0; p < k; ++p) {
            const double aip = ai[p];
            const double* bp = b + static_cast<size_t>(p) * c;
            for (int j = 0; j < c; ++j) oi[j] += aip * bp[j];
        }
    }
}

void matvec(const double* a, const double* x, double* out, int r, int k,
            bool accumulate) {
    for (int i = 0; i < r; ++i) {
        const double* ai = a + static_cast<size_t>(i) * k;
        double acc = 0.0;
        for (int p = 0; p < k; ++p) acc += ai[p] * x[p];
        out[i] = accumulate ? out[i] + acc : acc;
    }
}

void matvec_t(const double* a, const double* x, double* out, int r, int k,
              bool accumulate) {
    if (!accumulate)
        for (int j = 0; j < k; ++j) out[j] = 0.0;
    for (int i = 0; i < r; ++i) {
        const double* ai = a + static_cast<size_t>(i) * k;
        const double xi = x[i];
        for (int j = 0; j < k; ++j) out[j] += xi * ai[j];
    }
}

double dot(const double* a, const double* b, int n) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void cholesky_factor(Tensor& a) {
    if (a.ndim() != 2 || a.dim(0) != a.dim(1))
        throw UsageError("cholesky_factor expects a square matrix, got " +
                         Tensor::shape_string(a.shape()));
    const int n = a.dim(0);
    for (int j = 0; j < n; ++j) {
        double d = a.at(j, j);
        for (int p = 0; p < j; ++p) d -= a.at(j, p) * a.at(j, p);
        if (!(d > 0.0) || !std::isfinite(d)) {
            std::ostringstream msg;
            msg << "matrix is not positive definite (pivot " << j << " = " << d << ")";
            throw NumericalError(msg.str());
        }
        const double ljj = std::sqrt(d);
        a.at(j, j) = ljj;
        for (int i = j + 1; i < n; ++i) {
            double s = a.at(i, j);
            for (int p = 0; p < j; ++p) s -= a.at(i, p) * a.at(j, p);
            a.at(i, j) = s / ljj;
        }
        for (int k = j + 1; k < n; ++k) a.at(j, k) = 0.0;
    }
}

void cholesky_solve_factored(const Tensor& l, const double* b, double* x) {
    const int n = l.dim(0);
    // forward: L y = b
    for (int i = 0; i < n; ++i) {
        double s = b[i];
        for (int p = 0; p < i; ++p) s -= l.at(i, p) * x[p];
        x[i] = s / l.at(i, i);
    }
    // backward: L^T x = y
    for (int i = n - 1; i >= 0; --i) {
        double s = x[i];
        for (int p = i + 1; p < n; ++p) s -= l.at(p, i) * x[p];
        x[i] = s / l.at(i, i);
    }
}

Tensor cholesky_solve(const Tensor& a, const Tensor& b) {
    Tensor l = a;
    cholesky_factor(l);
    Tensor x({a.dim(0)});
    cholesky_solve_factored(l, b.data(), x.data());
    return x;
}

} // namespace lagdyn::linalg
