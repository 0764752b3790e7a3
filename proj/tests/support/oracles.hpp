#ifndef EEGFEAT_TESTS_ORACLES_HPP
#define EEGFEAT_TESTS_ORACLES_HPP

// Brute-force reference implementations, written independently of the
// library code paths (plain loops, Jacobi rotations, Gauss-Jordan) so that
// agreement actually means something.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace testsupport {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline double oracle_pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double num = 0.0, da = 0.0, db = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (a[i] - ma) * (b[i] - mb);
        da += (a[i] - ma) * (a[i] - ma);
        db += (b[i] - mb) * (b[i] - mb);
    }
    if (da == 0.0 || db == 0.0) return 0.0;
    return num / std::sqrt(da * db);
}

inline Matrix oracle_correlation(const Matrix& window) {
    const int n_c = static_cast<int>(window.rows());
    Matrix g(n_c, n_c);
    for (int i = 0; i < n_c; ++i) {
        for (int j = 0; j < n_c; ++j) {
            if (i == j) {
                g(i, j) = 1.0;
                continue;
            }
            std::vector<double> a(window.cols()), b(window.cols());
            for (int t = 0; t < window.cols(); ++t) {
                a[static_cast<std::size_t>(t)] = window(i, t);
                b[static_cast<std::size_t>(t)] = window(j, t);
            }
            double r = oracle_pearson(a, b);
            g(i, j) = std::min(1.0, std::max(-1.0, r));
        }
    }
    return g;
}

inline double oracle_frobenius(const Matrix& a, const Matrix& b) {
    double ss = 0.0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) ss += (a(i, j) - b(i, j)) * (a(i, j) - b(i, j));
    return std::sqrt(ss);
}

inline Matrix oracle_similarity(const Matrix& d) {
    double lo = d(0, 0), hi = d(0, 0);
    for (int i = 0; i < d.rows(); ++i)
        for (int j = 0; j < d.cols(); ++j) {
            lo = std::min(lo, d(i, j));
            hi = std::max(hi, d(i, j));
        }
    Matrix b(d.rows(), d.cols());
    for (int i = 0; i < d.rows(); ++i)
        for (int j = 0; j < d.cols(); ++j) b(i, j) = 1.0 - (d(i, j) - lo) / (hi - lo);
    return b;
}

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
// eigenvalues descending by magnitude with matching eigenvector columns.
inline void oracle_jacobi_eigen(Matrix s, Vector& eigenvalues, Matrix& eigenvectors) {
    const int n = static_cast<int>(s.rows());
    Matrix v = Matrix::Identity(n, n);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += s(p, q) * s(p, q);
        if (off < 1e-30) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(s(p, q)) < 1e-300) continue;
                const double theta = (s(q, q) - s(p, p)) / (2.0 * s(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                for (int k = 0; k < n; ++k) {
                    const double skp = s(k, p), skq = s(k, q);
                    s(k, p) = c * skp - sn * skq;
                    s(k, q) = sn * skp + c * skq;
                }
                for (int k = 0; k < n; ++k) {
                    const double spk = s(p, k), sqk = s(q, k);
                    s(p, k) = c * spk - sn * sqk;
                    s(q, k) = sn * spk + c * sqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - sn * vkq;
                    v(k, q) = sn * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (std::abs(s(order[static_cast<std::size_t>(j)], order[static_cast<std::size_t>(j)])) >
                std::abs(s(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)])))
                std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    eigenvalues.resize(n);
    eigenvectors.resize(n, n);
    for (int i = 0; i < n; ++i) {
        eigenvalues[i] = s(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
        eigenvectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
    }
}

// SVD factor U sigma^{1/2} of a symmetric matrix via Jacobi: singular value
// |lambda|, left singular vector sign(lambda) * eigenvector, columns
// sign-fixed so the largest-magnitude entry is nonnegative.
inline Matrix oracle_symmetric_embed(const Matrix& b, int d, Vector* sigma_out = nullptr) {
    Vector lam;
    Matrix vec;
    oracle_jacobi_eigen(b, lam, vec);
    Matrix z(b.rows(), d);
    if (sigma_out) sigma_out->resize(d);
    for (int j = 0; j < d; ++j) {
        const double sigma = std::abs(lam[j]);
        Vector u = (lam[j] < 0 ? -1.0 : 1.0) * vec.col(j);
        int arg = 0;
        for (int i = 1; i < u.size(); ++i)
            if (std::abs(u[i]) > std::abs(u[arg])) arg = i;
        if (u[arg] < 0) u = -u;
        z.col(j) = std::sqrt(sigma) * u;
        if (sigma_out) (*sigma_out)[j] = sigma;
    }
    return z;
}

inline int oracle_profile_split(const std::vector<double>& v) {
    const int n = static_cast<int>(v.size());
    int best_q = 1;
    double best_ll = -std::numeric_limits<double>::infinity();
    for (int q = 1; q < n; ++q) {
        double m1 = 0.0, m2 = 0.0;
        for (int i = 0; i < q; ++i) m1 += v[static_cast<std::size_t>(i)];
        for (int i = q; i < n; ++i) m2 += v[static_cast<std::size_t>(i)];
        m1 /= q;
        m2 /= n - q;
        double ss = 0.0;
        for (int i = 0; i < q; ++i) ss += (v[static_cast<std::size_t>(i)] - m1) * (v[static_cast<std::size_t>(i)] - m1);
        for (int i = q; i < n; ++i) ss += (v[static_cast<std::size_t>(i)] - m2) * (v[static_cast<std::size_t>(i)] - m2);
        double var = std::max(ss / std::max(n - 2, 1), 1e-12);
        double ll = -0.5 * n * std::log(2.0 * 3.14159265358979323846 * var) - ss / (2.0 * var);
        if (ll > best_ll) {
            best_ll = ll;
            best_q = q;
        }
    }
    return best_q;
}

inline int oracle_second_elbow(const std::vector<double>& v) {
    const int q1 = oracle_profile_split(v);
    if (static_cast<int>(v.size()) - q1 < 2) return q1;
    std::vector<double> tail(v.begin() + q1, v.end());
    return q1 + oracle_profile_split(tail);
}

// Gauss-Jordan inverse with partial pivoting, for small matrices.
inline Matrix oracle_inverse(Matrix m) {
    const int n = static_cast<int>(m.rows());
    Matrix inv = Matrix::Identity(n, n);
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(m(r, col)) > std::abs(m(pivot, col))) pivot = r;
        if (m(pivot, col) == 0.0) throw std::runtime_error("oracle_inverse: singular matrix");
        m.row(col).swap(m.row(pivot));
        inv.row(col).swap(inv.row(pivot));
        const double d = m(col, col);
        m.row(col) /= d;
        inv.row(col) /= d;
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = m(r, col);
            m.row(r) -= f * m.row(col);
            inv.row(r) -= f * inv.row(col);
        }
    }
    return inv;
}

} // namespace testsupport

#endif
