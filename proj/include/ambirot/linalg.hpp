#pragma once

// Small fixed-size linear algebra used throughout the library.
// Everything is plain doubles; no external dependencies.

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ambirot {

struct Vec3 {
    double x = 0, y = 0, z = 0;

    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(const Vec3& a) {
    double n = norm(a);
    if (n == 0) throw std::domain_error("cannot normalize zero vector");
    return a * (1.0 / n);
}

struct Mat3 {
    // row-major
    std::array<double, 9> a{};

    double& operator()(int i, int j) { return a[3 * i + j]; }
    double operator()(int i, int j) const { return a[3 * i + j]; }

    static Mat3 identity() { return {{1, 0, 0, 0, 1, 0, 0, 0, 1}}; }
    static Mat3 zero() { return {}; }
    static Mat3 diag(double d0, double d1, double d2) { return {{d0, 0, 0, 0, d1, 0, 0, 0, d2}}; }
    static Mat3 from_cols(const Vec3& c0, const Vec3& c1, const Vec3& c2) {
        return {{c0.x, c1.x, c2.x, c0.y, c1.y, c2.y, c0.z, c1.z, c2.z}};
    }

    Vec3 col(int j) const { return {a[j], a[3 + j], a[6 + j]}; }
    Vec3 row(int i) const { return {a[3 * i], a[3 * i + 1], a[3 * i + 2]}; }

    Mat3 operator+(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.a[i] = a[i] + o.a[i];
        return r;
    }
    Mat3 operator-(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.a[i] = a[i] - o.a[i];
        return r;
    }
    Mat3 operator*(double s) const {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.a[i] = a[i] * s;
        return r;
    }
    Mat3 operator*(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0;
                for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
                r(i, j) = s;
            }
        return r;
    }
    Vec3 operator*(const Vec3& v) const {
        return {a[0] * v.x + a[1] * v.y + a[2] * v.z,
                a[3] * v.x + a[4] * v.y + a[5] * v.z,
                a[6] * v.x + a[7] * v.y + a[8] * v.z};
    }
};

inline Mat3 transpose(const Mat3& m) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = m(j, i);
    return r;
}

inline double trace(const Mat3& m) { return m.a[0] + m.a[4] + m.a[8]; }

inline double det(const Mat3& m) {
    return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
         - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
         + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

inline double frobenius_inner(const Mat3& a, const Mat3& b) {
    double s = 0;
    for (int i = 0; i < 9; ++i) s += a.a[i] * b.a[i];
    return s;
}

inline double max_abs_diff(const Mat3& a, const Mat3& b) {
    double m = 0;
    for (int i = 0; i < 9; ++i) m = std::max(m, std::fabs(a.a[i] - b.a[i]));
    return m;
}

inline Mat3 outer(const Vec3& u, const Vec3& v) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = u[i] * v[j];
    return r;
}

// unit quaternion (w, x, y, z)
struct Quat {
    double w = 1, x = 0, y = 0, z = 0;

    static Quat from_matrix(const Mat3& m);
    Mat3 to_matrix() const {
        Mat3 r;
        r(0, 0) = 1 - 2 * (y * y + z * z);
        r(0, 1) = 2 * (x * y - w * z);
        r(0, 2) = 2 * (x * z + w * y);
        r(1, 0) = 2 * (x * y + w * z);
        r(1, 1) = 1 - 2 * (x * x + z * z);
        r(1, 2) = 2 * (y * z - w * x);
        r(2, 0) = 2 * (x * z - w * y);
        r(2, 1) = 2 * (y * z + w * x);
        r(2, 2) = 1 - 2 * (x * x + y * y);
        return r;
    }
    Quat normalized() const {
        double n = std::sqrt(w * w + x * x + y * y + z * z);
        if (n == 0) throw std::domain_error("zero quaternion");
        return {w / n, x / n, y / n, z / n};
    }
};

inline Quat Quat::from_matrix(const Mat3& m) {
    // Shepperd's method; sign fixed so w >= 0
    Quat q;
    double t = trace(m);
    if (t > 0) {
        double s = std::sqrt(t + 1.0) * 2;
        q.w = 0.25 * s;
        q.x = (m(2, 1) - m(1, 2)) / s;
        q.y = (m(0, 2) - m(2, 0)) / s;
        q.z = (m(1, 0) - m(0, 1)) / s;
    } else if (m(0, 0) > m(1, 1) && m(0, 0) > m(2, 2)) {
        double s = std::sqrt(1.0 + m(0, 0) - m(1, 1) - m(2, 2)) * 2;
        q.w = (m(2, 1) - m(1, 2)) / s;
        q.x = 0.25 * s;
        q.y = (m(0, 1) + m(1, 0)) / s;
        q.z = (m(0, 2) + m(2, 0)) / s;
    } else if (m(1, 1) > m(2, 2)) {
        double s = std::sqrt(1.0 + m(1, 1) - m(0, 0) - m(2, 2)) * 2;
        q.w = (m(0, 2) - m(2, 0)) / s;
        q.x = (m(0, 1) + m(1, 0)) / s;
        q.y = 0.25 * s;
        q.z = (m(1, 2) + m(2, 1)) / s;
    } else {
        double s = std::sqrt(1.0 + m(2, 2) - m(0, 0) - m(1, 1)) * 2;
        q.w = (m(1, 0) - m(0, 1)) / s;
        q.x = (m(0, 2) + m(2, 0)) / s;
        q.y = (m(1, 2) + m(2, 1)) / s;
        q.z = 0.25 * s;
    }
    if (q.w < 0) { q.w = -q.w; q.x = -q.x; q.y = -q.y; q.z = -q.z; }
    return q;
}

// Jacobi eigendecomposition of a symmetric n x n matrix (row-major, dense).
// Returns eigenvalues in descending order; eigenvectors (columns) optional.
inline std::vector<double> jacobi_eigenvalues(std::vector<double> a, int n,
                                              std::vector<double>* vectors = nullptr) {
    std::vector<double> v;
    if (vectors) {
        v.assign(static_cast<size_t>(n) * n, 0.0);
        for (int i = 0; i < n; ++i) v[static_cast<size_t>(i) * n + i] = 1.0;
    }
    auto at = [&](int i, int j) -> double& { return a[static_cast<size_t>(i) * n + j]; };
    for (int sweep = 0; sweep < 200; ++sweep) {
        double off = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
        if (off < 1e-24) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                double apq = at(p, q);
                if (std::fabs(apq) < 1e-300) continue;
                double theta = (at(q, q) - at(p, p)) / (2 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1));
                double c = 1 / std::sqrt(t * t + 1), s = t * c;
                for (int k = 0; k < n; ++k) {
                    double akp = at(k, p), akq = at(k, q);
                    at(k, p) = c * akp - s * akq;
                    at(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = at(p, k), aqk = at(q, k);
                    at(p, k) = c * apk - s * aqk;
                    at(q, k) = s * apk + c * aqk;
                }
                if (vectors)
                    for (int k = 0; k < n; ++k) {
                        double vkp = v[static_cast<size_t>(k) * n + p];
                        double vkq = v[static_cast<size_t>(k) * n + q];
                        v[static_cast<size_t>(k) * n + p] = c * vkp - s * vkq;
                        v[static_cast<size_t>(k) * n + q] = s * vkp + c * vkq;
                    }
            }
    }
    std::vector<double> evals(n);
    for (int i = 0; i < n; ++i) evals[i] = at(i, i);
    // sort descending; carry vectors along
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (evals[order[j]] > evals[order[i]]) std::swap(order[i], order[j]);
    std::vector<double> sorted(n);
    for (int i = 0; i < n; ++i) sorted[i] = evals[order[i]];
    if (vectors) {
        vectors->assign(static_cast<size_t>(n) * n, 0.0);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k)
                (*vectors)[static_cast<size_t>(k) * n + i] = v[static_cast<size_t>(k) * n + order[i]];
    }
    return sorted;
}

inline std::array<double, 3> sym3_eigenvalues(const Mat3& m) {
    std::vector<double> a(m.a.begin(), m.a.end());
    auto e = jacobi_eigenvalues(std::move(a), 3);
    return {e[0], e[1], e[2]};
}

// Inverse of a symmetric positive definite 3x3 via adjugate; throws when singular.
inline Mat3 sym3_inverse(const Mat3& m, double min_det = 1e-300) {
    double d = det(m);
    if (!(std::fabs(d) > min_det)) throw std::domain_error("singular 3x3 matrix");
    Mat3 r;
    r(0, 0) = (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) / d;
    r(0, 1) = (m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2)) / d;
    r(0, 2) = (m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1)) / d;
    r(1, 0) = (m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2)) / d;
    r(1, 1) = (m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0)) / d;
    r(1, 2) = (m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2)) / d;
    r(2, 0) = (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0)) / d;
    r(2, 1) = (m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1)) / d;
    r(2, 2) = (m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0)) / d;
    return r;
}

// Nearest rotation to an arbitrary 3x3 (orthogonal Procrustes, det +1).
// Via eigendecomposition of X^T X; robust for near-orthogonal inputs.
inline Mat3 nearest_rotation(const Mat3& x) {
    Mat3 xtx = transpose(x) * x;
    std::vector<double> a(xtx.a.begin(), xtx.a.end());
    std::vector<double> vecs;
    auto lam = jacobi_eigenvalues(std::move(a), 3, &vecs);
    if (lam[2] <= 0) throw std::domain_error("rank-deficient matrix has no unique nearest rotation");
    Mat3 v;
    for (int i = 0; i < 9; ++i) v.a[i] = vecs[i];
    Mat3 inv_sqrt = Mat3::zero();
    for (int k = 0; k < 3; ++k) {
        double s = 1.0 / std::sqrt(lam[k]);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) inv_sqrt(i, j) += s * v(i, k) * v(j, k);
    }
    Mat3 r = x * inv_sqrt;
    if (det(r) < 0) {
        // flip the axis of the smallest singular value
        Mat3 flip = Mat3::zero();
        for (int k = 0; k < 3; ++k) {
            double s = (k == 2 ? -1.0 : 1.0);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) flip(i, j) += s * v(i, k) * v(j, k);
        }
        // recompute with the flipped projector: r = x * (xtx)^{-1/2} * flip_in_right_basis
        Mat3 inv_sqrt_f = Mat3::zero();
        for (int k = 0; k < 3; ++k) {
            double s = (k == 2 ? -1.0 : 1.0) / std::sqrt(lam[k]);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) inv_sqrt_f(i, j) += s * v(i, k) * v(j, k);
        }
        r = x * inv_sqrt_f;
    }
    return r;
}

} // namespace ambirot
