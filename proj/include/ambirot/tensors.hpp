#pragma once

// Symmetric tensors over R^3.
//
// SymTensor stores one coefficient per monomial multi-index (a,b,c) with
// a+b+c = rank; the inner product carries multinomial multiplicity weights so
// it equals the full componentwise contraction of the underlying tensors.
// DenseTensor is the uncompressed 3^rank array used as a brute-force oracle
// and for inherently non-symmetric inputs (symmetrize, Kronecker powers).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ambirot/linalg.hpp"

namespace ambirot {

namespace detail {

inline double factorial(int n) {
    double f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

inline double binomial(int n, int k) {
    return std::round(factorial(n) / (factorial(k) * factorial(n - k)));
}

} // namespace detail

class SymTensor {
public:
    SymTensor() = default;
    explicit SymTensor(int rank) : rank_(rank) {
        if (rank < 1) throw std::invalid_argument("SymTensor rank must be >= 1");
        build_index();
        coeff_.assign(monomials_.size(), 0.0);
    }

    int rank() const { return rank_; }
    size_t size() const { return coeff_.size(); }
    const std::vector<std::array<int, 3>>& monomials() const { return monomials_; }
    double& operator[](size_t k) { return coeff_[k]; }
    double operator[](size_t k) const { return coeff_[k]; }

    double multiplicity(size_t k) const { return mult_[k]; }

    // T += w * u^{tensor rank}
    void add_outer_power(const Vec3& u, double w = 1.0) {
        for (size_t k = 0; k < monomials_.size(); ++k) {
            auto [a, b, c] = monomials_[k];
            coeff_[k] += w * ipow(u.x, a) * ipow(u.y, b) * ipow(u.z, c);
        }
    }

    // T += w * symm(I^{tensor m}) with 2m == rank
    void add_symmetrized_identity_power(double w = 1.0) {
        if (rank_ % 2 != 0) throw std::invalid_argument("identity power needs even rank");
        int m = rank_ / 2;
        for (size_t k = 0; k < monomials_.size(); ++k) {
            auto [a, b, c] = monomials_[k];
            if (a % 2 || b % 2 || c % 2) continue;
            double val = detail::factorial(m) * detail::factorial(a) * detail::factorial(b) *
                         detail::factorial(c) /
                         (detail::factorial(a / 2) * detail::factorial(b / 2) *
                          detail::factorial(c / 2) * detail::factorial(rank_));
            coeff_[k] += w * val;
        }
    }

    SymTensor& operator+=(const SymTensor& o) {
        check_match(o);
        for (size_t k = 0; k < coeff_.size(); ++k) coeff_[k] += o.coeff_[k];
        return *this;
    }
    SymTensor& scale(double s) {
        for (auto& c : coeff_) c *= s;
        return *this;
    }

    // full tensor contraction <S, T> (multiplicity-weighted dot)
    double dot(const SymTensor& o) const {
        check_match(o);
        double s = 0;
        for (size_t k = 0; k < coeff_.size(); ++k) s += mult_[k] * coeff_[k] * o.coeff_[k];
        return s;
    }

    double norm2() const { return dot(*this); }

    // gradient of u -> <u^{tensor rank}, T> ; equals rank * T(u,...,u,·)
    Vec3 outer_power_gradient(const Vec3& u) const {
        Vec3 g{};
        if (rank_ == 1) {
            for (size_t k = 0; k < monomials_.size(); ++k) {
                auto [a, b, c] = monomials_[k];
                g[a ? 0 : (b ? 1 : 2)] += coeff_[k];
            }
            return g;
        }
        SymTensor lower(rank_ - 1);
        for (size_t k = 0; k < lower.monomials_.size(); ++k) {
            auto [a, b, c] = lower.monomials_[k];
            double w = lower.mult_[k] * ipow(u.x, a) * ipow(u.y, b) * ipow(u.z, c) * rank_;
            g.x += w * coeff_[index_of(a + 1, b, c)];
            g.y += w * coeff_[index_of(a, b + 1, c)];
            g.z += w * coeff_[index_of(a, b, c + 1)];
        }
        return g;
    }

    size_t index_of(int a, int b, int c) const {
        // lexicographic by (a, b) within fixed rank
        int r = rank_;
        int before_a = 0;
        for (int aa = r; aa > a; --aa) before_a += r - aa + 1;
        return static_cast<size_t>(before_a + (r - a - b));
    }

private:
    void build_index() {
        for (int a = rank_; a >= 0; --a)
            for (int b = rank_ - a; b >= 0; --b)
                monomials_.push_back({a, b, rank_ - a - b});
        mult_.resize(monomials_.size());
        for (size_t k = 0; k < monomials_.size(); ++k) {
            auto [a, b, c] = monomials_[k];
            mult_[k] = detail::factorial(rank_) /
                       (detail::factorial(a) * detail::factorial(b) * detail::factorial(c));
        }
    }

    void check_match(const SymTensor& o) const {
        if (rank_ != o.rank_) throw std::invalid_argument("SymTensor rank mismatch");
    }

    static double ipow(double x, int p) {
        double y = 1;
        for (int i = 0; i < p; ++i) y *= x;
        return y;
    }

    int rank_ = 0;
    std::vector<std::array<int, 3>> monomials_;
    std::vector<double> mult_;
    std::vector<double> coeff_;
};

// Uncompressed rank-r tensor over R^3 (3^r coefficients, row-major indices).
class DenseTensor {
public:
    explicit DenseTensor(int rank) : rank_(rank) {
        size_t n = 1;
        for (int i = 0; i < rank; ++i) n *= 3;
        coeff_.assign(n, 0.0);
    }

    int rank() const { return rank_; }
    size_t size() const { return coeff_.size(); }
    double& operator[](size_t k) { return coeff_[k]; }
    double operator[](size_t k) const { return coeff_[k]; }

    static DenseTensor outer_power(const Vec3& u, int rank) {
        DenseTensor t(rank);
        for (size_t flat = 0; flat < t.size(); ++flat) {
            size_t f = flat;
            double v = 1;
            for (int i = 0; i < rank; ++i) {
                v *= u[static_cast<int>(f % 3)];
                f /= 3;
            }
            t.coeff_[flat] = v;
        }
        return t;
    }

    DenseTensor& operator+=(const DenseTensor& o) {
        if (rank_ != o.rank_) throw std::invalid_argument("DenseTensor rank mismatch");
        for (size_t k = 0; k < coeff_.size(); ++k) coeff_[k] += o.coeff_[k];
        return *this;
    }
    DenseTensor& scale(double s) {
        for (auto& c : coeff_) c *= s;
        return *this;
    }

    double dot(const DenseTensor& o) const {
        if (rank_ != o.rank_) throw std::invalid_argument("DenseTensor rank mismatch");
        double s = 0;
        for (size_t k = 0; k < coeff_.size(); ++k) s += coeff_[k] * o.coeff_[k];
        return s;
    }

    std::vector<int> unflatten(size_t flat) const {
        std::vector<int> idx(rank_);
        for (int i = 0; i < rank_; ++i) {
            idx[i] = static_cast<int>(flat % 3);
            flat /= 3;
        }
        return idx;
    }

    size_t flatten(const std::vector<int>& idx) const {
        size_t f = 0;
        for (int i = rank_ - 1; i >= 0; --i) f = f * 3 + idx[i];
        return f;
    }

private:
    int rank_ = 0;
    std::vector<double> coeff_;
};

// average over all rank! index permutations; idempotent
inline DenseTensor symmetrize(const DenseTensor& t) {
    int r = t.rank();
    DenseTensor out(r);
    std::vector<int> perm(r);
    for (int i = 0; i < r; ++i) perm[i] = i;
    double count = 0;
    std::vector<int> src(r), dst(r);
    do {
        count += 1;
        for (size_t flat = 0; flat < t.size(); ++flat) {
            size_t f = flat;
            for (int i = 0; i < r; ++i) {
                src[i] = static_cast<int>(f % 3);
                f /= 3;
            }
            for (int i = 0; i < r; ++i) dst[i] = src[perm[i]];
            size_t g = 0;
            for (int i = r - 1; i >= 0; --i) g = g * 3 + dst[i];
            out[g] += t[flat];
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    out.scale(1.0 / count);
    return out;
}

inline DenseTensor to_dense(const SymTensor& t) {
    DenseTensor d(t.rank());
    for (size_t flat = 0; flat < d.size(); ++flat) {
        auto idx = d.unflatten(flat);
        int a = 0, b = 0, c = 0;
        for (int i : idx) (i == 0 ? a : (i == 1 ? b : c))++;
        d[flat] = t[t.index_of(a, b, c)];
    }
    return d;
}

inline DenseTensor dense_symmetrized_identity_power(int m) {
    DenseTensor base(2 * m);
    // product of deltas on consecutive index pairs, then symmetrized
    for (size_t flat = 0; flat < base.size(); ++flat) {
        auto idx = base.unflatten(flat);
        double v = 1;
        for (int k = 0; k < m; ++k)
            if (idx[2 * k] != idx[2 * k + 1]) { v = 0; break; }
        base[flat] = v;
    }
    return symmetrize(base);
}

} // namespace ambirot
