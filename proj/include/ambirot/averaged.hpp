#pragma once

// Band-limited averaged embedding for cross-group work: centered Kronecker
// powers of the rotation matrix, averaged over right multiplication by the
// symmetry group. Two routes are provided and agree with each other:
//   * an explicit coefficient stack (levels l = 1..L of 9^l numbers), centered
//     by Monte Carlo estimates of the Haar means, and
//   * a scalar kernel using the exact Haar moments of the trace, which is what
//     the statistical routines use.

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "ambirot/rotations.hpp"

namespace ambirot {

struct AveragedEmbedding {
    GroupPtr group;
    int band_limit = 4;
    uint64_t haar_mean_seed = 20240915;
    size_t haar_mean_draws = 1000000;
};

// E[(trace U)^l] under Haar; exact integers (Riordan numbers for l >= 1)
inline double haar_trace_moment(int l) {
    static const double m[] = {1, 0, 1, 1, 3, 6, 15, 36, 91, 232, 603, 1585, 4213};
    if (l < 0 || l > 12) throw std::invalid_argument("haar_trace_moment: level out of range");
    return m[l];
}

// <t0(X) - c, t0(Y) - c> for the centered power stack; closed form
inline double power_kernel(const Mat3& x, const Mat3& y, int band_limit) {
    double tr = frobenius_inner(x, y); // trace(X^T Y)
    double s = 0, p = 1;
    for (int l = 1; l <= band_limit; ++l) {
        p *= tr;
        s += p - haar_trace_moment(l);
    }
    return s;
}

// kernel of the group-averaged embedding
inline double averaged_kernel(const AmbiguousRotation& x, const AmbiguousRotation& y,
                              int band_limit) {
    double s = 0;
    for (const auto& r1 : x.group->elements)
        for (const auto& r2 : y.group->elements)
            s += power_kernel(x.rep.m * r1.m, y.rep.m * r2.m, band_limit);
    return s / (static_cast<double>(x.group->size()) * static_cast<double>(y.group->size()));
}

// flat Kronecker power (X^{tensor l}), entries prод U_{i_k j_k}; size 9^l
inline std::vector<double> kronecker_power(const Mat3& x, int level) {
    std::vector<double> cur(x.a.begin(), x.a.end());
    for (int l = 1; l < level; ++l) {
        std::vector<double> next(cur.size() * 9);
        for (size_t i = 0; i < cur.size(); ++i)
            for (int j = 0; j < 9; ++j) next[i * 9 + j] = cur[i] * x.a[j];
        cur = std::move(next);
    }
    return cur;
}

namespace detail {

// Haar mean of the Kronecker power, Monte Carlo with a pinned seed; cached.
inline const std::vector<double>& haar_kronecker_mean(int level, uint64_t seed, size_t draws) {
    static std::map<std::tuple<int, uint64_t, size_t>, std::vector<double>> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(level, seed, draws);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    size_t dim = 1;
    for (int l = 0; l < level; ++l) dim *= 9;
    std::vector<double> mean(dim, 0.0);
    if (level == 1) {
        // exactly zero: the vector representation has no trivial component
        return cache.emplace(key, std::move(mean)).first->second;
    }
    RandomStream rng(seed ^ (0xa5a5a5a5ULL + level));
    for (size_t n = 0; n < draws; ++n) {
        Rotation u = haar_rotation(rng);
        auto k = kronecker_power(u.m, level);
        for (size_t i = 0; i < dim; ++i) mean[i] += k[i];
    }
    for (auto& v : mean) v /= static_cast<double>(draws);
    return cache.emplace(key, std::move(mean)).first->second;
}

} // namespace detail

struct AveragedPoint {
    int band_limit = 0;
    std::vector<std::vector<double>> levels; // levels[l-1] has 9^l entries
};

// centered tensor-power stack averaged over right group multiplication
inline AveragedPoint averaged_embed(const AmbiguousRotation& x, const AveragedEmbedding& spec) {
    if (spec.band_limit < 1) throw std::invalid_argument("averaged_embed: band limit must be >= 1");
    AveragedPoint out;
    out.band_limit = spec.band_limit;
    for (int l = 1; l <= spec.band_limit; ++l) {
        size_t dim = 1;
        for (int q = 0; q < l; ++q) dim *= 9;
        std::vector<double> acc(dim, 0.0);
        for (const auto& r : x.group->elements) {
            auto k = kronecker_power(x.rep.m * r.m, l);
            for (size_t i = 0; i < dim; ++i) acc[i] += k[i];
        }
        double inv = 1.0 / static_cast<double>(x.group->size());
        const auto& c = detail::haar_kronecker_mean(l, spec.haar_mean_seed, spec.haar_mean_draws);
        for (size_t i = 0; i < dim; ++i) acc[i] = acc[i] * inv - c[i];
        out.levels.push_back(std::move(acc));
    }
    return out;
}

inline double inner(const AveragedPoint& a, const AveragedPoint& b) {
    if (a.band_limit != b.band_limit) throw std::invalid_argument("band limit mismatch");
    double s = 0;
    for (size_t l = 0; l < a.levels.size(); ++l)
        for (size_t i = 0; i < a.levels[l].size(); ++i) s += a.levels[l][i] * b.levels[l][i];
    return s;
}

} // namespace ambirot
