#pragma once

// Hypothesis tests on SO(3)/K: the embedding-norm uniformity statistic with
// chi-square and randomization references, its Rayleigh/Bingham decomposition
// for cyclic groups, the group-averaged Gine statistic, one- and two-sample
// location tests (randomization/permutation and Hotelling T^2 on tangent
// coordinates) and a kernel test of independence.
//
// Randomization p-values use the add-one rule (1 + #{replicates >= observed})
// / (B + 1) and are bit-reproducible given (B, seed) independently of the
// degree of parallelism.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ambirot/averaged.hpp"
#include "ambirot/distributions.hpp"

namespace ambirot {

struct TestReport {
    std::string method;
    double statistic = 0;
    double p_value = 1;
    std::string reference; // "chi-square(df)", "randomization(B,seed)", ...
    std::optional<double> df;
    std::optional<int> replicates;
    std::optional<uint64_t> seed;
    std::map<std::string, double> components;
    std::vector<std::string> assumptions;
};

// ---------------------------------------------------------------------------
// uniformity: the embedding-norm statistic

inline double uniformity_statistic(const std::vector<AmbiguousRotation>& sample) {
    if (sample.empty()) throw std::invalid_argument("empty sample");
    const auto& g = *sample.front().group;
    EmbeddedPoint tbar = mean_embedding(sample);
    return embedding_dim(g) / rho_squared(g) * static_cast<double>(sample.size()) * norm2(tbar);
}

struct CyclicComponents {
    double s_rayleigh = 0;      // 3 n |mean u0|^2
    double s_bingham = 0;       // C2 only: (15/2) n (tr Tbar^2 - 1/3)
    double s_dihedral = 0;      // r >= 3: statistic of the matching dihedral frames
    double nu_c = 0, rho2_c = 0;
    double nu_d = 0, rho2_d = 0;
    // the decomposition (rho2_c/nu_c) S = (1/3) S_R + w S_B|D holds exactly,
    // with w = 2/15 for C2 and w = rho2_d/nu_d otherwise
    double weight_second = 0;
};

inline CyclicComponents rayleigh_bingham_components(const std::vector<AmbiguousRotation>& sample) {
    if (sample.empty()) throw std::invalid_argument("empty sample");
    GroupPtr g = sample.front().group;
    if (g->kind != GroupKind::Cyclic || g->order_parameter < 2)
        throw std::invalid_argument("decomposition applies to cyclic groups of order >= 2");
    int r = g->order_parameter;
    double n = static_cast<double>(sample.size());
    CyclicComponents c;
    c.nu_c = embedding_dim(*g);
    c.rho2_c = rho_squared(*g);

    Vec3 mean_u0{};
    for (const auto& x : sample) mean_u0 += x.rep * Vec3{0, 0, 1};
    mean_u0 = mean_u0 * (1.0 / n);
    c.s_rayleigh = 3 * n * dot(mean_u0, mean_u0);

    if (r == 2) {
        Mat3 scatter = Mat3::zero();
        for (const auto& x : sample) {
            Vec3 u1 = x.rep * Vec3{1, 0, 0};
            scatter = scatter + outer(u1, u1);
        }
        scatter = scatter * (1.0 / n);
        double tr2 = frobenius_inner(scatter, transpose(scatter));
        c.s_bingham = 7.5 * n * (tr2 - 1.0 / 3.0);
        c.nu_d = 5;
        c.rho2_d = 2.0 / 3.0;
        c.weight_second = 2.0 / 15.0;
        return c;
    }
    GroupPtr dg = make_group(GroupKind::Dihedral, r);
    std::vector<AmbiguousRotation> dsample;
    dsample.reserve(sample.size());
    for (const auto& x : sample) dsample.emplace_back(x.rep, dg);
    c.s_dihedral = uniformity_statistic(dsample);
    c.nu_d = embedding_dim(*dg);
    c.rho2_d = rho_squared(*dg);
    c.weight_second = c.rho2_d / c.nu_d;
    return c;
}

enum class UniformityMode { Asymptotic, Randomization };

inline TestReport uniformity_S(const std::vector<AmbiguousRotation>& sample,
                               UniformityMode mode = UniformityMode::Asymptotic, int replicates = 999,
                               uint64_t seed = 0) {
    if (sample.empty()) throw std::invalid_argument("empty sample");
    GroupPtr g = sample.front().group;
    for (const auto& x : sample) require_same_group(sample.front(), x);
    TestReport rep;
    rep.statistic = uniformity_statistic(sample);

    bool cyclic_composite = g->kind == GroupKind::Cyclic && g->order_parameter >= 2;
    if (cyclic_composite) {
        CyclicComponents c = rayleigh_bingham_components(sample);
        rep.components["S_R"] = c.s_rayleigh;
        rep.components[g->order_parameter == 2 ? "S_B" : "S_D"] =
            g->order_parameter == 2 ? c.s_bingham : c.s_dihedral;
    }

    if (mode == UniformityMode::Randomization) {
        rep.method = "uniformity-randomization";
        size_t hits = 0;
        auto counts = parallel_chunks<size_t>(static_cast<size_t>(replicates), [&](size_t b) {
            RandomStream rng(splitmix_seed(seed, b));
            std::vector<AmbiguousRotation> repl;
            repl.reserve(sample.size());
            for (const auto& x : sample)
                repl.emplace_back(haar_rotation(rng) * x.rep, g);
            return static_cast<size_t>(uniformity_statistic(repl) >= rep.statistic ? 1 : 0);
        });
        for (size_t c : counts) hits += c;
        rep.p_value = static_cast<double>(1 + hits) / static_cast<double>(replicates + 1);
        rep.reference = "randomization(B=" + std::to_string(replicates) +
                        ",seed=" + std::to_string(seed) + ")";
        rep.replicates = replicates;
        rep.seed = seed;
        return rep;
    }

    rep.method = "uniformity-asymptotic";
    if (!cyclic_composite) {
        double nu = embedding_dim(*g);
        rep.df = nu;
        rep.p_value = chi2_sf(rep.statistic, nu);
        rep.reference = "chi-square(" + std::to_string(static_cast<int>(nu)) + ")";
        return rep;
    }
    // cyclic groups: S = a S_R + b S_{B|D} with independent chi-square parts
    CyclicComponents c = rayleigh_bingham_components(sample);
    double ratio = c.nu_c / c.rho2_c;
    double a = ratio / 3.0, b = ratio * c.weight_second;
    double df2 = (g->order_parameter == 2) ? 5.0 : c.nu_d;
    rep.p_value = weighted_chi2_sum_sf(rep.statistic, a, 3.0, b, df2);
    rep.reference = "weighted-chi-square(3," + std::to_string(static_cast<int>(df2)) + ")";
    return rep;
}

// ---------------------------------------------------------------------------
// consistent uniformity test: group-averaged Gine statistic

inline double gine_statistic(const std::vector<AmbiguousRotation>& sample) {
    if (sample.empty()) throw std::invalid_argument("empty sample");
    const auto& els = sample.front().group->elements;
    size_t n = sample.size();
    // diagonal terms depend only on the group (U_i^T U_i is exactly the
    // identity); folding them in analytically keeps the square roots away
    // from their branch point and the statistic exactly representative
    // invariant
    double diag = 0;
    for (const auto& r : els) diag += std::sqrt(std::max(0.0, 3.0 - trace(r.m)));
    double total = static_cast<double>(n) * diag;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            Mat3 w = transpose(sample[i].rep.m) * sample[j].rep.m;
            double s = 0;
            for (const auto& r : els) {
                double tr = 0;
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b) tr += w(a, b) * r.m(a, b);
                s += std::sqrt(std::max(0.0, 3.0 - tr));
            }
            total += 2 * s;
        }
    }
    return -total;
}

inline TestReport gine_TG(const std::vector<AmbiguousRotation>& sample, int replicates = 999,
                          uint64_t seed = 0) {
    TestReport rep;
    rep.method = "gine-randomization";
    rep.statistic = gine_statistic(sample);
    GroupPtr g = sample.front().group;
    size_t hits = 0;
    auto counts = parallel_chunks<size_t>(static_cast<size_t>(replicates), [&](size_t b) {
        RandomStream rng(splitmix_seed(seed, b));
        std::vector<AmbiguousRotation> repl;
        repl.reserve(sample.size());
        for (const auto& x : sample) repl.emplace_back(haar_rotation(rng) * x.rep, g);
        return static_cast<size_t>(gine_statistic(repl) >= rep.statistic ? 1 : 0);
    });
    for (size_t c : counts) hits += c;
    rep.p_value = static_cast<double>(1 + hits) / static_cast<double>(replicates + 1);
    rep.reference =
        "randomization(B=" + std::to_string(replicates) + ",seed=" + std::to_string(seed) + ")";
    rep.replicates = replicates;
    rep.seed = seed;
    return rep;
}

// ---------------------------------------------------------------------------
// one-sample location

inline TestReport one_sample_location_randomization(const std::vector<AmbiguousRotation>& sample,
                                                    const AmbiguousRotation& m0, int replicates = 999,
                                                    uint64_t seed = 0) {
    if (sample.size() < 2) throw std::invalid_argument("need at least two observations");
    for (const auto& x : sample) require_same_group(x, m0);
    GroupPtr g = m0.group;
    EmbeddedPoint t0 = embed(m0);

    auto statistic = [&](const std::vector<AmbiguousRotation>& s) {
        EmbeddedPoint d = mean_embedding(s);
        EmbeddedPoint neg = t0;
        neg.scale(-1.0);
        d += neg;
        return norm2(d);
    };

    TestReport rep;
    rep.method = "location-randomization";
    rep.statistic = statistic(sample);
    size_t hits = 0;
    size_t k = g->size();
    auto counts = parallel_chunks<size_t>(static_cast<size_t>(replicates), [&](size_t b) {
        RandomStream rng(splitmix_seed(seed, b));
        std::vector<AmbiguousRotation> repl;
        repl.reserve(sample.size());
        for (const auto& x : sample) {
            const Rotation& r = g->elements[rng.uniform_index(k)];
            repl.push_back(symmetry_action(m0, r, x));
        }
        return static_cast<size_t>(statistic(repl) >= rep.statistic ? 1 : 0);
    });
    for (size_t c : counts) hits += c;
    rep.p_value = static_cast<double>(1 + hits) / static_cast<double>(replicates + 1);
    rep.reference =
        "randomization(B=" + std::to_string(replicates) + ",seed=" + std::to_string(seed) + ")";
    rep.replicates = replicates;
    rep.seed = seed;
    rep.assumptions.push_back(
        "distribution symmetric under the group action preserving the hypothesized location");
    return rep;
}

namespace detail {

inline TestReport hotelling_from_coords(const std::vector<Vec3>& v1, const std::vector<Vec3>& v2,
                                        bool two_sample) {
    auto mean_of = [](const std::vector<Vec3>& v) {
        Vec3 m{};
        for (const auto& x : v) m += x;
        return m * (1.0 / static_cast<double>(v.size()));
    };
    auto scatter_about = [](const std::vector<Vec3>& v, const Vec3& m) {
        Mat3 s = Mat3::zero();
        for (const auto& x : v) {
            Vec3 c = x - m;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) s(i, j) += c[i] * c[j];
        }
        return s;
    };
    TestReport rep;
    double t2, df2;
    if (!two_sample) {
        double n = static_cast<double>(v1.size());
        if (n < 5) throw std::invalid_argument("Hotelling test needs n >= 5");
        Vec3 m = mean_of(v1);
        Mat3 cov = scatter_about(v1, m) * (1.0 / (n - 1));
        Mat3 inv;
        try {
            inv = sym3_inverse(cov, 1e-18);
        } catch (const std::domain_error&) {
            throw degeneracy_error("singular sample covariance");
        }
        t2 = n * dot(m, inv * m);
        df2 = n - 3;
        rep.method = "hotelling-one-sample";
        rep.statistic = t2;
        double f = (n - 3) / (3 * (n - 1)) * t2;
        rep.p_value = f_sf(f, 3, df2);
    } else {
        double n = static_cast<double>(v1.size()), m = static_cast<double>(v2.size());
        if (n < 5 || m < 5) throw std::invalid_argument("Hotelling test needs n, m >= 5");
        Vec3 mu1 = mean_of(v1), mu2 = mean_of(v2);
        Mat3 pooled = (scatter_about(v1, mu1) + scatter_about(v2, mu2)) * (1.0 / (n + m - 2));
        Mat3 inv;
        try {
            inv = sym3_inverse(pooled, 1e-18);
        } catch (const std::domain_error&) {
            throw degeneracy_error("singular pooled covariance");
        }
        Vec3 d = mu1 - mu2;
        t2 = (n * m / (n + m)) * dot(d, inv * d);
        df2 = n + m - 4;
        rep.method = "hotelling-two-sample";
        rep.statistic = t2;
        double f = (n + m - 4) / (3 * (n + m - 2)) * t2;
        rep.p_value = f_sf(f, 3, df2);
    }
    rep.df = df2;
    rep.reference = "F(3," + std::to_string(static_cast<int>(df2)) + ")";
    return rep;
}

} // namespace detail

inline TestReport one_sample_hotelling(const std::vector<AmbiguousRotation>& sample,
                                       const AmbiguousRotation& m0) {
    if (sample.size() < 5) throw std::invalid_argument("Hotelling test needs n >= 5");
    std::vector<Vec3> coords;
    coords.reserve(sample.size());
    for (const auto& x : sample) coords.push_back(tangent_coords(x, m0).v);
    return detail::hotelling_from_coords(coords, {}, false);
}

// ---------------------------------------------------------------------------
// two-sample tests

inline TestReport two_sample_test(const std::vector<AmbiguousRotation>& sample1,
                                  const std::vector<AmbiguousRotation>& sample2, int replicates = 999,
                                  uint64_t seed = 0) {
    if (sample1.size() < 2 || sample2.size() < 2)
        throw std::invalid_argument("need at least two observations per sample");
    require_same_group(sample1.front(), sample2.front());
    std::vector<EmbeddedPoint> embedded;
    embedded.reserve(sample1.size() + sample2.size());
    for (const auto& x : sample1) embedded.push_back(embed(x));
    for (const auto& x : sample2) embedded.push_back(embed(x));
    size_t n = sample1.size(), total = embedded.size();

    auto statistic = [&](const std::vector<size_t>& idx) {
        EmbeddedPoint d1 = embedded[idx[0]];
        for (size_t i = 1; i < n; ++i) d1 += embedded[idx[i]];
        d1.scale(1.0 / static_cast<double>(n));
        EmbeddedPoint d2 = embedded[idx[n]];
        for (size_t i = n + 1; i < total; ++i) d2 += embedded[idx[i]];
        d2.scale(1.0 / static_cast<double>(total - n));
        EmbeddedPoint neg = d2;
        neg.scale(-1.0);
        d1 += neg;
        return norm2(d1);
    };

    std::vector<size_t> identity_idx(total);
    for (size_t i = 0; i < total; ++i) identity_idx[i] = i;

    TestReport rep;
    rep.method = "two-sample-permutation";
    rep.statistic = statistic(identity_idx);
    size_t hits = 0;
    auto counts = parallel_chunks<size_t>(static_cast<size_t>(replicates), [&](size_t b) {
        RandomStream rng(splitmix_seed(seed, b));
        std::vector<size_t> idx(total);
        for (size_t i = 0; i < total; ++i) idx[i] = i;
        for (size_t i = total - 1; i > 0; --i)
            std::swap(idx[i], idx[rng.uniform_index(i + 1)]);
        return static_cast<size_t>(statistic(idx) >= rep.statistic ? 1 : 0);
    });
    for (size_t c : counts) hits += c;
    rep.p_value = static_cast<double>(1 + hits) / static_cast<double>(replicates + 1);
    rep.reference =
        "permutation(B=" + std::to_string(replicates) + ",seed=" + std::to_string(seed) + ")";
    rep.replicates = replicates;
    rep.seed = seed;
    return rep;
}

inline TestReport two_sample_hotelling(const std::vector<AmbiguousRotation>& sample1,
                                       const std::vector<AmbiguousRotation>& sample2,
                                       const MeanConfig& cfg = {}) {
    require_same_group(sample1.front(), sample2.front());
    std::vector<AmbiguousRotation> pooled = sample1;
    pooled.insert(pooled.end(), sample2.begin(), sample2.end());
    SampleSummary s = summarize(pooled, cfg);
    if (!s.mean_unique) throw degeneracy_error("pooled sample mean is not unique");
    std::vector<Vec3> v1, v2;
    for (const auto& x : sample1) v1.push_back(tangent_coords(x, s.mean).v);
    for (const auto& x : sample2) v2.push_back(tangent_coords(x, s.mean).v);
    TestReport rep = detail::hotelling_from_coords(v1, v2, true);
    rep.components["mean_grid_size"] = static_cast<double>(cfg.grid_size);
    rep.components["mean_gradient_tol"] = cfg.gradient_tol;
    return rep;
}

// ---------------------------------------------------------------------------
// independence

// Gram matrix of embedded inner products; groups may differ between the two
// margins, in which case the band-limited averaged embedding is used.
inline TestReport independence_test(const std::vector<AmbiguousRotation>& u,
                                    const std::vector<AmbiguousRotation>& v, int replicates = 999,
                                    uint64_t seed = 0, int band_limit = 4) {
    if (u.size() != v.size()) throw std::invalid_argument("margins must be paired");
    if (u.size() < 3) throw std::invalid_argument("independence test needs n >= 3");
    size_t n = u.size();
    bool same_groups = u.front().group->same_as(*v.front().group);

    auto gram = [&](const std::vector<AmbiguousRotation>& s) {
        std::vector<double> gmat(n * n);
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i; j < n; ++j) {
                double val = same_groups ? closed_form_inner(s[i], s[j])
                                         : averaged_kernel(s[i], s[j], band_limit);
                gmat[i * n + j] = gmat[j * n + i] = val;
            }
        return gmat;
    };
    std::vector<double> g1 = gram(u), g2 = gram(v);

    auto statistic = [&](const std::vector<size_t>& perm) {
        double s = 0;
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j) s += g1[i * n + j] * g2[perm[i] * n + perm[j]];
        return s;
    };
    std::vector<size_t> id(n);
    for (size_t i = 0; i < n; ++i) id[i] = i;

    TestReport rep;
    rep.method = "independence-permutation";
    rep.statistic = statistic(id);
    size_t hits = 0;
    auto counts = parallel_chunks<size_t>(static_cast<size_t>(replicates), [&](size_t b) {
        RandomStream rng(splitmix_seed(seed, b));
        std::vector<size_t> perm(n);
        for (size_t i = 0; i < n; ++i) perm[i] = i;
        for (size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_index(i + 1)]);
        return static_cast<size_t>(statistic(perm) >= rep.statistic ? 1 : 0);
    });
    for (size_t c : counts) hits += c;
    rep.p_value = static_cast<double>(1 + hits) / static_cast<double>(replicates + 1);
    rep.reference =
        "permutation(B=" + std::to_string(replicates) + ",seed=" + std::to_string(seed) + ")";
    rep.replicates = replicates;
    rep.seed = seed;
    return rep;
}

} // namespace ambirot
