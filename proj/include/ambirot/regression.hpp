#pragma once

// Homoscedastic regression of one ambiguous rotation on another: maximum
// likelihood estimation of the link rotation, rotational correlation,
// high-concentration chi-square inference, and misorientation machinery on
// double cosets (exhaustive minimal-angle representative and two mean
// definitions).

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "ambirot/averaged.hpp"
#include "ambirot/inference.hpp"
#include "ambirot/optimize.hpp"

namespace ambirot {

using RotationPairs = std::vector<std::pair<AmbiguousRotation, AmbiguousRotation>>;

struct RegressionConfig {
    int grid_size = 10000;
    double gradient_tol = 1e-10;
    int band_limit = 4; // averaged embedding level for mismatched groups
};

struct RegressionFit {
    Rotation a_hat;
    double kappa_hat = 0;
    double r = 0;
    double rho12 = 0;
    double residual_sum = 0;
    double objective = 0;
    GroupPtr group1, group2;
    bool cross_group = false;
    int band_limit = 0;
    bool degenerate_objective = false;
};

namespace detail {

inline Vec3 vee_asym(const Mat3& b) {
    return {b(1, 2) - b(2, 1), b(2, 0) - b(0, 2), b(0, 1) - b(1, 0)};
}

// d/dw of sum_l [trace((exp(skew(w)) X)^T Y)^l - m_l] at w = 0
inline double power_kernel_with_grad(const Mat3& x, const Mat3& y, int band_limit, Vec3* grad) {
    double tr = frobenius_inner(x, y);
    double value = 0, p = 1, dcoef = 0, q = 1;
    for (int l = 1; l <= band_limit; ++l) {
        dcoef += l * q;
        q *= tr;
        p *= tr;
        value += p - haar_trace_moment(l);
    }
    if (grad) {
        Mat3 b = y * transpose(x);
        *grad = vee_asym(b) * (-dcoef);
    }
    return value;
}

// <t2([y]), t1([x])> for a common group, with the gradient of a left
// perturbation of x's representative
inline double pair_inner_with_grad(const AmbiguousRotation& x, const AmbiguousRotation& y,
                                   Vec3* grad) {
    const auto& g = *x.group;
    if (g.kind == GroupKind::Cyclic && g.order_parameter == 1) {
        if (grad) *grad = vee_asym(y.rep.m * transpose(x.rep.m)) * (-1.0);
        return frobenius_inner(x.rep.m, y.rep.m);
    }
    KFrame fx = frame_of(x), fy = frame_of(y);
    double value = closed_form_inner(x, y);
    if (!grad) return value;
    Vec3 w{};
    auto ipow = [](double v, int p) {
        double r = 1;
        for (int i = 0; i < p; ++i) r *= v;
        return r;
    };
    switch (g.kind) {
    case GroupKind::Cyclic: {
        int r = g.order_parameter;
        w += cross(fx.normal, fy.normal);
        if (r == 2) {
            Vec3 du = fy.vectors[0] * (2 * dot(fx.vectors[0], fy.vectors[0]));
            w += cross(fx.vectors[0], du);
        } else {
            for (const auto& u : fx.vectors) {
                Vec3 du{};
                for (const auto& v : fy.vectors) du += v * (r * ipow(dot(u, v), r - 1));
                w += cross(u, du);
            }
        }
        break;
    }
    case GroupKind::Dihedral: {
        int r = g.order_parameter;
        if (r == 2) {
            for (int i = 0; i < 3; ++i) {
                Vec3 du = fy.vectors[i] * (2 * dot(fx.vectors[i], fy.vectors[i]));
                w += cross(fx.vectors[i], du);
            }
        } else {
            for (const auto& u : fx.vectors) {
                Vec3 du{};
                for (const auto& v : fy.vectors) du += v * (r * ipow(dot(u, v), r - 1));
                w += cross(u, du);
            }
        }
        break;
    }
    case GroupKind::Tetrahedral:
    case GroupKind::Octahedral:
    case GroupKind::Icosahedral: {
        int r = g.kind == GroupKind::Tetrahedral ? 3 : (g.kind == GroupKind::Octahedral ? 4 : 10);
        for (const auto& u : fx.vectors) {
            Vec3 du{};
            for (const auto& v : fy.vectors) du += v * (r * ipow(dot(u, v), r - 1));
            w += cross(u, du);
        }
        break;
    }
    }
    *grad = w;
    return value;
}

// averaged-kernel analogue for mismatched groups
inline double averaged_pair_with_grad(const AmbiguousRotation& x, const AmbiguousRotation& y,
                                      int band_limit, Vec3* grad) {
    double value = 0;
    Vec3 w{};
    for (const auto& r1 : x.group->elements)
        for (const auto& r2 : y.group->elements) {
            Vec3 gk;
            value += power_kernel_with_grad(x.rep.m * r1.m, y.rep.m * r2.m, band_limit,
                                            grad ? &gk : nullptr);
            if (grad) w += gk;
        }
    double inv = 1.0 / (static_cast<double>(x.group->size()) * static_cast<double>(y.group->size()));
    if (grad) *grad = w * inv;
    return value * inv;
}

// cache of rho12 for cross-group pairs
inline double cross_rho12(GroupPtr g1, GroupPtr g2, int band_limit, int grid_size) {
    static std::map<std::tuple<std::string, std::string, int>, double> cache;
    static std::mutex mu;
    auto key = std::make_tuple(g1->name(), g2->name(), band_limit);
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    AmbiguousRotation id2{Rotation(), g2};
    So3Objective obj{[&](const Rotation& u, Vec3* grad) {
        return averaged_pair_with_grad({u, g1}, id2, band_limit, grad);
    }};
    So3MaximizeConfig cfg;
    cfg.grid_size = std::min(grid_size, 4096);
    double val = so3_maximize(obj, cfg).value;
    std::lock_guard<std::mutex> lock(mu);
    cache.emplace(key, val);
    return val;
}

} // namespace detail

// kappa estimate and confidence-region membership from the high-concentration
// chi-square decomposition of the fitted residuals
struct ResidualInference {
    double kappa_hat = 0;
    double residual_sum = 0;
    double df = 0;
    bool perfect_fit = false;

    // 100(1-alpha)% region membership for a candidate link rotation
    std::function<bool(const Rotation&, double)> in_region;
};

class Regression {
public:
    // objective(A) = sum_i <t2([V_i]), t1([A U_i])>
    static double objective(const RotationPairs& pairs, const Rotation& a, int band_limit,
                            Vec3* grad) {
        bool cross = !pairs.front().first.group->same_as(*pairs.front().second.group);
        double total = 0;
        Vec3 w{};
        for (const auto& [u, v] : pairs) {
            AmbiguousRotation au{Rotation(a.m * u.rep.m, false), u.group};
            Vec3 gi;
            double val = cross ? detail::averaged_pair_with_grad(au, v, band_limit,
                                                                 grad ? &gi : nullptr)
                               : detail::pair_inner_with_grad(au, v, grad ? &gi : nullptr);
            total += val;
            if (grad) w += gi;
        }
        if (grad) *grad = w;
        return total;
    }
};

inline RegressionFit fit_regression(const RotationPairs& pairs, const RegressionConfig& cfg = {}) {
    if (pairs.empty()) throw std::invalid_argument("fit_regression: empty data");
    GroupPtr g1 = pairs.front().first.group, g2 = pairs.front().second.group;
    for (const auto& [u, v] : pairs) {
        require_same_group(pairs.front().first, u);
        require_same_group(pairs.front().second, v);
    }
    RegressionFit fit;
    fit.group1 = g1;
    fit.group2 = g2;
    fit.cross_group = !g1->same_as(*g2);
    fit.band_limit = fit.cross_group ? cfg.band_limit : 0;

    So3Objective obj{[&](const Rotation& a, Vec3* grad) {
        return Regression::objective(pairs, a, cfg.band_limit, grad);
    }};
    So3MaximizeConfig ocfg;
    ocfg.grid_size = cfg.grid_size;
    ocfg.gradient_tol = cfg.gradient_tol;

    // data-driven seeds: per-pair alignments and the mean alignment
    std::vector<Rotation> seeds;
    if (!fit.cross_group) {
        Mat3 acc = Mat3::zero();
        for (const auto& [u, v] : pairs) acc = acc + v.rep.m * transpose(u.rep.m);
        try {
            seeds.push_back(Rotation(nearest_rotation(acc), false));
        } catch (const std::domain_error&) {
        }
        for (size_t i = 0; i < std::min<size_t>(pairs.size(), 4); ++i)
            seeds.push_back(Rotation(pairs[i].second.rep.m * transpose(pairs[i].first.rep.m), false));
    }
    So3Maximum best = so3_maximize(obj, ocfg, seeds);
    fit.a_hat = best.argmax;
    fit.objective = best.value;

    double rho12 = fit.cross_group
                       ? detail::cross_rho12(g1, g2, cfg.band_limit, cfg.grid_size)
                       : rho_squared(*g1);
    fit.rho12 = rho12;
    if (rho12 <= 1e-8) throw degeneracy_error("embeddings are orthogonal: rho12 is zero");
    if (std::fabs(best.value) < 1e-12 && best.gradient_norm < 1e-10)
        fit.degenerate_objective = true;

    fit.r = fit.objective / (static_cast<double>(pairs.size()) * rho12);
    fit.residual_sum = static_cast<double>(pairs.size()) * rho12 - fit.objective;
    if (pairs.size() >= 2) {
        fit.kappa_hat = fit.residual_sum < 1e-9
                            ? std::numeric_limits<double>::infinity()
                            : 3.0 * (static_cast<double>(pairs.size()) - 1) /
                                  (2.0 * fit.residual_sum);
    }
    return fit;
}

inline double correlation(const RotationPairs& pairs, const RegressionFit& fit) {
    double total = Regression::objective(pairs, fit.a_hat, fit.band_limit ? fit.band_limit : 4,
                                         nullptr);
    if (fit.rho12 <= 1e-8) throw degeneracy_error("rho12 is zero");
    return total / (static_cast<double>(pairs.size()) * fit.rho12);
}

inline ResidualInference residual_chi2_inference(const RotationPairs& pairs,
                                                 const RegressionFit& fit) {
    if (pairs.size() < 2) throw std::invalid_argument("need at least two pairs");
    ResidualInference inf;
    inf.residual_sum = fit.residual_sum;
    inf.df = 3.0 * (static_cast<double>(pairs.size()) - 1);
    if (fit.residual_sum < 1e-9) {
        inf.perfect_fit = true;
        inf.kappa_hat = std::numeric_limits<double>::infinity();
    } else {
        inf.kappa_hat = inf.df / (2.0 * fit.residual_sum);
    }
    double fitted_objective = fit.objective;
    Rotation a_hat = fit.a_hat;
    int band = fit.band_limit ? fit.band_limit : 4;
    double kappa_hat = inf.kappa_hat;
    RotationPairs data = pairs;
    inf.in_region = [data, fitted_objective, band, kappa_hat](const Rotation& a, double alpha) {
        double obj_a = Regression::objective(data, a, band, nullptr);
        double excess = 2 * kappa_hat * (fitted_objective - obj_a);
        return excess < chi2_quantile(1 - alpha, 3);
    };
    return inf;
}

// ---------------------------------------------------------------------------
// misorientation

struct Misorientation {
    Rotation p;    // minimal-angle double-coset representative, V = U P
    double angle = 0;
    Vec3 axis{0, 0, 1};
    GroupPtr group1, group2;
};

inline Misorientation misorientation(const AmbiguousRotation& u, const AmbiguousRotation& v) {
    Misorientation out;
    out.group1 = u.group;
    out.group2 = v.group;
    double best = 1e300;
    Mat3 w = transpose(u.rep.m) * v.rep.m;
    for (const auto& r1 : u.group->elements) {
        Mat3 left = transpose(r1.m) * w;
        for (const auto& r2 : v.group->elements) {
            Mat3 cand = left * r2.m;
            double ang = rotation_angle_of_matrix(cand);
            if (ang < best - 1e-15) {
                best = ang;
                out.p = Rotation(cand, false);
            }
        }
    }
    out.angle = best;
    if (best > 1e-9) out.axis = normalized(log_rotation(out.p));
    return out;
}

inline Rotation mean_misorientation(const RotationPairs& pairs, const RegressionConfig& cfg = {}) {
    return fit_regression(pairs, cfg).a_hat;
}

struct AlternatingMeanResult {
    Rotation a1, a2;
    double objective = 0;
    std::vector<double> objective_trace; // nondecreasing across sweeps
    int starts_agreeing = 0;             // starts landing within 1e-6 of the best objective
};

// alternative mean: maximize sum_i max_{R_i in K2} <t1([A1 U_i]), t2([V_i R_i A2])>
// by coordinate ascent over A1, the per-pair R_i and A2, with deterministic
// multi-start
inline AlternatingMeanResult mean_misorientation_alt(const RotationPairs& pairs,
                                                     const RegressionConfig& cfg = {}) {
    if (pairs.empty()) throw std::invalid_argument("empty data");
    GroupPtr g1 = pairs.front().first.group, g2 = pairs.front().second.group;
    bool cross = !g1->same_as(*g2);
    int band = cfg.band_limit;
    size_t n = pairs.size();

    auto pair_value = [&](const AmbiguousRotation& x, const AmbiguousRotation& y, Vec3* grad) {
        return cross ? detail::averaged_pair_with_grad(x, y, band, grad)
                     : detail::pair_inner_with_grad(x, y, grad);
    };

    Rotation primary = fit_regression(pairs, cfg).a_hat;
    std::vector<Rotation> starts{primary, Rotation()};
    for (int axis = 0; axis < 3; ++axis) {
        Vec3 v{};
        v[axis] = M_PI / 2;
        starts.push_back(Rotation(exp_rotation(v).m * primary.m, false));
        v[axis] = -M_PI / 2;
        starts.push_back(Rotation(exp_rotation(v).m * primary.m, false));
    }

    AlternatingMeanResult best;
    best.objective = -1e300;
    std::vector<double> best_values;
    for (const auto& start : starts) {
        Rotation a1 = start, a2;
        std::vector<size_t> ridx(n, 0);
        double prev = -1e300;
        std::vector<double> trace_vals;
        for (int sweep = 0; sweep < 100; ++sweep) {
            // per-pair symmetry elements, exhaustive
            for (size_t i = 0; i < n; ++i) {
                double bestv = -1e300;
                AmbiguousRotation a1u{Rotation(a1.m * pairs[i].first.rep.m, false), g1};
                for (size_t k = 0; k < g2->size(); ++k) {
                    AmbiguousRotation w{
                        Rotation(pairs[i].second.rep.m * g2->elements[k].m * a2.m, false), g2};
                    double val = pair_value(a1u, w, nullptr);
                    if (val > bestv) {
                        bestv = val;
                        ridx[i] = k;
                    }
                }
            }
            // ascend A1 with R, A2 fixed
            {
                So3Objective obj{[&](const Rotation& a, Vec3* grad) {
                    double total = 0;
                    Vec3 acc{};
                    for (size_t i = 0; i < n; ++i) {
                        AmbiguousRotation x{Rotation(a.m * pairs[i].first.rep.m, false), g1};
                        AmbiguousRotation w{
                            Rotation(pairs[i].second.rep.m * g2->elements[ridx[i]].m * a2.m, false),
                            g2};
                        Vec3 gi;
                        total += pair_value(x, w, grad ? &gi : nullptr);
                        if (grad) acc += gi;
                    }
                    if (grad) *grad = acc;
                    return total;
                }};
                So3MaximizeConfig acfg;
                acfg.gradient_tol = cfg.gradient_tol;
                a1 = so3_ascend(obj, a1, acfg);
            }
            // ascend A2 with R, A1 fixed; the gradient of a left perturbation of
            // A2 inside V R exp(w) A2 picks up a rotation by (V R)^T per pair
            double value_now;
            {
                So3Objective obj{[&](const Rotation& a, Vec3* grad) {
                    double total = 0;
                    Vec3 acc{};
                    for (size_t i = 0; i < n; ++i) {
                        Mat3 vr = pairs[i].second.rep.m * g2->elements[ridx[i]].m;
                        AmbiguousRotation x{Rotation(a1.m * pairs[i].first.rep.m, false), g1};
                        AmbiguousRotation w{Rotation(vr * a.m, false), g2};
                        // perturb w's representative on the left of a: chain rule
                        Vec3 gw;
                        double val = pair_value(w, x, grad ? &gw : nullptr);
                        total += val;
                        if (grad) acc += transpose(vr) * gw;
                    }
                    if (grad) *grad = acc;
                    return total;
                }};
                So3MaximizeConfig acfg;
                acfg.gradient_tol = cfg.gradient_tol;
                a2 = so3_ascend(obj, a2, acfg, &value_now);
            }
            trace_vals.push_back(value_now);
            if (value_now - prev < 1e-10) {
                prev = value_now;
                break;
            }
            prev = value_now;
        }
        best_values.push_back(prev);
        if (prev > best.objective) {
            best.objective = prev;
            best.a1 = a1;
            best.a2 = a2;
            best.objective_trace = trace_vals;
        }
    }
    for (double v : best_values)
        if (v >= best.objective - 1e-6) ++best.starts_agreeing;
    return best;
}

} // namespace ambirot
