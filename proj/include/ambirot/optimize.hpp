#pragma once

// Deterministic global maximization over SO(3): a low-discrepancy quaternion
// net followed by Riemannian ascent (gradient with backtracking line search,
// then a guarded Newton polish on the tangent space).

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "ambirot/linalg.hpp"
#include "ambirot/rotations.hpp"

namespace ambirot {

struct So3Objective {
    // value at R; when grad is non-null also the gradient with respect to a
    // left perturbation exp(skew(w)) R
    std::function<double(const Rotation&, Vec3*)> eval;
};

struct So3MaximizeConfig {
    int grid_size = 10000;
    double gradient_tol = 1e-10;
    int max_iterations = 500;
    double tie_distance = 1e-4;   // distance regarded as "the same optimum"
    double tie_objective = 1e-9;  // objective gap regarded as a tie
    // distance used for tie detection; quotient objectives must pass the
    // quotient distance here or every group-equivalent optimum looks like a tie
    std::function<double(const Rotation&, const Rotation&)> distance =
        [](const Rotation& a, const Rotation& b) {
            double c = std::clamp((trace(transpose(a.m) * b.m) - 1) / 2, -1.0, 1.0);
            return std::acos(c);
        };
};

struct So3Maximum {
    Rotation argmax;
    double value = 0;
    double gradient_norm = 0;
    bool tie = false; // a distinct rotation attains (numerically) the same maximum
    int iterations = 0;
};

namespace detail {

inline double halton(uint64_t i, int base) {
    double f = 1, r = 0;
    while (i > 0) {
        f /= base;
        r += f * static_cast<double>(i % base);
        i /= base;
    }
    return r;
}

// low-discrepancy net on the quaternion sphere (Halton triple through the
// uniform-quaternion construction)
inline Rotation net_rotation(uint64_t i) {
    double u1 = halton(i + 1, 2), u2 = halton(i + 1, 3), u3 = halton(i + 1, 5);
    double a = std::sqrt(1 - u1), b = std::sqrt(u1);
    Quat q{a * std::sin(2 * M_PI * u2), a * std::cos(2 * M_PI * u2),
           b * std::sin(2 * M_PI * u3), b * std::cos(2 * M_PI * u3)};
    return Rotation(q.normalized());
}

inline Rotation ascend(const So3Objective& f, Rotation r, const So3MaximizeConfig& cfg,
                       double& value, double& gnorm, int& iters) {
    Vec3 g;
    value = f.eval(r, &g);
    double step = 0.1;
    for (iters = 0; iters < cfg.max_iterations; ++iters) {
        gnorm = norm(g);
        if (gnorm < cfg.gradient_tol) break;
        // Newton polish once the gradient is small: finite-difference the
        // analytic gradient for a 3x3 tangent Hessian
        if (gnorm < 1e-3) {
            const double h = 1e-6;
            Mat3 hess;
            for (int k = 0; k < 3; ++k) {
                Vec3 dv{};
                dv[k] = h;
                Vec3 gp, gm;
                f.eval(Rotation(exp_rotation(dv).m * r.m, false), &gp);
                dv[k] = -h;
                f.eval(Rotation(exp_rotation(dv).m * r.m, false), &gm);
                for (int j = 0; j < 3; ++j) hess(j, k) = (gp[j] - gm[j]) / (2 * h);
            }
            // symmetrize and solve -H w = g
            Mat3 hs;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) hs(i, j) = -0.5 * (hess(i, j) + hess(j, i));
            bool newton_ok = false;
            try {
                Vec3 w = sym3_inverse(hs, 1e-18) * g;
                Rotation cand(exp_rotation(w).m * r.m, false);
                Vec3 gc;
                double vc = f.eval(cand, &gc);
                if (vc >= value - 1e-14 && norm(gc) < gnorm) {
                    r = cand;
                    value = vc;
                    g = gc;
                    newton_ok = true;
                }
            } catch (const std::domain_error&) {
            }
            if (newton_ok) continue;
        }
        // backtracking gradient step
        bool moved = false;
        for (int bt = 0; bt < 40; ++bt) {
            Rotation cand(exp_rotation(g * step).m * r.m, false);
            Vec3 gc;
            double vc = f.eval(cand, &gc);
            if (vc > value) {
                r = cand;
                value = vc;
                g = gc;
                step *= 2;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
    }
    gnorm = norm(g);
    return r;
}

} // namespace detail

// local tangent ascent from a given start (no net scan)
inline Rotation so3_ascend(const So3Objective& f, const Rotation& start,
                           const So3MaximizeConfig& cfg, double* value_out = nullptr) {
    double v, gn;
    int it;
    Rotation r = detail::ascend(f, start, cfg, v, gn, it);
    if (value_out) *value_out = v;
    return r;
}

// seeds are tried in addition to the net; the best refined point wins
inline So3Maximum so3_maximize(const So3Objective& f, const So3MaximizeConfig& cfg = {},
                               const std::vector<Rotation>& seeds = {}) {
    // coarse scan
    double best_coarse = -1e300;
    Rotation best_start;
    std::vector<std::pair<double, Rotation>> top;
    auto consider = [&](const Rotation& r) {
        double v = f.eval(r, nullptr);
        top.emplace_back(v, r);
        if (v > best_coarse) {
            best_coarse = v;
            best_start = r;
        }
    };
    for (const auto& s : seeds) consider(s);
    for (int i = 0; i < cfg.grid_size; ++i) consider(detail::net_rotation(static_cast<uint64_t>(i)));

    // refine a handful of the best coarse candidates
    std::partial_sort(top.begin(), top.begin() + std::min<size_t>(top.size(), 8), top.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first; });
    So3Maximum out;
    out.value = -1e300;
    std::vector<std::pair<double, Rotation>> refined;
    size_t n_refine = std::min<size_t>(top.size(), 8);
    for (size_t i = 0; i < n_refine; ++i) {
        double v, gn;
        int it;
        Rotation r = detail::ascend(f, top[i].second, cfg, v, gn, it);
        refined.emplace_back(v, r);
        if (v > out.value) {
            out.value = v;
            out.argmax = r;
            out.gradient_norm = gn;
            out.iterations = it;
        }
    }
    for (const auto& [v, r] : refined) {
        if (v >= out.value - cfg.tie_objective && cfg.distance(out.argmax, r) > cfg.tie_distance)
            out.tie = true;
    }
    return out;
}

} // namespace ambirot
