#pragma once

// Sample mean and dispersion on SO(3)/K. The mean maximizes <t([U]), t-bar>
// over the quotient: closed form for the trivial group (nearest rotation to
// the mean matrix), deterministic net + tangent ascent otherwise.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ambirot/embeddings.hpp"
#include "ambirot/optimize.hpp"

namespace ambirot {

struct MeanConfig {
    int grid_size = 10000;
    double gradient_tol = 1e-10;
    bool closed_form_c1 = true; // use the polar closed form when K = C1
};

struct SampleSummary {
    size_t n = 0;
    GroupPtr group;
    EmbeddedPoint mean_embedding;
    AmbiguousRotation mean;
    double dispersion = 0;
    bool mean_unique = true;
    MeanConfig config;
};

inline AmbiguousRotation sample_mean_of_embedding(const EmbeddedPoint& tbar, GroupPtr group,
                                                  const MeanConfig& cfg, bool* unique_flag) {
    if (unique_flag) *unique_flag = true;
    if (group->kind == GroupKind::Cyclic && group->order_parameter == 1 && cfg.closed_form_c1) {
        const Mat3& xbar = *tbar.matrix_part;
        Mat3 xtx = transpose(xbar) * xbar;
        auto lam = sym3_eigenvalues(xtx);
        if (lam[2] < 1e-20) {
            if (unique_flag) *unique_flag = false;
        }
        if (lam[2] > 1e-20) return {Rotation(nearest_rotation(xbar), false), group};
        // degenerate mean matrix: fall through to the optimizer
    }
    So3Objective obj{[&](const Rotation& r, Vec3* grad) { return embed_objective(r, tbar, grad); }};
    So3MaximizeConfig ocfg;
    ocfg.grid_size = cfg.grid_size;
    ocfg.gradient_tol = cfg.gradient_tol;
    ocfg.distance = [&](const Rotation& a, const Rotation& b) {
        return quotient_distance({a, group}, {b, group});
    };
    So3Maximum best = so3_maximize(obj, ocfg);
    if (unique_flag) *unique_flag = !best.tie;
    return {best.argmax, group};
}

inline double dispersion_of_embedding(const EmbeddedPoint& tbar, const SymmetryGroup& g) {
    double d = rho_squared(g) - norm2(tbar);
    return std::max(0.0, d);
}

inline SampleSummary summarize(const std::vector<AmbiguousRotation>& sample,
                               const MeanConfig& cfg = {}) {
    if (sample.empty()) throw std::invalid_argument("summarize: empty sample");
    SampleSummary s;
    s.n = sample.size();
    s.group = sample.front().group;
    s.mean_embedding = mean_embedding(sample);
    s.dispersion = dispersion_of_embedding(s.mean_embedding, *s.group);
    s.mean = sample_mean_of_embedding(s.mean_embedding, s.group, cfg, &s.mean_unique);
    s.config = cfg;
    return s;
}

inline AmbiguousRotation sample_mean(const std::vector<AmbiguousRotation>& sample,
                                     const MeanConfig& cfg = {}) {
    return summarize(sample, cfg).mean;
}

inline double dispersion(const std::vector<AmbiguousRotation>& sample) {
    if (sample.empty()) throw std::invalid_argument("dispersion: empty sample");
    return dispersion_of_embedding(mean_embedding(sample), *sample.front().group);
}

} // namespace ambirot
