#pragma once

// Equivariant embeddings of SO(3)/K into symmetric-tensor spaces, their exact
// inner products, the squared radius rho^2 and embedding dimension nu, and
// sample means in the embedding space.
//
// Every embedded point satisfies <t, t> = rho^2(K) and has zero expectation
// under the Haar-uniform distribution on the quotient.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ambirot/rotations.hpp"
#include "ambirot/tensors.hpp"

namespace ambirot {

struct EmbeddedPoint {
    GroupPtr group;
    std::optional<Mat3> matrix_part;    // trivial group only
    std::optional<Vec3> vector_part;    // polygon normal u0 for cyclic groups
    std::vector<SymTensor> tensor_parts;

    EmbeddedPoint& operator+=(const EmbeddedPoint& o) {
        if (!group->same_as(*o.group)) throw std::invalid_argument("embedding group mismatch");
        if (matrix_part) *matrix_part = *matrix_part + *o.matrix_part;
        if (vector_part) *vector_part += *o.vector_part;
        for (size_t i = 0; i < tensor_parts.size(); ++i) tensor_parts[i] += o.tensor_parts[i];
        return *this;
    }
    EmbeddedPoint& scale(double s) {
        if (matrix_part) *matrix_part = *matrix_part * s;
        if (vector_part) *vector_part = *vector_part * s;
        for (auto& t : tensor_parts) t.scale(s);
        return *this;
    }
};

inline double inner(const EmbeddedPoint& a, const EmbeddedPoint& b) {
    if (!a.group->same_as(*b.group)) throw std::invalid_argument("embedding group mismatch");
    double s = 0;
    if (a.matrix_part) s += frobenius_inner(*a.matrix_part, *b.matrix_part);
    if (a.vector_part) s += dot(*a.vector_part, *b.vector_part);
    for (size_t i = 0; i < a.tensor_parts.size(); ++i) s += a.tensor_parts[i].dot(b.tensor_parts[i]);
    return s;
}

inline double norm2(const EmbeddedPoint& a) { return inner(a, a); }

// squared radius rho^2 of the embedding sphere (exact rational arithmetic)
inline double rho_squared(const SymmetryGroup& g) {
    switch (g.kind) {
    case GroupKind::Cyclic: {
        int r = g.order_parameter;
        if (r == 1) return 3.0;
        if (r == 2) return 5.0 / 3.0;
        if (r % 2)
            return 1.0 + std::ldexp(static_cast<double>(r) * r, 1 - r);
        return 1.0 + std::ldexp(static_cast<double>(r) * r, 1 - r) * (1.0 + detail::binomial(r, r / 2) / 2.0)
               - static_cast<double>(r) * r / (r + 1);
    }
    case GroupKind::Dihedral: {
        int r = g.order_parameter;
        if (r == 2) return 2.0;
        if (r % 2)
            return std::ldexp(static_cast<double>(r) * r, 1 - r);
        return std::ldexp(static_cast<double>(r) * r, 1 - r) * (1.0 + detail::binomial(r, r / 2) / 2.0)
               - static_cast<double>(r) * r / (r + 1);
    }
    case GroupKind::Tetrahedral:
        return 32.0 / 9.0;
    case GroupKind::Octahedral:
        return 6.0 / 5.0;
    case GroupKind::Icosahedral:
        return 18816.0 / 6875.0;
    }
    throw std::invalid_argument("unsupported group");
}

// dimension nu of the embedding space
inline int embedding_dim(const SymmetryGroup& g) {
    switch (g.kind) {
    case GroupKind::Cyclic: {
        int r = g.order_parameter;
        if (r == 1) return 9;
        if (r == 2) return 8;
        return (r + 2) * (r + 1) / 2 + 3;
    }
    case GroupKind::Dihedral: {
        int r = g.order_parameter;
        if (r == 2) return 10;
        return (r + 2) * (r + 1) / 2;
    }
    case GroupKind::Tetrahedral:
        return 10;
    case GroupKind::Octahedral:
        return 9;
    case GroupKind::Icosahedral:
        return 21;
    }
    throw std::invalid_argument("unsupported group");
}

inline double rho_squared(const AmbiguousRotation& x) { return rho_squared(*x.group); }
inline int embedding_dim(const AmbiguousRotation& x) { return embedding_dim(*x.group); }

// tensor rank used by the embedding of K
inline int embedding_rank(const SymmetryGroup& g) {
    switch (g.kind) {
    case GroupKind::Cyclic:
        return g.order_parameter == 1 ? 0 : std::max(2, g.order_parameter);
    case GroupKind::Dihedral:
        return g.order_parameter == 2 ? 2 : g.order_parameter;
    case GroupKind::Tetrahedral: return 3;
    case GroupKind::Octahedral: return 4;
    case GroupKind::Icosahedral: return 10;
    }
    throw std::invalid_argument("unsupported group");
}

inline EmbeddedPoint embed(const AmbiguousRotation& x) {
    EmbeddedPoint e;
    e.group = x.group;
    const auto& g = *x.group;
    KFrame f = frame_of(x);
    switch (g.kind) {
    case GroupKind::Cyclic: {
        int r = g.order_parameter;
        if (r == 1) {
            e.matrix_part = x.rep.m;
            return e;
        }
        e.vector_part = f.normal;
        if (r == 2) {
            SymTensor t(2);
            t.add_outer_power(f.vectors[0]);
            t.add_symmetrized_identity_power(-1.0 / 3.0);
            e.tensor_parts.push_back(std::move(t));
            return e;
        }
        SymTensor t(r);
        for (const auto& u : f.vectors) t.add_outer_power(u);
        if (r % 2 == 0) t.add_symmetrized_identity_power(-static_cast<double>(r) / (r + 1));
        e.tensor_parts.push_back(std::move(t));
        return e;
    }
    case GroupKind::Dihedral: {
        int r = g.order_parameter;
        if (r == 2) {
            for (const auto& u : f.vectors) {
                SymTensor t(2);
                t.add_outer_power(u);
                t.add_symmetrized_identity_power(-1.0 / 3.0);
                e.tensor_parts.push_back(std::move(t));
            }
            return e;
        }
        SymTensor t(r);
        for (const auto& u : f.vectors) t.add_outer_power(u);
        if (r % 2 == 0) t.add_symmetrized_identity_power(-static_cast<double>(r) / (r + 1));
        e.tensor_parts.push_back(std::move(t));
        return e;
    }
    case GroupKind::Tetrahedral: {
        SymTensor t(3);
        for (const auto& u : f.vectors) t.add_outer_power(u);
        e.tensor_parts.push_back(std::move(t));
        return e;
    }
    case GroupKind::Octahedral: {
        SymTensor t(4);
        for (const auto& u : f.vectors) t.add_outer_power(u);
        t.add_symmetrized_identity_power(-3.0 / 5.0);
        e.tensor_parts.push_back(std::move(t));
        return e;
    }
    case GroupKind::Icosahedral: {
        SymTensor t(10);
        for (const auto& u : f.vectors) t.add_outer_power(u);
        t.add_symmetrized_identity_power(-6.0 / 11.0);
        e.tensor_parts.push_back(std::move(t));
        return e;
    }
    }
    throw std::invalid_argument("unsupported group");
}

namespace detail {

inline double ipow(double x, int p) {
    double y = 1;
    for (int i = 0; i < p; ++i) y *= x;
    return y;
}

} // namespace detail

// Closed-form inner product <t([x]), t([y])> evaluated directly on frames.
// Agrees with inner(embed(x), embed(y)) to floating-point accuracy.
inline double closed_form_inner(const AmbiguousRotation& x, const AmbiguousRotation& y) {
    require_same_group(x, y);
    const auto& g = *x.group;
    KFrame fx = frame_of(x), fy = frame_of(y);
    switch (g.kind) {
    case GroupKind::Cyclic: {
        int r = g.order_parameter;
        if (r == 1) return frobenius_inner(x.rep.m, y.rep.m);
        double s = dot(fx.normal, fy.normal);
        if (r == 2) return s + detail::ipow(dot(fx.vectors[0], fy.vectors[0]), 2) - 1.0 / 3.0;
        for (const auto& u : fx.vectors)
            for (const auto& v : fy.vectors) s += detail::ipow(dot(u, v), r);
        if (r % 2 == 0) s -= static_cast<double>(r) * r / (r + 1);
        return s;
    }
    case GroupKind::Dihedral: {
        int r = g.order_parameter;
        if (r == 2) {
            double s = -1.0;
            for (int i = 0; i < 3; ++i) s += detail::ipow(dot(fx.vectors[i], fy.vectors[i]), 2);
            return s;
        }
        double s = 0;
        for (const auto& u : fx.vectors)
            for (const auto& v : fy.vectors) s += detail::ipow(dot(u, v), r);
        if (r % 2 == 0) s -= static_cast<double>(r) * r / (r + 1);
        return s;
    }
    case GroupKind::Tetrahedral: {
        double s = 0;
        for (const auto& u : fx.vectors)
            for (const auto& v : fy.vectors) s += detail::ipow(dot(u, v), 3);
        return s;
    }
    case GroupKind::Octahedral: {
        double s = -9.0 / 5.0;
        for (const auto& u : fx.vectors)
            for (const auto& v : fy.vectors) s += detail::ipow(dot(u, v), 4);
        return s;
    }
    case GroupKind::Icosahedral: {
        double s = -36.0 / 11.0;
        for (const auto& u : fx.vectors)
            for (const auto& v : fy.vectors) s += detail::ipow(dot(u, v), 10);
        return s;
    }
    }
    throw std::invalid_argument("unsupported group");
}

inline EmbeddedPoint mean_embedding(const std::vector<AmbiguousRotation>& sample) {
    if (sample.empty()) throw std::invalid_argument("mean_embedding: empty sample");
    for (const auto& x : sample) require_same_group(sample.front(), x);
    EmbeddedPoint m = embed(sample.front());
    for (size_t i = 1; i < sample.size(); ++i) m += embed(sample[i]);
    m.scale(1.0 / static_cast<double>(sample.size()));
    return m;
}

// Gradient, with respect to a left perturbation exp(skew(w)) R of the candidate
// rotation R, of the objective g(R) = <t([R]), target>.
inline double embed_objective(const Rotation& r, const EmbeddedPoint& target, Vec3* grad) {
    const auto& g = *target.group;
    AmbiguousRotation cand{r, target.group};
    EmbeddedPoint e = embed(cand);
    double value = inner(e, target);
    if (!grad) return value;
    Vec3 w{};
    if (target.matrix_part) {
        // d/dw tr((exp(skew(w)) R)^T M) = -tr(skew(w) M R^T)
        Mat3 b = *target.matrix_part * transpose(r.m);
        w = {-(b(1, 2) - b(2, 1)), -(b(2, 0) - b(0, 2)), -(b(0, 1) - b(1, 0))};
    } else {
        KFrame f = frame_of(cand);
        size_t ti = 0;
        if (g.kind == GroupKind::Dihedral && g.order_parameter == 2) {
            for (int i = 0; i < 3; ++i) {
                Vec3 du = target.tensor_parts[i].outer_power_gradient(f.vectors[i]);
                w += cross(f.vectors[i], du);
            }
        } else {
            for (const auto& u : f.vectors) {
                Vec3 du = target.tensor_parts[ti].outer_power_gradient(u);
                w += cross(u, du);
            }
        }
        if (target.vector_part) w += cross(f.normal, *target.vector_part);
    }
    *grad = w;
    return value;
}

} // namespace ambirot
