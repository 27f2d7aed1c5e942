#pragma once

// Shared test helpers: a brute-force dense-tensor implementation of every
// embedding, used as the oracle against the compressed production path.

#include <vector>

#include "ambirot/ambirot.hpp"

namespace ambirot::testing {

struct DenseEmbedding {
    std::optional<Mat3> matrix_part;
    std::optional<Vec3> vector_part;
    std::vector<DenseTensor> tensor_parts;
};

inline DenseTensor dense_identity_power(int m) {
    // build from the compressed closed form only for ranks where the direct
    // permutation-sum oracle is too slow; cross-checked in the tensor tests
    SymTensor s(2 * m);
    s.add_symmetrized_identity_power(1.0);
    return to_dense(s);
}

inline DenseEmbedding dense_embed(const AmbiguousRotation& x) {
    DenseEmbedding e;
    const auto& g = *x.group;
    KFrame f = frame_of(x);
    auto power_sum = [&](int rank, double correction) {
        DenseTensor t(rank);
        for (const auto& u : f.vectors) t += DenseTensor::outer_power(u, rank);
        if (correction != 0) {
            DenseTensor c = dense_identity_power(rank / 2);
            c.scale(correction);
            t += c;
        }
        return t;
    };
    switch (g.kind) {
    case GroupKind::Cyclic: {
        int r = g.order_parameter;
        if (r == 1) {
            e.matrix_part = x.rep.m;
            return e;
        }
        e.vector_part = f.normal;
        if (r == 2) {
            DenseTensor t = DenseTensor::outer_power(f.vectors[0], 2);
            DenseTensor c = dense_identity_power(1);
            c.scale(-1.0 / 3.0);
            t += c;
            e.tensor_parts.push_back(std::move(t));
            return e;
        }
        e.tensor_parts.push_back(power_sum(r, r % 2 ? 0.0 : -static_cast<double>(r) / (r + 1)));
        return e;
    }
    case GroupKind::Dihedral: {
        int r = g.order_parameter;
        if (r == 2) {
            for (const auto& u : f.vectors) {
                DenseTensor t = DenseTensor::outer_power(u, 2);
                DenseTensor c = dense_identity_power(1);
                c.scale(-1.0 / 3.0);
                t += c;
                e.tensor_parts.push_back(std::move(t));
            }
            return e;
        }
        e.tensor_parts.push_back(power_sum(r, r % 2 ? 0.0 : -static_cast<double>(r) / (r + 1)));
        return e;
    }
    case GroupKind::Tetrahedral:
        e.tensor_parts.push_back(power_sum(3, 0.0));
        return e;
    case GroupKind::Octahedral:
        e.tensor_parts.push_back(power_sum(4, -3.0 / 5.0));
        return e;
    case GroupKind::Icosahedral:
        e.tensor_parts.push_back(power_sum(10, -6.0 / 11.0));
        return e;
    }
    throw std::logic_error("unreachable");
}

inline double dense_inner(const DenseEmbedding& a, const DenseEmbedding& b) {
    double s = 0;
    if (a.matrix_part) s += frobenius_inner(*a.matrix_part, *b.matrix_part);
    if (a.vector_part) s += dot(*a.vector_part, *b.vector_part);
    for (size_t i = 0; i < a.tensor_parts.size(); ++i) s += a.tensor_parts[i].dot(b.tensor_parts[i]);
    return s;
}

inline std::vector<GroupPtr> all_test_groups() {
    return {make_group(GroupKind::Cyclic, 1),   make_group(GroupKind::Cyclic, 2),
            make_group(GroupKind::Cyclic, 3),   make_group(GroupKind::Cyclic, 4),
            make_group(GroupKind::Cyclic, 5),   make_group(GroupKind::Cyclic, 6),
            make_group(GroupKind::Dihedral, 2), make_group(GroupKind::Dihedral, 3),
            make_group(GroupKind::Dihedral, 4), make_group(GroupKind::Dihedral, 5),
            make_group(GroupKind::Dihedral, 6), make_group(GroupKind::Tetrahedral),
            make_group(GroupKind::Octahedral),  make_group(GroupKind::Icosahedral)};
}

} // namespace ambirot::testing
