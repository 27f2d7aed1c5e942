#pragma once

// Core SO(3) machinery: rotations, exponential/log maps, finite point groups
// of the first kind (C_r, D_r, T, O, Y), frames, quotient-space equality,
// tangent coordinates and Haar sampling.

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "ambirot/linalg.hpp"
#include "ambirot/rng.hpp"

namespace ambirot {

inline constexpr double kOrthoTol = 1e-10;   // algebraic identities
inline constexpr double kRoundTripTol = 1e-9; // transcendental round trips

class degeneracy_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Rotation {
    Mat3 m = Mat3::identity();

    Rotation() = default;
    explicit Rotation(const Mat3& mat, bool validate = true) : m(mat) {
        if (validate) {
            Mat3 mtm = transpose(m) * m;
            if (max_abs_diff(mtm, Mat3::identity()) > kOrthoTol)
                throw std::invalid_argument("Rotation: matrix is not orthogonal");
            if (std::fabs(det(m) - 1.0) > kOrthoTol)
                throw std::invalid_argument("Rotation: determinant is not +1");
        }
    }
    explicit Rotation(const Quat& q) : m(q.normalized().to_matrix()) {}

    Quat quaternion() const { return Quat::from_matrix(m); }
    Rotation inverse() const { return Rotation(transpose(m), false); }
    Rotation operator*(const Rotation& o) const { return Rotation(m * o.m, false); }
    Vec3 operator*(const Vec3& v) const { return m * v; }
};

// A(v) w = v x w
inline Mat3 skew(const Vec3& v) {
    Mat3 a = Mat3::zero();
    a(0, 1) = -v.z; a(0, 2) = v.y;
    a(1, 0) = v.z;  a(1, 2) = -v.x;
    a(2, 0) = -v.y; a(2, 1) = v.x;
    return a;
}

inline Vec3 unskew(const Mat3& a) { return {a(2, 1), a(0, 2), a(1, 0)}; }

// Rodrigues form of exp(A(v)); rotation by |v| about v/|v|.
inline Rotation exp_rotation(const Vec3& v) {
    double t2 = dot(v, v);
    double t = std::sqrt(t2);
    double a, b; // sin t / t, (1 - cos t) / t^2
    if (t < 1e-6) {
        a = 1 - t2 / 6 * (1 - t2 / 20);
        b = 0.5 * (1 - t2 / 12 * (1 - t2 / 30));
    } else {
        a = std::sin(t) / t;
        b = (1 - std::cos(t)) / t2;
    }
    Mat3 s = skew(v);
    Mat3 r = Mat3::identity() + s * a + (s * s) * b;
    return Rotation(r, false);
}

// angle via atan2 of the antisymmetric part against the trace; well
// conditioned near zero, unlike the plain arccos of the trace
inline double rotation_angle_of_matrix(const Mat3& m) {
    Vec3 w = unskew(m - transpose(m)) * 0.5; // sin(theta) * axis
    double s = norm(w);
    double c = (trace(m) - 1) / 2;
    return std::atan2(s, c);
}

inline double rotation_angle(const Rotation& r) { return rotation_angle_of_matrix(r.m); }

// Inverse of exp_rotation on angles < pi. At angle pi the axis sign is
// ambiguous; the branch with lexicographically largest axis is returned.
inline Vec3 log_rotation(const Rotation& r) {
    Vec3 w = unskew(r.m - transpose(r.m)) * 0.5; // sin(theta) * axis
    double s = norm(w);
    double c = (trace(r.m) - 1) / 2;
    double theta = std::atan2(s, c);
    if (theta < 1e-7) return w * (1 + theta * theta / 6);
    if (theta < M_PI - 1e-6) {
        return w * (theta / s);
    }
    // near-pi branch: axis from the symmetric part
    Mat3 b = (r.m + Mat3::identity()) * 0.5; // = n n^T + cos-ish corrections
    Vec3 n{std::sqrt(std::max(0.0, b(0, 0))),
           std::sqrt(std::max(0.0, b(1, 1))),
           std::sqrt(std::max(0.0, b(2, 2)))};
    // fix relative signs from the largest component
    int k = 0;
    if (n.y > n[k]) k = 1;
    if (n.z > n[k]) k = 2;
    for (int i = 0; i < 3; ++i)
        if (i != k && b(k, i) < 0) n[i] = -n[i];
    // lexicographically largest representative of {n, -n}
    Vec3 neg = -n;
    auto lex_less = [](const Vec3& a, const Vec3& c) {
        if (a.x != c.x) return a.x < c.x;
        if (a.y != c.y) return a.y < c.y;
        return a.z < c.z;
    };
    if (lex_less(n, neg)) n = neg;
    return normalized(n) * theta;
}

inline Rotation axis_angle(const Vec3& axis, double angle) {
    return exp_rotation(normalized(axis) * angle);
}

// Haar-uniform rotation: four standard normals, normalized to a unit quaternion.
inline Rotation haar_rotation(RandomStream& rng) {
    Quat q{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
    return Rotation(q.normalized());
}

enum class GroupKind { Cyclic, Dihedral, Tetrahedral, Octahedral, Icosahedral };

class SymmetryGroup;
using GroupPtr = std::shared_ptr<const SymmetryGroup>;

class SymmetryGroup {
public:
    GroupKind kind;
    int order_parameter; // r for C_r / D_r, 0 otherwise
    std::vector<Rotation> elements;

    const std::string& name() const { return name_; }
    size_t size() const { return elements.size(); }

    // minimal nonzero rotation angle among the elements
    double min_nonzero_angle() const { return min_angle_; }
    // radius of the injectivity neighbourhood used by tangent coordinates
    double injectivity_radius() const { return min_angle_ / 2; }

    bool same_as(const SymmetryGroup& o) const {
        return kind == o.kind && order_parameter == o.order_parameter;
    }

    static GroupPtr make(GroupKind kind, int r = 0);
    static GroupPtr parse(const std::string& tag);

private:
    std::string name_;
    double min_angle_ = M_PI;
    friend GroupPtr finalize_group(SymmetryGroup g, std::string name);
};

namespace detail {

inline std::vector<Rotation> closure(std::vector<Rotation> gens, size_t expected) {
    std::vector<Rotation> els{Rotation()};
    auto contains = [&](const Rotation& r) {
        for (const auto& e : els)
            if (max_abs_diff(e.m, r.m) < 1e-9) return true;
        return false;
    };
    for (const auto& g : gens)
        if (!contains(g)) els.push_back(g);
    bool grew = true;
    while (grew) {
        grew = false;
        size_t n = els.size();
        for (size_t i = 0; i < n && els.size() <= expected; ++i)
            for (size_t j = 0; j < n && els.size() <= expected; ++j) {
                Rotation p = els[i] * els[j];
                if (!contains(p)) {
                    els.push_back(p);
                    grew = true;
                }
            }
        if (els.size() > expected) throw std::logic_error("group closure exceeded expected order");
    }
    return els;
}

inline void canonical_sort(std::vector<Rotation>& els) {
    auto key = [](const Rotation& r) {
        std::array<double, 9> k;
        for (int i = 0; i < 9; ++i) k[i] = std::round(r.m.a[i] * 1e9) / 1e9;
        return k;
    };
    std::sort(els.begin(), els.end(),
              [&](const Rotation& a, const Rotation& b) { return key(a) < key(b); });
}

} // namespace detail

inline GroupPtr finalize_group(SymmetryGroup g, std::string name) {
    detail::canonical_sort(g.elements);
    g.name_ = std::move(name);
    double min_angle = 2 * M_PI;
    for (const auto& e : g.elements) {
        double a = rotation_angle(e);
        if (a > 1e-9) min_angle = std::min(min_angle, a);
    }
    // trivial group: the chart is injective on the whole ball of radius pi
    g.min_angle_ = (g.elements.size() == 1) ? 2 * M_PI : min_angle;
    return std::make_shared<const SymmetryGroup>(std::move(g));
}

inline GroupPtr SymmetryGroup::make(GroupKind kind, int r) {
    SymmetryGroup g;
    g.kind = kind;
    g.order_parameter = 0;
    switch (kind) {
    case GroupKind::Cyclic: {
        if (r < 1) throw std::invalid_argument("C_r requires r >= 1");
        g.order_parameter = r;
        for (int k = 0; k < r; ++k)
            g.elements.push_back(axis_angle({0, 0, 1}, 2 * M_PI * k / r));
        return finalize_group(std::move(g), "C" + std::to_string(r));
    }
    case GroupKind::Dihedral: {
        if (r < 2) throw std::invalid_argument("D_r requires r >= 2");
        g.order_parameter = r;
        Rotation flip = axis_angle({1, 0, 0}, M_PI);
        for (int k = 0; k < r; ++k) {
            Rotation c = axis_angle({0, 0, 1}, 2 * M_PI * k / r);
            g.elements.push_back(c);
            g.elements.push_back(c * flip);
        }
        return finalize_group(std::move(g), "D" + std::to_string(r));
    }
    case GroupKind::Tetrahedral: {
        double s = 1 / std::sqrt(3.0);
        g.elements = detail::closure(
            {axis_angle({s, s, s}, 2 * M_PI / 3), axis_angle({1, 0, 0}, M_PI)}, 12);
        if (g.elements.size() != 12) throw std::logic_error("tetrahedral group order != 12");
        return finalize_group(std::move(g), "T");
    }
    case GroupKind::Octahedral: {
        g.elements = detail::closure(
            {axis_angle({0, 0, 1}, M_PI / 2), axis_angle({1, 0, 0}, M_PI / 2)}, 24);
        if (g.elements.size() != 24) throw std::logic_error("octahedral group order != 24");
        return finalize_group(std::move(g), "O");
    }
    case GroupKind::Icosahedral: {
        double phi = (1 + std::sqrt(5.0)) / 2;
        g.elements = detail::closure(
            {axis_angle({0, 1, phi}, 2 * M_PI / 5), axis_angle({0, 0, 1}, M_PI)}, 60);
        if (g.elements.size() != 60) throw std::logic_error("icosahedral group order != 60");
        return finalize_group(std::move(g), "Y");
    }
    }
    throw std::invalid_argument("unknown group kind");
}

inline GroupPtr make_group(GroupKind kind, int r = 0) { return SymmetryGroup::make(kind, r); }

inline GroupPtr SymmetryGroup::parse(const std::string& tag) {
    if (tag == "T") return make(GroupKind::Tetrahedral);
    if (tag == "O") return make(GroupKind::Octahedral);
    if (tag == "Y") return make(GroupKind::Icosahedral);
    if (tag.size() >= 2 && (tag[0] == 'C' || tag[0] == 'D')) {
        int r = 0;
        try {
            size_t pos = 0;
            r = std::stoi(tag.substr(1), &pos);
            if (pos + 1 != tag.size()) r = 0;
        } catch (...) {
            r = 0;
        }
        if (r > 0) return make(tag[0] == 'C' ? GroupKind::Cyclic : GroupKind::Dihedral, r);
    }
    throw std::invalid_argument("unknown symmetry group tag: " + tag);
}

// Orientation known only up to right multiplication by a group element.
struct AmbiguousRotation {
    Rotation rep;
    GroupPtr group;

    AmbiguousRotation() = default;
    AmbiguousRotation(Rotation r, GroupPtr g) : rep(std::move(r)), group(std::move(g)) {
        if (!group) throw std::invalid_argument("AmbiguousRotation: null group");
    }
};

inline void require_same_group(const AmbiguousRotation& a, const AmbiguousRotation& b) {
    if (!a.group->same_as(*b.group))
        throw std::invalid_argument("operation requires a common symmetry group");
}

// min over R in K of the rotation angle of (x.rep R)^T y.rep; zero iff [x] = [y]
inline double quotient_distance(const AmbiguousRotation& x, const AmbiguousRotation& y) {
    require_same_group(x, y);
    Mat3 w = transpose(x.rep.m) * y.rep.m;
    double best = 2 * M_PI;
    for (const auto& r : x.group->elements)
        best = std::min(best, rotation_angle_of_matrix(transpose(r.m) * w));
    return best;
}

// Frame of unit vectors representing [U]; layout depends on the group:
//   C1: u1,u2,u3 (orthonormal, right-handed)   C2: u0; u1 (axis)
//   C_r: u0; u1..ur (polygon normals)          D2: u1,u2,u3 (axes)
//   D_r: u1..ur                                T/O/Y: face-normal sets of Table-style frames
struct KFrame {
    GroupPtr group;
    bool has_normal = false; // u0 present (C_r frames)
    Vec3 normal{};
    std::vector<Vec3> vectors;
};

namespace detail {

inline std::vector<Vec3> standard_frame_vectors(const SymmetryGroup& g) {
    switch (g.kind) {
    case GroupKind::Cyclic: {
        int r = g.order_parameter;
        if (r == 1) return {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
        if (r == 2) return {{1, 0, 0}};
        std::vector<Vec3> u;
        for (int k = 0; k < r; ++k)
            u.push_back({std::cos(2 * M_PI * k / r), std::sin(2 * M_PI * k / r), 0});
        return u;
    }
    case GroupKind::Dihedral: {
        int r = g.order_parameter;
        if (r == 2) return {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
        std::vector<Vec3> u;
        for (int k = 0; k < r; ++k)
            u.push_back({std::cos(2 * M_PI * k / r), std::sin(2 * M_PI * k / r), 0});
        return u;
    }
    case GroupKind::Tetrahedral: {
        double s = 1 / std::sqrt(3.0);
        return {{s, s, s}, {s, -s, -s}, {-s, s, -s}, {-s, -s, s}};
    }
    case GroupKind::Octahedral:
        return {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    case GroupKind::Icosahedral: {
        double phi = (1 + std::sqrt(5.0)) / 2;
        double n = std::sqrt(1 + phi * phi);
        return {{0, 1 / n, phi / n},  {0, -1 / n, phi / n}, {1 / n, phi / n, 0},
                {-1 / n, phi / n, 0}, {phi / n, 0, 1 / n},  {phi / n, 0, -1 / n}};
    }
    }
    throw std::logic_error("unreachable");
}

inline bool cyclic_frame_has_normal(const SymmetryGroup& g) {
    return g.kind == GroupKind::Cyclic && g.order_parameter >= 2;
}

} // namespace detail

inline KFrame frame_of(const AmbiguousRotation& x) {
    KFrame f;
    f.group = x.group;
    for (const auto& u : detail::standard_frame_vectors(*x.group))
        f.vectors.push_back(x.rep * u);
    if (detail::cyclic_frame_has_normal(*x.group)) {
        f.has_normal = true;
        f.normal = x.rep * Vec3{0, 0, 1};
    }
    return f;
}

// Rotation-vector coordinates of [x] in the chart centred at [base].
struct TangentCoords {
    Vec3 v;
    AmbiguousRotation base;
};

inline TangentCoords tangent_coords(const AmbiguousRotation& x, const AmbiguousRotation& base) {
    require_same_group(x, base);
    double bound = base.group->injectivity_radius();
    Mat3 w = transpose(base.rep.m) * x.rep.m;
    double best_angle = 2 * M_PI;
    Rotation best;
    for (const auto& r : base.group->elements) {
        Rotation cand(w * r.m, false);
        double a = rotation_angle(cand);
        if (a < best_angle) {
            best_angle = a;
            best = cand;
        }
    }
    if (best_angle >= bound)
        throw degeneracy_error("point outside the injectivity neighbourhood of the base");
    return {log_rotation(best), base};
}

inline AmbiguousRotation tangent_exp(const TangentCoords& t) {
    return {t.base.rep * exp_rotation(t.v), t.base.group};
}

// rho_[m0](R)[x] = [m0 R m0^T x]; well-defined for R in K and preserves [m0]
inline AmbiguousRotation symmetry_action(const AmbiguousRotation& m0, const Rotation& r,
                                         const AmbiguousRotation& x) {
    require_same_group(m0, x);
    bool in_group = false;
    for (const auto& e : m0.group->elements)
        if (max_abs_diff(e.m, r.m) < 1e-8) { in_group = true; break; }
    if (!in_group) throw std::invalid_argument("symmetry_action: rotation is not a group element");
    Mat3 conj = m0.rep.m * r.m * transpose(m0.rep.m);
    return {Rotation(conj * x.rep.m, false), x.group};
}

inline AmbiguousRotation random_ambiguous(GroupPtr g, RandomStream& rng) {
    return {haar_rotation(rng), std::move(g)};
}

} // namespace ambirot
