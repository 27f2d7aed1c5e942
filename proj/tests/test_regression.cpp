#include <doctest.h>

#include "support.hpp"

using namespace ambirot;
using namespace ambirot::testing;

namespace {

RotationPairs noiseless_pairs(GroupPtr g, const Rotation& a, int n, RandomStream& rng) {
    RotationPairs pairs;
    for (int i = 0; i < n; ++i) {
        AmbiguousRotation u = random_ambiguous(g, rng);
        pairs.emplace_back(u, AmbiguousRotation{Rotation(a.m * u.rep.m, false), g});
    }
    return pairs;
}

RegressionConfig quick_cfg(int grid = 2000) {
    RegressionConfig cfg;
    cfg.grid_size = grid;
    return cfg;
}

} // namespace

TEST_CASE("noiseless link recovery") {
    RandomStream rng(91);
    for (const char* tag : {"C1", "C2", "D2", "O"}) {
        auto g = SymmetryGroup::parse(tag);
        Rotation a = haar_rotation(rng);
        RotationPairs pairs = noiseless_pairs(g, a, 6, rng);
        RegressionFit fit = fit_regression(pairs, quick_cfg());
        CHECK(rotation_angle(Rotation(transpose(fit.a_hat.m) * a.m, false)) < 1e-6);
        CHECK(fit.r == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(fit.rho12 == doctest::Approx(rho_squared(*g)).epsilon(1e-12));
        CHECK(fit.residual_sum == doctest::Approx(0.0).epsilon(1e-8));
    }
}

TEST_CASE("single trivial-group pair has the closed-form link") {
    RandomStream rng(92);
    auto c1 = make_group(GroupKind::Cyclic, 1);
    AmbiguousRotation u = random_ambiguous(c1, rng);
    AmbiguousRotation v = random_ambiguous(c1, rng);
    RegressionFit fit = fit_regression({{u, v}}, quick_cfg());
    Mat3 expected = v.rep.m * transpose(u.rep.m);
    CHECK(max_abs_diff(fit.a_hat.m, expected) < 1e-7);
}

TEST_CASE("noisy link recovery at high concentration") {
    RandomStream rng(93);
    auto g = make_group(GroupKind::Octahedral);
    Rotation a = haar_rotation(rng);
    RotationPairs pairs;
    for (int i = 0; i < 50; ++i) {
        AmbiguousRotation u = random_ambiguous(g, rng);
        AmbiguousRotation mean{Rotation(a.m * u.rep.m, false), g};
        auto noise = sample({Family::Watson, mean, 100.0}, 1, 10000 + i);
        pairs.emplace_back(u, noise.front());
    }
    RegressionFit fit = fit_regression(pairs, quick_cfg(4000));
    CHECK(rotation_angle(Rotation(transpose(fit.a_hat.m) * a.m, false)) < 0.05);
    CHECK(fit.kappa_hat == doctest::Approx(100.0).epsilon(0.4));
}

TEST_CASE("objective is invariant under representative substitution") {
    RandomStream rng(94);
    auto g = make_group(GroupKind::Tetrahedral);
    Rotation a = haar_rotation(rng);
    RotationPairs pairs = noiseless_pairs(g, haar_rotation(rng), 8, rng);
    double base = Regression::objective(pairs, a, 4, nullptr);
    RotationPairs subst;
    for (const auto& [u, v] : pairs) {
        const auto& els = g->elements;
        subst.emplace_back(AmbiguousRotation{u.rep * els[rng.uniform_index(els.size())], g},
                           AmbiguousRotation{v.rep * els[rng.uniform_index(els.size())], g});
    }
    CHECK(Regression::objective(subst, a, 4, nullptr) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("equivariance of the fitted link") {
    RandomStream rng(95);
    auto c1 = make_group(GroupKind::Cyclic, 1);
    Rotation a = haar_rotation(rng);
    RotationPairs pairs;
    for (int i = 0; i < 12; ++i) {
        AmbiguousRotation u = random_ambiguous(c1, rng);
        auto noise = sample({Family::Watson, {Rotation(a.m * u.rep.m, false), c1}, 40.0}, 1,
                            20000 + i);
        pairs.emplace_back(u, noise.front());
    }
    RegressionFit fit = fit_regression(pairs, quick_cfg());
    Rotation w = haar_rotation(rng);
    RotationPairs moved;
    for (const auto& [u, v] : pairs)
        moved.emplace_back(u, AmbiguousRotation{Rotation(w.m * v.rep.m, false), c1});
    RegressionFit fit2 = fit_regression(moved, quick_cfg());
    CHECK(rotation_angle(Rotation(transpose(fit2.a_hat.m) * (w.m * fit.a_hat.m), false)) < 1e-5);
    CHECK(fit2.objective == doctest::Approx(fit.objective).epsilon(1e-6));
}

TEST_CASE("regression objective gradient matches finite differences") {
    RandomStream rng(96);
    for (const char* tag : {"C1", "C2", "D2", "D3", "T", "O", "Y"}) {
        auto g = SymmetryGroup::parse(tag);
        RotationPairs pairs = noiseless_pairs(g, haar_rotation(rng), 3, rng);
        Rotation a = haar_rotation(rng);
        Vec3 grad;
        Regression::objective(pairs, a, 4, &grad);
        const double h = 1e-6;
        for (int k = 0; k < 3; ++k) {
            Vec3 dv{};
            dv[k] = h;
            double up = Regression::objective(pairs, Rotation(exp_rotation(dv).m * a.m, false), 4,
                                              nullptr);
            dv[k] = -h;
            double dn = Regression::objective(pairs, Rotation(exp_rotation(dv).m * a.m, false), 4,
                                              nullptr);
            CHECK(grad[k] == doctest::Approx((up - dn) / (2 * h)).epsilon(1e-4));
        }
    }
}

TEST_CASE("cross-group objective gradient matches finite differences") {
    RandomStream rng(97);
    auto g1 = make_group(GroupKind::Cyclic, 2);
    auto g2 = make_group(GroupKind::Dihedral, 2);
    RotationPairs pairs;
    for (int i = 0; i < 3; ++i)
        pairs.emplace_back(random_ambiguous(g1, rng), random_ambiguous(g2, rng));
    Rotation a = haar_rotation(rng);
    Vec3 grad;
    Regression::objective(pairs, a, 3, &grad);
    const double h = 1e-6;
    for (int k = 0; k < 3; ++k) {
        Vec3 dv{};
        dv[k] = h;
        double up = Regression::objective(pairs, Rotation(exp_rotation(dv).m * a.m, false), 3,
                                          nullptr);
        dv[k] = -h;
        double dn = Regression::objective(pairs, Rotation(exp_rotation(dv).m * a.m, false), 3,
                                          nullptr);
        CHECK(grad[k] == doctest::Approx((up - dn) / (2 * h)).epsilon(1e-4));
    }
}

TEST_CASE("cross-group regression recovers an aligned link") {
    RandomStream rng(98);
    auto g1 = make_group(GroupKind::Cyclic, 2);
    auto g2 = make_group(GroupKind::Dihedral, 2);
    Rotation a = haar_rotation(rng);
    RotationPairs pairs;
    for (int i = 0; i < 20; ++i) {
        AmbiguousRotation u = random_ambiguous(g1, rng);
        pairs.emplace_back(u, AmbiguousRotation{Rotation(a.m * u.rep.m, false), g2});
    }
    RegressionConfig cfg;
    cfg.grid_size = 1024;
    cfg.band_limit = 4;
    RegressionFit fit = fit_regression(pairs, cfg);
    CHECK(fit.cross_group);
    CHECK(fit.band_limit == 4);
    // the averaged objective at the fitted link must reach the value at the
    // true link (the maximizer need not be unique across the quotient)
    double at_true = Regression::objective(pairs, a, 4, nullptr);
    CHECK(fit.objective >= at_true - 1e-6);
    CHECK(fit.rho12 > 0.1);
    CHECK(fit.r <= 1.0 + 1e-9);
}

TEST_CASE("correlation properties") {
    RandomStream rng(99);
    auto g = make_group(GroupKind::Dihedral, 2);
    Rotation a = haar_rotation(rng);
    RotationPairs pairs = noiseless_pairs(g, a, 10, rng);
    RegressionFit fit = fit_regression(pairs, quick_cfg());
    CHECK(correlation(pairs, fit) == doctest::Approx(1.0).epsilon(1e-9));

    // independent margins give near-zero correlation
    RotationPairs indep;
    for (int i = 0; i < 250; ++i)
        indep.emplace_back(random_ambiguous(g, rng), random_ambiguous(g, rng));
    RegressionFit fit0 = fit_regression(indep, quick_cfg());
    CHECK(std::fabs(fit0.r) < 0.25);

    // the fitted link maximizes the correlation over candidate links
    for (int i = 0; i < 100; ++i) {
        RegressionFit probe = fit0;
        probe.a_hat = haar_rotation(rng);
        CHECK(correlation(indep, probe) <= fit0.r + 1e-9);
    }
}

TEST_CASE("residual chi-square decomposition is exact") {
    RandomStream rng(100);
    auto g = make_group(GroupKind::Octahedral);
    Rotation a_true = haar_rotation(rng);
    RotationPairs pairs;
    for (int i = 0; i < 20; ++i) {
        AmbiguousRotation u = random_ambiguous(g, rng);
        auto noise = sample({Family::Watson, {Rotation(a_true.m * u.rep.m, false), g}, 200.0}, 1,
                            30000 + i);
        pairs.emplace_back(u, noise.front());
    }
    RegressionFit fit = fit_regression(pairs, quick_cfg());
    double n = static_cast<double>(pairs.size());
    double rho2 = rho_squared(*g);
    // total(A) = fitted(A_hat) + excess(A) for any candidate A
    for (int i = 0; i < 5; ++i) {
        Rotation a = haar_rotation(rng);
        double total = n * rho2 - Regression::objective(pairs, a, 4, nullptr);
        double fitted = n * rho2 - fit.objective;
        double excess = fit.objective - Regression::objective(pairs, a, 4, nullptr);
        CHECK(total == doctest::Approx(fitted + excess).epsilon(1e-10));
    }
    ResidualInference inf = residual_chi2_inference(pairs, fit);
    CHECK(inf.df == doctest::Approx(3.0 * (n - 1)));
    CHECK(inf.kappa_hat == doctest::Approx(200.0).epsilon(0.5));
    // a far-away candidate is excluded
    Rotation far(exp_rotation({0.5, 0, 0}).m * a_true.m, false);
    CHECK(!inf.in_region(far, 0.05));

    // nominal 95% coverage of the true link over repeated simulations
    int covered = 0, sims = 15;
    for (int s = 0; s < sims; ++s) {
        RotationPairs sim;
        for (int i = 0; i < 15; ++i) {
            AmbiguousRotation u = random_ambiguous(g, rng);
            auto noise = sample({Family::Watson, {Rotation(a_true.m * u.rep.m, false), g}, 200.0},
                                1, 50000 + 100 * s + i);
            sim.emplace_back(u, noise.front());
        }
        RegressionFit f = fit_regression(sim, quick_cfg());
        if (residual_chi2_inference(sim, f).in_region(a_true, 0.05)) ++covered;
    }
    CHECK(covered >= 11);
}

TEST_CASE("misorientation basics") {
    RandomStream rng(101);
    auto o = make_group(GroupKind::Octahedral);
    AmbiguousRotation u = random_ambiguous(o, rng);
    Misorientation same = misorientation(u, u);
    CHECK(same.angle < 1e-12);

    // a 50-degree turn about a four-fold axis is 40 degrees from the next
    // symmetric copy; the exhaustive search must find the smaller angle
    AmbiguousRotation v{u.rep * axis_angle({0, 0, 1}, 50 * M_PI / 180), o};
    Misorientation m = misorientation(u, v);
    CHECK(m.angle == doctest::Approx(40 * M_PI / 180).epsilon(1e-10));

    // symmetric in its arguments
    Misorientation rev = misorientation(v, u);
    CHECK(rev.angle == doctest::Approx(m.angle).epsilon(1e-12));

    // invariant to representative substitution on both sides
    for (int i = 0; i < 10; ++i) {
        AmbiguousRotation u2{u.rep * o->elements[rng.uniform_index(o->size())], o};
        AmbiguousRotation v2{v.rep * o->elements[rng.uniform_index(o->size())], o};
        CHECK(misorientation(u2, v2).angle == doctest::Approx(m.angle).epsilon(1e-10));
    }

    // independent brute force over the product group reproduces the angle
    double brute = 1e9;
    for (const auto& r1 : o->elements)
        for (const auto& r2 : o->elements) {
            Rotation p((u.rep * r1).inverse().m * (v.rep * r2).m, false);
            brute = std::min(brute, rotation_angle(p));
        }
    CHECK(m.angle == doctest::Approx(brute).epsilon(1e-12));

    // the representative satisfies [V] = [U P] in the double-coset sense
    double link = 1e9;
    for (const auto& r1 : o->elements) {
        Rotation up(u.rep.m * r1.m * m.p.m, false);
        link = std::min(link, quotient_distance({up, o}, v));
    }
    CHECK(link < 1e-9);
}

TEST_CASE("mixed-group misorientation") {
    RandomStream rng(102);
    auto c2 = make_group(GroupKind::Cyclic, 2);
    auto d3 = make_group(GroupKind::Dihedral, 3);
    AmbiguousRotation u = random_ambiguous(c2, rng);
    AmbiguousRotation v = random_ambiguous(d3, rng);
    Misorientation m = misorientation(u, v);
    CHECK(m.angle >= 0);
    CHECK(m.angle <= M_PI);
    CHECK(misorientation(v, u).angle == doctest::Approx(m.angle).epsilon(1e-12));
}

TEST_CASE("mean misorientation definitions agree on clean data") {
    RandomStream rng(103);
    auto g = make_group(GroupKind::Dihedral, 2);
    Rotation a = haar_rotation(rng);
    RotationPairs pairs = noiseless_pairs(g, a, 10, rng);
    Rotation primary = mean_misorientation(pairs, quick_cfg());
    AlternatingMeanResult alt = mean_misorientation_alt(pairs, quick_cfg());

    // the alternating objective cannot beat perfect alignment, and the trace
    // must be nondecreasing
    double best_possible = static_cast<double>(pairs.size()) * rho_squared(*g);
    CHECK(alt.objective == doctest::Approx(best_possible).epsilon(1e-8));
    for (size_t i = 1; i < alt.objective_trace.size(); ++i)
        CHECK(alt.objective_trace[i] >= alt.objective_trace[i - 1] - 1e-9);
    CHECK(rotation_angle(Rotation(transpose(primary.m) * a.m, false)) < 1e-6);
}

TEST_CASE("alternating mean improves on concentrated noisy data") {
    RandomStream rng(104);
    auto g = make_group(GroupKind::Cyclic, 2);
    Rotation a = haar_rotation(rng);
    RotationPairs pairs;
    for (int i = 0; i < 15; ++i) {
        AmbiguousRotation u = random_ambiguous(g, rng);
        auto noise = sample({Family::Watson, {Rotation(a.m * u.rep.m, false), g}, 80.0}, 1,
                            40000 + i);
        pairs.emplace_back(u, noise.front());
    }
    AlternatingMeanResult alt = mean_misorientation_alt(pairs, quick_cfg(1000));
    RegressionFit fit = fit_regression(pairs, quick_cfg(1000));
    CHECK(alt.objective >= fit.objective - 1e-9);
    CHECK(alt.starts_agreeing >= 2);
}

TEST_CASE("empty data is rejected") {
    CHECK_THROWS_AS(fit_regression({}), std::invalid_argument);
    CHECK_THROWS_AS(mean_misorientation_alt({}), std::invalid_argument);
}
