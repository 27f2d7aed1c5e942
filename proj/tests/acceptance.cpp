// Acceptance suite: one self-contained check per release criterion, each
// printing a PASS/FAIL line with its measured numbers and runtime. The
// process exits with the number of failed criteria.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "ambirot/ambirot.hpp"
#include "support.hpp"

using namespace ambirot;
using namespace ambirot::testing;

namespace {

int g_failures = 0;

struct Criterion {
    std::string label;
    double time_limit_s;
    std::vector<std::string> notes;
    bool ok = true;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    explicit Criterion(std::string l, double limit) : label(std::move(l)), time_limit_s(limit) {}

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            notes.push_back("FAILED: " + what);
        } else {
            notes.push_back("ok: " + what);
        }
    }

    void finish() {
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs > time_limit_s) {
            ok = false;
            notes.push_back("FAILED: runtime " + std::to_string(secs) + " s exceeds " +
                            std::to_string(time_limit_s) + " s");
        }
        std::printf("[%s] %s (%.1f s)\n", ok ? "PASS" : "FAIL", label.c_str(), secs);
        for (const auto& n : notes) std::printf("        %s\n", n.c_str());
        std::fflush(stdout);
        if (!ok) ++g_failures;
    }
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::vector<AmbiguousRotation> haar_sample(GroupPtr g, int n, RandomStream& rng) {
    std::vector<AmbiguousRotation> s;
    s.reserve(n);
    for (int i = 0; i < n; ++i) s.push_back(random_ambiguous(g, rng));
    return s;
}

// ---------------------------------------------------------------------------

void criterion1_constants() {
    Criterion c("criterion 1: embedding radius and dimension constants", 10.0);
    struct Row {
        const char* tag;
        double rho2;
        int nu;
    };
    const std::vector<Row> rows{
        {"C1", 3.0, 9},
        {"C2", 5.0 / 3.0, 8},
        {"C3", 1 + 9.0 * std::ldexp(1.0, -2), 13},
        {"C4", 1 + 16 * std::ldexp(1.0, -3) * (1 + 3.0) - 16.0 / 5, 18},
        {"C5", 1 + 25 * std::ldexp(1.0, -4), 24},
        {"C6", 1 + 36 * std::ldexp(1.0, -5) * (1 + 10.0) - 36.0 / 7, 31},
        {"D2", 2.0, 10},
        {"D3", 9.0 * std::ldexp(1.0, -2), 10},
        {"D4", 16 * std::ldexp(1.0, -3) * (1 + 3.0) - 16.0 / 5, 15},
        {"D5", 25 * std::ldexp(1.0, -4), 21},
        {"D6", 36 * std::ldexp(1.0, -5) * (1 + 10.0) - 36.0 / 7, 28},
        {"T", 32.0 / 9, 10},
        {"O", 6.0 / 5, 9},
        {"Y", 18816.0 / 6875, 21},
    };
    RandomStream rng(2024001);
    double worst = 0;
    bool nu_ok = true, rho_ok = true;
    for (const auto& row : rows) {
        auto g = SymmetryGroup::parse(row.tag);
        rho_ok = rho_ok && std::fabs(rho_squared(*g) - row.rho2) < 1e-12;
        nu_ok = nu_ok && embedding_dim(*g) == row.nu;
        for (int i = 0; i < 100; ++i) {
            AmbiguousRotation x = random_ambiguous(g, rng);
            worst = std::max(worst, std::fabs(norm2(embed(x)) - row.rho2));
        }
    }
    c.require(rho_ok, "tabulated squared radii match the closed forms exactly");
    c.require(nu_ok, "tabulated dimensions match the closed forms exactly");
    c.require(worst < 1e-9, "max | |t|^2 - rho^2 | over 100 draws per group = " + fmt(worst));
    c.finish();
}

void criterion2_inner_products() {
    Criterion c("criterion 2: closed-form inner products equal dense contractions", 30.0);
    RandomStream rng(2024002);
    double worst = 0;
    for (const auto& g : all_test_groups()) {
        for (int i = 0; i < 100; ++i) {
            AmbiguousRotation x = random_ambiguous(g, rng);
            AmbiguousRotation y = random_ambiguous(g, rng);
            double closed = closed_form_inner(x, y);
            double dense = dense_inner(dense_embed(x), dense_embed(y));
            worst = std::max(worst, std::fabs(closed - dense));
        }
    }
    c.require(worst < 1e-9,
              "max |closed - dense| over 100 pairs x 14 groups (rank-10 included) = " + fmt(worst));
    c.finish();
}

void criterion3_calibration() {
    Criterion c("criterion 3: chi-square calibration and the cyclic decomposition", 300.0);
    const int reps = 2000, n = 200;
    for (const char* tag : {"C1", "D2", "T", "O"}) {
        auto g = SymmetryGroup::parse(tag);
        double nu = embedding_dim(*g);
        RandomStream rng(2024003);
        std::vector<double> stats;
        stats.reserve(reps);
        auto chunks = parallel_chunks<double>(reps, [&](size_t i) {
            RandomStream r(splitmix_seed(2024003, i));
            return uniformity_statistic(haar_sample(g, n, r));
        });
        for (double s : chunks) stats.push_back(s);
        auto ks = ks_test(stats, [&](double x) { return chi2_cdf(x, nu); });
        c.require(ks.p_value > 0.01, std::string(tag) + ": S quantiles vs chi-square(" +
                                         fmt(nu) + "), KS p = " + fmt(ks.p_value) +
                                         " (D = " + fmt(ks.d) + ")");
    }
    // C2: exact decomposition identity and empirical independence of the parts
    {
        auto g = SymmetryGroup::parse("C2");
        double worst_identity = 0;
        std::vector<double> sr, sb;
        for (int i = 0; i < reps; ++i) {
            RandomStream r(splitmix_seed(2024013, i));
            auto s = haar_sample(g, n, r);
            double S = uniformity_statistic(s);
            CyclicComponents comp = rayleigh_bingham_components(s);
            double lhs = comp.rho2_c / comp.nu_c * S;
            double rhs = comp.s_rayleigh / 3 + 2.0 / 15 * comp.s_bingham;
            worst_identity = std::max(worst_identity, std::fabs(lhs - rhs));
            sr.push_back(comp.s_rayleigh);
            sb.push_back(comp.s_bingham);
        }
        c.require(worst_identity < 1e-10,
                  "C2 decomposition (rho^2/nu) S = (1/3) S_R + (2/15) S_B, max |lhs - rhs| = " +
                      fmt(worst_identity));
        double mr = sample_mean_of(sr), mb = sample_mean_of(sb);
        double cov = 0, vr = 0, vb = 0;
        for (int i = 0; i < reps; ++i) {
            cov += (sr[i] - mr) * (sb[i] - mb);
            vr += (sr[i] - mr) * (sr[i] - mr);
            vb += (sb[i] - mb) * (sb[i] - mb);
        }
        double corr = cov / std::sqrt(vr * vb);
        c.require(std::fabs(corr) < 0.05, "C2 empirical corr(S_R, S_B) = " + fmt(corr));
    }
    c.finish();
}

void criterion4_high_concentration() {
    Criterion c("criterion 4: high-concentration tangent variances", 600.0);
    const double kappa = 500;
    const size_t n = 20000;
    struct Row {
        const char* tag;
        uint64_t seed;
    };
    for (const auto& row : std::vector<Row>{{"C1", 41}, {"C2", 42}, {"D2", 43}, {"T", 44},
                                            {"O", 45}, {"Y", 46}}) {
        auto g = SymmetryGroup::parse(row.tag);
        Mat3 expected = high_conc_sigma(g).sigma;
        Mat3 cov = verify_sigma_mc(g, Family::Watson, kappa, n, row.seed);
        double num = 0, den = 0;
        for (int i = 0; i < 9; ++i) {
            num += (cov.a[i] - expected.a[i]) * (cov.a[i] - expected.a[i]);
            den += expected.a[i] * expected.a[i];
        }
        double rel = std::sqrt(num / den);
        c.require(rel < 0.05,
                  std::string(row.tag) + ": watson MC covariance vs tabulated Sigma, relative "
                                         "frobenius error = " +
                      fmt(rel) + "  [diag " + fmt(cov(0, 0)) + ", " + fmt(cov(1, 1)) + ", " +
                      fmt(cov(2, 2)) + " vs " + fmt(expected(0, 0)) + ", " + fmt(expected(1, 1)) +
                      ", " + fmt(expected(2, 2)) + "]");
    }
    // the dlvp scaling claim: (kappa/2)^(1/2) v should reproduce the watson
    // tangent covariance
    {
        auto g = SymmetryGroup::parse("O");
        Mat3 watson_cov = verify_sigma_mc(g, Family::Watson, kappa, n, 45);
        Mat3 dlvp_cov = verify_sigma_mc(g, Family::Dlvp, kappa, n, 47);
        double num = 0, den = 0;
        for (int i = 0; i < 9; ++i) {
            num += (dlvp_cov.a[i] - watson_cov.a[i]) * (dlvp_cov.a[i] - watson_cov.a[i]);
            den += watson_cov.a[i] * watson_cov.a[i];
        }
        double rel = std::sqrt(num / den);
        c.require(rel < 0.10, "O: dlvp (kappa/2)^(1/2) tangent covariance vs watson, relative "
                              "frobenius error = " +
                                  fmt(rel) + "  [dlvp diag " + fmt(dlvp_cov(0, 0)) + ", " +
                                  fmt(dlvp_cov(1, 1)) + ", " + fmt(dlvp_cov(2, 2)) + "]");
    }
    c.finish();
}

void criterion5_consistency_contrast() {
    Criterion c("criterion 5: consistency contrast on the +/-kappa cardioid mixture", 600.0);
    auto g = SymmetryGroup::parse("C1");
    AmbiguousRotation mode{Rotation(), g};
    double rho2 = rho_squared(*g);
    double kappa = 1.0 / rho2;
    const int sims = 300, n = 200, B = 99;

    // one observation from the equal mixture of the +kappa and -kappa
    // cardioid components (rejection from the haar proposal)
    auto draw_mixture = [&](RandomStream& rng) {
        for (;;) {
            AmbiguousRotation cand{haar_rotation(rng), g};
            double ip = closed_form_inner(cand, mode);
            double sign = rng.uniform() < 0.5 ? 1.0 : -1.0;
            double accept = (1 + sign * kappa * ip) / (1 + kappa * rho2);
            if (rng.uniform() < accept) return cand;
        }
    };

    auto powers = parallel_chunks<std::pair<int, int>>(sims, [&](size_t sim) {
        RandomStream rng(splitmix_seed(2024005, sim));
        std::vector<AmbiguousRotation> s;
        s.reserve(n);
        for (int i = 0; i < n; ++i) s.push_back(draw_mixture(rng));
        int s_reject = uniformity_S(s).p_value <= 0.05 ? 1 : 0;
        int tg_reject = gine_TG(s, B, splitmix_seed(2024006, sim)).p_value <= 0.05 ? 1 : 0;
        return std::make_pair(s_reject, tg_reject);
    });
    int s_hits = 0, tg_hits = 0;
    for (auto [a, b] : powers) {
        s_hits += a;
        tg_hits += b;
    }
    double s_power = static_cast<double>(s_hits) / sims;
    double tg_power = static_cast<double>(tg_hits) / sims;
    c.require(s_power >= 0.02 && s_power <= 0.10,
              "embedding-mean test power on the mixture = " + fmt(s_power) + " (want 2%..10%)");
    c.require(tg_power > 0.50,
              "gine test power on the mixture = " + fmt(tg_power) + " (want > 50%)");
    c.finish();
}

void criterion6_regression_coverage() {
    Criterion c("criterion 6: link-rotation confidence region coverage", 600.0);
    auto g = SymmetryGroup::parse("O");
    const double kappa = 200;
    const int sims = 500, n = 100;
    RandomStream seed_rng(2024007);
    Rotation a_true = haar_rotation(seed_rng);

    auto results = parallel_chunks<std::pair<int, double>>(sims, [&](size_t sim) {
        RandomStream rng(splitmix_seed(2024008, sim));
        RotationPairs pairs;
        pairs.reserve(n);
        for (int i = 0; i < n; ++i) {
            AmbiguousRotation u = random_ambiguous(g, rng);
            AmbiguousRotation mean{Rotation(a_true.m * u.rep.m, false), g};
            auto noise = sample({Family::Watson, mean, kappa}, 1,
                                splitmix_seed(2024009, sim * 1000 + i));
            pairs.emplace_back(u, noise.front());
        }
        RegressionFit fit = fit_regression(pairs);
        ResidualInference inf = residual_chi2_inference(pairs, fit);
        return std::make_pair(inf.in_region(a_true, 0.05) ? 1 : 0, inf.kappa_hat);
    });
    int covered = 0;
    std::vector<double> kappas;
    for (auto& [cov, k] : results) {
        covered += cov;
        kappas.push_back(k);
    }
    double coverage = static_cast<double>(covered) / sims;
    std::sort(kappas.begin(), kappas.end());
    double median_kappa = kappas[sims / 2];
    c.require(coverage >= 0.92 && coverage <= 0.98,
              "95% region coverage of the true link = " + fmt(coverage) + " (want 92%..98%)");
    c.require(std::fabs(median_kappa - kappa) / kappa < 0.15,
              "median kappa estimate = " + fmt(median_kappa) + " (truth 200, want within 15%)");
    c.finish();
}

void criterion7_correlation_identity() {
    Criterion c("criterion 7: axis-set correlation versus the misorientation angle", 5.0);
    auto g = SymmetryGroup::parse("D2");
    RandomStream rng(2024010);
    Mat3 lambda = Mat3::diag(1, 0, -1);
    double rho12 = 2.0; // max over SO(3) of <U L U^T, L>
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
        AmbiguousRotation u = random_ambiguous(g, rng);
        AmbiguousRotation v = random_ambiguous(g, rng);
        Mat3 tu = u.rep.m * lambda * transpose(u.rep.m);
        Mat3 tv = v.rep.m * lambda * transpose(v.rep.m);
        double r = frobenius_inner(tu, tv) / rho12;
        double omega = misorientation(u, v).angle;
        worst = std::max(worst, std::fabs(r - std::cos(omega)));
    }
    c.require(worst < 1e-9,
              "max |r - cos(omega)| over 100 pairs = " + fmt(worst) +
                  " with t(U) = U diag(1,0,-1) U^T and omega the exhaustive minimal angle");
    c.finish();
}

void criterion8_invariance() {
    Criterion c("criterion 8: invariance and reproducibility of every public statistic", 120.0);
    RandomStream rng(2024011);
    double worst = 0;
    auto update = [&](double a, double b) { worst = std::max(worst, std::fabs(a - b)); };

    for (const char* tag : {"C2", "C3", "D2", "T", "O"}) {
        auto g = SymmetryGroup::parse(tag);
        auto s = haar_sample(g, 40, rng);

        auto substitute = [&](const std::vector<AmbiguousRotation>& in) {
            std::vector<AmbiguousRotation> out;
            for (const auto& x : in)
                out.emplace_back(x.rep * g->elements[rng.uniform_index(g->size())], g);
            return out;
        };
        auto rotate_all = [&](const std::vector<AmbiguousRotation>& in, const Rotation& v) {
            std::vector<AmbiguousRotation> out;
            for (const auto& x : in) out.emplace_back(v * x.rep, g);
            return out;
        };

        auto subst = substitute(s);
        Rotation v = haar_rotation(rng);
        auto rotated = rotate_all(s, v);

        update(uniformity_statistic(s), uniformity_statistic(subst));
        update(uniformity_statistic(s), uniformity_statistic(rotated));
        update(gine_statistic(s), gine_statistic(subst));
        update(gine_statistic(s), gine_statistic(rotated));
        update(dispersion(s), dispersion(subst));
        update(dispersion(s), dispersion(rotated));

        // location statistic under representative substitution (both of the
        // data and of the hypothesized location)
        AmbiguousRotation m0 = random_ambiguous(g, rng);
        AmbiguousRotation m0_subst{m0.rep * g->elements[1 % g->size()], g};
        auto loc_stat = [&](const std::vector<AmbiguousRotation>& data,
                            const AmbiguousRotation& m) {
            EmbeddedPoint d = mean_embedding(data);
            EmbeddedPoint t0 = embed(m);
            t0.scale(-1.0);
            d += t0;
            return norm2(d);
        };
        update(loc_stat(s, m0), loc_stat(subst, m0_subst));

        // two-sample statistic
        auto s2 = haar_sample(g, 25, rng);
        EmbeddedPoint d1 = mean_embedding(s), d2 = mean_embedding(s2);
        d2.scale(-1.0);
        d1 += d2;
        double two = norm2(d1);
        EmbeddedPoint e1 = mean_embedding(substitute(s)), e2 = mean_embedding(substitute(s2));
        e2.scale(-1.0);
        e1 += e2;
        update(two, norm2(e1));

        // independence statistic under representative substitution
        auto u_side = haar_sample(g, 15, rng);
        auto v_side = haar_sample(g, 15, rng);
        auto gram_stat = [&](const std::vector<AmbiguousRotation>& a,
                             const std::vector<AmbiguousRotation>& b) {
            double total = 0;
            for (size_t i = 0; i < a.size(); ++i)
                for (size_t j = 0; j < a.size(); ++j)
                    total += closed_form_inner(a[i], a[j]) * closed_form_inner(b[i], b[j]);
            return total;
        };
        update(gram_stat(u_side, v_side), gram_stat(substitute(u_side), substitute(v_side)));

        // regression objective and misorientation angle
        RotationPairs pairs;
        for (int i = 0; i < 10; ++i)
            pairs.emplace_back(haar_sample(g, 1, rng).front(), haar_sample(g, 1, rng).front());
        Rotation a_cand = haar_rotation(rng);
        RotationPairs pairs_subst;
        for (const auto& [pu, pv] : pairs)
            pairs_subst.emplace_back(
                AmbiguousRotation{pu.rep * g->elements[rng.uniform_index(g->size())], g},
                AmbiguousRotation{pv.rep * g->elements[rng.uniform_index(g->size())], g});
        update(Regression::objective(pairs, a_cand, 4, nullptr),
               Regression::objective(pairs_subst, a_cand, 4, nullptr));
        update(misorientation(pairs[0].first, pairs[0].second).angle,
               misorientation(pairs_subst[0].first, pairs_subst[0].second).angle);
        Rotation w = haar_rotation(rng);
        AmbiguousRotation wu{Rotation(w.m * pairs[0].first.rep.m, false), g};
        AmbiguousRotation wv{Rotation(w.m * pairs[0].second.rep.m, false), g};
        update(misorientation(pairs[0].first, pairs[0].second).angle,
               misorientation(wu, wv).angle);
    }
    c.require(worst < 1e-9, "max statistic drift under substitution/rotation = " + fmt(worst));

    // bit-exact randomization p-values for a fixed (B, seed)
    auto g = SymmetryGroup::parse("C2");
    auto s = haar_sample(g, 50, rng);
    TestReport r1 = uniformity_S(s, UniformityMode::Randomization, 999, 77);
    TestReport r2 = uniformity_S(s, UniformityMode::Randomization, 999, 77);
    TestReport t1 = gine_TG(s, 499, 78);
    TestReport t2 = gine_TG(s, 499, 78);
    auto s2 = haar_sample(g, 30, rng);
    TestReport p1 = two_sample_test(s, s2, 999, 79);
    TestReport p2 = two_sample_test(s, s2, 999, 79);
    c.require(r1.p_value == r2.p_value && t1.p_value == t2.p_value && p1.p_value == p2.p_value,
              "randomization p-values are bit-identical across repeated runs");
    c.finish();
}

void criterion9_pipeline() {
    Criterion c("criterion 9: end-to-end synthetic pipeline", 300.0);
    auto g = SymmetryGroup::parse("C2");
    RandomStream rng(2024012);
    AmbiguousRotation mode = random_ambiguous(g, rng);

    auto region = sample({Family::Watson, mode, 20.0}, 100, 20240901);
    TestReport uni = uniformity_S(region, UniformityMode::Randomization, 9999, 1);
    c.require(uni.p_value < 0.001,
              "watson(kappa=20, n=100) uniformity randomization p = " + fmt(uni.p_value));

    const int reruns = 200, B = 99;
    auto rejects = parallel_chunks<int>(reruns, [&](size_t i) {
        auto s1 = sample({Family::Watson, mode, 20.0}, 34, splitmix_seed(2024014, i));
        auto s2 = sample({Family::Watson, mode, 20.0}, 37, splitmix_seed(2024015, i));
        return two_sample_test(s1, s2, B, splitmix_seed(2024016, i)).p_value <= 0.05 ? 1 : 0;
    });
    int hits = 0;
    for (int h : rejects) hits += h;
    double level = static_cast<double>(hits) / reruns;
    c.require(level >= 0.005 && level <= 0.10,
              "two-sample permutation level over 200 equal-population reruns = " + fmt(level));
    c.finish();
}

} // namespace

int main() {
    std::printf("ambirot acceptance suite\n========================\n");
    criterion1_constants();
    criterion2_inner_products();
    criterion3_calibration();
    criterion4_high_concentration();
    criterion5_consistency_contrast();
    criterion6_regression_coverage();
    criterion7_correlation_identity();
    criterion8_invariance();
    criterion9_pipeline();
    std::printf("========================\n%d criterion(s) failed\n", g_failures);
    return g_failures;
}
