#pragma once

// Parametric families on SO(3)/K:
//   watson    f = c(kappa)^-1 exp{kappa <t([U]), t([M])>}
//   dlvp      f = c(kappa)^-1 {1 + <t([U]), t([M])>}^kappa   (0 where the base is <= 0)
//   cardioid  f = 1 + kappa <t([U]), t([M])>,  0 <= kappa <= 1/rho^2
// with Monte Carlo normalizing constants on a pinned-seed grid, exact samplers
// (rejection from Haar, switching to a tangent-space independence sampler at
// high concentration), moment/maximum-likelihood estimators and
// high-concentration asymptotic variances.

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "ambirot/mean.hpp"
#include "ambirot/parallel.hpp"
#include "ambirot/special.hpp"

namespace ambirot {

inline uint64_t splitmix_seed(uint64_t seed, uint64_t index) {
    uint64_t s = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    return splitmix64(s);
}

enum class Family { Watson, Dlvp, Cardioid };

inline const char* family_name(Family f) {
    switch (f) {
    case Family::Watson: return "watson";
    case Family::Dlvp: return "dlvp";
    case Family::Cardioid: return "cardioid";
    }
    return "?";
}

inline Family parse_family(const std::string& s) {
    if (s == "watson") return Family::Watson;
    if (s == "dlvp") return Family::Dlvp;
    if (s == "cardioid") return Family::Cardioid;
    throw std::invalid_argument("unknown family: " + s);
}

struct DistributionSpec {
    Family family;
    AmbiguousRotation mode;
    double kappa = 0;

    void validate() const {
        if (kappa < 0) throw std::invalid_argument("concentration must be >= 0");
        if (family == Family::Cardioid && kappa > 1.0 / rho_squared(*mode.group) + 1e-12)
            throw std::invalid_argument("cardioid requires kappa <= 1/rho^2");
    }
};

// ---------------------------------------------------------------------------
// normalizing constants

struct NormalizerOptions {
    size_t draws = 1000000;
    int grid_points = 65;
    uint64_t seed = 777;
    double stderr_threshold = 0.02; // on log c; exceeding it doubles the draws
    int max_budget_doublings = 2;
};

struct NormalizingConstant {
    Family family;
    std::string group_name;
    std::vector<double> kappa_grid;
    std::vector<double> log_c;
    std::vector<double> log_c_stderr;
    uint64_t seed = 0;
    size_t draws = 0;
    MonotoneCubic interp;

    // per-draw statistic <t([U_i]), t([I])> under Haar, kept for exact
    // exponential-family computations (derivative of log c, fitting)
    std::vector<double> haar_inner;

    double log_value(double kappa) const {
        if (kappa < 0 || kappa > kappa_grid.back() + 1e-9)
            throw std::domain_error("kappa outside the tabulated range");
        return interp(kappa);
    }

    // d log c / d kappa as an exact function of the cached draws; increasing in kappa
    double dlog_dkappa(double kappa) const {
        if (haar_inner.empty())
            throw std::logic_error("normalizer loaded from cache lacks the raw draws");
        double m = -1e300;
        for (double x : haar_inner) {
            double g = transform(x);
            if (g > -1e200) m = std::max(m, kappa * g);
        }
        double sw = 0, swx = 0;
        for (double x : haar_inner) {
            double g = transform(x);
            if (g <= -1e200) continue;
            double w = std::exp(kappa * g - m);
            sw += w;
            swx += w * x;
        }
        return swx / sw;
    }

    double transform(double x) const {
        if (family == Family::Watson) return x;
        // dlvp: log(1 + x), with zero density below the support boundary
        return (1.0 + x > 0) ? std::log1p(x) : -1e300;
    }
};

inline NormalizingConstant fit_normalizer(Family family, GroupPtr group, double kappa_max,
                                          NormalizerOptions opt = {}) {
    if (kappa_max <= 0) throw std::invalid_argument("fit_normalizer: kappa_max must be > 0");
    if (family == Family::Cardioid)
        throw std::invalid_argument("cardioid integrates to one without a normalizer");
    NormalizingConstant nc;
    nc.family = family;
    nc.group_name = group->name();
    nc.seed = opt.seed;

    AmbiguousRotation id{Rotation(), group};
    size_t draws = opt.draws;
    for (int attempt = 0;; ++attempt) {
        nc.haar_inner.clear();
        nc.haar_inner.reserve(draws);
        const size_t chunk = 65536;
        size_t n_chunks = (draws + chunk - 1) / chunk;
        auto parts = parallel_chunks<std::vector<double>>(n_chunks, [&](size_t ci) {
            RandomStream rng(splitmix_seed(opt.seed, ci));
            std::vector<double> out;
            size_t m = std::min(chunk, draws - ci * chunk);
            out.reserve(m);
            for (size_t i = 0; i < m; ++i) {
                AmbiguousRotation u{haar_rotation(rng), group};
                out.push_back(closed_form_inner(u, id));
            }
            return out;
        });
        for (auto& p : parts) nc.haar_inner.insert(nc.haar_inner.end(), p.begin(), p.end());

        nc.kappa_grid.clear();
        nc.log_c.clear();
        nc.log_c_stderr.clear();
        double worst = 0;
        for (int j = 0; j < opt.grid_points; ++j) {
            double k = kappa_max * j / (opt.grid_points - 1);
            double m = -1e300;
            for (double x : nc.haar_inner) {
                double g = nc.transform(x);
                if (g > -1e200) m = std::max(m, k * g);
            }
            double sw = 0, sw2 = 0;
            for (double x : nc.haar_inner) {
                double g = nc.transform(x);
                double w = (g <= -1e200) ? 0.0 : std::exp(k * g - m);
                sw += w;
                sw2 += w * w;
            }
            double n = static_cast<double>(nc.haar_inner.size());
            double mean = sw / n;
            double var = std::max(0.0, sw2 / n - mean * mean);
            double se_log = std::sqrt(var / n) / mean;
            worst = std::max(worst, se_log);
            nc.kappa_grid.push_back(k);
            nc.log_c.push_back(m + std::log(mean));
            nc.log_c_stderr.push_back(se_log);
        }
        nc.draws = draws;
        if (worst <= opt.stderr_threshold || attempt >= opt.max_budget_doublings) break;
        draws *= 2;
    }
    nc.interp = MonotoneCubic(nc.kappa_grid, nc.log_c);
    return nc;
}

namespace detail {

// process-wide normalizer cache, keyed by family/group/kappa ceiling
inline const NormalizingConstant& cached_normalizer(Family family, GroupPtr group, double kappa) {
    static std::map<std::tuple<int, std::string, double>, NormalizingConstant> cache;
    static std::mutex mu;
    double ceil = std::max(1.0, std::ceil(kappa * 1.25));
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(static_cast<int>(family), group->name(), ceil);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, fit_normalizer(family, group, ceil)).first;
    return it->second;
}

} // namespace detail

// log density with respect to the uniform (Haar-projected) measure on SO(3)/K
inline double log_density(const AmbiguousRotation& x, const DistributionSpec& spec,
                          const NormalizingConstant* normalizer = nullptr) {
    spec.validate();
    require_same_group(x, spec.mode);
    double ip = closed_form_inner(x, spec.mode);
    switch (spec.family) {
    case Family::Cardioid:
        return std::log(std::max(0.0, 1.0 + spec.kappa * ip));
    case Family::Watson: {
        const NormalizingConstant& nc =
            normalizer ? *normalizer : detail::cached_normalizer(spec.family, x.group, spec.kappa);
        return spec.kappa * ip - nc.log_value(spec.kappa);
    }
    case Family::Dlvp: {
        if (1.0 + ip <= 0) return -std::numeric_limits<double>::infinity();
        const NormalizingConstant& nc =
            normalizer ? *normalizer : detail::cached_normalizer(spec.family, x.group, spec.kappa);
        return spec.kappa * std::log1p(ip) - nc.log_value(spec.kappa);
    }
    }
    throw std::logic_error("unreachable");
}

// ---------------------------------------------------------------------------
// high-concentration tangent model

namespace detail {

// numeric tangent Hessian of f(v) = <t([exp(A v))]), t([I])> at v = 0;
// the negative Hessian is diagonalizable and drives the samplers' proposals
inline Mat3 embedding_hessian(GroupPtr group) {
    AmbiguousRotation id{Rotation(), group};
    auto f = [&](const Vec3& v) {
        return closed_form_inner({exp_rotation(v), group}, id);
    };
    const double h = 1e-4;
    Mat3 hess;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            Vec3 pp{}, pm{}, mp{}, mm{};
            pp[i] += h; pp[j] += h;
            pm[i] += h; pm[j] -= h;
            mp[i] -= h; mp[j] += h;
            mm[i] -= h; mm[j] -= h;
            hess(i, j) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4 * h * h);
        }
    return hess;
}

// Sigma from the Hessian: var(kappa^(1/2) v_i) -> (-H)^{-1} on the diagonal.
// Used internally for proposal covariances.
inline Mat3 hessian_sigma(GroupPtr group) {
    static std::map<std::string, Mat3> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(group->name());
    if (it != cache.end()) return it->second;
    Mat3 h = embedding_hessian(group);
    Mat3 sigma = Mat3::zero();
    for (int i = 0; i < 3; ++i) sigma(i, i) = 1.0 / std::max(1e-12, -h(i, i));
    cache.emplace(group->name(), sigma);
    return sigma;
}

} // namespace detail

// ---------------------------------------------------------------------------
// sampling

struct SamplerReport {
    std::string method;      // "rejection" or "tangent-mh"
    double acceptance = 0;   // rejection path
    int burn_in = 0;         // mh path
    int thinning = 0;        // mh path
    double kappa_switch_rate = 1e-3;
};

namespace detail {

inline double haar_log_jacobian(double s) {
    if (s < 1e-4) return std::log(0.5 * (1 - s * s / 12));
    return std::log((1 - std::cos(s)) / (s * s));
}

inline std::vector<AmbiguousRotation> sample_rejection(const DistributionSpec& spec, size_t n,
                                                       uint64_t seed, double& acceptance) {
    GroupPtr g = spec.mode.group;
    double rho2 = rho_squared(*g);
    const size_t chunk = 512;
    size_t n_chunks = (n + chunk - 1) / chunk;
    size_t proposals = 0, accepted = 0;
    std::mutex stat_mu;
    auto parts = parallel_chunks<std::vector<AmbiguousRotation>>(n_chunks, [&](size_t ci) {
        RandomStream rng(splitmix_seed(seed, ci));
        std::vector<AmbiguousRotation> out;
        size_t m = std::min(chunk, n - ci * chunk);
        out.reserve(m);
        size_t local_prop = 0;
        while (out.size() < m) {
            AmbiguousRotation cand{haar_rotation(rng), g};
            ++local_prop;
            double ip = closed_form_inner(cand, spec.mode);
            double log_accept;
            switch (spec.family) {
            case Family::Watson: log_accept = spec.kappa * (ip - rho2); break;
            case Family::Dlvp:
                log_accept = (1 + ip <= 0) ? -1e300
                                           : spec.kappa * (std::log1p(ip) - std::log1p(rho2));
                break;
            case Family::Cardioid:
            default:
                log_accept = std::log(std::max(0.0, 1 + spec.kappa * ip)) -
                             std::log1p(spec.kappa * rho2);
                break;
            }
            if (std::log(std::max(1e-300, rng.uniform())) < log_accept) out.push_back(cand);
        }
        std::lock_guard<std::mutex> lock(stat_mu);
        proposals += local_prop;
        accepted += m;
        return out;
    });
    std::vector<AmbiguousRotation> all;
    all.reserve(n);
    for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
    acceptance = proposals ? static_cast<double>(accepted) / static_cast<double>(proposals) : 0;
    return all;
}

inline std::vector<AmbiguousRotation> sample_tangent_mh(const DistributionSpec& spec, size_t n,
                                                        uint64_t seed, SamplerReport& report) {
    GroupPtr g = spec.mode.group;
    AmbiguousRotation id{Rotation(), g};
    Mat3 sigma = hessian_sigma(g);
    double inj = g->injectivity_radius();
    double scale = (spec.family == Family::Dlvp)
                       ? (1.0 + rho_squared(*g)) / spec.kappa
                       : 1.0 / spec.kappa;
    Vec3 sd{std::sqrt(sigma(0, 0) * scale), std::sqrt(sigma(1, 1) * scale),
            std::sqrt(sigma(2, 2) * scale)};
    auto log_target = [&](const Vec3& v, double s) {
        double ip = closed_form_inner({exp_rotation(v), g}, id);
        double lt;
        if (spec.family == Family::Watson) lt = spec.kappa * ip;
        else if (spec.family == Family::Dlvp)
            lt = (1 + ip <= 0) ? -1e300 : spec.kappa * std::log1p(ip);
        else
            lt = std::log(std::max(1e-300, 1 + spec.kappa * ip));
        return lt + haar_log_jacobian(s);
    };
    auto log_proposal = [&](const Vec3& v) {
        return -0.5 * (v.x * v.x / (sd.x * sd.x) + v.y * v.y / (sd.y * sd.y) +
                       v.z * v.z / (sd.z * sd.z));
    };
    report.method = "tangent-mh";
    report.burn_in = 64;
    report.thinning = 4;
    const size_t chunk = 512;
    size_t n_chunks = (n + chunk - 1) / chunk;
    auto parts = parallel_chunks<std::vector<AmbiguousRotation>>(n_chunks, [&](size_t ci) {
        RandomStream rng(splitmix_seed(seed ^ 0x51ed2701ULL, ci));
        std::vector<AmbiguousRotation> out;
        size_t m = std::min(chunk, n - ci * chunk);
        out.reserve(m);
        Vec3 v{};
        double lt = log_target(v, 0), lp = log_proposal(v);
        int step = 0;
        while (out.size() < m) {
            Vec3 cand{rng.normal() * sd.x, rng.normal() * sd.y, rng.normal() * sd.z};
            double s = norm(cand);
            if (s < inj) {
                double lt_c = log_target(cand, s), lp_c = log_proposal(cand);
                if (std::log(std::max(1e-300, rng.uniform())) < (lt_c - lt) + (lp - lp_c)) {
                    v = cand;
                    lt = lt_c;
                    lp = lp_c;
                }
            }
            ++step;
            if (step > report.burn_in && (step % report.thinning == 0))
                out.push_back({spec.mode.rep * exp_rotation(v), g});
        }
        return out;
    });
    std::vector<AmbiguousRotation> all;
    all.reserve(n);
    for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
    return all;
}

} // namespace detail

// i.i.d. draws from the spec's density; deterministic given (spec, n, seed)
inline std::vector<AmbiguousRotation> sample(const DistributionSpec& spec, size_t n, uint64_t seed,
                                             SamplerReport* report_out = nullptr) {
    spec.validate();
    SamplerReport report;
    std::vector<AmbiguousRotation> out;
    if (spec.kappa == 0 || spec.family == Family::Cardioid) {
        // rejection is exact and fast over the whole cardioid range
        report.method = "rejection";
        out = detail::sample_rejection(spec, n, seed, report.acceptance);
    } else {
        // probe the rejection acceptance rate; below the switch rate use the
        // tangent-space independence sampler
        RandomStream probe(splitmix_seed(seed ^ 0xabcdefULL, 0xffffULL));
        AmbiguousRotation id{Rotation(), spec.mode.group};
        double rho2 = rho_squared(*spec.mode.group);
        const int probes = 8192;
        int hits = 0;
        for (int i = 0; i < probes; ++i) {
            AmbiguousRotation cand{haar_rotation(probe), spec.mode.group};
            double ip = closed_form_inner(cand, id);
            double la = (spec.family == Family::Watson)
                            ? spec.kappa * (ip - rho2)
                            : ((1 + ip <= 0) ? -1e300
                                             : spec.kappa * (std::log1p(ip) - std::log1p(rho2)));
            if (std::log(std::max(1e-300, probe.uniform())) < la) ++hits;
        }
        if (hits >= probes * report.kappa_switch_rate) {
            report.method = "rejection";
            out = detail::sample_rejection(spec, n, seed, report.acceptance);
        } else {
            out = detail::sample_tangent_mh(spec, n, seed, report);
        }
    }
    if (report_out) *report_out = report;
    return out;
}

// ---------------------------------------------------------------------------
// high-concentration asymptotic variance

struct HighConcentrationModel {
    GroupPtr group;
    Mat3 sigma;
    std::string frame_convention;
    std::string source; // "closed-form" or "monte-carlo"
};

inline Mat3 verify_sigma_mc(GroupPtr group, Family family, double kappa, size_t n, uint64_t seed);

inline HighConcentrationModel high_conc_sigma(GroupPtr group) {
    HighConcentrationModel m;
    m.group = group;
    m.frame_convention =
        "tangent axes follow the standard frame: v1 about u1, v3 about the frame normal";
    m.source = "closed-form";
    switch (group->kind) {
    case GroupKind::Cyclic: {
        int r = group->order_parameter;
        if (r == 1) { m.sigma = Mat3::diag(0.5, 0.5, 0.5); return m; }
        if (r == 2) { m.sigma = Mat3::diag(0.5, 0.25, 1.0 / 6.0); return m; }
        break;
    }
    case GroupKind::Dihedral:
        if (group->order_parameter == 2) { m.sigma = Mat3::diag(0.25, 0.25, 0.25); return m; }
        break;
    case GroupKind::Tetrahedral:
        m.sigma = Mat3::diag(0.070, 0.070, 0.070);
        return m;
    case GroupKind::Octahedral:
        m.sigma = Mat3::diag(0.125, 0.125, 0.125);
        return m;
    case GroupKind::Icosahedral:
        m.sigma = Mat3::diag(0.026, 0.026, 0.026);
        return m;
    }
    // cyclic/dihedral with r >= 3: calibrated once per group by the Monte Carlo
    // oracle at kappa = 1000 (pinned seed) and cached
    static std::map<std::string, Mat3> cache;
    static std::mutex mu;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(group->name());
        if (it != cache.end()) {
            m.sigma = it->second;
            m.source = "monte-carlo";
            return m;
        }
    }
    Mat3 sigma = verify_sigma_mc(group, Family::Watson, 1000.0, 20000, 0xa11ce);
    Mat3 d = Mat3::zero();
    for (int i = 0; i < 3; ++i) d(i, i) = sigma(i, i);
    {
        std::lock_guard<std::mutex> lock(mu);
        cache.emplace(group->name(), d);
    }
    m.sigma = d;
    m.source = "monte-carlo";
    return m;
}

// empirical covariance of kappa^(1/2) v (watson) or (kappa/2)^(1/2) v (dlvp)
inline Mat3 verify_sigma_mc(GroupPtr group, Family family, double kappa, size_t n, uint64_t seed) {
    DistributionSpec spec{family, {Rotation(), group}, kappa};
    auto draws = sample(spec, n, seed);
    double scale = std::sqrt(family == Family::Dlvp ? kappa / 2 : kappa);
    std::vector<Vec3> vs;
    vs.reserve(n);
    Vec3 mean{};
    for (const auto& x : draws) {
        Vec3 v = tangent_coords(x, spec.mode).v * scale;
        vs.push_back(v);
        mean += v;
    }
    mean = mean * (1.0 / static_cast<double>(n));
    Mat3 cov = Mat3::zero();
    for (const auto& v : vs) {
        Vec3 c = v - mean;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) cov(i, j) += c[i] * c[j];
    }
    return cov * (1.0 / static_cast<double>(n - 1));
}

// ---------------------------------------------------------------------------
// estimators

struct CardioidEstimate {
    AmbiguousRotation mode;
    double kappa = 0;
    bool clamped = false;
    bool mode_unique = true;
};

inline CardioidEstimate cardioid_moment_estimates(const std::vector<AmbiguousRotation>& sample,
                                                  const MeanConfig& cfg = {}) {
    if (sample.size() < 2) throw std::invalid_argument("need at least two observations");
    SampleSummary s = summarize(sample, cfg);
    EmbeddedPoint mode_t = embed(s.mean);
    std::vector<double> ips;
    ips.reserve(sample.size());
    for (const auto& x : sample) ips.push_back(closed_form_inner(x, s.mean));
    double s2 = sample_variance_of(ips, false);
    if (s2 < 1e-14) throw degeneracy_error("degenerate sample: zero variance along the mode");
    double n = static_cast<double>(sample.size());
    double kappa = (1.0 / (1.0 - 1.0 / n)) * inner(s.mean_embedding, mode_t) / s2;
    CardioidEstimate est{s.mean, kappa, false, s.mean_unique};
    double hi = 1.0 / rho_squared(*s.group);
    if (kappa < 0) { est.kappa = 0; est.clamped = true; }
    if (kappa > hi) { est.kappa = hi; est.clamped = true; }
    return est;
}

struct WatsonFit {
    AmbiguousRotation mode;
    double kappa = 0;
    bool mode_unique = true;
    bool kappa_at_bound = false;
};

inline WatsonFit fit_watson(const std::vector<AmbiguousRotation>& sample, double kappa_max = 64,
                            const MeanConfig& cfg = {}, const NormalizingConstant* nc = nullptr) {
    if (sample.size() < 2) throw std::invalid_argument("need at least two observations");
    SampleSummary s = summarize(sample, cfg);
    const NormalizingConstant& table =
        nc ? *nc : detail::cached_normalizer(Family::Watson, s.group, kappa_max);
    double target = 0;
    for (const auto& x : sample) target += closed_form_inner(x, s.mean);
    target /= static_cast<double>(sample.size());

    WatsonFit fit{s.mean, 0, s.mean_unique, false};
    double lo = 0, hi = table.kappa_grid.back();
    if (table.dlog_dkappa(lo) >= target) { fit.kappa = 0; return fit; }
    if (table.dlog_dkappa(hi) <= target) {
        fit.kappa = hi;
        fit.kappa_at_bound = true;
        return fit;
    }
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        (table.dlog_dkappa(mid) < target ? lo : hi) = mid;
    }
    fit.kappa = 0.5 * (lo + hi);
    return fit;
}

} // namespace ambirot
