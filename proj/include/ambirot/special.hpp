#pragma once

// Special functions and small statistical utilities: regularized incomplete
// gamma/beta, chi-square / F / normal distribution functions, Kolmogorov-Smirnov,
// tail probabilities of weighted chi-square sums, and monotone cubic interpolation.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace ambirot {

namespace detail {

inline double gamma_p_series(double a, double x) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int n = 0; n < 1000; ++n) {
        ap += 1;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1 - a, c = 1 / tiny, d = 1 / b, h = d;
    for (int i = 1; i < 1000; ++i) {
        double an = -static_cast<double>(i) * (i - a);
        b += 2;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double betacf(double a, double b, double x) {
    const double tiny = 1e-300;
    double qab = a + b, qap = a + 1, qam = a - 1;
    double c = 1, d = 1 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-15) break;
    }
    return h;
}

} // namespace detail

// regularized lower incomplete gamma P(a, x)
inline double gamma_p(double a, double x) {
    if (x < 0 || a <= 0) throw std::domain_error("gamma_p: bad arguments");
    if (x == 0) return 0;
    return x < a + 1 ? detail::gamma_p_series(a, x) : 1.0 - detail::gamma_q_cf(a, x);
}

// regularized upper incomplete gamma Q(a, x) = 1 - P(a, x)
inline double gamma_q(double a, double x) {
    if (x < 0 || a <= 0) throw std::domain_error("gamma_q: bad arguments");
    if (x == 0) return 1;
    return x < a + 1 ? 1.0 - detail::gamma_p_series(a, x) : detail::gamma_q_cf(a, x);
}

// regularized incomplete beta I_x(a, b)
inline double inc_beta(double a, double b, double x) {
    if (x <= 0) return 0;
    if (x >= 1) return 1;
    double ln = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b)
              + a * std::log(x) + b * std::log1p(-x);
    double front = std::exp(ln);
    if (x < (a + 1) / (a + b + 2)) return front * detail::betacf(a, b, x) / a;
    return 1.0 - front * detail::betacf(b, a, 1 - x) / b;
}

inline double chi2_cdf(double x, double df) { return x <= 0 ? 0.0 : gamma_p(df / 2, x / 2); }
inline double chi2_sf(double x, double df) { return x <= 0 ? 1.0 : gamma_q(df / 2, x / 2); }
inline double chi2_pdf(double x, double df) {
    if (x <= 0) return 0;
    double k = df / 2;
    return std::exp((k - 1) * std::log(x) - x / 2 - k * std::log(2.0) - std::lgamma(k));
}

inline double chi2_quantile(double p, double df) {
    if (p <= 0 || p >= 1) throw std::domain_error("chi2_quantile: p outside (0,1)");
    double lo = 0, hi = df + 10;
    while (chi2_cdf(hi, df) < p) hi *= 2;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (chi2_cdf(mid, df) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// survival function of Fisher's F(d1, d2)
inline double f_sf(double x, double d1, double d2) {
    if (x <= 0) return 1;
    return inc_beta(d2 / 2, d1 / 2, d2 / (d2 + d1 * x));
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Kolmogorov distribution tail Q(lambda) = P(D > lambda-ish), asymptotic series
inline double kolmogorov_q(double lambda) {
    if (lambda < 1e-8) return 1;
    double sum = 0;
    for (int k = 1; k <= 100; ++k) {
        double term = 2 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
        sum += term;
        if (std::fabs(term) < 1e-12) break;
    }
    return std::min(1.0, std::max(0.0, sum));
}

struct KsResult {
    double d = 0;       // sup |F_n - F|
    double p_value = 1; // asymptotic, with small-sample correction
};

// one-sample KS test against a fully specified CDF
inline KsResult ks_test(std::vector<double> data, const std::function<double(double)>& cdf) {
    if (data.empty()) throw std::invalid_argument("ks_test: empty sample");
    std::sort(data.begin(), data.end());
    double n = static_cast<double>(data.size());
    double d = 0;
    for (size_t i = 0; i < data.size(); ++i) {
        double f = cdf(data[i]);
        d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
        d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
    }
    double sn = std::sqrt(n);
    double lambda = (sn + 0.12 + 0.11 / sn) * d;
    return {d, kolmogorov_q(lambda)};
}

// P(a X + b Y > s) for independent X ~ chi2(k1), Y ~ chi2(k2), a, b > 0.
// Conditioning on Y and integrating with adaptive Simpson.
inline double weighted_chi2_sum_sf(double s, double a, double k1, double b, double k2) {
    if (s <= 0) return 1;
    double y_cut = s / b;
    auto g = [&](double y) { return chi2_sf((s - b * y) / a, k1) * chi2_pdf(y, k2); };
    std::function<double(double, double, double, double, double, int)> simpson =
        [&](double lo, double hi, double flo, double fmid, double fhi, int depth) -> double {
        double mid = 0.5 * (lo + hi);
        double lm = 0.5 * (lo + mid), mh = 0.5 * (mid + hi);
        double flm = g(lm), fmh = g(mh);
        double whole = (hi - lo) / 6 * (flo + 4 * fmid + fhi);
        double left = (mid - lo) / 6 * (flo + 4 * flm + fmid);
        double right = (hi - mid) / 6 * (fmid + 4 * fmh + fhi);
        if (depth <= 0 || std::fabs(left + right - whole) < 1e-12)
            return left + right + (left + right - whole) / 15;
        return simpson(lo, mid, flo, flm, fmid, depth - 1) +
               simpson(mid, hi, fmid, fmh, fhi, depth - 1);
    };
    // split the integration range for accuracy near both endpoints
    double total = 0;
    int pieces = 32;
    for (int i = 0; i < pieces; ++i) {
        double lo = y_cut * i / pieces, hi = y_cut * (i + 1) / pieces;
        double mid = 0.5 * (lo + hi);
        total += simpson(lo, hi, g(lo), g(mid), g(hi), 20);
    }
    return total + chi2_sf(y_cut, k2);
}

// Fritsch-Carlson monotone cubic interpolation on a grid (x strictly increasing).
class MonotoneCubic {
public:
    MonotoneCubic() = default;
    MonotoneCubic(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
        size_t n = x_.size();
        if (n < 2 || y_.size() != n) throw std::invalid_argument("MonotoneCubic: bad grid");
        std::vector<double> d(n - 1);
        for (size_t i = 0; i + 1 < n; ++i) {
            double h = x_[i + 1] - x_[i];
            if (h <= 0) throw std::invalid_argument("MonotoneCubic: grid not increasing");
            d[i] = (y_[i + 1] - y_[i]) / h;
        }
        m_.assign(n, 0.0);
        m_[0] = d[0];
        m_[n - 1] = d[n - 2];
        for (size_t i = 1; i + 1 < n; ++i)
            m_[i] = (d[i - 1] * d[i] <= 0) ? 0.0 : 0.5 * (d[i - 1] + d[i]);
        for (size_t i = 0; i + 1 < n; ++i) {
            if (d[i] == 0) { m_[i] = m_[i + 1] = 0; continue; }
            double alpha = m_[i] / d[i], beta = m_[i + 1] / d[i];
            double r = alpha * alpha + beta * beta;
            if (r > 9) {
                double tau = 3 / std::sqrt(r);
                m_[i] = tau * alpha * d[i];
                m_[i + 1] = tau * beta * d[i];
            }
        }
    }

    double operator()(double x) const {
        size_t i = segment(x);
        double h = x_[i + 1] - x_[i], t = (x - x_[i]) / h;
        double t2 = t * t, t3 = t2 * t;
        return y_[i] * (2 * t3 - 3 * t2 + 1) + h * m_[i] * (t3 - 2 * t2 + t)
             + y_[i + 1] * (-2 * t3 + 3 * t2) + h * m_[i + 1] * (t3 - t2);
    }

    double derivative(double x) const {
        size_t i = segment(x);
        double h = x_[i + 1] - x_[i], t = (x - x_[i]) / h;
        double t2 = t * t;
        return (y_[i] * (6 * t2 - 6 * t) / h + m_[i] * (3 * t2 - 4 * t + 1)
              + y_[i + 1] * (-6 * t2 + 6 * t) / h + m_[i + 1] * (3 * t2 - 2 * t));
    }

    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }

private:
    size_t segment(double x) const {
        if (x <= x_.front()) return 0;
        if (x >= x_.back()) return x_.size() - 2;
        auto it = std::upper_bound(x_.begin(), x_.end(), x);
        return static_cast<size_t>(it - x_.begin()) - 1;
    }

    std::vector<double> x_, y_, m_;
};

inline double sample_mean_of(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double sample_variance_of(const std::vector<double>& v, bool unbiased = true) {
    double m = sample_mean_of(v), s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - (unbiased ? 1 : 0));
}

} // namespace ambirot
