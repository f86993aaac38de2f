#include "bcpp/green.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

#include "bcpp/lattice.hpp"
#include "bcpp/rng.hpp"

namespace bcpp {
namespace {

// 24-point Gauss-Legendre nodes/weights on [-1,1].
constexpr int kGL = 24;
constexpr double kGLx[kGL] = {
    -0.9951872199970213, -0.9747285559713095, -0.9382745520027328, -0.8864155270044011,
    -0.8200019859739029, -0.7401241915785544, -0.6480936519369755, -0.5454214713888396,
    -0.4337935076260451, -0.3150426796961634, -0.1911188674736163, -0.0640568928626056,
    0.0640568928626056,  0.1911188674736163,  0.3150426796961634,  0.4337935076260451,
    0.5454214713888396,  0.6480936519369755,  0.7401241915785544,  0.8200019859739029,
    0.8864155270044011,  0.9382745520027328,  0.9747285559713095,  0.9951872199970213};
constexpr double kGLw[kGL] = {
    0.0123412297999872, 0.0285313886289337, 0.0442774388174198, 0.0592985849154368,
    0.0733464814110803, 0.0861901615319533, 0.0976186521041139, 0.1074442701159656,
    0.1155056680537256, 0.1216704729278034, 0.1258374563468283, 0.1279381953467522,
    0.1279381953467522, 0.1258374563468283, 0.1216704729278034, 0.1155056680537256,
    0.1074442701159656, 0.0976186521041139, 0.0861901615319533, 0.0733464814110803,
    0.0592985849154368, 0.0442774388174198, 0.0285313886289337, 0.0123412297999872};

// e^{-x} I_n(x) by cosine integral once x is too large for the direct product.
double scaled_bessel_large(int n, double x) {
    // integrand exp(x(cos t - 1)) cos(n t) is negligible past x(1-cos t) ~ 45
    double c = 1.0 - 45.0 / x;
    double tmax = c <= -1.0 ? M_PI : std::acos(std::max(-1.0, c));
    tmax = std::min(tmax, M_PI);
    // resolve the cos(n t) phase over [0, tmax]
    int panels = std::max(1, static_cast<int>(n * tmax / 4.0) + 1);
    double sum = 0.0;
    double h = tmax / panels;
    for (int p = 0; p < panels; ++p) {
        double a = p * h, b = a + h;
        double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        double s = 0.0;
        for (int i = 0; i < kGL; ++i) {
            double t = mid + half * kGLx[i];
            s += kGLw[i] * std::exp(x * (std::cos(t) - 1.0)) * std::cos(n * t);
        }
        sum += s * half;
    }
    return sum / M_PI;
}

// I_n(x) e^{-x} via the ascending series in log space (large order, small x).
double scaled_bessel_series(int n, double x) {
    double lead = n * std::log(x / 2.0) - std::lgamma(n + 1.0) - x;
    if (lead < -745.0) return 0.0;
    double q = x * x / 4.0;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 400; ++k) {
        term *= q / (static_cast<double>(k) * (n + k));
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return std::exp(lead) * sum;
}

} // namespace

double scaled_bessel_i(int n, double x) {
    n = std::abs(n);
    if (x <= 0.0) return n == 0 ? 1.0 : 0.0;
    if (n > 40 && static_cast<double>(n) > 1.6 * x) return scaled_bessel_series(n, x);
    if (x <= 600.0) return std::exp(-x) * std::cyl_bessel_i(static_cast<double>(n), x);
    return scaled_bessel_large(n, x);
}

namespace {

// Asymptotic tail of int_T^inf e^{-t} prod I_{x_i}(t/d) dt: per-coordinate
// series I_n(y)e^{-y} sqrt(2 pi y) = sum_k t_k y^{-k} multiplied out to
// order K, then integrated term by term.
double green_tail(std::span<const int> x, int d, double T) {
    constexpr int K = 6;
    double prod[K + 1] = {1.0};
    for (int c = 0; c < d; ++c) {
        double mu = 4.0 * static_cast<double>(x[c]) * x[c];
        double coef[K + 1];
        coef[0] = 1.0;
        for (int k = 1; k <= K; ++k)
            coef[k] = -coef[k - 1] * (mu - (2.0 * k - 1) * (2.0 * k - 1)) / (8.0 * k);
        double next[K + 1] = {0.0};
        for (int a = 0; a <= K; ++a)
            for (int b = 0; a + b <= K; ++b) next[a + b] += prod[a] * coef[b];
        std::copy(next, next + K + 1, prod);
    }
    double pref = std::pow(d / (2.0 * M_PI), d / 2.0);
    double tail = 0.0;
    for (int m = 0; m <= K; ++m) {
        double expo = d / 2.0 + m - 1.0;
        tail += prod[m] * std::pow(static_cast<double>(d), m) * std::pow(T, -expo) / expo;
    }
    return pref * tail;
}

double green_quadrature(std::span<const int> x, int d) {
    int nmax = 0;
    for (int c = 0; c < d; ++c) nmax = std::max(nmax, std::abs(x[c]));
    double T0 = d * std::max(50.0, 4.0 * nmax * static_cast<double>(nmax));
    auto f = [&](double t) {
        double p = 1.0;
        for (int c = 0; c < d; ++c) {
            p *= scaled_bessel_i(x[c], t / d);
            if (p == 0.0) return 0.0;
        }
        return p;
    };
    // geometric panels [0,1],[1,2],[2,4],... up to T0
    double total = 0.0;
    double a = 0.0, b = 1.0;
    while (a < T0) {
        b = std::min(b, T0);
        double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        double s = 0.0;
        for (int i = 0; i < kGL; ++i) s += kGLw[i] * f(mid + half * kGLx[i]);
        total += s * half;
        a = b;
        b = 2.0 * b;
    }
    return total + green_tail(x, d, T0);
}

uint64_t pack_canonical(std::span<const int> x, int d) {
    int v[kMaxDim];
    for (int i = 0; i < d; ++i) v[i] = std::abs(x[i]);
    std::sort(v, v + d, std::greater<int>());
    uint64_t key = 0;
    for (int i = 0; i < d; ++i) key = key * 131071u + static_cast<uint64_t>(v[i] + 1);
    return key * 31u + static_cast<uint64_t>(d);
}

} // namespace

double green_function(std::span<const int> x, int d) {
    if (d < 3) throw std::invalid_argument("green_function: requires d >= 3 (transient walk)");
    return green_quadrature(x, d);
}

double gamma_d(int d) {
    if (d < 3) throw std::invalid_argument("gamma_d: requires d >= 3 (recurrent for d < 3)");
    static std::map<int, double> cache;
    static std::mutex mu;
    std::lock_guard lock(mu);
    auto it = cache.find(d);
    if (it != cache.end()) return it->second;
    std::vector<int> origin(d, 0);
    double g = 1.0 / green_function(origin, d);
    cache.emplace(d, g);
    return g;
}

double hitting_probability_k(std::span<const int> x, int d) {
    if (d < 3) throw std::invalid_argument("hitting_probability_k: requires d >= 3");
    bool at_origin = true;
    for (int i = 0; i < d; ++i)
        if (x[i] != 0) { at_origin = false; break; }
    if (at_origin) return 1.0;
    thread_local std::unordered_map<uint64_t, double> cache;
    uint64_t key = pack_canonical(x, d);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    double k = green_function(x, d) * gamma_d(d);
    if (cache.size() > 400000) cache.clear();
    cache.emplace(key, k);
    return k;
}

double return_tail_bound(int d, int64_t horizon) {
    // P(S_{2k}=O) ~ 2 (d/(4 pi k))^{d/2}; integrate k > horizon/2
    double K = horizon / 2.0;
    return 2.0 * std::pow(d / (4.0 * M_PI), d / 2.0) * std::pow(K, 1.0 - d / 2.0) / (d / 2.0 - 1.0);
}

WalkEstimate estimate_gamma_d(int d, int64_t n_walks, int64_t horizon, uint64_t seed) {
    if (d < 3) throw std::invalid_argument("estimate_gamma_d: walk is recurrent for d < 3");
    if (n_walks < 2) throw std::invalid_argument("estimate_gamma_d: need n_walks >= 2");
    Rng rng(seed);
    int64_t escaped = 0;
    std::vector<int32_t> pos(d);
    for (int64_t w = 0; w < n_walks; ++w) {
        std::fill(pos.begin(), pos.end(), 0);
        bool out = true;
        for (int64_t s = 0; s < horizon; ++s) {
            uint64_t r = rng.below(2 * static_cast<uint64_t>(d));
            int axis = static_cast<int>(r >> 1);
            pos[axis] += (r & 1) ? 1 : -1;
            bool home = true;
            for (int i = 0; i < d; ++i)
                if (pos[i] != 0) { home = false; break; }
            if (home) { out = false; break; }
        }
        escaped += out;
    }
    double p = static_cast<double>(escaped) / n_walks;
    WalkEstimate est;
    est.mean = p;
    est.stderr_ = std::sqrt(std::max(0.0, p * (1.0 - p) / n_walks));
    est.n_samples = n_walks;
    est.diagnostics["bias_bound"] = return_tail_bound(d, horizon);
    est.diagnostics["horizon"] = static_cast<double>(horizon);
    return est;
}

} // namespace bcpp
