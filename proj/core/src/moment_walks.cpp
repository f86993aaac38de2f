#include "bcpp/moment_walks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "bcpp/green.hpp"

namespace bcpp {
namespace {

struct ClassDecomp {
    int n = 0;
    int size[4] = {0, 0, 0, 0};
    int pos[4][4] = {};
};

ClassDecomp decompose(const Point4& p, int d) {
    ClassDecomp c;
    for (int i = 0; i < 4; ++i) {
        int found = -1;
        for (int k = 0; k < c.n; ++k)
            if (p.rows_equal(i, c.pos[k][0], d)) {
                found = k;
                break;
            }
        if (found < 0) found = c.n++;
        c.pos[found][c.size[found]++] = i;
    }
    return c;
}

int type_of(const ClassDecomp& c) {
    int mx = 0;
    for (int k = 0; k < c.n; ++k) mx = std::max(mx, c.size[k]);
    switch (c.n) {
        case 1: return 1;            // (x,x,x,x)
        case 2: return mx == 3 ? 2 : 3; // (x,x,x,y) / two pairs
        case 3: return 4;            // one pair + two singles
        default: return 5;           // all distinct
    }
}

// Pair-factorized generator weight for flipping subset `mask` of class k's
// positions: a legal single-pair move stays within {0,1} or {2,3} and flips
// either one position or a coinciding pair together.
double tilde_offdiag(const Point4& p, const ClassDecomp& cd, int k, int mask, double lambda,
                     int d) {
    int positions = 0, count = 0;
    for (int b = 0; b < cd.size[k]; ++b)
        if (mask & (1 << b)) {
            positions |= 1 << cd.pos[k][b];
            ++count;
        }
    const int pair01 = 0b0011, pair23 = 0b1100;
    if ((positions & ~pair01) == 0) {
        if (count == 1) return lambda;
        return p.rows_equal(0, 1, d) ? lambda : 0.0;
    }
    if ((positions & ~pair23) == 0) {
        if (count == 1) return lambda;
        return p.rows_equal(2, 3, d) ? lambda : 0.0;
    }
    return 0.0;
}

double tilde_diagonal(const Point4& p, int d) {
    return (p.rows_equal(0, 1, d) ? 1.0 : 0.0) + (p.rows_equal(2, 3, d) ? 1.0 : 0.0);
}

bool cross_pairs_meet(const Point4& p, int d) {
    for (int i = 0; i < 2; ++i)
        for (int j = 2; j < 4; ++j)
            if (p.rows_equal(i, j, d)) return true;
    return false;
}

} // namespace

int classify_type(const Point4& p, int d) { return type_of(decompose(p, d)); }

int m_of_type(int type, int d) {
    switch (type) {
        case 1: return 30 * d + 1;
        case 2: return 16 * d + 1;
        case 3: return 12 * d + 1;
        case 4: return 10 * d + 1;
        case 5: return 8 * d;
    }
    throw std::invalid_argument("m_of_type: bad type");
}

std::vector<G4Transition> g_transitions(const Point4& p, const ModelParams& params) {
    const int d = params.d;
    const double lam = params.lambda;
    const double denom = 8.0 * lam * d;
    ClassDecomp cd = decompose(p, d);
    const int type = type_of(cd);
    const int M = m_of_type(type, d);
    std::vector<G4Transition> out;
    out.reserve(M);
    for (int k = 0; k < cd.n; ++k) {
        const int m = cd.size[k];
        for (int nb = 0; nb < 2 * d; ++nb) {
            const int axis = nb >> 1;
            const int sign = (nb & 1) ? -1 : +1;
            for (int sub = 1; sub < (1 << m); ++sub) {
                G4Transition tr;
                tr.target = p;
                for (int b = 0; b < m; ++b)
                    if (sub & (1 << b)) tr.target.c[cd.pos[k][b]][axis] += sign;
                tr.g = lam;
                tr.prob = 1.0 / M;
                tr.h = M * lam / denom;
                tr.tilde_g = tilde_offdiag(p, cd, k, sub, lam, d);
                out.push_back(tr);
            }
        }
    }
    if (is_bad_type(type)) {
        G4Transition tr;
        tr.target = p;
        tr.diagonal = true;
        tr.g = 4.0 - cd.n;
        tr.prob = 1.0 / M;
        tr.h = std::max(M * tr.g / denom, 1.0);
        tr.tilde_g = tilde_diagonal(p, d);
        out.push_back(tr);
    }
    return out;
}

G4Transition sample_transition(const Point4& p, const ModelParams& params, Rng& rng) {
    const int d = params.d;
    const double lam = params.lambda;
    const double denom = 8.0 * lam * d;
    ClassDecomp cd = decompose(p, d);
    const int type = type_of(cd);
    const int M = m_of_type(type, d);
    int64_t j = static_cast<int64_t>(rng.below(static_cast<uint64_t>(M)));
    for (int k = 0; k < cd.n; ++k) {
        const int m = cd.size[k];
        const int nsub = (1 << m) - 1;
        const int64_t block = static_cast<int64_t>(nsub) * 2 * d;
        if (j < block) {
            const int nb = static_cast<int>(j / nsub);
            const int sub = static_cast<int>(j % nsub) + 1;
            const int axis = nb >> 1;
            const int sign = (nb & 1) ? -1 : +1;
            G4Transition tr;
            tr.target = p;
            for (int b = 0; b < m; ++b)
                if (sub & (1 << b)) tr.target.c[cd.pos[k][b]][axis] += sign;
            tr.g = lam;
            tr.prob = 1.0 / M;
            tr.h = M * lam / denom;
            tr.tilde_g = tilde_offdiag(p, cd, k, sub, lam, d);
            return tr;
        }
        j -= block;
    }
    // bad-point diagonal
    G4Transition tr;
    tr.target = p;
    tr.diagonal = true;
    tr.g = 4.0 - cd.n;
    tr.prob = 1.0 / M;
    tr.h = std::max(M * tr.g / denom, 1.0);
    tr.tilde_g = tilde_diagonal(p, d);
    return tr;
}

double initial_moment_f0(const Point4& p, int d, const InitialLaw& law) {
    ClassDecomp cd = decompose(p, d);
    double f = 1.0;
    for (int k = 0; k < cd.n; ++k) f *= law.moment(cd.size[k]);
    return f;
}

double initial_moment_f0_pairs(const Point4& p, int d, const InitialLaw& law) {
    double f = 1.0;
    if (p.rows_equal(0, 1, d)) f *= law.moment(2);
    if (p.rows_equal(2, 3, d)) f *= law.moment(2);
    return f;
}

WalkEstimate fourth_moment_poissonized(const ModelParams& params, const InitialLaw& law,
                                       double t_macro, int64_t n_walks, uint64_t seed) {
    const double denom = 8.0 * params.lambda * params.d;
    const double mu = denom * t_macro * params.N * params.N;
    Rng rng(seed);
    BatchAccumulator batches(100);
    double max_weight = 0.0;
    int64_t bad_end = 0;
    std::vector<double> values;
    values.reserve(static_cast<size_t>(n_walks));
    for (int64_t w = 0; w < n_walks; ++w) {
        uint64_t n = rng.poisson(mu);
        Point4 pt;
        double prod = 1.0;
        for (uint64_t i = 0; i < n; ++i) {
            G4Transition tr = sample_transition(pt, params, rng);
            prod *= tr.g / (tr.prob * denom);
            pt = tr.target;
        }
        double val = prod * initial_moment_f0(pt, params.d, law);
        if (val > max_weight) max_weight = val;
        if (is_bad_type(classify_type(pt, params.d))) ++bad_end;
        batches.add(val);
        values.push_back(val);
    }
    WalkEstimate est = batches.estimate();
    std::sort(values.begin(), values.end());
    size_t trim = static_cast<size_t>(values.size() / 1000);
    double tm = 0.0;
    size_t keep = values.size() - trim;
    for (size_t i = 0; i < keep; ++i) tm += values[i];
    est.diagnostics["trimmed_mean_0p1"] = keep > 0 ? tm / keep : 0.0;
    est.diagnostics["max_weight"] = max_weight;
    est.diagnostics["bad_at_end_frac"] = static_cast<double>(bad_end) / n_walks;
    est.diagnostics["poisson_mean"] = mu;
    return est;
}

double fourth_moment_series2(const ModelParams& params, const InitialLaw& law, double t_macro) {
    const double denom = 8.0 * params.lambda * params.d;
    const double mu = denom * t_macro * params.N * params.N;
    Point4 start;
    const int d = params.d;
    double t0 = initial_moment_f0(start, d, law);
    double t1 = 0.0, t2 = 0.0;
    for (const auto& tr : g_transitions(start, params)) {
        t1 += tr.g / denom * initial_moment_f0(tr.target, d, law);
        double inner = 0.0;
        for (const auto& tr2 : g_transitions(tr.target, params))
            inner += tr2.g / denom * initial_moment_f0(tr2.target, d, law);
        t2 += tr.g / denom * inner;
    }
    return std::exp(-mu) * (t0 + mu * t1 + mu * mu / 2.0 * t2);
}

WalkEstimate product_bound_estimate(const Point4& start, const ModelParams& params,
                                    const ProductBoundOptions& opt) {
    const int d = params.d;
    if (d < 3) throw std::invalid_argument("product_bound_estimate: requires d >= 3");
    Rng rng(opt.seed);
    BatchAccumulator batches(100);
    MeanVar at_h1;
    const int64_t h1 = std::max<int64_t>(1, opt.horizon / 10);
    int64_t uncertified = 0, overflow = 0;
    double power_mean = 0.0;
    auto certified = [&](const Point4& p) {
        int diff[kMaxDim];
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) {
                for (int a = 0; a < d; ++a) diff[a] = p.c[i][a] - p.c[j][a];
                if (hitting_probability_k(std::span<const int>(diff, static_cast<size_t>(d)), d) >=
                    opt.k_threshold)
                    return false;
            }
        return true;
    };
    for (int64_t w = 0; w < opt.n_walks; ++w) {
        Point4 pt = start;
        double prod = 1.0;
        bool frozen = false, snapped = false;
        for (int64_t step = 0; step < opt.horizon; ++step) {
            if (step == h1) {
                at_h1.add(prod);
                snapped = true;
            }
            if (classify_type(pt, d) == 5 && certified(pt)) {
                frozen = true;
                break;
            }
            G4Transition tr = sample_transition(pt, params, rng);
            prod *= tr.h;
            pt = tr.target;
            if (prod > 1e100) {
                ++overflow;
                break;
            }
        }
        if (!snapped) at_h1.add(prod);
        if (!frozen) ++uncertified;
        batches.add(prod);
        power_mean += prod < 1e90 ? std::pow(prod, 1.1) : 1e99;
    }
    WalkEstimate est = batches.estimate();
    double m_h1 = at_h1.mean();
    double se = std::sqrt(est.stderr_ * est.stderr_ + at_h1.stderr_of_mean() * at_h1.stderr_of_mean());
    bool alarm = overflow > 0 ||
                 (est.mean > m_h1 * 1.02 && est.mean - m_h1 > 2.0 * se);
    est.diagnostics["mean_at_h1"] = m_h1;
    est.diagnostics["divergence_alarm"] = alarm ? 1.0 : 0.0;
    est.diagnostics["frac_uncertified"] = static_cast<double>(uncertified) / opt.n_walks;
    est.diagnostics["overflow_walks"] = static_cast<double>(overflow);
    est.diagnostics["power_mean_1p1"] = power_mean / opt.n_walks;
    est.diagnostics["bias_bound"] = 6.0 * opt.k_threshold * est.mean;
    return est;
}

CovarianceEstimate covariance_walk(const ModelParams& params, const InitialLaw& law,
                                   int separation, double t_macro, int64_t n_walks,
                                   uint64_t seed) {
    const int d = params.d;
    const double denom = 8.0 * params.lambda * d;
    const double mu = denom * t_macro * params.N * params.N;
    Rng rng(seed);
    BatchAccumulator batches(100);
    int64_t sigma_count = 0;
    for (int64_t w = 0; w < n_walks; ++w) {
        Point4 pt = Point4::two_pairs(separation);
        bool sigma = cross_pairs_meet(pt, d);
        double prod_g = 1.0, prod_t = 1.0;
        uint64_t n = rng.poisson(mu);
        for (uint64_t i = 0; i < n; ++i) {
            G4Transition tr = sample_transition(pt, params, rng);
            prod_g *= tr.g / (tr.prob * denom);
            prod_t *= tr.tilde_g / (tr.prob * denom);
            pt = tr.target;
            if (!sigma && cross_pairs_meet(pt, d)) sigma = true;
        }
        if (sigma) {
            ++sigma_count;
            batches.add(prod_g * initial_moment_f0(pt, d, law) -
                        prod_t * initial_moment_f0_pairs(pt, d, law));
        } else {
            batches.add(0.0);
        }
    }
    CovarianceEstimate out;
    out.cov = batches.estimate();
    out.p_sigma = static_cast<double>(sigma_count) / n_walks;
    out.p_sigma_stderr = std::sqrt(std::max(0.0, out.p_sigma * (1.0 - out.p_sigma) / n_walks));
    out.cov.diagnostics["p_sigma"] = out.p_sigma;
    out.cov.diagnostics["poisson_mean"] = mu;
    return out;
}

// ---------------------------------------------------------------------------
// beta walk
// ---------------------------------------------------------------------------

double beta_self_loop_weight(double lambda, int d) {
    return (1.0 + 2.0 * lambda * d) * (2.0 * d + 1.0) / (4.0 * lambda * d);
}

double beta_exit_weight(int d) { return (2.0 * d + 1.0) / (2.0 * d); }

WalkEstimate beta_walk_product(const ModelParams& params, const BetaWalkOptions& opt) {
    const int d = params.d;
    if (d < 3) throw std::invalid_argument("beta_walk_product: requires d >= 3");
    const double w_self = beta_self_loop_weight(params.lambda, d);
    const double w_exit = beta_exit_weight(d);
    const double r2 = opt.escape_radius * opt.escape_radius;
    Rng rng(opt.seed);
    BatchAccumulator batches(100);
    double truncation_bound = 0.0;
    int64_t truncated = 0;
    int pos[kMaxDim];
    auto k_here = [&] {
        return hitting_probability_k(std::span<const int>(pos, static_cast<size_t>(d)), d);
    };
    for (int64_t w = 0; w < opt.n_walks; ++w) {
        double prod = 1.0;
        int64_t steps = 0;
        bool done = false;
        while (!done) {
            // at the origin: 2d+1 targets, self-loop carries the big weight
            uint64_t j = rng.below(2 * static_cast<uint64_t>(d) + 1);
            if (j == 2 * static_cast<uint64_t>(d)) {
                prod *= w_self;
                continue;
            }
            prod *= w_exit;
            std::fill(pos, pos + d, 0);
            pos[j >> 1] = (j & 1) ? -1 : +1;
            double check_r2 = r2; // certification shells grow geometrically
            // excursion off the origin: H = 1 until (if ever) it returns
            while (true) {
                if (++steps > opt.horizon) {
                    truncation_bound += prod * k_here();
                    ++truncated;
                    done = true;
                    break;
                }
                uint64_t m = rng.below(2 * static_cast<uint64_t>(d));
                pos[m >> 1] += (m & 1) ? -1 : +1;
                bool home = true;
                double n2 = 0.0;
                for (int a = 0; a < d; ++a) {
                    if (pos[a] != 0) home = false;
                    n2 += static_cast<double>(pos[a]) * pos[a];
                }
                if (home) break; // returned to O, weights resume
                if (n2 < check_r2) continue;
                if (opt.resample_returns) {
                    // strong Markov: the excursion ends at O with probability
                    // k(pos), otherwise never comes back
                    if (rng.uniform() < k_here()) break;
                    done = true;
                    break;
                }
                double k = k_here();
                if (k < opt.k_threshold) {
                    truncation_bound += prod * k;
                    done = true;
                    break;
                }
                check_r2 *= 1.7;
            }
        }
        batches.add(prod);
    }
    WalkEstimate est = batches.estimate();
    est.diagnostics["truncation_bound"] = truncation_bound / opt.n_walks;
    est.diagnostics["truncated_walks"] = static_cast<double>(truncated);
    est.diagnostics["truncation_warns"] =
        truncation_bound / opt.n_walks > est.stderr_ ? 1.0 : 0.0;
    return est;
}

// ---------------------------------------------------------------------------
// uniformization on the hyperoctahedral fundamental domain
// ---------------------------------------------------------------------------

namespace {

struct Domain {
    int d = 0, R = 0;
    std::vector<int32_t> nbr;    // 2d entries per point, -1 = outside
    std::vector<uint8_t> outdeg; // edges leaving the box
    std::vector<std::array<uint8_t, 8>> rep;
    int32_t origin = -1;
    int64_t size() const { return static_cast<int64_t>(outdeg.size()); }
};

uint64_t pack8(const int* a, int d) {
    uint64_t k = 0;
    for (int i = 0; i < d; ++i) k = (k << 8) | static_cast<uint64_t>(a[i]);
    return k;
}

void canonicalize(int* a, int d) {
    for (int i = 0; i < d; ++i) a[i] = std::abs(a[i]);
    std::sort(a, a + d, std::greater<int>());
}

Domain build_domain(int d, int R) {
    if (d > 8 || R > 250) throw std::invalid_argument("uniformization domain too large");
    Domain dom;
    dom.d = d;
    dom.R = R;
    std::unordered_map<uint64_t, int32_t> index;
    std::vector<std::array<uint8_t, 8>> pts;
    // enumerate nonincreasing tuples 0 <= a_d <= ... <= a_1 <= R
    int a[8] = {0};
    std::function<void(int, int)> rec = [&](int i, int hi) {
        if (i == d) {
            std::array<uint8_t, 8> p{};
            for (int k = 0; k < d; ++k) p[k] = static_cast<uint8_t>(a[k]);
            index.emplace(pack8(a, d), static_cast<int32_t>(pts.size()));
            pts.push_back(p);
            return;
        }
        for (int v = 0; v <= hi; ++v) {
            a[i] = v;
            rec(i + 1, v);
        }
    };
    rec(0, R);
    dom.rep = pts;
    dom.nbr.assign(pts.size() * 2 * d, -1);
    dom.outdeg.assign(pts.size(), 0);
    int zeros[8] = {0};
    dom.origin = index.at(pack8(zeros, d));
    int nb[8];
    for (size_t i = 0; i < pts.size(); ++i) {
        for (int axis = 0; axis < d; ++axis) {
            for (int s = 0; s < 2; ++s) {
                for (int k = 0; k < d; ++k) nb[k] = pts[i][k];
                nb[axis] += s ? -1 : +1;
                canonicalize(nb, d);
                if (nb[0] > R) {
                    ++dom.outdeg[i];
                    continue;
                }
                dom.nbr[i * 2 * d + axis * 2 + s] = index.at(pack8(nb, d));
            }
        }
    }
    return dom;
}

struct PoissonWeights {
    std::vector<double> pmf;  // n = 0..n_max
    std::vector<double> tail; // P(Pois > n)
};

PoissonWeights poisson_weights(double mu, int n_max) {
    PoissonWeights w;
    w.pmf.resize(n_max + 1);
    for (int n = 0; n <= n_max; ++n) {
        double lp = -mu + n * std::log(std::max(mu, 1e-300)) - std::lgamma(n + 1.0);
        w.pmf[n] = mu == 0.0 ? (n == 0 ? 1.0 : 0.0) : std::exp(lp);
    }
    // tail[n] = P(Pois > n)
    w.tail.resize(n_max + 1);
    double acc = 0.0;
    for (int n = 0; n <= n_max; ++n) {
        acc += w.pmf[n];
        w.tail[n] = std::max(0.0, 1.0 - acc);
    }
    return w;
}

} // namespace

SecondMomentResult second_moment_exact(const ModelParams& params, double t_micro, int R) {
    const int d = params.d;
    const double lam = params.lambda;
    const double mu = 4.0 * lam * d * t_micro;
    const double q = (1.0 + 2.0 * lam * d) / (4.0 * lam * d);
    int n_max = static_cast<int>(mu + 10.0 * std::sqrt(mu) + 20.0);
    if (R <= 0) R = static_cast<int>(std::ceil(5.5 * std::sqrt(static_cast<double>(n_max) / d))) + 10;
    Domain dom = build_domain(d, R);
    PoissonWeights pw = poisson_weights(mu, n_max);
    std::vector<double> b(dom.size(), 0.0), bn(dom.size(), 0.0);
    double acc = 0.0; // sum w_n b_n(O); background contributes exactly 1
    double boundary = 0.0;
    const double inv2d = 1.0 / (2.0 * d);
    for (int n = 1; n <= n_max; ++n) {
        double outflow = 0.0;
        for (int64_t i = 0; i < dom.size(); ++i) {
            double s = 0.0;
            const int32_t* nb = &dom.nbr[i * 2 * d];
            for (int e = 0; e < 2 * d; ++e)
                if (nb[e] >= 0) s += b[nb[e]];
            bn[i] = s * inv2d;
            if (dom.outdeg[i]) outflow += b[i] * dom.outdeg[i] * inv2d;
        }
        bn[dom.origin] += q * (1.0 + b[dom.origin]);
        boundary += pw.tail[n - 1] * outflow;
        b.swap(bn);
        acc += pw.pmf[n] * b[dom.origin];
    }
    SecondMomentResult r;
    r.value = 1.0 + acc;
    r.boundary_mass = boundary + pw.tail[n_max] * (1.0 + b[dom.origin]);
    r.radius = R;
    r.terms = n_max;
    r.converged = r.boundary_mass <= 1e-6;
    return r;
}

double expm_psi_origin(const ModelParams& params, double t_micro, int R,
                       const std::function<double(std::span<const int>)>& v) {
    const int d = params.d;
    const double lam = params.lambda;
    const double mu = 4.0 * lam * d * t_micro;
    const double q = (1.0 + 2.0 * lam * d) / (4.0 * lam * d);
    int n_max = static_cast<int>(mu + 10.0 * std::sqrt(mu) + 20.0);
    Domain dom = build_domain(d, R);
    PoissonWeights pw = poisson_weights(mu, n_max);
    std::vector<double> u(dom.size()), un(dom.size());
    int tmp[8];
    for (int64_t i = 0; i < dom.size(); ++i) {
        for (int k = 0; k < d; ++k) tmp[k] = dom.rep[i][k];
        u[i] = v(std::span<const int>(tmp, static_cast<size_t>(d)));
    }
    double acc = pw.pmf[0] * u[dom.origin];
    const double inv2d = 1.0 / (2.0 * d);
    for (int n = 1; n <= n_max; ++n) {
        for (int64_t i = 0; i < dom.size(); ++i) {
            double s = 0.0;
            const int32_t* nb = &dom.nbr[i * 2 * d];
            for (int e = 0; e < 2 * d; ++e)
                if (nb[e] >= 0) s += u[nb[e]];
            un[i] = s * inv2d;
        }
        un[dom.origin] += q * u[dom.origin];
        u.swap(un);
        acc += pw.pmf[n] * u[dom.origin];
    }
    return acc;
}

// ---------------------------------------------------------------------------
// 5-state dominating chain
// ---------------------------------------------------------------------------

namespace {

void chain_matrices(int d, double P[4][4], double r[4]) {
    for (int i = 0; i < 4; ++i) {
        r[i] = 0.0;
        for (int j = 0; j < 4; ++j) P[i][j] = 0.0;
    }
    const double e = 2.0 / d;
    P[0][1] = 1.0;
    P[1][0] = e;
    P[1][2] = 1.0 - e;
    P[2][1] = e;
    P[2][0] = e;
    P[2][3] = 1.0 - 2.0 * e;
    P[3][2] = e;
    P[3][1] = e;
    r[3] = 1.0 - 2.0 * e;
}

} // namespace

ChainResult coupling_chain_expectation(double c1, int d) {
    if (d <= 4) throw std::invalid_argument("coupling_chain_expectation: requires d > 4");
    if (c1 <= 0.0) throw std::invalid_argument("coupling_chain_expectation: C1 must be > 0");
    double P[4][4], r[4];
    chain_matrices(d, P, r);
    // spectral radius of c1 * P by power iteration
    double x[4] = {1.0, 1.0, 1.0, 1.0};
    double rho = 0.0;
    for (int it = 0; it < 500; ++it) {
        double y[4] = {0, 0, 0, 0};
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) y[i] += c1 * P[i][j] * x[j];
        double nrm = 0.0;
        for (int i = 0; i < 4; ++i) nrm = std::max(nrm, std::fabs(y[i]));
        if (nrm == 0.0) {
            rho = 0.0;
            break;
        }
        for (int i = 0; i < 4; ++i) x[i] = y[i] / nrm;
        rho = nrm;
    }
    ChainResult res;
    res.spectral_radius = rho;
    if (rho >= 1.0 - 1e-12) {
        res.finite = false;
        res.value = std::numeric_limits<double>::infinity();
        return res;
    }
    // solve (I - c1 P) V = c1 r
    double A[4][5];
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) A[i][j] = (i == j ? 1.0 : 0.0) - c1 * P[i][j];
        A[i][4] = c1 * r[i];
    }
    for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int i = col + 1; i < 4; ++i)
            if (std::fabs(A[i][col]) > std::fabs(A[piv][col])) piv = i;
        for (int j = 0; j < 5; ++j) std::swap(A[col][j], A[piv][j]);
        for (int i = col + 1; i < 4; ++i) {
            double f = A[i][col] / A[col][col];
            for (int j = col; j < 5; ++j) A[i][j] -= f * A[col][j];
        }
    }
    double V[4];
    for (int i = 3; i >= 0; --i) {
        double s = A[i][4];
        for (int j = i + 1; j < 4; ++j) s -= A[i][j] * V[j];
        V[i] = s / A[i][i];
    }
    res.finite = V[0] > 0.0;
    res.value = V[0];
    if (!res.finite) res.value = std::numeric_limits<double>::infinity();
    return res;
}

double coupling_chain_powering(double c1, int d, double tol) {
    if (d <= 4) throw std::invalid_argument("coupling_chain_powering: requires d > 4");
    double P[4][4], r[4];
    chain_matrices(d, P, r);
    double pi[4] = {1.0, 0.0, 0.0, 0.0};
    double total = 0.0;
    double cn = 1.0;
    for (int n = 1; n < 100000; ++n) {
        cn *= c1;
        double absorbed = 0.0;
        for (int i = 0; i < 4; ++i) absorbed += pi[i] * r[i];
        total += cn * absorbed;
        double next[4] = {0, 0, 0, 0};
        for (int j = 0; j < 4; ++j)
            for (int i = 0; i < 4; ++i) next[j] += pi[i] * P[i][j];
        double mass = 0.0;
        for (int i = 0; i < 4; ++i) {
            pi[i] = next[i];
            mass += pi[i];
        }
        if (cn * mass < tol && n > 16) break;
    }
    return total;
}

double chain_tail_probability(int d, int n) {
    if (d <= 4) throw std::invalid_argument("chain_tail_probability: requires d > 4");
    if (n <= 0) return 1.0;
    double P[4][4], r[4];
    chain_matrices(d, P, r);
    double pi[4] = {1.0, 0.0, 0.0, 0.0};
    for (int s = 0; s < n - 1; ++s) {
        double next[4] = {0, 0, 0, 0};
        for (int j = 0; j < 4; ++j)
            for (int i = 0; i < 4; ++i) next[j] += pi[i] * P[i][j];
        for (int i = 0; i < 4; ++i) pi[i] = next[i];
    }
    return pi[0] + pi[1] + pi[2] + pi[3];
}

} // namespace bcpp
