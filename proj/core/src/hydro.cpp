#include "bcpp/hydro.hpp"

#include <cmath>
#include <stdexcept>

#include <algorithm>
#include <cstdio>

#include "bcpp/constants.hpp"
#include "bcpp/estimates.hpp"
#include "bcpp/parallel.hpp"

namespace bcpp {
namespace {

using cplx = std::complex<double>;

// Dense 1D DFT along one axis of the torus-ordered grid. Forward carries the
// 1/L normalization; inverse is the plain synthesis sum.
void dft_axis(std::vector<cplx>& a, int d, int L, int axis, bool inverse) {
    int64_t stride = 1;
    for (int i = 0; i < axis; ++i) stride *= L;
    int64_t vol = 1;
    for (int i = 0; i < d; ++i) vol *= L;
    std::vector<cplx> w(static_cast<size_t>(L) * L);
    const double sgn = inverse ? +1.0 : -1.0;
    for (int k = 0; k < L; ++k)
        for (int j = 0; j < L; ++j) {
            double ph = sgn * 2.0 * M_PI * k * j / L;
            w[static_cast<size_t>(k) * L + j] = cplx(std::cos(ph), std::sin(ph));
        }
    const double norm = inverse ? 1.0 : 1.0 / L;
    std::vector<cplx> line(L);
    const int64_t block = stride * L;
    for (int64_t base = 0; base < vol; base += block) {
        for (int64_t off = 0; off < stride; ++off) {
            for (int j = 0; j < L; ++j) line[j] = a[base + off + j * stride];
            for (int k = 0; k < L; ++k) {
                cplx s(0.0, 0.0);
                const cplx* row = &w[static_cast<size_t>(k) * L];
                for (int j = 0; j < L; ++j) s += row[j] * line[j];
                a[base + off + k * stride] = s * norm;
            }
        }
    }
}

int fold_mode(int k, int L) { return k <= L / 2 ? k : k - L; }

} // namespace

DensityProfile profile_on_grid(const ProfileSpec& rho0, const ModelParams& params) {
    params.validate();
    DensityProfile p;
    p.d = params.d;
    p.L = params.L;
    p.N = params.N;
    Torus torus(params.d, params.L);
    p.grid.resize(torus.volume());
    const double ell = params.macro_side();
    double u[kMaxDim];
    for (int64_t i = 0; i < torus.volume(); ++i) {
        Site s = torus.site(i);
        for (int a = 0; a < params.d; ++a) u[a] = static_cast<double>(s[a]) / params.N;
        p.grid[i] = rho0.eval(u, params.d, ell);
    }
    return p;
}

DensityProfile solve_pde(const DensityProfile& rho0, const ModelParams& params, double t) {
    if (rho0.d != params.d || rho0.L != params.L || rho0.N != params.N)
        throw std::invalid_argument("solve_pde: grid does not match params");
    const int d = params.d, L = params.L;
    Torus torus(d, L);
    std::vector<cplx> a(rho0.grid.begin(), rho0.grid.end());
    for (int axis = 0; axis < d; ++axis) dft_axis(a, d, L, axis, false);
    const double ell = params.macro_side();
    for (int64_t i = 0; i < torus.volume(); ++i) {
        Site k = torus.site(i);
        double w2 = 0.0, wsum = 0.0;
        for (int axis = 0; axis < d; ++axis) {
            double w = 2.0 * M_PI * fold_mode(k[axis], L) / ell;
            w2 += w * w;
            wsum += w;
        }
        double re = (-params.lambda * w2 + params.lambda2) * t;
        double im = -2.0 * params.lambda1 * wsum * t;
        a[i] *= std::exp(re) * cplx(std::cos(im), std::sin(im));
    }
    for (int axis = 0; axis < d; ++axis) dft_axis(a, d, L, axis, true);
    DensityProfile out = rho0;
    for (int64_t i = 0; i < torus.volume(); ++i) out.grid[i] = a[i].real();
    return out;
}

double empirical_pairing(const Configuration& cfg, const ModelParams& params,
                         const TestFunction& G) {
    Torus torus(params.d, params.L);
    double s = 0.0;
    const double t = cfg.current_time;
    for (int64_t i = 0; i < torus.volume(); ++i)
        s += cfg.value_at(i, t) * G.eval_site(torus.site(i), params);
    return s / std::pow(static_cast<double>(params.N), params.d);
}

double profile_pairing(const DensityProfile& rho, const ModelParams& params,
                       const TestFunction& G) {
    Torus torus(params.d, params.L);
    double s = 0.0;
    for (int64_t i = 0; i < torus.volume(); ++i)
        s += rho.grid[i] * G.eval_site(torus.site(i), params);
    return s / std::pow(static_cast<double>(params.N), params.d);
}

std::vector<std::complex<double>> grid_fourier(const std::vector<double>& grid, int d, int L) {
    std::vector<cplx> a(grid.begin(), grid.end());
    for (int axis = 0; axis < d; ++axis) dft_axis(a, d, L, axis, false);
    return a;
}

std::vector<LlnCell> lln_error(const ModelParams& params, const InitialLaw& law,
                               const std::vector<TestFunction>& gs,
                               const std::vector<double>& ts, int replicas, uint64_t seed,
                               int threads) {
    params.validate();
    if (params.d >= 3) {
        auto consts = derive_constants(params);
        if (!consts.supercritical)
            std::fprintf(stderr,
                         "warning: lambda=%g below threshold %g; the LLN regime does not apply\n",
                         params.lambda, consts.lambda_threshold);
    }
    // mean profile of the initial law
    ProfileSpec mean_profile = law.kind == InitialLaw::Kind::Profile
                                   ? law.profile
                                   : ProfileSpec::flat(1.0);
    DensityProfile rho0 = profile_on_grid(mean_profile, params);
    std::vector<double> sorted_ts(ts);
    std::sort(sorted_ts.begin(), sorted_ts.end());

    std::vector<std::vector<double>> predicted(sorted_ts.size(),
                                               std::vector<double>(gs.size()));
    for (size_t it = 0; it < sorted_ts.size(); ++it) {
        DensityProfile rt = solve_pde(rho0, params, sorted_ts[it]);
        for (size_t ig = 0; ig < gs.size(); ++ig)
            predicted[it][ig] = profile_pairing(rt, params, gs[ig]);
    }

    // abs error and simulated pairing per (replica, t, G)
    std::vector<std::vector<std::vector<double>>> err(
        replicas, std::vector<std::vector<double>>(sorted_ts.size(),
                                                   std::vector<double>(gs.size())));
    auto sim_vals = err; // same shape
    parallel_for_index(replicas, threads, [&](int r) {
        Simulator sim(params, law, derive_seed(seed, static_cast<uint64_t>(r)));
        for (size_t it = 0; it < sorted_ts.size(); ++it) {
            sim.run_until(sorted_ts[it]);
            for (size_t ig = 0; ig < gs.size(); ++ig) {
                double v = empirical_pairing(sim.config(), params, gs[ig]);
                sim_vals[r][it][ig] = v;
                err[r][it][ig] = std::fabs(v - predicted[it][ig]);
            }
        }
    });

    std::vector<LlnCell> out;
    for (size_t it = 0; it < sorted_ts.size(); ++it) {
        for (size_t ig = 0; ig < gs.size(); ++ig) {
            MeanVar e, sv;
            for (int r = 0; r < replicas; ++r) {
                e.add(err[r][it][ig]);
                sv.add(sim_vals[r][it][ig]);
            }
            LlnCell cell;
            cell.t = sorted_ts[it];
            cell.g_id = gs[ig].id();
            cell.mean_abs_error = e.mean();
            cell.stderr_ = e.stderr_of_mean();
            cell.mean_sim = sv.mean();
            cell.predicted = predicted[it][ig];
            out.push_back(cell);
        }
    }
    return out;
}

} // namespace bcpp
