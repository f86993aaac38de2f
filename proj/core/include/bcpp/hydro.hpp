#ifndef BCPP_HYDRO_HPP
#define BCPP_HYDRO_HPP

#include <complex>
#include <vector>

#include "bcpp/lattice.hpp"
#include "bcpp/process.hpp"
#include "bcpp/profile.hpp"
#include "bcpp/test_function.hpp"

namespace bcpp {

/// Density on the macroscopic torus, sampled at the lattice map x -> x/N.
struct DensityProfile {
    int d = 0;
    int L = 0;
    int N = 1;
    std::vector<double> grid; // torus-ordered, size L^d

    double macro_side() const { return static_cast<double>(L) / N; }
};

DensityProfile profile_on_grid(const ProfileSpec& rho0, const ModelParams& params);

/// Exact-in-time spectral evolution of
///   drho/dt = lambda Lap rho - 2 lambda1 sum_i d_i rho + lambda2 rho:
/// mode k multiplies by exp((-lambda |w_k|^2 - 2 i lambda1 sum_i w_ki + lambda2) t).
DensityProfile solve_pde(const DensityProfile& rho0, const ModelParams& params, double t);

/// <pi_t^N, G> = N^{-d} sum_x eta(x) G(x/N) for a synchronized configuration.
double empirical_pairing(const Configuration& cfg, const ModelParams& params,
                         const TestFunction& G);

/// <rho, G> on the grid: N^{-d} sum_x rho(x) G(x/N).
double profile_pairing(const DensityProfile& rho, const ModelParams& params,
                       const TestFunction& G);

/// Fourier coefficients c_k = L^{-d} sum_x f(x) e^{-i w_k . x/N} (grid DFT).
std::vector<std::complex<double>> grid_fourier(const std::vector<double>& grid, int d, int L);

struct LlnCell {
    double t = 0.0;
    std::string g_id;
    double mean_abs_error = 0.0;
    double stderr_ = 0.0;
    double mean_sim = 0.0;
    double predicted = 0.0;
};

/// Law-of-large-numbers error table: for each (t, G), the replica average of
/// |<pi_t^N, G> - <rho_t, G>| with its standard error. Warns (flag in the
/// cell ordering, not an abort) when lambda is subcritical.
std::vector<LlnCell> lln_error(const ModelParams& params, const InitialLaw& law,
                               const std::vector<TestFunction>& gs,
                               const std::vector<double>& ts, int replicas, uint64_t seed,
                               int threads = 1);

} // namespace bcpp

#endif
