#ifndef BCPP_MOMENT_WALKS_HPP
#define BCPP_MOMENT_WALKS_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bcpp/estimates.hpp"
#include "bcpp/lattice.hpp"
#include "bcpp/process.hpp"
#include "bcpp/rng.hpp"

namespace bcpp {

// ---------------------------------------------------------------------------
// Second moments: uniformization of e^{t Psi} and the beta walk
// ---------------------------------------------------------------------------

struct SecondMomentResult {
    double value = 0.0;
    double boundary_mass = 0.0; // Poisson-tail-weighted mass dropped at the box edge
    int radius = 0;
    int terms = 0;
    bool converged = false; // boundary_mass <= 1e-6
};

/// E[eta_t(O)^2] for constant-one init, lambda2 = 0, via uniformization of
/// Psi in Upsilon = Psi + 4 lambda d I on the box |x|_inf <= R (hyperoctahedral
/// symmetry reduction). t is microscopic. R <= 0 picks a radius from the
/// Poisson step budget.
SecondMomentResult second_moment_exact(const ModelParams& params, double t_micro, int R = 0);

/// (e^{t Psi} v)(O) for a symmetric decaying v given on canonicalized points
/// (used for the Lambda = k + h_lambda harmonicity check).
double expm_psi_origin(const ModelParams& params, double t_micro, int R,
                       const std::function<double(std::span<const int>)>& v);

/// Beta-walk weights at the origin (Lemma-3.1 structure):
/// self-loop (1+2 lambda d)(2d+1)/(4 lambda d), exit (2d+1)/(2d), 1 elsewhere.
double beta_self_loop_weight(double lambda, int d);
double beta_exit_weight(int d);

struct BetaWalkOptions {
    int64_t n_walks = 100000;
    int64_t horizon = 10000000; // total-step safety cap per walk
    uint64_t seed = 1;
    bool resample_returns = true; // exact Bernoulli(k) collapse of excursions
    double escape_radius = 8.0;   // collapse radius (resample mode)
    double k_threshold = 1e-4;    // certification threshold (literal mode)
};

/// MC estimate of E_O[prod_i H(beta_i, beta_{i+1})] (= the Lemma-3.1 bound,
/// equal to gamma_d/(gamma_d - (1+2 lambda d)/(4 lambda d)) when supercritical).
WalkEstimate beta_walk_product(const ModelParams& params, const BetaWalkOptions& opt);

// ---------------------------------------------------------------------------
// Fourth moments: the typed walk on (Z^d)^4
// ---------------------------------------------------------------------------

/// A point of (Z^d)^4; coordinates are unbounded (infinite lattice).
struct Point4 {
    std::array<std::array<int32_t, kMaxDim>, 4> c{};

    static Point4 diagonal(int /*d*/) { return Point4{}; }
    /// (x, x, y, y) with y = x + r e_1.
    static Point4 two_pairs(int r) {
        Point4 p;
        p.c[2][0] = r;
        p.c[3][0] = r;
        return p;
    }
    bool rows_equal(int i, int j, int d) const {
        for (int a = 0; a < d; ++a)
            if (c[i][a] != c[j][a]) return false;
        return true;
    }
};

/// Type I..V from the coordinate equality pattern: multiplicities
/// {4}->I, {3,1}->II, {2,2}->III, {2,1,1}->IV, {1,1,1,1}->V.
int classify_type(const Point4& p, int d);

/// Walk degree M(x) = {30d+1, 16d+1, 12d+1, 10d+1, 8d} by type.
int m_of_type(int type, int d);
inline bool is_bad_type(int type) { return type <= 4; }

struct G4Transition {
    Point4 target;
    double g = 0.0;       // G weight (lambda off-diagonal, 4 - #values on diagonal)
    double tilde_g = 0.0; // pair-factorized generator weight, <= g
    double prob = 0.0;    // 1/M(source)
    double h = 0.0;       // M G/(8 lambda d), maxed with 1 on bad diagonals
    bool diagonal = false;
};

/// Exhaustive single-step enumeration: every flip of one value class to a
/// neighboring value on a nonempty subset of its positions, plus the diagonal
/// at bad points. List length is exactly M(source).
std::vector<G4Transition> g_transitions(const Point4& p, const ModelParams& params);

/// Draw one transition uniformly among the M(source) targets (same law as
/// sampling g_transitions by index, without materializing the list).
G4Transition sample_transition(const Point4& p, const ModelParams& params, Rng& rng);

/// Product of initial mixed moments for the equality pattern of p
/// (Assumption-(B) independence: moments factor over distinct coordinates).
double initial_moment_f0(const Point4& p, int d, const InitialLaw& law);
/// Pairwise version E[eta(p1)eta(p2)] E[eta(p3)eta(p4)].
double initial_moment_f0_pairs(const Point4& p, int d, const InitialLaw& law);

/// Unbiased Poissonized estimator of E[eta_{tN^2}(x)^4]: n ~ Poisson(8 lambda d tN^2),
/// value = prod_{i<n} M(S_i) G(S_i, S_{i+1})/(8 lambda d) * F_0(S_n).
WalkEstimate fourth_moment_poissonized(const ModelParams& params, const InitialLaw& law,
                                       double t_macro, int64_t n_walks, uint64_t seed);

/// Exact truncated series sum_{n<=2} of the same expansion (enumeration oracle).
double fourth_moment_series2(const ModelParams& params, const InitialLaw& law, double t_macro);

struct ProductBoundOptions {
    int64_t n_walks = 20000;
    int64_t horizon = 10000;
    uint64_t seed = 1;
    double k_threshold = 1e-4; // pairwise-difference escape certification
};

/// E_start[prod_i H(S_i, S_{i+1})] with the maxed weights (Eq.-3.3 object).
/// Freezes when every pairwise coordinate difference is certified escaped;
/// raises diagnostics["divergence_alarm"] when the running mean grows with
/// horizon (subcritical regime).
WalkEstimate product_bound_estimate(const Point4& start, const ModelParams& params,
                                    const ProductBoundOptions& opt);

struct CovarianceEstimate {
    WalkEstimate cov;       // Cov(eta_t(x)^2, eta_t(y)^2) via the sigma-restricted difference
    double p_sigma = 0.0;   // P(sigma < n) with n the Poissonized step count
    double p_sigma_stderr = 0.0;
};

/// Covariance walk from (x, x, y, y), |y-x| = separation along e_1, at
/// macroscopic t: walks contribute G-product F0 minus pair-product F0~ only
/// when a cross-pair meeting (sigma) occurs.
CovarianceEstimate covariance_walk(const ModelParams& params, const InitialLaw& law,
                                   int separation, double t_macro, int64_t n_walks,
                                   uint64_t seed);

// ---------------------------------------------------------------------------
// The 5-state dominating chain (Lemma 3.3)
// ---------------------------------------------------------------------------

struct ChainResult {
    double value = 0.0;
    bool finite = false;
    double spectral_radius = 0.0; // of C1 * (substochastic 4x4 block)
};

/// E_1[C1^T] with T the hitting time of state 5 for the chain
/// p(1,2)=1, p(2,1)=2/d, p(2,3)=1-2/d, p(i,i-1)=p(i,i-2)=2/d,
/// p(i,i+1)=1-4/d for i=3,4. Exact 4-unknown linear solve; requires d > 4.
ChainResult coupling_chain_expectation(double c1, int d);

/// Brute-force oracle: sum_n C1^n P(T=n) by distribution powering.
double coupling_chain_powering(double c1, int d, double tol = 1e-14);

/// Exact P_1(T >= n) by powering the substochastic block.
double chain_tail_probability(int d, int n);

} // namespace bcpp

#endif
