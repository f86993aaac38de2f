#ifndef BCPP_GREEN_HPP
#define BCPP_GREEN_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "bcpp/estimates.hpp"

namespace bcpp {

/// Exponentially scaled modified Bessel function e^{-x} I_n(x), x >= 0.
double scaled_bessel_i(int n, double x);

/// Lattice Green function G(x) = sum_n P_O(S_n = x) of the simple random walk
/// on Z^d, d >= 3, via G(x) = int_0^inf e^{-t} prod_i I_{x_i}(t/d) dt with an
/// asymptotic tail series. Relative accuracy ~1e-12.
double green_function(std::span<const int> x, int d);

/// Escape probability gamma_d = 1/G(O). Cached per dimension. Requires d >= 3.
double gamma_d(int d);

/// Probability that the walk started at x ever hits the origin: G(x)/G(0),
/// with k(O) = 1. Requires d >= 3. Thread-local cache on canonicalized x.
double hitting_probability_k(std::span<const int> x, int d);

/// Upper bound on sum_{n > horizon} P(S_n = O) (local-CLT tail); bounds the
/// censoring bias of the Monte Carlo escape estimator.
double return_tail_bound(int d, int64_t horizon);

/// Monte Carlo estimate of gamma_d on the infinite lattice: walks killed at
/// first return to O or at `horizon` steps. The censoring bias bound is
/// reported in diagnostics["bias_bound"]. Rejects d < 3.
WalkEstimate estimate_gamma_d(int d, int64_t n_walks, int64_t horizon, uint64_t seed);

} // namespace bcpp

#endif
