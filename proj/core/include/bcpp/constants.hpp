#ifndef BCPP_CONSTANTS_HPP
#define BCPP_CONSTANTS_HPP

#include <string>

#include "bcpp/lattice.hpp"

namespace bcpp {

/// Constants derived from (d, lambda, gamma_d):
///   h_lambda = (2 lambda d (2 gamma_d - 1) - 1) / (1 + 2 d lambda)
///   C(lambda, d) = (1 + 2 lambda d)(1 + 1/h_lambda)
///   lambda_threshold = 1 / (2 d (2 gamma_d - 1))
struct DerivedConstants {
    double gamma_d = 0.0;
    double Gamma_d = 0.0; // return probability 1 - gamma_d
    double h_lambda = 0.0;
    double C_lambda_d = 0.0;
    double lambda_threshold = 0.0;
    bool supercritical = false; // lambda > lambda_threshold, i.e. h_lambda > 0

    /// Second-moment limit 1 + 1/h_lambda (only meaningful when supercritical).
    double second_moment_limit() const { return 1.0 + 1.0 / h_lambda; }
};

DerivedConstants derive_constants(const ModelParams& params, double gamma);

/// Convenience: derive with the Green-function gamma_d for params.d.
DerivedConstants derive_constants(const ModelParams& params);

/// JSON document keyed by (d, lambda) with the derived constants and, when
/// provided, the Monte Carlo cross-check fields.
std::string constants_json(const ModelParams& params, const DerivedConstants& c,
                           double mc_gamma = -1.0, double mc_stderr = -1.0,
                           double mc_bias_bound = -1.0);

} // namespace bcpp

#endif
