#include "bcpp/constants.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "bcpp/green.hpp"
#include "json.hpp"

namespace bcpp {

DerivedConstants derive_constants(const ModelParams& params, double gamma) {
    DerivedConstants c;
    c.gamma_d = gamma;
    c.Gamma_d = 1.0 - gamma;
    const double d = params.d;
    const double lam = params.lambda;
    c.h_lambda = (2.0 * lam * d * (2.0 * gamma - 1.0) - 1.0) / (1.0 + 2.0 * d * lam);
    c.lambda_threshold = gamma > 0.5 ? 1.0 / (2.0 * d * (2.0 * gamma - 1.0))
                                     : std::numeric_limits<double>::infinity();
    c.supercritical = c.h_lambda > 0.0;
    c.C_lambda_d = c.supercritical
                       ? (1.0 + 2.0 * lam * d) * (1.0 + 1.0 / c.h_lambda)
                       : std::numeric_limits<double>::quiet_NaN();
    return c;
}

DerivedConstants derive_constants(const ModelParams& params) {
    return derive_constants(params, gamma_d(params.d));
}

std::string constants_json(const ModelParams& params, const DerivedConstants& c,
                           double mc_gamma, double mc_stderr, double mc_bias_bound) {
    nlohmann::ordered_json entry;
    entry["gamma_d"] = c.gamma_d;
    entry["Gamma_d"] = c.Gamma_d;
    entry["h_lambda"] = c.h_lambda;
    entry["C"] = c.C_lambda_d;
    entry["lambda_threshold"] = c.lambda_threshold;
    entry["supercritical"] = c.supercritical;
    if (mc_gamma >= 0.0) {
        entry["gamma_mc"] = mc_gamma;
        entry["gamma_mc_stderr"] = mc_stderr;
        entry["gamma_mc_bias_bound"] = mc_bias_bound;
    }
    std::ostringstream key;
    key << "d=" << params.d << ",lambda=" << params.lambda;
    nlohmann::ordered_json doc;
    doc[key.str()] = entry;
    return doc.dump(2);
}

} // namespace bcpp
