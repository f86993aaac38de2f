#ifndef BCPP_PROFILE_HPP
#define BCPP_PROFILE_HPP

#include <array>
#include <cmath>
#include <string>

#include "bcpp/lattice.hpp"

namespace bcpp {

/// Closed-form smooth periodic density profile rho_0 on the macroscopic torus
/// [0, ell)^d. The bump is a von Mises product, smooth and periodic.
struct ProfileSpec {
    enum class Kind { Flat, Bump, Cosine };

    Kind kind = Kind::Flat;
    double baseline = 1.0;
    double amplitude = 0.0;
    double kappa = 2.0;                       // bump concentration
    std::array<double, kMaxDim> center{};     // bump center, macroscopic units
    std::array<int, kMaxDim> mode{};          // cosine integer mode vector

    double eval(const double* u, int d, double ell) const {
        switch (kind) {
            case Kind::Flat:
                return baseline;
            case Kind::Bump: {
                double p = 1.0;
                double alpha = 2.0 * M_PI / ell;
                for (int i = 0; i < d; ++i)
                    p *= std::exp(kappa * (std::cos(alpha * (u[i] - center[i])) - 1.0));
                return baseline + amplitude * p;
            }
            case Kind::Cosine: {
                double phase = 0.0;
                for (int i = 0; i < d; ++i) phase += 2.0 * M_PI * mode[i] * u[i] / ell;
                return baseline + amplitude * std::cos(phase);
            }
        }
        return baseline;
    }

    static ProfileSpec flat(double c) {
        ProfileSpec p;
        p.kind = Kind::Flat;
        p.baseline = c;
        return p;
    }
    static ProfileSpec bump(double baseline, double amplitude, double kappa,
                            std::array<double, kMaxDim> center = {}) {
        ProfileSpec p;
        p.kind = Kind::Bump;
        p.baseline = baseline;
        p.amplitude = amplitude;
        p.kappa = kappa;
        p.center = center;
        return p;
    }
    static ProfileSpec cosine(double baseline, double amplitude, std::array<int, kMaxDim> mode) {
        ProfileSpec p;
        p.kind = Kind::Cosine;
        p.baseline = baseline;
        p.amplitude = amplitude;
        p.mode = mode;
        return p;
    }

    std::string kind_name() const {
        switch (kind) {
            case Kind::Flat: return "flat";
            case Kind::Bump: return "bump";
            case Kind::Cosine: return "cosine";
        }
        return "?";
    }
};

} // namespace bcpp

#endif
