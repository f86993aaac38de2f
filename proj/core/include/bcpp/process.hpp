#ifndef BCPP_PROCESS_HPP
#define BCPP_PROCESS_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcpp/lattice.hpp"
#include "bcpp/profile.hpp"
#include "bcpp/rng.hpp"

namespace bcpp {

constexpr double kFlushThreshold = 1e-300;
constexpr double kOverflowGuard = 1e300;

/// Per-site i.i.d. initial distribution. Mean-one kinds satisfy the
/// fluctuation-mode requirement E[eta_0(x)] = 1; Profile draws with per-site
/// mean rho_0(x/N).
struct InitialLaw {
    enum class Kind { ConstantOne, TwoPoint, GammaMeanOne, Profile };

    Kind kind = Kind::ConstantOne;
    double gamma_shape = 1.0;   // GammaMeanOne: shape k, scale 1/k
    ProfileSpec profile;        // Profile: per-site mean rho_0(x/N)
    double profile_shape = 0.0; // Profile: gamma shape; <= 0 draws deterministically

    void validate() const {
        if (kind == Kind::GammaMeanOne && !(gamma_shape > 0.0))
            throw std::invalid_argument("initial law: gamma shape must be > 0");
    }

    /// Exact moments E[eta_0^m], m = 1..4, for the i.i.d. (non-profile) kinds.
    double moment(int m) const {
        switch (kind) {
            case Kind::ConstantOne: return 1.0;
            case Kind::TwoPoint: return std::pow(2.0, m - 1); // (0^m + 2^m)/2
            case Kind::GammaMeanOne: {
                double k = gamma_shape, r = 1.0;
                for (int j = 0; j < m; ++j) r *= (k + j) / k;
                return r;
            }
            case Kind::Profile:
                throw std::logic_error("profile law has site-dependent moments");
        }
        return 1.0;
    }

    std::string kind_name() const {
        switch (kind) {
            case Kind::ConstantOne: return "constant-one";
            case Kind::TwoPoint: return "two-point";
            case Kind::GammaMeanOne: return "gamma-mean-one";
            case Kind::Profile: return "profile";
        }
        return "?";
    }
};

/// Microscopic state: per-site value at its last event plus the time stamp,
/// so the deterministic growth exp(c (t - last_event)) is reconstructed
/// lazily and exactly (the growth rate is spatially uniform).
struct Configuration {
    std::vector<double> values;
    std::vector<double> last_event;
    double growth_rate = 0.0;  // c = 1 - 2 lambda d + lambda2/N^2
    double current_time = 0.0; // microscopic

    double value_at(int64_t site, double t) const {
        return values[site] * std::exp(growth_rate * (t - last_event[site]));
    }

    /// Apply growth to every site so stored values are current at current_time.
    void synchronize() {
        for (size_t i = 0; i < values.size(); ++i) {
            double v = value_at(static_cast<int64_t>(i), current_time);
            values[i] = v < kFlushThreshold ? 0.0 : v;
            last_event[i] = current_time;
        }
    }
};

struct EventRecord {
    enum class Kind { Recovery, Infection };
    double time = 0.0; // microscopic
    int64_t site = 0;
    Kind kind = Kind::Recovery;
    int axis = -1; // infection source is site +- e_axis
    int sign = 0;
};

/// Spatial moments of a synchronized configuration.
struct SpatialMoments {
    double mean = 0.0;
    double second = 0.0;
    double fourth = 0.0;
    std::vector<std::pair<int, double>> covariance; // (axis-0 displacement, spatial cov)
};

Configuration init_config(const ModelParams& params, const InitialLaw& law, uint64_t seed);

/// Total event rate L^d (1 + 2 lambda d); the +-lambda1/N asymmetry cancels.
double total_event_rate(const ModelParams& params);

SpatialMoments snapshot_moments(const Configuration& cfg, const ModelParams& params,
                                const std::vector<int>& displacements = {});

/// Hook with no per-event work; the advance loop inlines it away.
struct NullHook {
    void on_advance(double /*dt*/, double /*growth*/, Configuration& /*cfg*/) {}
    void on_mutate(int64_t /*site*/, double /*old_v*/, double /*new_v*/) {}
};

/// Gillespie: one global exponential clock at rate L^d (1+2 lambda d), a
/// uniform site, then recovery w.p. 1/(1+2 lambda d) or infection from
/// +-e_i with weights (lambda -+ lambda1/N). Statistically identical to the
/// per-site Poisson clocks, O(1) per event.
class Simulator {
public:
    Simulator(const ModelParams& params, const InitialLaw& law, uint64_t seed)
        : params_(params),
          torus_(params.d, params.L),
          cfg_(init_config(params, law, seed)),
          rng_(derive_seed(seed, 0x9e3779b9ULL)),
          total_rate_(total_event_rate(params)),
          p_recovery_(1.0 / params.site_rate()) {
        params_.validate();
        p_plus_ = (params.lambda - params.lambda1 / params.N) / (2.0 * params.lambda);
    }

    const Configuration& config() const { return cfg_; }
    Configuration& config() { return cfg_; }
    const Torus& torus() const { return torus_; }
    const ModelParams& params() const { return params_; }
    int64_t event_count() const { return events_; }
    double micro_time() const { return cfg_.current_time; }
    double macro_time() const {
        return cfg_.current_time / (static_cast<double>(params_.N) * params_.N);
    }

    /// Simulate microscopic time up to t_micro; the hook sees every holding
    /// interval (before the event mutates anything) and every site mutation.
    template <class Hook>
    void advance_micro(double t_micro, Hook& hook) {
        const double c = cfg_.growth_rate;
        while (true) {
            double dt = rng_.exponential(total_rate_);
            double t_next = cfg_.current_time + dt;
            if (t_next > t_micro) {
                double rest = t_micro - cfg_.current_time;
                if (rest > 0.0) {
                    hook.on_advance(rest, std::exp(c * rest), cfg_);
                    cfg_.current_time = t_micro;
                }
                return;
            }
            hook.on_advance(dt, std::exp(c * dt), cfg_);
            cfg_.current_time = t_next;
            apply_event(t_next, hook);
        }
    }

    void advance_micro(double t_micro) {
        NullHook h;
        advance_micro(t_micro, h);
    }

    /// Diffusive scaling: macroscopic t is microscopic t N^2.
    template <class Hook>
    void run_until(double t_macro, Hook& hook) {
        double target = t_macro * static_cast<double>(params_.N) * params_.N;
        if (target < cfg_.current_time - 1e-12)
            throw std::invalid_argument("run_until: target before current time");
        advance_micro(target, hook);
    }

    void run_until(double t_macro) {
        NullHook h;
        run_until(t_macro, h);
    }

    /// Advance to exactly the next event and return its record.
    template <class Hook>
    EventRecord step_event(Hook& hook) {
        double dt = rng_.exponential(total_rate_);
        double t_next = cfg_.current_time + dt;
        hook.on_advance(dt, std::exp(cfg_.growth_rate * dt), cfg_);
        cfg_.current_time = t_next;
        return apply_event(t_next, hook);
    }
    EventRecord step_event() {
        NullHook h;
        return step_event(h);
    }

private:
    template <class Hook>
    EventRecord apply_event(double t, Hook& hook) {
        EventRecord rec;
        rec.time = t;
        int64_t x = static_cast<int64_t>(rng_.below(static_cast<uint64_t>(torus_.volume())));
        rec.site = x;
        double u = rng_.uniform();
        if (u < p_recovery_) {
            rec.kind = EventRecord::Kind::Recovery;
            double old_v = cfg_.value_at(x, t);
            cfg_.values[x] = 0.0;
            cfg_.last_event[x] = t;
            hook.on_mutate(x, old_v, 0.0);
        } else {
            rec.kind = EventRecord::Kind::Infection;
            double r = (u - p_recovery_) / (1.0 - p_recovery_) * params_.d;
            int axis = std::min(params_.d - 1, static_cast<int>(r));
            int sign = (r - axis) < p_plus_ ? +1 : -1;
            rec.axis = axis;
            rec.sign = sign;
            int64_t y = torus_.neighbor(x, axis, sign);
            double vy = cfg_.value_at(y, t);
            if (vy < kFlushThreshold) vy = 0.0;
            double vx = cfg_.value_at(x, t);
            double nv = vx + vy;
            if (nv > kOverflowGuard)
                throw std::overflow_error("simulator: site value exceeded 1e300 at t=" +
                                          std::to_string(t));
            if (nv < kFlushThreshold) nv = 0.0;
            cfg_.values[y] = vy;
            cfg_.last_event[y] = t;
            cfg_.values[x] = nv;
            cfg_.last_event[x] = t;
            hook.on_mutate(x, vx, nv);
        }
        ++events_;
        return rec;
    }

    ModelParams params_;
    Torus torus_;
    Configuration cfg_;
    Rng rng_;
    double total_rate_;
    double p_recovery_;
    double p_plus_;
    int64_t events_ = 0;
};

} // namespace bcpp

#endif
