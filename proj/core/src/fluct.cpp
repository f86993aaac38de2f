#include "bcpp/fluct.hpp"

#include <cmath>
#include <stdexcept>

#include "bcpp/hydro.hpp"

namespace bcpp {
namespace {

double field_scale(const ModelParams& p) {
    return std::pow(static_cast<double>(p.N), -(1.0 + p.d / 2.0));
}

// lambda Delta_N H + 2 lambda1 central-gradient sum at site x
double drift_weight(const TestFunction& H, const Site& x, const ModelParams& p) {
    double w = p.lambda * H.discrete_laplacian(x, p);
    if (p.lambda1 != 0.0) w += 2.0 * p.lambda1 * H.discrete_gradient_sum(x, p);
    return w;
}

// H(x/N)^2 + sum_i [(lambda - l1/N) H((x-e_i)/N)^2 + (lambda + l1/N) H((x+e_i)/N)^2]
double qv_weight(const TestFunction& H, const Torus& torus, int64_t i, const ModelParams& p) {
    Site x = torus.site(i);
    double h0 = H.eval_site(x, p);
    double w = h0 * h0;
    const double lm = p.lambda - p.lambda1 / p.N;
    const double lp = p.lambda + p.lambda1 / p.N;
    for (int a = 0; a < p.d; ++a) {
        Site up = x, dn = x;
        up[a] = (x[a] + 1) % p.L;
        dn[a] = (x[a] - 1 + p.L) % p.L;
        double hu = H.eval_site(up, p);
        double hd = H.eval_site(dn, p);
        w += lp * hu * hu + lm * hd * hd;
    }
    return w;
}

} // namespace

double field_eval(const Configuration& cfg, const ModelParams& params, const TestFunction& H,
                  double mean_field) {
    Torus torus(params.d, params.L);
    double s = 0.0;
    const double t = cfg.current_time;
    for (int64_t i = 0; i < torus.volume(); ++i)
        s += (cfg.value_at(i, t) - mean_field) * H.eval_site(torus.site(i), params);
    return field_scale(params) * s;
}

double dynkin_drift(const Configuration& cfg, const ModelParams& params, const TestFunction& H,
                    double mean_field) {
    Torus torus(params.d, params.L);
    double s = 0.0;
    const double t = cfg.current_time;
    for (int64_t i = 0; i < torus.volume(); ++i) {
        Site x = torus.site(i);
        s += (cfg.value_at(i, t) - mean_field) * drift_weight(H, x, params);
    }
    double out = field_scale(params) * s;
    if (params.lambda2 != 0.0) out += params.lambda2 * field_eval(cfg, params, H, mean_field);
    return out;
}

double qv_integrand(const Configuration& cfg, const ModelParams& params, const TestFunction& H) {
    Torus torus(params.d, params.L);
    double s = 0.0;
    const double t = cfg.current_time;
    for (int64_t i = 0; i < torus.volume(); ++i) {
        double v = cfg.value_at(i, t);
        s += v * v * qv_weight(H, torus, i, params);
    }
    return s * std::pow(static_cast<double>(params.N), -params.d);
}

FieldTracker::FieldTracker(const ModelParams& params, const std::vector<TestFunction>& hs,
                           const Configuration& initial)
    : params_(params), hs_(hs) {
    Torus torus(params.d, params.L);
    volume_ = torus.volume();
    scale_field_ = field_scale(params);
    inv_n2_ = 1.0 / (static_cast<double>(params.N) * params.N);
    scale_qv_ = std::pow(static_cast<double>(params.N), -params.d);
    t_micro_ = initial.current_time;
    per_h_.resize(hs_.size());
    for (size_t h = 0; h < hs_.size(); ++h) {
        auto& ph = per_h_[h];
        ph.h.resize(volume_);
        ph.drift_w.resize(volume_);
        ph.qv_w.resize(volume_);
        for (int64_t i = 0; i < volume_; ++i) {
            Site x = torus.site(i);
            ph.h[i] = hs_[h].eval_site(x, params);
            ph.drift_w[i] = drift_weight(hs_[h], x, params);
            ph.qv_w[i] = qv_weight(hs_[h], torus, i, params);
            ph.sum_h += ph.h[i];
        }
    }
    refresh(initial);
    for (auto& ph : per_h_)
        ph.y0 = scale_field_ * (ph.s_h - mean_field_at(t_micro_) * ph.sum_h);
}

double FieldTracker::mean_field_at(double t_micro) const {
    // exact ensemble mean for mean-one i.i.d. initial laws: first-moment
    // conservation at lambda2 = 0, exponential tilt otherwise
    return params_.lambda2 == 0.0 ? 1.0 : std::exp(params_.lambda2 * inv_n2_ * t_micro);
}

void FieldTracker::on_advance(double dt, double /*growth*/, Configuration&) {
    const double c = params_.growth_rate();
    const double em1 = std::expm1(c * dt);
    const double em2 = std::expm1(2.0 * c * dt);
    const double int1 = std::fabs(c) > 1e-13 ? em1 / c : dt;         // int_0^dt e^{c s} ds
    const double int2 = std::fabs(c) > 1e-13 ? em2 / (2.0 * c) : dt; // int_0^dt e^{2 c s} ds
    const double l2 = params_.lambda2;
    double intm = 0.0, m0 = 0.0;
    if (l2 != 0.0) {
        double l2m = l2 * inv_n2_;
        m0 = mean_field_at(t_micro_);
        intm = std::fabs(l2m) > 1e-13 ? std::expm1(l2m * dt) / l2m : dt;
    }
    for (auto& ph : per_h_) {
        // integrals use the sums at the interval start, then the sums grow
        ph.i_drift += inv_n2_ * scale_field_ * ph.s_drift * int1;
        ph.i_qv += inv_n2_ * scale_qv_ * ph.s_qv * int2;
        if (l2 != 0.0)
            ph.i_drift += l2 * inv_n2_ * scale_field_ * (ph.s_h * int1 - m0 * ph.sum_h * intm);
        ph.s_h += ph.s_h * em1;
        ph.s_drift += ph.s_drift * em1;
        ph.s_qv += ph.s_qv * em2;
    }
    t_micro_ += dt;
}

void FieldTracker::on_mutate(int64_t site, double old_v, double new_v) {
    const double dv = new_v - old_v;
    const double dv2 = new_v * new_v - old_v * old_v;
    for (auto& ph : per_h_) {
        ph.s_h += dv * ph.h[site];
        ph.s_drift += dv * ph.drift_w[site];
        ph.s_qv += dv2 * ph.qv_w[site];
        double jump = std::fabs(dv * ph.h[site]) * scale_field_;
        if (jump > ph.max_jump) ph.max_jump = jump;
    }
}

void FieldTracker::refresh(const Configuration& cfg) {
    const double t = cfg.current_time;
    for (auto& ph : per_h_) {
        ph.s_h = 0.0;
        ph.s_drift = 0.0;
        ph.s_qv = 0.0;
    }
    for (int64_t i = 0; i < volume_; ++i) {
        double v = cfg.value_at(i, t);
        for (auto& ph : per_h_) {
            ph.s_h += v * ph.h[i];
            ph.s_drift += v * ph.drift_w[i];
            ph.s_qv += v * v * ph.qv_w[i];
        }
    }
    t_micro_ = t;
}

std::vector<FieldSample> FieldTracker::checkpoint(const Configuration& cfg) {
    std::vector<FieldSample> out;
    out.reserve(per_h_.size());
    double mean = mean_field_at(cfg.current_time);
    for (auto& ph : per_h_) {
        FieldSample s;
        s.t = cfg.current_time * inv_n2_;
        s.y = scale_field_ * (ph.s_h - mean * ph.sum_h);
        s.drift_integral = ph.i_drift;
        s.martingale = s.y - ph.y0 - ph.i_drift;
        s.qv_integral = ph.i_qv;
        s.max_jump = ph.max_jump;
        out.push_back(s);
    }
    return out;
}

double ou_variance(const TestFunction& H, const ModelParams& params,
                   const DerivedConstants& consts, double t) {
    if (!(consts.h_lambda > 0.0))
        throw std::domain_error("ou_variance: h_lambda <= 0 (subcritical lambda)");
    Torus torus(params.d, params.L);
    std::vector<double> grid(torus.volume());
    for (int64_t i = 0; i < torus.volume(); ++i)
        grid[i] = H.eval_site(torus.site(i), params);
    auto modes = grid_fourier(grid, params.d, params.L);
    const double ell = params.macro_side();
    const double cell = std::pow(ell, params.d); // Parseval: int H^2 = ell^d sum |c_k|^2
    double var = 0.0;
    for (int64_t i = 0; i < torus.volume(); ++i) {
        Site k = torus.site(i);
        double w2 = 0.0;
        for (int a = 0; a < params.d; ++a) {
            int m = k[a] <= params.L / 2 ? k[a] : k[a] - params.L;
            double w = 2.0 * M_PI * m / ell;
            w2 += w * w;
        }
        double amp2 = std::norm(modes[i]);
        double rate = 2.0 * params.lambda * w2;
        var += amp2 * (rate > 1e-14 ? -std::expm1(-rate * t) / rate : t);
    }
    return consts.C_lambda_d * cell * var;
}

std::vector<FieldSample> lambda2_transform(const std::vector<FieldSample>& path, double lambda2) {
    std::vector<FieldSample> out = path;
    for (auto& s : out) {
        double f = std::exp(lambda2 * s.t);
        s.y *= f;
        s.martingale *= f;
    }
    return out;
}

} // namespace bcpp
