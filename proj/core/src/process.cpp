#include "bcpp/process.hpp"

namespace bcpp {

Configuration init_config(const ModelParams& params, const InitialLaw& law, uint64_t seed) {
    params.validate();
    law.validate();
    const int64_t vol = params.volume();
    Configuration cfg;
    cfg.values.resize(vol);
    cfg.last_event.assign(vol, 0.0);
    cfg.growth_rate = params.growth_rate();
    cfg.current_time = 0.0;
    Rng rng(derive_seed(seed, 0x1234abcdULL));
    switch (law.kind) {
        case InitialLaw::Kind::ConstantOne:
            for (auto& v : cfg.values) v = 1.0;
            break;
        case InitialLaw::Kind::TwoPoint:
            for (auto& v : cfg.values) v = rng.uniform() < 0.5 ? 0.0 : 2.0;
            break;
        case InitialLaw::Kind::GammaMeanOne:
            for (auto& v : cfg.values) v = rng.gamma(law.gamma_shape, 1.0 / law.gamma_shape);
            break;
        case InitialLaw::Kind::Profile: {
            Torus torus(params.d, params.L);
            const double ell = params.macro_side();
            double u[kMaxDim];
            for (int64_t i = 0; i < vol; ++i) {
                Site s = torus.site(i);
                for (int a = 0; a < params.d; ++a) u[a] = static_cast<double>(s[a]) / params.N;
                double mean = law.profile.eval(u, params.d, ell);
                if (mean < 0.0)
                    throw std::invalid_argument("profile law: negative mean rho_0");
                cfg.values[i] = law.profile_shape > 0.0 && mean > 0.0
                                    ? rng.gamma(law.profile_shape, mean / law.profile_shape)
                                    : mean;
            }
            break;
        }
    }
    return cfg;
}

double total_event_rate(const ModelParams& params) {
    return static_cast<double>(params.volume()) * params.site_rate();
}

SpatialMoments snapshot_moments(const Configuration& cfg, const ModelParams& params,
                                const std::vector<int>& displacements) {
    const int64_t vol = params.volume();
    SpatialMoments m;
    double s1 = 0.0, s2 = 0.0, s4 = 0.0;
    const double t = cfg.current_time;
    std::vector<double> cur(vol);
    for (int64_t i = 0; i < vol; ++i) {
        double v = cfg.value_at(i, t);
        cur[i] = v;
        s1 += v;
        s2 += v * v;
        s4 += v * v * v * v;
    }
    m.mean = s1 / vol;
    m.second = s2 / vol;
    m.fourth = s4 / vol;
    Torus torus(params.d, params.L);
    for (int r : displacements) {
        double sp = 0.0;
        for (int64_t i = 0; i < vol; ++i) {
            int64_t j = i;
            int c = torus.coord(i, 0);
            int shifted = (c + r) % params.L;
            j += static_cast<int64_t>(shifted - c); // axis-0 stride is 1
            sp += cur[i] * cur[j];
        }
        m.covariance.push_back({r, sp / vol - m.mean * m.mean});
    }
    return m;
}

} // namespace bcpp
