#ifndef BCPP_LATTICE_HPP
#define BCPP_LATTICE_HPP

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace bcpp {

constexpr int kMaxDim = 16;

/// All scalar model parameters. The torus side L is the finite truncation of
/// the lattice; everything else matches the process definition.
struct ModelParams {
    int d = 3;            // dimension
    double lambda = 2.0;  // infection rate
    double lambda1 = 0.0; // weak asymmetry, rates lambda -+ lambda1/N
    double lambda2 = 0.0; // linear growth perturbation lambda2/N^2
    int N = 10;           // diffusive scaling parameter
    int L = 40;           // torus side, lattice units
    double T = 0.3;       // macroscopic horizon

    double growth_rate() const {
        return 1.0 - 2.0 * lambda * d + lambda2 / (static_cast<double>(N) * N);
    }
    /// Per-site total event rate 1 + 2*lambda*d (independent of lambda1).
    double site_rate() const { return 1.0 + 2.0 * lambda * d; }
    int64_t volume() const {
        int64_t v = 1;
        for (int i = 0; i < d; ++i) v *= L;
        return v;
    }
    double macro_side() const { return static_cast<double>(L) / N; }

    std::vector<std::string> violations() const;
    void validate() const;
};

/// One lattice site as integer coordinates in [0, L)^d.
using Site = std::array<int, kMaxDim>;

/// Flat-index torus geometry. Arithmetic is modulo L on every axis.
class Torus {
public:
    Torus(int d, int L) : d_(d), L_(L) {
        if (d < 1 || d > kMaxDim) throw std::invalid_argument("torus: bad dimension");
        if (L < 3) throw std::invalid_argument("torus: L < 3");
        stride_[0] = 1;
        for (int i = 1; i < d; ++i) stride_[i] = stride_[i - 1] * L;
        volume_ = stride_[d - 1] * L;
    }

    int dim() const { return d_; }
    int side() const { return L_; }
    int64_t volume() const { return volume_; }

    int64_t index(const Site& x) const {
        int64_t idx = 0;
        for (int i = 0; i < d_; ++i) idx += static_cast<int64_t>(x[i]) * stride_[i];
        return idx;
    }

    Site site(int64_t idx) const {
        Site x{};
        for (int i = 0; i < d_; ++i) {
            x[i] = static_cast<int>(idx % L_);
            idx /= L_;
        }
        return x;
    }

    int coord(int64_t idx, int axis) const {
        return static_cast<int>((idx / stride_[axis]) % L_);
    }

    /// idx shifted by +1 (sign=+1) or -1 (sign=-1) along axis, torus wrap.
    int64_t neighbor(int64_t idx, int axis, int sign) const {
        int c = coord(idx, axis);
        if (sign > 0)
            return c == L_ - 1 ? idx - static_cast<int64_t>(L_ - 1) * stride_[axis] : idx + stride_[axis];
        return c == 0 ? idx + static_cast<int64_t>(L_ - 1) * stride_[axis] : idx - stride_[axis];
    }

    /// All 2d neighbors of x with their direction tag (axis, sign).
    std::vector<std::pair<Site, std::pair<int, int>>> neighbors(const Site& x) const {
        std::vector<std::pair<Site, std::pair<int, int>>> out;
        out.reserve(2 * d_);
        for (int i = 0; i < d_; ++i) {
            for (int s : {+1, -1}) {
                Site y = x;
                y[i] = (x[i] + s + L_) % L_;
                out.push_back({y, {i, s}});
            }
        }
        return out;
    }

private:
    int d_;
    int L_;
    int64_t stride_[kMaxDim];
    int64_t volume_;
};

inline std::vector<std::string> ModelParams::violations() const {
    std::vector<std::string> v;
    if (d < 1 || d > kMaxDim) v.push_back("d must be in [1," + std::to_string(kMaxDim) + "]");
    if (!(lambda > 0.0)) v.push_back("lambda must be > 0");
    if (lambda1 < 0.0) v.push_back("lambda1 must be >= 0");
    if (N < 1) v.push_back("N must be >= 1");
    if (L < 4) v.push_back("L must be >= 4");
    if (L % 2 != 0) v.push_back("L must be even");
    if (!(T > 0.0)) v.push_back("T must be > 0");
    if (N >= 1 && lambda < lambda1 / N) v.push_back("need lambda >= lambda1/N");
    return v;
}

inline void ModelParams::validate() const {
    auto v = violations();
    if (!v.empty()) {
        std::string msg = "invalid params:";
        for (const auto& s : v) msg += " [" + s + "]";
        throw std::invalid_argument(msg);
    }
}

} // namespace bcpp

#endif
