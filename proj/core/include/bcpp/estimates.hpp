#ifndef BCPP_ESTIMATES_HPP
#define BCPP_ESTIMATES_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace bcpp {

/// Monte Carlo estimate of a walk functional, plus named diagnostics
/// (truncation bounds, heavy-tail indicators, ...).
struct WalkEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    int64_t n_samples = 0;
    std::map<std::string, double> diagnostics;

    double diag(const std::string& key, double fallback = 0.0) const {
        auto it = diagnostics.find(key);
        return it == diagnostics.end() ? fallback : it->second;
    }
};

/// Accumulates samples into a fixed number of batches; the stderr comes from
/// the spread of batch means, which is robust to heavy-tailed summands.
class BatchAccumulator {
public:
    explicit BatchAccumulator(int n_batches = 100) : sums_(n_batches, 0.0), counts_(n_batches, 0) {}

    void add(double x) {
        sums_[next_] += x;
        counts_[next_] += 1;
        next_ = (next_ + 1) % static_cast<int>(sums_.size());
        ++n_;
    }

    int64_t count() const { return n_; }

    double mean() const {
        double s = 0.0;
        for (double b : sums_) s += b;
        return n_ > 0 ? s / static_cast<double>(n_) : 0.0;
    }

    /// Standard error of the overall mean from batch-mean dispersion.
    double stderr_of_mean() const {
        int k = 0;
        double mb = 0.0;
        std::vector<double> bm;
        bm.reserve(sums_.size());
        for (size_t i = 0; i < sums_.size(); ++i) {
            if (counts_[i] == 0) continue;
            bm.push_back(sums_[i] / counts_[i]);
            mb += bm.back();
            ++k;
        }
        if (k < 2) return 0.0;
        mb /= k;
        double v = 0.0;
        for (double b : bm) v += (b - mb) * (b - mb);
        v /= (k - 1);
        return std::sqrt(v / k);
    }

    WalkEstimate estimate() const { return {mean(), stderr_of_mean(), n_, {}}; }

private:
    std::vector<double> sums_;
    std::vector<int64_t> counts_;
    int next_ = 0;
    int64_t n_ = 0;
};

/// Plain mean/variance accumulator (Welford).
class MeanVar {
public:
    void add(double x) {
        ++n_;
        double delta = x - mean_;
        mean_ += delta / n_;
        m2_ += delta * (x - mean_);
    }
    int64_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / (n_ - 1) : 0.0; }
    double stderr_of_mean() const { return n_ > 1 ? std::sqrt(variance() / n_) : 0.0; }

    /// Count-weighted pooling (Chan's parallel update).
    void merge(const MeanVar& o) {
        if (o.n_ == 0) return;
        if (n_ == 0) { *this = o; return; }
        double delta = o.mean_ - mean_;
        int64_t n = n_ + o.n_;
        m2_ += o.m2_ + delta * delta * (static_cast<double>(n_) * o.n_ / n);
        mean_ += delta * o.n_ / n;
        n_ = n;
    }

private:
    int64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

} // namespace bcpp

#endif
