#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace shrinkage {

/// Independent random stream identified by (seed, stream_id).
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream_id),
                          static_cast<std::uint32_t>(stream_id >> 32), 0x5eedu};
        engine_.seed(seq);
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }
    std::mt19937_64& engine() { return engine_; }

    /// Uniform on the open interval (0, 1).
    double uniform() {
        double u;
        do {
            u = std::generate_canonical<double, 53>(engine_);
        } while (u <= 0.0 || u >= 1.0);
        return u;
    }

    double normal() { return normal_(engine_); }

    /// Gamma with the given shape and rate.
    double gamma(double shape, double rate) {
        std::gamma_distribution<double> g(shape, 1.0);
        return g(engine_) / rate;
    }

    /// Inverse gamma with density proportional to x^{-shape-1} exp(-scale/x).
    double inv_gamma(double shape, double scale) { return scale / gamma(shape, 1.0); }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

    double beta(double a, double b) {
        double x = gamma(a, 1.0);
        double y = gamma(b, 1.0);
        return x / (x + y);
    }

    bool bernoulli(double p) { return uniform() < p; }

    std::vector<int> permutation(int n) {
        std::vector<int> idx(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), engine_);
        return idx;
    }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace shrinkage
