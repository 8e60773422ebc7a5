#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace aavr {

/// A labelled pseudo-random stream.  The engine is std::mt19937_64 and every
/// distribution is implemented here, so draws are identical on every standard
/// library.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t key) : engine_(key) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer on [0, n).
    std::size_t index(std::size_t n);
    bool bernoulli(double p) { return uniform() < p; }
    double normal(double mean = 0.0, double stddev = 1.0);
    double gamma(double shape);
    double beta(double a, double b);
    /// Index drawn with the given (normalised) probabilities.
    std::size_t categorical(std::span<const double> probs);

private:
    std::mt19937_64 engine_;
};

/// Stream for (seed, label).  Distinct labels or seeds give unrelated streams.
RandomStream seeded_rng(std::uint64_t seed, std::string_view stream_label);

std::uint64_t stream_key(std::uint64_t seed, std::string_view stream_label);

}  // namespace aavr
