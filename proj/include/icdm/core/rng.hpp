#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace icdm {

/// Seeded pseudo-random generator.
///
/// The engine is the 64-bit Mersenne Twister (`std::mt19937_64`, Matsumoto &
/// Nishimura), whose output sequence is fixed by the C++ standard. All
/// distributions are implemented here rather than through `<random>`
/// distribution classes, whose algorithms are implementation-defined, so a
/// seed reproduces the same draws on every platform and in ports that use the
/// MT19937-64 reference implementation:
///
///   * uniform():  (next() >> 11) * 2^-53, a double in [0, 1)
///   * normal():   Box-Muller, both variates of a pair are used
///   * gamma():    Marsaglia-Tsang, with the U^(1/a) boost for a < 1
///
/// Rng is single-owner. Parallel work derives independent generators with
/// `Rng::stream(seed, index)`, never by sharing one instance.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    /// Generator for sub-stream `index` of `seed`. The engine seed is
    /// splitmix64(seed + index) so neighbouring streams are decorrelated.
    static Rng stream(std::uint64_t seed, std::uint64_t index);

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next();
    double uniform();
    double uniform(double lo, double hi);
    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n);
    double normal();
    double gamma(double shape);
    /// Index drawn from a probability vector by inverse CDF.
    std::size_t categorical(std::span<const double> probs);
    /// Inverse-CDF lookup of a uniform draw `u` in [0, 1).
    static std::size_t categorical_from(std::span<const double> probs, double u);
    /// Dirichlet draw; zero entries of `alpha` yield zero components.
    std::vector<double> dirichlet(std::span<const double> alpha);

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

} // namespace icdm
