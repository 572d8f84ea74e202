#include "icdm/core/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace icdm {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

Rng Rng::stream(std::uint64_t seed, std::uint64_t index)
{
    return Rng(splitmix64(seed + index));
}

std::uint64_t Rng::next() { return engine_(); }

double Rng::uniform()
{
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::size_t Rng::index(std::size_t n)
{
    if (n == 0) {
        throw std::invalid_argument("Rng::index: empty range");
    }
    auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
}

double Rng::normal()
{
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) {
        u1 = uniform();
    }
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

double Rng::gamma(double shape)
{
    if (!(shape > 0.0)) {
        throw std::invalid_argument("Rng::gamma: shape must be positive");
    }
    if (shape < 1.0) {
        double u = uniform();
        while (u <= 0.0) {
            u = uniform();
        }
        return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = 0.0;
        double v = 0.0;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) {
            return d * v;
        }
        if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
            return d * v;
        }
    }
}

std::size_t Rng::categorical(std::span<const double> probs)
{
    return categorical_from(probs, uniform());
}

std::size_t Rng::categorical_from(std::span<const double> probs, double u)
{
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0.0) {
            continue;
        }
        acc += probs[i];
        last_positive = i;
        if (u < acc) {
            return i;
        }
    }
    // u landed in the rounding slack above the accumulated mass
    return last_positive;
}

std::vector<double> Rng::dirichlet(std::span<const double> alpha)
{
    std::vector<double> out(alpha.size(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        if (alpha[i] > 0.0) {
            out[i] = gamma(alpha[i]);
            total += out[i];
        }
    }
    if (total <= 0.0) {
        throw std::invalid_argument("Rng::dirichlet: no positive concentration");
    }
    for (double& v : out) {
        v /= total;
    }
    return out;
}

} // namespace icdm
