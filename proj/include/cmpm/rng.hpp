// rng.hpp
// Deterministic per-stream random numbers.
//
// Every stochastic component draws from an RngStream derived from
// (seed, stream index). The mapping uses only facilities whose output is
// pinned by the standard (mt19937_64 and our own bit manipulation), so a
// given (seed, index) produces the same draws on every platform and for
// any worker count.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace cmpm {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t index)
        : engine_(splitmix64(splitmix64(seed) ^ (0xd1b54a32d192ed03ULL * (index + 1)))) {}

    // Uniform in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform in [-half_width, half_width].
    double symmetric(double half_width) { return (2.0 * unit() - 1.0) * half_width; }

    // Uniform on the closed disc |z| <= radius. Two draws, fixed order.
    std::complex<double> disc(double radius) {
        const double r = radius * std::sqrt(unit());
        const double theta = 2.0 * pi() * unit();
        return std::polar(r, theta);
    }

    // Isotropic complex Gaussian with per-axis sigma = radius/2, which
    // matches the disc draw's variance E|z|^2 = radius^2/2. Two draws.
    std::complex<double> gaussian(double radius) {
        const double u1 = unit();
        const double u2 = unit();
        const double mag = std::sqrt(-2.0 * std::log1p(u1 - 1.0 + 0x1.0p-53));
        const double sigma = 0.5 * radius;
        return {sigma * mag * std::cos(2.0 * pi() * u2),
                sigma * mag * std::sin(2.0 * pi() * u2)};
    }

    // Exponential with the given mean. One draw.
    double exponential(double mean) { return -mean * std::log1p(unit() - 1.0 + 0x1.0p-53); }

    static constexpr double pi() { return 3.14159265358979323846; }

private:
    std::mt19937_64 engine_;
};

// Imprecision model for measured amplitudes. Disc is the default reading
// of "within the measurement precision range"; Gauss is the variance-matched
// alternative behind a config switch.
enum class NoiseKind { Disc, Gauss };

inline std::complex<double> draw_offset(RngStream& rng, NoiseKind kind, double radius) {
    return kind == NoiseKind::Disc ? rng.disc(radius) : rng.gaussian(radius);
}

} // namespace cmpm
