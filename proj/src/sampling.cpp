#include "hdicho/sampling.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "hdicho/errors.hpp"

namespace hdicho {

double radical_inverse(std::uint64_t i, std::uint32_t base) {
    double inv_base = 1.0 / base;
    double factor = inv_base;
    double value = 0;
    while (i > 0) {
        value += static_cast<double>(i % base) * factor;
        i /= base;
        factor *= inv_base;
    }
    return value;
}

namespace {

std::vector<std::uint32_t> first_primes(std::size_t count) {
    std::vector<std::uint32_t> primes;
    for (std::uint32_t c = 2; primes.size() < count; ++c) {
        bool prime = true;
        for (std::uint32_t p : primes) {
            if (p * p > c) break;
            if (c % p == 0) {
                prime = false;
                break;
            }
        }
        if (prime) primes.push_back(c);
    }
    return primes;
}

}  // namespace

std::vector<Vector> sample_directions(int n, std::uint64_t seed, std::size_t sphere_count) {
    if (n <= 0) throw ArgumentError("direction sampling needs n >= 1");
    std::vector<Vector> dirs;
    if (n == 1) {
        dirs.push_back(Vector::Constant(1, 1.0));
        dirs.push_back(Vector::Constant(1, -1.0));
        return dirs;
    }
    if (n == 2) {
        dirs.reserve(kAngularDirections);
        for (std::size_t k = 0; k < kAngularDirections; ++k) {
            const double angle = std::numbers::pi * static_cast<double>(k) / kAngularDirections;
            Vector v(2);
            v << std::cos(angle), std::sin(angle);
            dirs.push_back(v);
        }
        return dirs;
    }

    const std::size_t pairs = static_cast<std::size_t>(n + 1) / 2;
    const auto primes = first_primes(2 * pairs);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> shift(2 * pairs);
    for (auto& s : shift) s = seed == 0 ? 0.0 : unit(rng);

    dirs.reserve(sphere_count);
    for (std::uint64_t i = 1; dirs.size() < sphere_count; ++i) {
        Vector v(n);
        for (std::size_t p = 0; p < pairs; ++p) {
            double u1 = std::fmod(radical_inverse(i, primes[2 * p]) + shift[2 * p], 1.0);
            const double u2 = std::fmod(radical_inverse(i, primes[2 * p + 1]) + shift[2 * p + 1], 1.0);
            u1 = std::max(u1, 1e-300);
            const double radius = std::sqrt(-2.0 * std::log(u1));
            const double angle = 2.0 * std::numbers::pi * u2;
            v(static_cast<Eigen::Index>(2 * p)) = radius * std::cos(angle);
            if (static_cast<int>(2 * p + 1) < n)
                v(static_cast<Eigen::Index>(2 * p + 1)) = radius * std::sin(angle);
        }
        const double norm = v.norm();
        if (norm > 1e-12) dirs.push_back(v / norm);
    }
    return dirs;
}

}  // namespace hdicho
