#include "bbgky/stats.hpp"

#include <cmath>
#include <numbers>

namespace bbgky {

std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> tags)
{
    std::uint64_t s = mix64(seed);
    for (auto t : tags)
        s = mix64(s ^ mix64(t + 0x632be59bd9b4e019ULL));
    std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
    return Rng(seq);
}

double uniform01(Rng& rng) { return std::generate_canonical<double, 53>(rng); }

Vec3 uniform_in_box(const Vec3& lower, const Vec3& upper, Rng& rng)
{
    Vec3 v;
    for (std::size_t k = 0; k < 3; ++k)
        v[k] = lower[k] + (upper[k] - lower[k]) * uniform01(rng);
    return v;
}

Vec3 uniform_unit_vector(Rng& rng)
{
    const double cos_theta = 2.0 * uniform01(rng) - 1.0;
    const double sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
    const double phi = 2.0 * std::numbers::pi * uniform01(rng);
    Vec3 v{sin_theta * std::cos(phi), sin_theta * std::sin(phi), cos_theta};
    return v * (1.0 / norm(v));
}

void Accumulator::add(double v)
{
    ++n_;
    const double delta = v - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (v - mean_);
    if (v > 0.0)
        positive_ += v;
    else
        negative_ -= v;
}

void Accumulator::merge(const Accumulator& other)
{
    if (other.n_ == 0)
        return;
    if (n_ == 0) {
        *this = other;
        return;
    }
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(other.n_);
    const double n = na + nb;
    const double delta = other.mean_ - mean_;
    mean_ += delta * nb / n;
    m2_ += other.m2_ + delta * delta * na * nb / n;
    n_ += other.n_;
    positive_ += other.positive_;
    negative_ += other.negative_;
}

double Accumulator::stderr_of_mean() const
{
    if (n_ < 2)
        return 0.0;
    return std::sqrt(variance() / static_cast<double>(n_));
}

SignedEstimate to_estimate(const Accumulator& acc)
{
    SignedEstimate e;
    e.value = acc.mean();
    e.std_error = acc.stderr_of_mean();
    e.samples = acc.count();
    if (acc.count() > 0) {
        e.positive = acc.positive_mass() / static_cast<double>(acc.count());
        e.negative = acc.negative_mass() / static_cast<double>(acc.count());
    }
    return e;
}

SignedEstimate operator+(const SignedEstimate& a, const SignedEstimate& b)
{
    return {a.value + b.value, std::hypot(a.std_error, b.std_error), a.samples + b.samples, a.positive + b.positive,
        a.negative + b.negative};
}

SignedEstimate operator-(const SignedEstimate& a, const SignedEstimate& b)
{
    return {a.value - b.value, std::hypot(a.std_error, b.std_error), a.samples + b.samples, a.positive + b.negative,
        a.negative + b.positive};
}

SignedEstimate scaled(const SignedEstimate& a, double factor)
{
    const double f = std::abs(factor);
    SignedEstimate s{a.value * factor, a.std_error * f, a.samples, a.positive * f, a.negative * f};
    if (factor < 0.0)
        std::swap(s.positive, s.negative);
    return s;
}

SignedEstimate divided(const SignedEstimate& a, const SignedEstimate& b)
{
    const double q = a.value / b.value;
    const double rel_b = b.std_error / std::abs(b.value);
    const double err = std::sqrt(a.std_error * a.std_error / (b.value * b.value) + q * q * rel_b * rel_b);
    SignedEstimate out = scaled(a, 1.0 / b.value);
    out.value = q;
    out.std_error = err;
    return out;
}

} // namespace bbgky
