// Random streams, running moments, and signed Monte Carlo estimates.
#pragma once

#include "bbgky/core.hpp"

#include <cstdint>
#include <exception>
#include <initializer_list>
#include <random>
#include <string_view>
#include <thread>
#include <vector>

namespace bbgky {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x);

/// Stable 64-bit FNV-1a hash, for check ids and config hashing.
std::uint64_t fnv1a(std::string_view text);

/// Generator seeded from a root seed and a path of stream tags.
Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

double uniform01(Rng& rng);
Vec3 uniform_in_box(const Vec3& lower, const Vec3& upper, Rng& rng);
Vec3 uniform_unit_vector(Rng& rng);

/// Welford accumulator with an order-fixed merge.
class Accumulator {
public:
    void add(double v);
    void merge(const Accumulator& other);

    std::uint64_t count() const { return n_; }
    double mean() const { return mean_; }
    /// Unbiased sample variance.
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double stderr_of_mean() const;
    double positive_mass() const { return positive_; }
    double negative_mass() const { return negative_; }

private:
    std::uint64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
    double positive_ = 0.0;
    double negative_ = 0.0;
};

struct SignedEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t samples = 0;
    double positive = 0.0; ///< mean positive part of the per-sample contributions
    double negative = 0.0; ///< mean negative part (reported as a nonnegative number)
};

SignedEstimate to_estimate(const Accumulator& acc);

/// Sum of independent estimates.
SignedEstimate operator+(const SignedEstimate& a, const SignedEstimate& b);
SignedEstimate operator-(const SignedEstimate& a, const SignedEstimate& b);
SignedEstimate scaled(const SignedEstimate& a, double factor);

/// a / b for independent estimates, first-order error propagation.
SignedEstimate divided(const SignedEstimate& a, const SignedEstimate& b);

/// Splits `samples` over `workers` contiguous blocks, runs `body(state, rng,
/// count)` per block with a stream derived from (seed, stream, worker), and
/// merges the per-worker states in worker order.
template <class State, class Body>
State run_blocks(std::uint64_t samples, unsigned workers, std::uint64_t seed, std::uint64_t stream, Body&& body)
{
    if (workers == 0)
        workers = 1;
    std::vector<State> states(workers);
    auto work = [&](unsigned w) {
        const std::uint64_t begin = samples * w / workers;
        const std::uint64_t end = samples * (w + 1) / workers;
        Rng rng = make_rng(seed, {stream, w});
        body(states[w], rng, end - begin);
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    work(w);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool)
            t.join();
        for (auto& e : errors)
            if (e)
                std::rethrow_exception(e);
    }
    State merged = std::move(states[0]);
    for (unsigned w = 1; w < workers; ++w)
        merged.merge(states[w]);
    return merged;
}

} // namespace bbgky
