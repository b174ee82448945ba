// Flows under a function (special flows).
//
// A point (x, y) with 0 <= y <= h(x) rises with unit speed; on reaching the
// ceiling it jumps to (T x, 0), which counts as one collision. With the
// unnormalized invariant measure mu(dx) dy the expected number of collisions
// in [0, t] is exactly t mu(B).

#pragma once

#include "bbgky/config_text.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace bbgky {

class SpecialFlow {
public:
    enum class Base { Atoms, Rotation, Exchange };

    /// Finite base: atom i has mass masses[i], T(i) = permutation[i], ceiling
    /// ceilings[i]. Throws unless T preserves the masses and ceilings are positive.
    static SpecialFlow atoms(std::vector<double> masses, std::vector<std::size_t> permutation, std::vector<double> ceilings);

    /// Interval [0, 1) with Lebesgue measure times `mass`, T x = x + alpha mod 1,
    /// ceiling h(x) = mean + amplitude sin(2 pi frequency x).
    static SpecialFlow rotation(double alpha, double mean, double amplitude, int frequency = 1, double mass = 1.0);

    /// Interval exchange: [0, 1) cut into pieces of the given lengths, which T
    /// lays out again in the order given by `order` (order[k] is the piece
    /// placed k-th). Same ceiling family as rotation.
    static SpecialFlow exchange(std::vector<double> lengths, std::vector<std::size_t> order, double mean,
        double amplitude, int frequency = 1, double mass = 1.0);

    Base base() const { return base_; }
    bool discrete() const { return base_ == Base::Atoms; }

    /// mu(B).
    double base_measure() const;
    /// Base map and its inverse on [0, 1) (interval bases) or on atom indices.
    double map(double x) const;
    double inverse_map(double x) const;
    std::size_t map(std::size_t atom) const { return permutation_[atom]; }
    std::size_t inverse_map(std::size_t atom) const { return inverse_[atom]; }

    double ceiling(double x) const;
    double ceiling(std::size_t atom) const { return ceilings_[atom]; }
    double minimum_ceiling() const;

    /// Largest |mu(T^{-1} A) - mu(A)| over a family of test sets: exact for
    /// atoms, by midpoint quadrature with `cells` cells for interval bases.
    double measure_defect(std::size_t cells = 1 << 14) const;

    const std::vector<double>& masses() const { return masses_; }

private:
    SpecialFlow() = default;
    void check_ceiling() const;

    Base base_ = Base::Atoms;
    std::vector<double> masses_;
    std::vector<std::size_t> permutation_;
    std::vector<std::size_t> inverse_;
    std::vector<double> ceilings_;

    double alpha_ = 0.0;
    std::vector<double> lengths_;
    std::vector<std::size_t> order_;
    std::vector<double> source_start_;
    std::vector<double> target_start_;
    double mean_ = 1.0;
    double amplitude_ = 0.0;
    int frequency_ = 1;
    double mass_ = 1.0;
};

/// Number of ceiling crossings in [0, t], integrated over the height y in
/// closed form, for one base point.
double crossings_integrated_over_height(const SpecialFlow& flow, double x, double t);
double crossings_integrated_over_height(const SpecialFlow& flow, std::size_t atom, double t);

/// sum_m P{tau_m <= t} under mu(dx) dy. Exact for atoms; composite midpoint
/// rule with `cells` cells for interval bases.
double collision_count_sum(const SpecialFlow& flow, double t, std::size_t cells = 1 << 12);

/// mu(B_k), k = 1, 2, ..., for the partition
///   B_k = { x : sum_{j=0}^{k-2} h(T^{-j} x) <= t < sum_{j=0}^{k-1} h(T^{-j} x) }.
std::vector<double> partition_masses(const SpecialFlow& flow, double t, std::size_t cells = 1 << 12);

struct FlowIdentityReport {
    double lhs = 0.0;         ///< collision_count_sum
    double rhs = 0.0;         ///< t mu(B)
    double error_bound = 0.0; ///< quadrature bound plus roundoff floor
    double coarse = 0.0;      ///< estimate at half resolution (interval bases)
    bool pass = false;
};

FlowIdentityReport verify_identity(const SpecialFlow& flow, double t, std::size_t cells = 1 << 12);

struct RefinementStudy {
    std::vector<std::size_t> cells;
    std::vector<double> errors;   ///< |Q_K - t mu(B)|
    std::vector<double> orders;   ///< log2(e_{K} / e_{2K}) between consecutive levels
    double fitted_order = 0.0;    ///< least-squares slope of -log2 e against log2 K
};

RefinementStudy refinement_study(const SpecialFlow& flow, double t, std::size_t coarsest, int levels);

/// Flow description from a config block (variant = "atoms" | "rotation" | "exchange").
SpecialFlow special_flow_from_json(const Json& block);

} // namespace bbgky
