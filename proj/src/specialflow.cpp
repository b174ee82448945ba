#include "bbgky/specialflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace bbgky {

namespace {

std::vector<std::size_t> inverse_permutation(const std::vector<std::size_t>& perm)
{
    std::vector<std::size_t> inv(perm.size(), perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
        if (perm[i] >= perm.size() || inv[perm[i]] != perm.size())
            throw std::invalid_argument("special flow: not a permutation");
        inv[perm[i]] = i;
    }
    return inv;
}

double wrap_unit(double x)
{
    x -= std::floor(x);
    return x >= 1.0 ? 0.0 : x;
}

} // namespace

SpecialFlow SpecialFlow::atoms(std::vector<double> masses, std::vector<std::size_t> permutation, std::vector<double> ceilings)
{
    if (masses.empty() || masses.size() != permutation.size() || masses.size() != ceilings.size())
        throw std::invalid_argument("special flow: atoms need matching masses, permutation and ceilings");
    SpecialFlow f;
    f.base_ = Base::Atoms;
    f.inverse_ = inverse_permutation(permutation);
    for (std::size_t i = 0; i < masses.size(); ++i) {
        if (!(masses[i] > 0.0))
            throw std::invalid_argument("special flow: atom masses must be positive");
        if (masses[permutation[i]] != masses[i])
            throw std::invalid_argument("special flow: the permutation must preserve atom masses");
    }
    f.masses_ = std::move(masses);
    f.permutation_ = std::move(permutation);
    f.ceilings_ = std::move(ceilings);
    f.check_ceiling();
    return f;
}

SpecialFlow SpecialFlow::rotation(double alpha, double mean, double amplitude, int frequency, double mass)
{
    SpecialFlow f;
    f.base_ = Base::Rotation;
    f.alpha_ = wrap_unit(alpha);
    f.mean_ = mean;
    f.amplitude_ = amplitude;
    f.frequency_ = frequency;
    f.mass_ = mass;
    if (!(mass > 0.0))
        throw std::invalid_argument("special flow: base mass must be positive");
    f.check_ceiling();
    return f;
}

SpecialFlow SpecialFlow::exchange(std::vector<double> lengths, std::vector<std::size_t> order, double mean,
    double amplitude, int frequency, double mass)
{
    if (lengths.empty() || lengths.size() != order.size())
        throw std::invalid_argument("special flow: exchange needs matching lengths and order");
    inverse_permutation(order);
    const double total = std::accumulate(lengths.begin(), lengths.end(), 0.0);
    if (std::any_of(lengths.begin(), lengths.end(), [](double l) { return !(l > 0.0); }))
        throw std::invalid_argument("special flow: exchange lengths must be positive");
    SpecialFlow f;
    f.base_ = Base::Exchange;
    for (auto& l : lengths)
        l /= total;
    f.lengths_ = std::move(lengths);
    f.order_ = std::move(order);
    const std::size_t k = f.lengths_.size();
    f.source_start_.assign(k, 0.0);
    f.target_start_.assign(k, 0.0);
    for (std::size_t i = 1; i < k; ++i)
        f.source_start_[i] = f.source_start_[i - 1] + f.lengths_[i - 1];
    double at = 0.0;
    for (std::size_t slot = 0; slot < k; ++slot) {
        f.target_start_[f.order_[slot]] = at;
        at += f.lengths_[f.order_[slot]];
    }
    f.mean_ = mean;
    f.amplitude_ = amplitude;
    f.frequency_ = frequency;
    f.mass_ = mass;
    if (!(mass > 0.0))
        throw std::invalid_argument("special flow: base mass must be positive");
    f.check_ceiling();
    return f;
}

void SpecialFlow::check_ceiling() const
{
    if (!(minimum_ceiling() > 0.0))
        throw std::invalid_argument("special flow: the ceiling must be bounded away from zero");
}

double SpecialFlow::base_measure() const
{
    if (base_ == Base::Atoms)
        return std::accumulate(masses_.begin(), masses_.end(), 0.0);
    return mass_;
}

double SpecialFlow::map(double x) const
{
    if (base_ == Base::Rotation)
        return wrap_unit(x + alpha_);
    if (base_ == Base::Exchange) {
        const auto it = std::upper_bound(source_start_.begin(), source_start_.end(), x);
        const std::size_t piece = static_cast<std::size_t>(std::distance(source_start_.begin(), it)) - 1;
        return wrap_unit(target_start_[piece] + (x - source_start_[piece]));
    }
    throw std::logic_error("special flow: continuous map on an atom base");
}

double SpecialFlow::inverse_map(double y) const
{
    if (base_ == Base::Rotation)
        return wrap_unit(y - alpha_);
    if (base_ == Base::Exchange) {
        for (std::size_t slot = order_.size(); slot-- > 0;) {
            const std::size_t piece = order_[slot];
            if (y >= target_start_[piece])
                return wrap_unit(source_start_[piece] + (y - target_start_[piece]));
        }
        return source_start_[order_[0]];
    }
    throw std::logic_error("special flow: continuous map on an atom base");
}

double SpecialFlow::ceiling(double x) const
{
    return mean_ + amplitude_ * std::sin(2.0 * std::numbers::pi * frequency_ * x);
}

double SpecialFlow::minimum_ceiling() const
{
    if (base_ == Base::Atoms)
        return ceilings_.empty() ? 0.0 : *std::min_element(ceilings_.begin(), ceilings_.end());
    return mean_ - std::abs(amplitude_);
}

double SpecialFlow::measure_defect(std::size_t cells) const
{
    if (base_ == Base::Atoms) {
        // Test sets: every single atom; unions follow by additivity.
        double defect = 0.0;
        for (std::size_t i = 0; i < masses_.size(); ++i)
            defect = std::max(defect, std::abs(masses_[inverse_[i]] - masses_[i]));
        return defect;
    }
    // Test sets: the intervals [k/8, (k+1)/8); mu(T^{-1}A) by midpoint rule.
    double defect = 0.0;
    for (int k = 0; k < 8; ++k) {
        const double lo = k / 8.0;
        const double hi = (k + 1) / 8.0;
        double preimage = 0.0;
        for (std::size_t c = 0; c < cells; ++c) {
            const double x = (static_cast<double>(c) + 0.5) / static_cast<double>(cells);
            const double y = map(x);
            if (y >= lo && y < hi)
                preimage += 1.0;
        }
        preimage *= mass_ / static_cast<double>(cells);
        defect = std::max(defect, std::abs(preimage - mass_ * (hi - lo)));
    }
    return defect;
}

namespace {

// Over heights 0 <= y <= h(x), the m-th crossing happens at
// h(x) - y + C_m with C_m = h(T x) + .. + h(T^{m-1} x), so
// int dy 1{tau_m <= t} = clamp(t - C_m, 0, h(x)).
template <class Point, class Next>
double integrated_crossings(const SpecialFlow& flow, Point x, double t, Next&& next)
{
    const double h0 = flow.ceiling(x);
    double total = 0.0;
    double c = 0.0;
    Point z = x;
    while (c < t) {
        total += std::clamp(t - c, 0.0, h0);
        z = next(z);
        c += flow.ceiling(z);
    }
    return total;
}

} // namespace

double crossings_integrated_over_height(const SpecialFlow& flow, double x, double t)
{
    return integrated_crossings(flow, x, t, [&](double z) { return flow.map(z); });
}

double crossings_integrated_over_height(const SpecialFlow& flow, std::size_t atom, double t)
{
    return integrated_crossings(flow, atom, t, [&](std::size_t z) { return flow.map(z); });
}

double collision_count_sum(const SpecialFlow& flow, double t, std::size_t cells)
{
    if (!(t > 0.0))
        throw std::invalid_argument("collision_count_sum: t must be positive");
    double total = 0.0;
    if (flow.discrete()) {
        for (std::size_t i = 0; i < flow.masses().size(); ++i)
            total += flow.masses()[i] * crossings_integrated_over_height(flow, i, t);
        return total;
    }
    if (cells == 0)
        throw std::invalid_argument("collision_count_sum: need at least one cell");
    const double width = 1.0 / static_cast<double>(cells);
    for (std::size_t c = 0; c < cells; ++c)
        total += crossings_integrated_over_height(flow, (static_cast<double>(c) + 0.5) * width, t);
    return total * width * flow.base_measure();
}

std::vector<double> partition_masses(const SpecialFlow& flow, double t, std::size_t cells)
{
    std::vector<double> masses;
    auto assign = [&](double weight, auto x, auto&& previous) {
        std::size_t k = 1;
        double s = flow.ceiling(x);
        while (!(s > t)) {
            x = previous(x);
            s += flow.ceiling(x);
            ++k;
        }
        if (masses.size() < k)
            masses.resize(k, 0.0);
        masses[k - 1] += weight;
    };
    if (flow.discrete()) {
        for (std::size_t i = 0; i < flow.masses().size(); ++i)
            assign(flow.masses()[i], i, [&](std::size_t z) { return flow.inverse_map(z); });
    } else {
        const double width = 1.0 / static_cast<double>(cells);
        for (std::size_t c = 0; c < cells; ++c)
            assign(width * flow.base_measure(), (static_cast<double>(c) + 0.5) * width,
                [&](double z) { return flow.inverse_map(z); });
    }
    return masses;
}

FlowIdentityReport verify_identity(const SpecialFlow& flow, double t, std::size_t cells)
{
    FlowIdentityReport r;
    r.rhs = t * flow.base_measure();
    r.lhs = collision_count_sum(flow, t, cells);
    const double floor = 1e-12 * std::max(1.0, std::abs(r.rhs));
    if (flow.discrete()) {
        r.coarse = r.lhs;
        r.error_bound = std::max(floor, 1e-10);
    } else {
        r.coarse = collision_count_sum(flow, t, std::max<std::size_t>(1, cells / 2));
        r.error_bound = std::abs(r.lhs - r.coarse) + floor;
    }
    r.pass = std::abs(r.lhs - r.rhs) <= r.error_bound;
    return r;
}

RefinementStudy refinement_study(const SpecialFlow& flow, double t, std::size_t coarsest, int levels)
{
    RefinementStudy s;
    const double exact = t * flow.base_measure();
    for (int l = 0; l < levels; ++l) {
        const std::size_t cells = coarsest << l;
        s.cells.push_back(cells);
        s.errors.push_back(std::abs(collision_count_sum(flow, t, cells) - exact));
    }
    for (std::size_t l = 1; l < s.errors.size(); ++l)
        s.orders.push_back(std::log2(s.errors[l - 1] / s.errors[l]));
    // Least-squares slope of -log2(error) against log2(cells).
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(s.errors.size());
    for (std::size_t l = 0; l < s.errors.size(); ++l) {
        const double x = std::log2(static_cast<double>(s.cells[l]));
        const double y = -std::log2(std::max(s.errors[l], std::numeric_limits<double>::min()));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    if (n >= 2)
        s.fitted_order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return s;
}

namespace {

template <class T>
std::vector<T> list_of(const Json& block, const std::string& key)
{
    const Json& v = block.contains(key) ? block.at(key) : throw ConfigError("missing key '" + key + "'");
    if (!v.is_array())
        throw ConfigError("'" + key + "' must be a list");
    std::vector<T> out;
    for (const auto& e : v) {
        if constexpr (std::is_integral_v<T>) {
            if (!e.is_number_integer() || e.get<long long>() < 0)
                throw ConfigError("'" + key + "' must hold nonnegative integers");
        } else if (!e.is_number()) {
            throw ConfigError("'" + key + "' must hold numbers");
        }
        out.push_back(e.get<T>());
    }
    return out;
}

} // namespace

SpecialFlow special_flow_from_json(const Json& block)
{
    const std::string variant = get_string(block, "variant");
    try {
        if (variant == "atoms") {
            auto ceilings = list_of<double>(block, "ceilings");
            std::vector<double> masses = block.contains("masses") ? list_of<double>(block, "masses")
                                                                  : std::vector<double>(ceilings.size(), 1.0);
            std::vector<std::size_t> perm;
            if (block.contains("permutation")) {
                perm = list_of<std::size_t>(block, "permutation");
            } else {
                perm.resize(ceilings.size());
                std::iota(perm.begin(), perm.end(), 0);
            }
            return SpecialFlow::atoms(std::move(masses), std::move(perm), std::move(ceilings));
        }
        const double mean = get_number(block, "ceiling_mean", 1.0);
        const double amplitude = get_number(block, "ceiling_amplitude", 0.0);
        const int frequency = static_cast<int>(get_integer(block, "ceiling_frequency", 1));
        const double mass = get_number(block, "mass", 1.0);
        if (variant == "rotation")
            return SpecialFlow::rotation(get_number(block, "alpha", (std::sqrt(5.0) - 1.0) / 2.0), mean, amplitude,
                frequency, mass);
        if (variant == "exchange")
            return SpecialFlow::exchange(list_of<double>(block, "lengths"), list_of<std::size_t>(block, "order"), mean,
                amplitude, frequency, mass);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    throw ConfigError("special flow: unknown variant '" + variant + "'");
}

} // namespace bbgky
