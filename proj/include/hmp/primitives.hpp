#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "hmp/types.hpp"

namespace hmp {

/// Constants of the canonical one-output box.
struct AtomicParams {
    double d = 1.0;       // box length [m]
    double u_star = 1.0;  // nominal acceleration bound [m/s^2]
    double v_star = 1.0;  // sqrt(d * u_star) [m/s]
    double k1 = -2.0;     // -2 u* / d  [1/s^2]
    double k2 = -2.0;     // -2 u* / v* [1/s]

    /// Throws Semantic unless d > 0 and u_star > 0.
    static AtomicParams make(double d, double u_star);
};

/// Affine feedback u = k_pos * xi + k_vel * nu + offset.
struct AtomicLaw {
    Tag tag = Tag::Hold;
    double k_pos = 0.0;
    double k_vel = 0.0;
    double offset = 0.0;
};

/// Position and velocity relative to the lower face of the current box.
struct LocalState {
    double xi = 0.0;
    double nu = 0.0;
};

AtomicLaw atomic_law(Tag tag, const AtomicParams& params);

/// Unsaturated commanded acceleration.
inline double control(const AtomicLaw& law, LocalState x) {
    return law.k_pos * x.xi + law.k_vel * x.nu + law.offset;
}

/// Halfspace a * (xi/d) + b * (nu/v*) <= c in normalized coordinates.
struct Halfspace {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

inline constexpr double kInvariantTolerance = 1e-9;

std::vector<Halfspace> invariant_halfspaces(Tag tag);
/// Vertices of the invariant polytope in physical units, counter-clockwise.
std::vector<LocalState> invariant_vertices(Tag tag, const AtomicParams& params);
bool in_invariant(Tag tag, const AtomicParams& params, LocalState x, double eps = kInvariantTolerance);

/// Bitmask over Sign values: bit (1 << Sign) set when reachable.
using SignSet = std::uint8_t;
constexpr SignSet sign_bit(Sign s) { return static_cast<SignSet>(1u << static_cast<unsigned>(s)); }

/// Faces a primitive may report along its output; Zero means "not yet crossed".
SignSet exit_contract(Tag tag);

}  // namespace hmp
