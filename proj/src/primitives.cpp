#include "hmp/primitives.hpp"

#include <cmath>

#include <fmt/format.h>

namespace hmp {

AtomicParams AtomicParams::make(double d, double u_star) {
    if (!(d > 0.0) || !(u_star > 0.0) || !std::isfinite(d) || !std::isfinite(u_star))
        throw Error(ErrorKind::Semantic, fmt::format("invalid primitive constants d={} u*={}", d, u_star));
    AtomicParams p;
    p.d = d;
    p.u_star = u_star;
    p.v_star = std::sqrt(d * u_star);
    p.k1 = -2.0 * u_star / d;
    p.k2 = -2.0 * u_star / p.v_star;
    return p;
}

AtomicLaw atomic_law(Tag tag, const AtomicParams& params) {
    switch (tag) {
        case Tag::Hold: return {tag, params.k1, params.k2, params.u_star};
        case Tag::Forward: return {tag, 0.0, params.k2, params.u_star};
        case Tag::Backward: return {tag, 0.0, params.k2, -params.u_star};
    }
    return {};
}

std::vector<Halfspace> invariant_halfspaces(Tag tag) {
    // Every region lies in 0 <= xi/d <= 1.
    std::vector<Halfspace> h = {{-1.0, 0.0, 0.0}, {1.0, 0.0, 1.0}};
    switch (tag) {
        case Tag::Forward:
            h.push_back({0.0, -1.0, 0.0});
            h.push_back({0.0, 1.0, 1.0});
            break;
        case Tag::Backward:
            h.push_back({0.0, 1.0, 0.0});
            h.push_back({0.0, -1.0, 1.0});
            break;
        case Tag::Hold:
            h.push_back({0.0, 1.0, 1.0});
            h.push_back({0.0, -1.0, 1.0});
            h.push_back({2.0, 1.0, 2.0});    // nu <= 2 v* (1 - xi/d)
            h.push_back({-2.0, -1.0, 0.0});  // nu >= -2 v* xi/d
            break;
    }
    return h;
}

std::vector<LocalState> invariant_vertices(Tag tag, const AtomicParams& params) {
    const double d = params.d;
    const double v = params.v_star;
    switch (tag) {
        case Tag::Forward: return {{0, 0}, {d, 0}, {d, v}, {0, v}};
        case Tag::Backward: return {{0, -v}, {d, -v}, {d, 0}, {0, 0}};
        case Tag::Hold: return {{0, 0}, {d / 2, -v}, {d, -v}, {d, 0}, {d / 2, v}, {0, v}};
    }
    return {};
}

bool in_invariant(Tag tag, const AtomicParams& params, LocalState x, double eps) {
    const double xn = x.xi / params.d;
    const double vn = x.nu / params.v_star;
    for (const Halfspace& h : invariant_halfspaces(tag))
        if (h.a * xn + h.b * vn > h.c + eps) return false;
    return true;
}

SignSet exit_contract(Tag tag) {
    switch (tag) {
        case Tag::Hold: return sign_bit(Sign::Zero);
        case Tag::Forward: return sign_bit(Sign::Zero) | sign_bit(Sign::Plus);
        case Tag::Backward: return sign_bit(Sign::Zero) | sign_bit(Sign::Minus);
    }
    return 0;
}

}  // namespace hmp
