#include "hmp/maneuver.hpp"

#include <algorithm>

namespace hmp {

namespace {

constexpr std::uint8_t tag_bit(Tag t) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(t)); }

constexpr std::uint8_t kH = tag_bit(Tag::Hold);
constexpr std::uint8_t kF = tag_bit(Tag::Forward);
constexpr std::uint8_t kB = tag_bit(Tag::Backward);

}  // namespace

AtomicEdgeTable atomic_edges() {
    AtomicEdgeTable t;
    auto& s = t.successors;
    // indices: [source tag][sign]
    s[0][0] = kH | kF | kB;
    s[1][0] = kF;
    s[1][1] = kH | kF;
    s[2][0] = kB;
    s[2][2] = kH | kB;
    return t;
}

std::vector<FaceLabel> outcomes(CompositePrimitive m, int p) {
    std::vector<int> moving;
    for (int i = 0; i < p; ++i)
        if (m[i] != Tag::Hold) moving.push_back(i);
    std::vector<FaceLabel> out;
    const std::uint32_t subsets = 1u << moving.size();
    out.reserve(subsets - 1);
    for (std::uint32_t mask = 1; mask < subsets; ++mask) {
        FaceLabel label;
        for (std::size_t j = 0; j < moving.size(); ++j) {
            if ((mask >> j) & 1u) {
                const int i = moving[j];
                label.set(i, m[i] == Tag::Forward ? Sign::Plus : Sign::Minus);
            }
        }
        out.push_back(label);
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool is_outcome(CompositePrimitive m, FaceLabel sigma, int p) {
    if (sigma.is_zero()) return false;
    for (int i = 0; i < p; ++i) {
        const Sign s = sigma[i];
        if (s == Sign::Zero) continue;
        if (s == Sign::Plus && m[i] != Tag::Forward) return false;
        if (s == Sign::Minus && m[i] != Tag::Backward) return false;
    }
    return true;
}

std::vector<CompositePrimitive> successors(CompositePrimitive m, FaceLabel sigma, int p,
                                           const AtomicEdgeTable& table) {
    if (!is_outcome(m, sigma, p))
        throw Error(ErrorKind::Contract,
                    "label " + to_string(sigma, p) + " is not an outcome of " + to_string(m, p));
    std::vector<CompositePrimitive> out = {CompositePrimitive{}};
    for (int i = 0; i < p; ++i) {
        std::vector<CompositePrimitive> next;
        for (CompositePrimitive partial : out) {
            for (Tag t : {Tag::Hold, Tag::Forward, Tag::Backward}) {
                if (!table.contains(m[i], sigma[i], t)) continue;
                CompositePrimitive c = partial;
                c.set(i, t);
                next.push_back(c);
            }
        }
        out = std::move(next);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::int32_t ManeuverAutomaton::index_of(CompositePrimitive m) const {
    auto it = std::lower_bound(by_code_.begin(), by_code_.end(), std::pair{m.code, std::uint32_t{0}});
    if (it == by_code_.end() || it->first != m.code) return -1;
    return static_cast<std::int32_t>(it->second);
}

std::span<const MaGroup> ManeuverAutomaton::groups(std::size_t i) const {
    return {groups_.data() + group_offset_[i], group_offset_[i + 1] - group_offset_[i]};
}

std::span<const std::uint32_t> ManeuverAutomaton::targets(const MaGroup& g) const {
    return {targets_.data() + g.begin, g.end - g.begin};
}

ManeuverAutomaton compose(int p, PrimitiveMode mode, const AtomicEdgeTable& table) {
    if (p < 1 || p > kMaxOutputs) throw Error(ErrorKind::Contract, "output count out of range");
    ManeuverAutomaton ma;
    ma.p_ = p;
    ma.mode_ = mode;
    for (std::uint32_t c = 0; c < pow3(p); ++c) {
        const CompositePrimitive m(c);
        if (mode == PrimitiveMode::Deterministic && m.moving(p) > 1) continue;
        ma.primitives_.push_back(m);
    }
    // More moving outputs first, so that equal-cost ties in the planner favor
    // simultaneous motion; all-Hold ends up last.
    std::stable_sort(ma.primitives_.begin(), ma.primitives_.end(),
                     [p](CompositePrimitive a, CompositePrimitive b) { return a.moving(p) > b.moving(p); });
    for (std::uint32_t i = 0; i < ma.primitives_.size(); ++i) ma.by_code_.emplace_back(ma.primitives_[i].code, i);
    std::sort(ma.by_code_.begin(), ma.by_code_.end());
    ma.group_offset_.push_back(0);
    for (CompositePrimitive m : ma.primitives_) {
        for (FaceLabel sigma : outcomes(m, p)) {
            MaGroup g{sigma, static_cast<std::uint32_t>(ma.targets_.size()), 0};
            for (CompositePrimitive next : successors(m, sigma, p, table)) {
                const std::int32_t idx = ma.index_of(next);
                if (idx >= 0) ma.targets_.push_back(static_cast<std::uint32_t>(idx));
            }
            std::sort(ma.targets_.begin() + g.begin, ma.targets_.end());
            g.end = static_cast<std::uint32_t>(ma.targets_.size());
            ma.groups_.push_back(g);
        }
        ma.group_offset_.push_back(ma.groups_.size());
    }
    return ma;
}

}  // namespace hmp
