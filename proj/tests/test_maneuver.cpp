#include <doctest.h>

#include <set>

#include "hmp/maneuver.hpp"

using namespace hmp;

namespace {

std::set<std::string> names(const std::vector<CompositePrimitive>& ms, int p) {
    std::set<std::string> out;
    for (auto m : ms) out.insert(to_string(m, p));
    return out;
}

// Independent count: per output, how many successor tags a (tag, sign) pair has.
int atomic_count(Tag t, Sign s) {
    if (s == Sign::Zero) return t == Tag::Hold ? 3 : 1;
    if (s == Sign::Plus) return t == Tag::Forward ? 2 : 0;
    return t == Tag::Backward ? 2 : 0;
}

std::size_t brute_force_edge_count(int p, bool deterministic) {
    std::size_t total = 0;
    const std::uint32_t n = kPow3Table[p];
    auto keep = [&](std::uint32_t code) { return !deterministic || CompositePrimitive(code).moving(p) <= 1; };
    for (std::uint32_t mc = 0; mc < n; ++mc) {
        if (!keep(mc)) continue;
        const CompositePrimitive m(mc);
        for (std::uint32_t lc = 1; lc < n; ++lc) {
            const FaceLabel l(lc);
            // Every target m2 is enumerated explicitly.
            for (std::uint32_t tc = 0; tc < n; ++tc) {
                if (!keep(tc)) continue;
                const CompositePrimitive m2(tc);
                bool ok = true;
                for (int i = 0; i < p && ok; ++i) {
                    const Tag a = m[i], b = m2[i];
                    const Sign s = l[i];
                    if (s == Sign::Plus) ok = a == Tag::Forward && (b == Tag::Hold || b == Tag::Forward);
                    else if (s == Sign::Minus) ok = a == Tag::Backward && (b == Tag::Hold || b == Tag::Backward);
                    else ok = a == Tag::Hold || b == a;
                }
                total += ok;
            }
        }
    }
    return total;
}

}  // namespace

TEST_CASE("3^p primitives in ND mode, 1 + 2p in D mode") {
    CHECK(compose(1, PrimitiveMode::NonDeterministic).size() == 3);
    CHECK(compose(2, PrimitiveMode::NonDeterministic).size() == 9);
    CHECK(compose(3, PrimitiveMode::NonDeterministic).size() == 27);
    const ManeuverAutomaton d = compose(2, PrimitiveMode::Deterministic);
    CHECK(names(d.primitives(), 2) == std::set<std::string>{"HH", "FH", "BH", "HF", "HB"});
    CHECK(compose(4, PrimitiveMode::Deterministic).size() == 9);
}

TEST_CASE("primitives ordered by moving outputs, then code; all-Hold last") {
    const ManeuverAutomaton ma = compose(3, PrimitiveMode::NonDeterministic);
    CHECK(ma.primitive(ma.hold_index()).all_hold());
    CHECK(ma.primitive(0).moving(3) == 3);
    for (std::size_t i = 1; i < ma.size(); ++i) {
        const auto a = ma.primitive(i - 1), b = ma.primitive(i);
        CHECK((a.moving(3) > b.moving(3) || (a.moving(3) == b.moving(3) && a.code < b.code)));
    }
    for (std::size_t i = 0; i < ma.size(); ++i) CHECK(ma.index_of(ma.primitive(i)) == static_cast<std::int32_t>(i));
    CHECK(compose(2, PrimitiveMode::Deterministic).index_of(parse_primitive("FF")) == -1);
    const ManeuverAutomaton one = compose(1, PrimitiveMode::NonDeterministic);
    CHECK(to_string(one.primitive(0), 1) == "F");
    CHECK(to_string(one.primitive(1), 1) == "B");
    CHECK(to_string(one.primitive(2), 1) == "H");
}

TEST_CASE("atomic edge table") {
    const AtomicEdgeTable t = atomic_edges();
    CHECK(t.contains(Tag::Forward, Sign::Plus, Tag::Hold));
    CHECK(t.contains(Tag::Forward, Sign::Plus, Tag::Forward));
    CHECK_FALSE(t.contains(Tag::Forward, Sign::Plus, Tag::Backward));
    CHECK(t.contains(Tag::Hold, Sign::Zero, Tag::Forward));
    CHECK(t.contains(Tag::Hold, Sign::Zero, Tag::Backward));
    CHECK_FALSE(t.contains(Tag::Forward, Sign::Zero, Tag::Hold));
    CHECK_FALSE(t.contains(Tag::Hold, Sign::Plus, Tag::Hold));
    for (Tag a : {Tag::Hold, Tag::Forward, Tag::Backward})
        for (Sign s : {Sign::Zero, Sign::Plus, Sign::Minus}) {
            int n = 0;
            for (Tag b : {Tag::Hold, Tag::Forward, Tag::Backward}) n += t.contains(a, s, b);
            CHECK(n == atomic_count(a, s));
        }
}

TEST_CASE("outcomes") {
    auto labels = [](const char* m) {
        std::set<std::string> out;
        const int p = static_cast<int>(std::string(m).size());
        for (FaceLabel l : outcomes(parse_primitive(m), p)) out.insert(to_string(l, p));
        return out;
    };
    CHECK(labels("FH") == std::set<std::string>{"+0"});
    CHECK(labels("FF") == std::set<std::string>{"+0", "0+", "++"});
    CHECK(labels("HH").empty());
    CHECK(labels("FBF").size() == 7);
    CHECK(labels("BHF") == std::set<std::string>{"-00", "00+", "-0+"});
    const auto ordered = outcomes(parse_primitive("FBF"), 3);
    for (std::size_t i = 1; i < ordered.size(); ++i) CHECK(ordered[i - 1].code < ordered[i].code);
}

TEST_CASE("successors") {
    CHECK(names(successors(parse_primitive("FH"), parse_label("+0"), 2), 2) ==
          std::set<std::string>{"HH", "FH", "HF", "FF", "HB", "FB"});
    CHECK(names(successors(parse_primitive("FF"), parse_label("++"), 2), 2) ==
          std::set<std::string>{"HH", "FH", "HF", "FF"});
    CHECK(names(successors(parse_primitive("BH"), parse_label("-0"), 2), 2) ==
          std::set<std::string>{"HH", "BH", "HF", "BF", "HB", "BB"});
    CHECK(names(successors(parse_primitive("FF"), parse_label("+0"), 2), 2) == std::set<std::string>{"HF", "FF"});
    CHECK_THROWS_AS((void)successors(parse_primitive("FH"), parse_label("0+"), 2), Error);
    CHECK_THROWS_AS((void)successors(parse_primitive("HH"), parse_label("+0"), 2), Error);
}

TEST_CASE("edge counts match brute-force enumeration") {
    for (int p = 1; p <= 3; ++p) {
        CHECK(compose(p, PrimitiveMode::NonDeterministic).num_edges() == brute_force_edge_count(p, false));
        CHECK(compose(p, PrimitiveMode::Deterministic).num_edges() == brute_force_edge_count(p, true));
    }
}

TEST_CASE("D mode is a sub-automaton of ND mode") {
    const int p = 3;
    const ManeuverAutomaton nd = compose(p, PrimitiveMode::NonDeterministic);
    const ManeuverAutomaton d = compose(p, PrimitiveMode::Deterministic);
    for (std::size_t i = 0; i < d.size(); ++i) {
        const std::int32_t j = nd.index_of(d.primitive(i));
        REQUIRE(j >= 0);
        for (const MaGroup& g : d.groups(i)) {
            CHECK(g.label.support(p) == 1);
            std::set<std::uint32_t> nd_targets;
            for (const MaGroup& h : nd.groups(static_cast<std::size_t>(j)))
                if (h.label == g.label)
                    for (auto t : nd.targets(h)) nd_targets.insert(nd.primitive(t).code);
            for (auto t : d.targets(g)) CHECK(nd_targets.count(d.primitive(t).code) == 1);
        }
    }
}

TEST_CASE("group labels are the outcomes of the source") {
    const ManeuverAutomaton ma = compose(2, PrimitiveMode::NonDeterministic);
    for (std::size_t i = 0; i < ma.size(); ++i) {
        const auto out = outcomes(ma.primitive(i), 2);
        const auto groups = ma.groups(i);
        REQUIRE(groups.size() == out.size());
        for (std::size_t k = 0; k < out.size(); ++k) {
            CHECK(groups[k].label == out[k]);
            const auto t = ma.targets(groups[k]);
            CHECK(std::is_sorted(t.begin(), t.end()));
        }
    }
}

TEST_CASE("a custom atomic table changes the composition") {
    AtomicEdgeTable t = atomic_edges();
    t.successors[static_cast<std::size_t>(Tag::Hold)][static_cast<std::size_t>(Sign::Zero)] = 1u;  // H -> {H}
    const ManeuverAutomaton ma = compose(2, PrimitiveMode::NonDeterministic, t);
    CHECK(names(successors(parse_primitive("FH"), parse_label("+0"), 2, t), 2) == std::set<std::string>{"HH", "FH"});
    CHECK(ma.num_edges() < compose(2, PrimitiveMode::NonDeterministic).num_edges());
}
