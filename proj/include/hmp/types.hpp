#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hmp {

/// Component of a face label along one output.
enum class Sign : std::uint8_t { Zero = 0, Plus = 1, Minus = 2 };

/// Atomic motion primitive along one output. The numeric values line up with
/// Sign so that Forward exits through Plus and Backward through Minus.
enum class Tag : std::uint8_t { Hold = 0, Forward = 1, Backward = 2 };

enum class PrimitiveMode : std::uint8_t { NonDeterministic, Deterministic };

// Labels and composite primitives are packed as base-3 integers; 3^20 still
// fits in 32 bits.
inline constexpr int kMaxOutputs = 20;

constexpr std::uint32_t pow3(int p) {
    std::uint32_t r = 1;
    for (int i = 0; i < p; ++i) r *= 3;
    return r;
}

inline constexpr std::uint32_t kPow3Table[kMaxOutputs + 1] = {
    pow3(0),  pow3(1),  pow3(2),  pow3(3),  pow3(4),  pow3(5),  pow3(6),
    pow3(7),  pow3(8),  pow3(9),  pow3(10), pow3(11), pow3(12), pow3(13),
    pow3(14), pow3(15), pow3(16), pow3(17), pow3(18), pow3(19), pow3(20)};

namespace detail {

template <class Digit>
struct Base3Vector {
    std::uint32_t code = 0;

    constexpr Digit operator[](int i) const {
        return static_cast<Digit>((code / kPow3Table[i]) % 3);
    }
    constexpr void set(int i, Digit d) {
        const std::uint32_t old = (code / kPow3Table[i]) % 3;
        code = code - old * kPow3Table[i] + static_cast<std::uint32_t>(d) * kPow3Table[i];
    }
    constexpr bool is_zero() const { return code == 0; }
    friend constexpr bool operator==(Base3Vector, Base3Vector) = default;
    friend constexpr auto operator<=>(Base3Vector, Base3Vector) = default;
};

}  // namespace detail

/// Element of {-,0,+}^p naming a face, vertex or the interior of a box.
struct FaceLabel : detail::Base3Vector<Sign> {
    constexpr FaceLabel() = default;
    constexpr explicit FaceLabel(std::uint32_t c) { code = c; }

    /// Componentwise plus/minus swap.
    FaceLabel flipped(int p) const;
    /// Number of non-zero components.
    int support(int p) const;
};

/// Vector of atomic tags, one per output.
struct CompositePrimitive : detail::Base3Vector<Tag> {
    constexpr CompositePrimitive() = default;
    constexpr explicit CompositePrimitive(std::uint32_t c) { code = c; }

    int moving(int p) const;
    bool all_hold() const { return code == 0; }
};

std::string to_string(FaceLabel label, int p);
std::string to_string(CompositePrimitive prim, int p);
char to_char(Tag t);
char to_char(Sign s);

/// Inverse of to_string; the length of the text fixes p.
FaceLabel parse_label(std::string_view text);
CompositePrimitive parse_primitive(std::string_view text);

/// Cell index per output of the joint output space.
using JointCell = std::vector<int>;

enum class ErrorKind {
    Parse,
    Semantic,
    EmptyWorkspace,
    UnreachableGoal,
    Contract,
    NumericFailure,
    Stuck,
    Safety,
    HashMismatch,
    Io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

std::string_view to_string(ErrorKind kind);

}  // namespace hmp
