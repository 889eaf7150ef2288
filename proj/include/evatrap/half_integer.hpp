#pragma once

#include <compare>
#include <cstdlib>
#include <string>

namespace evatrap {

/// Angular-momentum quantum number stored as twice its value, so 7/2 is
/// exact and integer/half-integer parity is a bit test.
class HalfInteger {
public:
    constexpr HalfInteger() = default;

    static constexpr HalfInteger from_twice(int twice) { return HalfInteger(twice); }
    static constexpr HalfInteger from_int(int value) { return HalfInteger(2 * value); }

    /// Throws InvalidArgument when `value` is not a multiple of 1/2.
    static HalfInteger from_double(double value);

    constexpr int twice() const { return twice_; }
    constexpr double value() const { return 0.5 * twice_; }
    constexpr bool is_integer() const { return (twice_ & 1) == 0; }

    constexpr HalfInteger operator+(HalfInteger o) const { return HalfInteger(twice_ + o.twice_); }
    constexpr HalfInteger operator-(HalfInteger o) const { return HalfInteger(twice_ - o.twice_); }
    constexpr HalfInteger operator-() const { return HalfInteger(-twice_); }

    constexpr auto operator<=>(const HalfInteger&) const = default;

    /// "7/2", "4", "-1/2"
    std::string str() const;

private:
    constexpr explicit HalfInteger(int twice) : twice_(twice) {}
    int twice_ = 0;
};

inline constexpr HalfInteger abs(HalfInteger h) {
    return h.twice() < 0 ? -h : h;
}

}  // namespace evatrap
