#ifndef BNMC_BITS_HPP
#define BNMC_BITS_HPP

#include <bit>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace bnmc {

// A set of node indices, bit v set iff node v is a member.
using NodeSet = std::uint64_t;

inline constexpr std::size_t kMaxNodes = 64;

constexpr NodeSet bit(std::size_t v) { return NodeSet{1} << v; }

constexpr bool contains(NodeSet s, std::size_t v) { return (s >> v) & 1U; }

constexpr std::size_t set_size(NodeSet s) { return static_cast<std::size_t>(std::popcount(s)); }

constexpr NodeSet full_set(std::size_t n) { return n >= 64 ? ~NodeSet{0} : bit(n) - 1; }

// Calls fn(v) for each member in increasing order.
template <typename Fn>
constexpr void for_each_member(NodeSet s, Fn&& fn) {
    while (s != 0) {
        fn(static_cast<std::size_t>(std::countr_zero(s)));
        s &= s - 1;
    }
}

inline std::vector<std::size_t> members(NodeSet s) {
    std::vector<std::size_t> out;
    out.reserve(set_size(s));
    for_each_member(s, [&](std::size_t v) { out.push_back(v); });
    return out;
}

}  // namespace bnmc

#endif  // BNMC_BITS_HPP
