#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <ostream>
#include <string>
#include <utility>

namespace qtl {

/// A named cell of the architecture, or a location parameter of a function.
struct Location {
    std::string name;

    Location() = default;
    explicit Location(std::string n) : name(std::move(n)) {}

    friend auto operator<=>(const Location&, const Location&) = default;
    friend bool operator==(const Location&, const Location&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const Location& l) { return os << l.name; }

/// 1-based source position. Line 0 marks a synthesized node.
struct Span {
    int line = 0;
    int column = 0;

    friend bool operator==(const Span&, const Span&) = default;
};

inline std::string to_string(const Span& s) {
    return std::to_string(s.line) + ":" + std::to_string(s.column);
}

}  // namespace qtl

template <>
struct std::hash<qtl::Location> {
    std::size_t operator()(const qtl::Location& l) const noexcept {
        return std::hash<std::string>{}(l.name);
    }
};
