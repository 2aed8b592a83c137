#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qtl/syntax.hpp"

namespace qtl {

class ParseError : public std::runtime_error {
public:
    ParseError(Span span, std::vector<std::string> expected, const std::string& found);

    const Span& span() const noexcept { return span_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }
    const std::string& found() const noexcept { return found_; }

private:
    Span span_;
    std::vector<std::string> expected_;
    std::string found_;
};

/// Parses a whole `.qtl` source: function declarations followed by the entry expression.
Program parse_program(std::string_view source);

/// Parses a lone expression (no declarations).
ExprPtr parse_expr(std::string_view source);

}  // namespace qtl
