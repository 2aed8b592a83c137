#include "qtl/commands.hpp"

#include <stdexcept>

namespace qtl {

CommandSeq parse_commands(std::string_view text) {
    // Each open block is (sequence being filled, kind); branches switch arm on `}{`.
    struct Frame {
        CommandSeq items;
        CommandSeq left;
        enum class Kind { Top, Star, BranchLeft, BranchRight } kind;
    };
    std::vector<Frame> stack;
    stack.push_back({{}, {}, Frame::Kind::Top});

    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    auto error = [&](const std::string& what) {
        return std::invalid_argument("command dump line " + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream words(line);
        std::string head;
        if (!(words >> head)) continue;
        std::string a, b;
        if (head == "alloc" && (words >> a)) {
            stack.back().items.push_back(Command::alloc(Location{a}));
        } else if (head == "free" && (words >> a)) {
            stack.back().items.push_back(Command::free(Location{a}));
        } else if (head == "merge" && (words >> a >> b)) {
            stack.back().items.push_back(Command::merge(Location{a}, Location{b}));
        } else if (head == "star{") {
            stack.push_back({{}, {}, Frame::Kind::Star});
        } else if (head == "branch{") {
            stack.push_back({{}, {}, Frame::Kind::BranchLeft});
        } else if (head == "}{") {
            if (stack.back().kind != Frame::Kind::BranchLeft) throw error("unexpected `}{`");
            stack.back().left = std::move(stack.back().items);
            stack.back().items.clear();
            stack.back().kind = Frame::Kind::BranchRight;
        } else if (head == "}") {
            Frame f = std::move(stack.back());
            if (f.kind == Frame::Kind::Star) {
                stack.pop_back();
                stack.back().items.push_back(Command::star(std::move(f.items)));
            } else if (f.kind == Frame::Kind::BranchRight) {
                stack.pop_back();
                stack.back().items.push_back(Command::branch(std::move(f.left), std::move(f.items)));
            } else {
                throw error("unbalanced `}`");
            }
        } else {
            throw error("cannot parse `" + line + "`");
        }
    }
    if (stack.size() != 1) throw error("unterminated block");
    return std::move(stack.back().items);
}

}  // namespace qtl
