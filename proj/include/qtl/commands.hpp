#pragma once

#include <cstddef>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "qtl/location.hpp"

namespace qtl {

template <typename L>
struct BasicCommand;

template <typename L>
using BasicCommandSeq = std::vector<BasicCommand<L>>;

namespace cmd {

template <typename L>
struct Alloc {
    L loc;
};
template <typename L>
struct Free {
    L loc;
};
template <typename L>
struct Merge {
    L first;
    L second;
};
/// Zero or more repetitions of `body`.
template <typename L>
struct Star {
    std::vector<BasicCommand<L>> body;
};
/// Runtime choice between `left` and `right`.
template <typename L>
struct Branch {
    std::vector<BasicCommand<L>> left;
    std::vector<BasicCommand<L>> right;
};

}  // namespace cmd

/// One element of an effect trace. `L` is the location representation: names
/// for traces produced by typing, vertex ids inside the checkers.
template <typename L>
struct BasicCommand {
    using Node = std::variant<cmd::Alloc<L>, cmd::Free<L>, cmd::Merge<L>, cmd::Star<L>,
                              cmd::Branch<L>>;

    Node node;
    Span origin;  // source expression that emitted the command

    static BasicCommand alloc(L l, Span s = {}) { return {cmd::Alloc<L>{std::move(l)}, s}; }
    static BasicCommand free(L l, Span s = {}) { return {cmd::Free<L>{std::move(l)}, s}; }
    static BasicCommand merge(L a, L b, Span s = {}) {
        return {cmd::Merge<L>{std::move(a), std::move(b)}, s};
    }
    static BasicCommand star(BasicCommandSeq<L> body, Span s = {}) {
        return {cmd::Star<L>{std::move(body)}, s};
    }
    static BasicCommand branch(BasicCommandSeq<L> left, BasicCommandSeq<L> right, Span s = {}) {
        return {cmd::Branch<L>{std::move(left), std::move(right)}, s};
    }

    template <typename T>
    const T* as() const {
        return std::get_if<T>(&node);
    }
    bool is_atom() const { return node.index() < 3; }

    /// Structural equality; origins are ignored.
    friend bool operator==(const BasicCommand& a, const BasicCommand& b) {
        if (a.node.index() != b.node.index()) return false;
        return std::visit(
            [&](const auto& x) {
                using T = std::decay_t<decltype(x)>;
                const auto& y = std::get<T>(b.node);
                if constexpr (std::is_same_v<T, cmd::Alloc<L>> || std::is_same_v<T, cmd::Free<L>>) {
                    return x.loc == y.loc;
                } else if constexpr (std::is_same_v<T, cmd::Merge<L>>) {
                    return x.first == y.first && x.second == y.second;
                } else if constexpr (std::is_same_v<T, cmd::Star<L>>) {
                    return x.body == y.body;
                } else {
                    return x.left == y.left && x.right == y.right;
                }
            },
            a.node);
    }
};

using Command = BasicCommand<Location>;
using CommandSeq = BasicCommandSeq<Location>;

/// |c|: atoms count 1; a branch or loop counts 1 plus its contents.
template <typename L>
std::size_t seq_size(const BasicCommandSeq<L>& c) {
    std::size_t n = 0;
    for (const auto& x : c) {
        ++n;
        if (const auto* s = x.template as<cmd::Star<L>>()) {
            n += seq_size(s->body);
        } else if (const auto* b = x.template as<cmd::Branch<L>>()) {
            n += seq_size(b->left) + seq_size(b->right);
        }
    }
    return n;
}

template <typename L>
bool is_flat(const BasicCommandSeq<L>& c) {
    for (const auto& x : c) {
        if (!x.is_atom()) return false;
    }
    return true;
}

/// Number of atoms in the tree, loop bodies and both arms included.
template <typename L>
std::size_t atom_count(const BasicCommandSeq<L>& c) {
    std::size_t n = 0;
    for (const auto& x : c) {
        if (x.is_atom()) {
            ++n;
        } else if (const auto* s = x.template as<cmd::Star<L>>()) {
            n += atom_count(s->body);
        } else if (const auto* b = x.template as<cmd::Branch<L>>()) {
            n += atom_count(b->left) + atom_count(b->right);
        }
    }
    return n;
}

namespace detail {

template <typename L, typename Emit>
class Serializer {
public:
    explicit Serializer(Emit& emit) : emit_(emit) {}

    void run(const BasicCommandSeq<L>& c) {
        // One ser() application: walk the continuation, defer the inverses of
        // alloc/free and emit them in reverse at the end.
        struct Cursor {
            const BasicCommandSeq<L>* seq;
            std::size_t pos;
        };
        struct Pending {
            const BasicCommand<L>* atom;
            std::size_t index;
        };
        std::vector<Cursor> cursors{{&c, 0}};
        std::vector<Pending> pending;
        while (!cursors.empty()) {
            Cursor& top = cursors.back();
            if (top.pos == top.seq->size()) {
                cursors.pop_back();
                continue;
            }
            const BasicCommand<L>& x = (*top.seq)[top.pos++];
            if (const auto* s = x.template as<cmd::Star<L>>()) {
                cursors.push_back({&s->body, 0});
            } else if (const auto* b = x.template as<cmd::Branch<L>>()) {
                run(b->left);
                cursors.push_back({&b->right, 0});
            } else {
                std::size_t index = next_index_++;
                emit_(x, index, false);
                if (!x.template as<cmd::Merge<L>>()) pending.push_back({&x, index});
            }
        }
        for (auto it = pending.rbegin(); it != pending.rend(); ++it) emit_(*it->atom, it->index, true);
    }

private:
    Emit& emit_;
    std::size_t next_index_ = 0;
};

}  // namespace detail

/// Serialization traversal. `emit(atom, atom_index, inverted)` is called once per
/// output atom; `atom_index` is the pre-order position of the source atom and
/// `inverted` marks the compensating alloc/free inserted for it.
template <typename L, typename Emit>
void serialize_visit(const BasicCommandSeq<L>& c, Emit&& emit) {
    detail::Serializer<L, std::remove_reference_t<Emit>> s(emit);
    s.run(c);
}

/// Flattens branches and loops: a branch becomes its serialized left arm (which
/// restores the allocation state) followed by the right arm and the continuation.
template <typename L>
BasicCommandSeq<L> serialize(const BasicCommandSeq<L>& c) {
    BasicCommandSeq<L> out;
    serialize_visit(c, [&](const BasicCommand<L>& atom, std::size_t, bool inverted) {
        if (!inverted) {
            out.push_back(atom);
        } else if (const auto* a = atom.template as<cmd::Alloc<L>>()) {
            out.push_back(BasicCommand<L>::free(a->loc, atom.origin));
        } else {
            out.push_back(BasicCommand<L>::alloc(std::get<cmd::Free<L>>(atom.node).loc, atom.origin));
        }
    });
    return out;
}

/// Rewrites every location through `f`, keeping structure and origins.
template <typename L, typename F>
auto map_locations(const BasicCommandSeq<L>& c, F&& f)
    -> BasicCommandSeq<std::decay_t<std::invoke_result_t<F&, const L&>>> {
    using M = std::decay_t<std::invoke_result_t<F&, const L&>>;
    BasicCommandSeq<M> out;
    out.reserve(c.size());
    for (const auto& x : c) {
        std::visit(
            [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, cmd::Alloc<L>>) {
                    out.push_back(BasicCommand<M>::alloc(f(n.loc), x.origin));
                } else if constexpr (std::is_same_v<T, cmd::Free<L>>) {
                    out.push_back(BasicCommand<M>::free(f(n.loc), x.origin));
                } else if constexpr (std::is_same_v<T, cmd::Merge<L>>) {
                    out.push_back(BasicCommand<M>::merge(f(n.first), f(n.second), x.origin));
                } else if constexpr (std::is_same_v<T, cmd::Star<L>>) {
                    out.push_back(BasicCommand<M>::star(map_locations(n.body, f), x.origin));
                } else {
                    out.push_back(BasicCommand<M>::branch(map_locations(n.left, f),
                                                          map_locations(n.right, f), x.origin));
                }
            },
            x.node);
    }
    return out;
}

namespace detail {

template <typename L, typename Name>
void dump(std::ostream& os, const BasicCommandSeq<L>& c, int indent, Name& name) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    for (const auto& x : c) {
        if (const auto* a = x.template as<cmd::Alloc<L>>()) {
            os << pad << "alloc " << name(a->loc) << "\n";
        } else if (const auto* f = x.template as<cmd::Free<L>>()) {
            os << pad << "free " << name(f->loc) << "\n";
        } else if (const auto* m = x.template as<cmd::Merge<L>>()) {
            os << pad << "merge " << name(m->first) << " " << name(m->second) << "\n";
        } else if (const auto* s = x.template as<cmd::Star<L>>()) {
            os << pad << "star{\n";
            dump(os, s->body, indent + 1, name);
            os << pad << "}\n";
        } else if (const auto* b = x.template as<cmd::Branch<L>>()) {
            os << pad << "branch{\n";
            dump(os, b->left, indent + 1, name);
            os << pad << "}{\n";
            dump(os, b->right, indent + 1, name);
            os << pad << "}\n";
        }
    }
}

}  // namespace detail

/// Text dump: one atom per line, `branch{ .. }{ .. }` and `star{ .. }` blocks.
template <typename L, typename Name>
std::string format_commands(const BasicCommandSeq<L>& c, Name&& name) {
    std::ostringstream os;
    detail::dump(os, c, 0, name);
    return os.str();
}

inline std::string format_commands(const CommandSeq& c) {
    return format_commands(c, [](const Location& l) -> const std::string& { return l.name; });
}

/// Parses the text dump back into a sequence.
CommandSeq parse_commands(std::string_view text);

}  // namespace qtl
