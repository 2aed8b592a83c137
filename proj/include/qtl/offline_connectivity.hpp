#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

namespace qtl {

/// Union-find with undo. Union by size and no path compression, so every
/// union is a single parent write that `rollback` can revert.
class RollbackUnionFind {
public:
    explicit RollbackUnionFind(std::size_t n) : parent_(n), size_(n, 1) {
        std::iota(parent_.begin(), parent_.end(), std::int32_t{0});
    }

    std::int32_t find(std::int32_t x) const {
        while (parent_[static_cast<std::size_t>(x)] != x) x = parent_[static_cast<std::size_t>(x)];
        return x;
    }

    bool connected(std::int32_t a, std::int32_t b) const { return find(a) == find(b); }

    /// Returns false (and still records a history entry) when already joined.
    bool unite(std::int32_t a, std::int32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) {
            history_.push_back(-1);
            return false;
        }
        if (size_[static_cast<std::size_t>(a)] < size_[static_cast<std::size_t>(b)]) std::swap(a, b);
        parent_[static_cast<std::size_t>(b)] = a;
        size_[static_cast<std::size_t>(a)] += size_[static_cast<std::size_t>(b)];
        history_.push_back(b);
        return true;
    }

    std::size_t checkpoint() const noexcept { return history_.size(); }

    /// Undoes every unite since `mark`.
    void rollback(std::size_t mark) {
        while (history_.size() > mark) {
            std::int32_t b = history_.back();
            history_.pop_back();
            if (b < 0) continue;
            std::int32_t a = parent_[static_cast<std::size_t>(b)];
            size_[static_cast<std::size_t>(a)] -= size_[static_cast<std::size_t>(b)];
            parent_[static_cast<std::size_t>(b)] = b;
        }
    }

private:
    std::vector<std::int32_t> parent_;
    std::vector<std::int32_t> size_;
    std::vector<std::int32_t> history_;
};

}  // namespace qtl
