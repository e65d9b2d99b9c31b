#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace causalin {

/// A binary relation over the index set {0, ..., n-1}, stored as a dense
/// bit matrix. Every relation of the library (precedence, communication,
/// sb/rf/mo, hb, ...) is one of these; owners map indices to event tags.
class Relation {
  public:
    using Pair = std::pair<std::size_t, std::size_t>;

    Relation() = default;

    explicit Relation(std::size_t n)
        : n_(n), stride_((n + 63) / 64), words_(n * stride_, 0)
    {}

    static Relation identity(std::size_t n)
    {
        Relation r(n);
        for (std::size_t i = 0; i < n; ++i) {
            r.insert(i, i);
        }
        return r;
    }

    static Relation from_pairs(std::size_t n, std::span<const Pair> pairs)
    {
        Relation r(n);
        for (const auto& [a, b] : pairs) {
            r.insert(a, b);
        }
        return r;
    }

    std::size_t size() const { return n_; }

    bool contains(std::size_t a, std::size_t b) const
    {
        return (words_[a * stride_ + b / 64] >> (b % 64)) & 1u;
    }

    void insert(std::size_t a, std::size_t b)
    {
        words_[a * stride_ + b / 64] |= std::uint64_t{1} << (b % 64);
    }

    void erase(std::size_t a, std::size_t b)
    {
        words_[a * stride_ + b / 64] &= ~(std::uint64_t{1} << (b % 64));
    }

    bool empty() const
    {
        for (auto w : words_) {
            if (w != 0) {
                return false;
            }
        }
        return true;
    }

    std::size_t count() const
    {
        std::size_t c = 0;
        for (auto w : words_) {
            c += static_cast<std::size_t>(std::popcount(w));
        }
        return c;
    }

    /// Pairs in row-major order, so iteration is deterministic.
    std::vector<Pair> pairs() const
    {
        std::vector<Pair> out;
        for (std::size_t a = 0; a < n_; ++a) {
            for (std::size_t b = 0; b < n_; ++b) {
                if (contains(a, b)) {
                    out.emplace_back(a, b);
                }
            }
        }
        return out;
    }

    std::vector<std::size_t> successors(std::size_t a) const
    {
        std::vector<std::size_t> out;
        for (std::size_t b = 0; b < n_; ++b) {
            if (contains(a, b)) {
                out.push_back(b);
            }
        }
        return out;
    }

    std::vector<std::size_t> predecessors(std::size_t b) const
    {
        std::vector<std::size_t> out;
        for (std::size_t a = 0; a < n_; ++a) {
            if (contains(a, b)) {
                out.push_back(a);
            }
        }
        return out;
    }

    Relation inverse() const
    {
        Relation r(n_);
        for (const auto& [a, b] : pairs()) {
            r.insert(b, a);
        }
        return r;
    }

    /// Relational composition: (a, c) iff a this b and b other c.
    Relation compose(const Relation& other) const
    {
        Relation r(n_);
        for (std::size_t a = 0; a < n_; ++a) {
            for (std::size_t b = 0; b < n_; ++b) {
                if (!contains(a, b)) {
                    continue;
                }
                for (std::size_t w = 0; w < stride_; ++w) {
                    r.words_[a * stride_ + w] |= other.words_[b * stride_ + w];
                }
            }
        }
        return r;
    }

    /// Transitive (not reflexive) closure, Warshall style.
    Relation transitive_closure() const
    {
        Relation r = *this;
        for (std::size_t k = 0; k < n_; ++k) {
            for (std::size_t i = 0; i < n_; ++i) {
                if (!r.contains(i, k)) {
                    continue;
                }
                for (std::size_t w = 0; w < stride_; ++w) {
                    r.words_[i * stride_ + w] |= r.words_[k * stride_ + w];
                }
            }
        }
        return r;
    }

    bool irreflexive() const
    {
        for (std::size_t i = 0; i < n_; ++i) {
            if (contains(i, i)) {
                return false;
            }
        }
        return true;
    }

    bool transitive() const { return compose(*this).subset_of(*this); }

    bool acyclic() const { return transitive_closure().irreflexive(); }

    bool subset_of(const Relation& other) const
    {
        for (std::size_t i = 0; i < words_.size(); ++i) {
            if ((words_[i] & ~other.words_[i]) != 0) {
                return false;
            }
        }
        return true;
    }

    /// Total on the given index subset: every two distinct members related
    /// one way or the other.
    bool total_on(std::span<const std::size_t> members) const
    {
        for (std::size_t i = 0; i < members.size(); ++i) {
            for (std::size_t j = i + 1; j < members.size(); ++j) {
                if (!contains(members[i], members[j]) &&
                    !contains(members[j], members[i])) {
                    return false;
                }
            }
        }
        return true;
    }

    /// The relation restricted to `keep`, re-indexed so that keep[i]
    /// becomes i.
    Relation restricted(std::span<const std::size_t> keep) const
    {
        Relation r(keep.size());
        for (std::size_t i = 0; i < keep.size(); ++i) {
            for (std::size_t j = 0; j < keep.size(); ++j) {
                if (contains(keep[i], keep[j])) {
                    r.insert(i, j);
                }
            }
        }
        return r;
    }

    Relation& operator|=(const Relation& o)
    {
        for (std::size_t i = 0; i < words_.size(); ++i) {
            words_[i] |= o.words_[i];
        }
        return *this;
    }

    Relation& operator&=(const Relation& o)
    {
        for (std::size_t i = 0; i < words_.size(); ++i) {
            words_[i] &= o.words_[i];
        }
        return *this;
    }

    Relation& operator-=(const Relation& o)
    {
        for (std::size_t i = 0; i < words_.size(); ++i) {
            words_[i] &= ~o.words_[i];
        }
        return *this;
    }

    friend Relation operator|(Relation a, const Relation& b) { return a |= b; }
    friend Relation operator&(Relation a, const Relation& b) { return a &= b; }
    friend Relation operator-(Relation a, const Relation& b) { return a -= b; }

    friend bool operator==(const Relation&, const Relation&) = default;

  private:
    std::size_t n_ = 0;
    std::size_t stride_ = 0;
    std::vector<std::uint64_t> words_;
};

}  // namespace causalin
