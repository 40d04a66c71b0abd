#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "topocover/cover.hpp"

namespace topocover {

/// Face-closed simplicial complex. Each dimension holds its simplices as
/// strictly increasing vertex tuples, stored flat and sorted lexicographically.
class SimplicialComplex {
public:
    SimplicialComplex() = default;

    /// Validates ordering, uniqueness and face closure; sorts each dimension.
    /// simplices[k] holds the k-simplices; dimensions above simplices.size()-1
    /// up to max_dim are empty.
    static SimplicialComplex from_simplices(int max_dim,
                                            std::vector<std::vector<std::vector<std::uint32_t>>> simplices);

    int max_dim() const noexcept { return static_cast<int>(flat_.size()) - 1; }
    std::size_t count(int k) const noexcept {
        return k < 0 || k > max_dim() ? 0 : flat_[static_cast<std::size_t>(k)].size() / static_cast<std::size_t>(k + 1);
    }
    std::size_t total_count() const noexcept;
    std::span<const std::uint32_t> simplex(int k, std::size_t i) const noexcept {
        const auto w = static_cast<std::size_t>(k + 1);
        return {flat_[static_cast<std::size_t>(k)].data() + i * w, w};
    }
    /// Index of the k-simplex with the given sorted vertices.
    std::optional<std::size_t> find(int k, std::span<const std::uint32_t> vertices) const noexcept;

private:
    friend SimplicialComplex clique_complex(const SkeletonGraph&, int, std::size_t);
    explicit SimplicialComplex(std::vector<std::vector<std::uint32_t>> flat) : flat_(std::move(flat)) {}

    std::vector<std::vector<std::uint32_t>> flat_;
};

struct BettiProfile {
    std::vector<std::int64_t> betti;
    std::int64_t total = 0;

    static BettiProfile from_betti(std::vector<std::int64_t> betti);
    friend bool operator==(const BettiProfile&, const BettiProfile&) = default;
};

inline constexpr std::size_t kDefaultSimplexBudget = 50'000'000;
inline constexpr int kDefaultKmax = 5;

/// Every clique with at most max_dim + 1 vertices, as a simplex. Throws
/// ResourceError naming the dimension being filled once the total simplex
/// count would exceed `simplex_budget`.
SimplicialComplex clique_complex(const SkeletonGraph& graph, int max_dim,
                                 std::size_t simplex_budget = kDefaultSimplexBudget);

/// Rank over GF(2) of the boundary map from k-simplices to (k-1)-simplices.
std::size_t boundary_rank(const SimplicialComplex& complex, int k);

/// beta_0 .. beta_kmax over GF(2). Needs (kmax+1)-simplices, so kmax <= max_dim - 1.
BettiProfile betti_numbers(const SimplicialComplex& complex, int kmax);

std::int64_t total_features(const BettiProfile& profile) noexcept;

}  // namespace topocover
