#include "topocover/homology.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "topocover/errors.hpp"

namespace topocover {

namespace {

bool lex_less(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Boundary column of simplex i in dimension k: row indices of its facets, ascending.
std::vector<std::uint32_t> boundary_column(const SimplicialComplex& complex, int k, std::size_t i) {
    const auto s = complex.simplex(k, i);
    std::vector<std::uint32_t> face(static_cast<std::size_t>(k));
    std::vector<std::uint32_t> column;
    column.reserve(static_cast<std::size_t>(k + 1));
    for (std::size_t skip = 0; skip <= static_cast<std::size_t>(k); ++skip) {
        std::size_t w = 0;
        for (std::size_t v = 0; v <= static_cast<std::size_t>(k); ++v) {
            if (v != skip) face[w++] = s[v];
        }
        const auto row = complex.find(k - 1, face);
        // Face closure is a class invariant.
        column.push_back(static_cast<std::uint32_t>(*row));
    }
    std::sort(column.begin(), column.end());
    return column;
}

// target <- target xor source, both sorted ascending.
void add_column(std::vector<std::uint32_t>& target, const std::vector<std::uint32_t>& source,
                std::vector<std::uint32_t>& scratch) {
    scratch.clear();
    std::set_symmetric_difference(target.begin(), target.end(), source.begin(), source.end(),
                                  std::back_inserter(scratch));
    target.swap(scratch);
}

constexpr std::uint32_t kNoPivot = 0xffffffffu;

// Column reduction of the boundary map in dimension k. Columns flagged in
// `skip` are known to reduce to zero (clearing). If `pivot_rows` is given, rows
// that end up as pivots are flagged there. Returns the rank.
std::size_t reduce_boundary(const SimplicialComplex& complex, int k, const std::vector<char>* skip,
                            std::vector<char>* pivot_rows) {
    const std::size_t columns = complex.count(k);
    const std::size_t rows = complex.count(k - 1);
    std::vector<std::uint32_t> pivot_of_row(rows, kNoPivot);
    std::vector<std::vector<std::uint32_t>> reduced;  // reduced columns, indexed by pivot slot
    std::vector<std::uint32_t> scratch;
    std::size_t rank = 0;
    if (pivot_rows) pivot_rows->assign(rows, 0);

    for (std::size_t j = 0; j < columns; ++j) {
        if (skip && (*skip)[j]) continue;
        std::vector<std::uint32_t> column = boundary_column(complex, k, j);
        while (!column.empty()) {
            const std::uint32_t low = column.back();
            const std::uint32_t slot = pivot_of_row[low];
            if (slot == kNoPivot) break;
            add_column(column, reduced[slot], scratch);
        }
        if (column.empty()) continue;
        const std::uint32_t low = column.back();
        pivot_of_row[low] = static_cast<std::uint32_t>(reduced.size());
        reduced.push_back(std::move(column));
        if (pivot_rows) (*pivot_rows)[low] = 1;
        ++rank;
    }
    return rank;
}

}  // namespace

SimplicialComplex SimplicialComplex::from_simplices(
    int max_dim, std::vector<std::vector<std::vector<std::uint32_t>>> simplices) {
    if (max_dim < 0) throw InputError("max_dim must be nonnegative");
    if (simplices.size() > static_cast<std::size_t>(max_dim) + 1) {
        throw InputError("simplices given above max_dim");
    }
    simplices.resize(static_cast<std::size_t>(max_dim) + 1);
    std::vector<std::vector<std::uint32_t>> flat(simplices.size());
    for (std::size_t k = 0; k < simplices.size(); ++k) {
        auto& list = simplices[k];
        for (const auto& s : list) {
            if (s.size() != k + 1) {
                throw InputError("simplex of size " + std::to_string(s.size()) + " listed in dimension " +
                                 std::to_string(k));
            }
            if (!std::is_sorted(s.begin(), s.end()) ||
                std::adjacent_find(s.begin(), s.end()) != s.end()) {
                throw InputError("simplex vertices must be strictly increasing");
            }
        }
        std::sort(list.begin(), list.end());
        if (std::adjacent_find(list.begin(), list.end()) != list.end()) {
            throw InputError("duplicate simplex in dimension " + std::to_string(k));
        }
        for (const auto& s : list) flat[k].insert(flat[k].end(), s.begin(), s.end());
    }
    SimplicialComplex complex(std::move(flat));
    for (int k = 1; k <= max_dim; ++k) {
        std::vector<std::uint32_t> face(static_cast<std::size_t>(k));
        for (std::size_t i = 0; i < complex.count(k); ++i) {
            const auto s = complex.simplex(k, i);
            for (std::size_t skip = 0; skip <= static_cast<std::size_t>(k); ++skip) {
                std::size_t w = 0;
                for (std::size_t v = 0; v <= static_cast<std::size_t>(k); ++v) {
                    if (v != skip) face[w++] = s[v];
                }
                if (!complex.find(k - 1, face)) {
                    throw InputError("complex is not face-closed in dimension " + std::to_string(k));
                }
            }
        }
    }
    return complex;
}

std::size_t SimplicialComplex::total_count() const noexcept {
    std::size_t total = 0;
    for (int k = 0; k <= max_dim(); ++k) total += count(k);
    return total;
}

std::optional<std::size_t> SimplicialComplex::find(int k, std::span<const std::uint32_t> vertices) const noexcept {
    if (k < 0 || k > max_dim() || vertices.size() != static_cast<std::size_t>(k + 1)) return std::nullopt;
    std::size_t lo = 0;
    std::size_t hi = count(k);
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (lex_less(simplex(k, mid), vertices)) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    if (lo < count(k) && std::equal(vertices.begin(), vertices.end(), simplex(k, lo).begin())) return lo;
    return std::nullopt;
}

BettiProfile BettiProfile::from_betti(std::vector<std::int64_t> betti) {
    BettiProfile profile;
    profile.total = std::accumulate(betti.begin(), betti.end(), std::int64_t{0});
    profile.betti = std::move(betti);
    return profile;
}

SimplicialComplex clique_complex(const SkeletonGraph& graph, int max_dim, std::size_t simplex_budget) {
    if (max_dim < 0) throw InputError("max_dim must be nonnegative");
    const std::size_t n = graph.node_count;
    std::vector<std::vector<std::uint32_t>> higher(n);
    for (const auto& [a, b] : graph.edges) {
        if (a >= n || b >= n || a == b) throw InputError("skeleton edge has invalid endpoints");
        higher[std::min(a, b)].push_back(std::max(a, b));
    }
    for (auto& nbrs : higher) {
        std::sort(nbrs.begin(), nbrs.end());
        nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    }

    std::vector<std::vector<std::uint32_t>> flat(static_cast<std::size_t>(max_dim) + 1);
    std::size_t emitted = 0;
    auto charge = [&](int dim) {
        if (++emitted > simplex_budget) {
            throw ResourceError("clique complex exceeds simplex budget of " + std::to_string(simplex_budget) +
                                    " while enumerating dimension " + std::to_string(dim),
                                dim);
        }
    };

    for (std::uint32_t v = 0; v < n; ++v) {
        charge(0);
        flat[0].push_back(v);
    }
    // Level k from level k-1: append a higher neighbour of the last vertex that
    // is adjacent to every other vertex. Lexicographic order carries over.
    for (int dim = 1; dim <= max_dim; ++dim) {
        const auto w = static_cast<std::size_t>(dim);
        const auto& prev = flat[w - 1];
        auto& out = flat[w];
        for (std::size_t off = 0; off < prev.size(); off += w) {
            const std::uint32_t* face = prev.data() + off;
            for (std::uint32_t v : higher[face[w - 1]]) {
                bool adjacent = true;
                for (std::size_t t = 0; t + 1 < w && adjacent; ++t) {
                    adjacent = std::binary_search(higher[face[t]].begin(), higher[face[t]].end(), v);
                }
                if (!adjacent) continue;
                charge(dim);
                out.insert(out.end(), face, face + w);
                out.push_back(v);
            }
        }
        if (out.empty()) break;
    }
    return SimplicialComplex(std::move(flat));
}

std::size_t boundary_rank(const SimplicialComplex& complex, int k) {
    if (k < 1 || k > complex.max_dim()) {
        throw InputError("boundary rank requested for k=" + std::to_string(k) + ", valid range is [1, " +
                         std::to_string(complex.max_dim()) + "]");
    }
    return reduce_boundary(complex, k, nullptr, nullptr);
}

BettiProfile betti_numbers(const SimplicialComplex& complex, int kmax) {
    if (kmax < 0) throw InputError("kmax must be nonnegative");
    if (kmax > complex.max_dim() - 1) {
        throw InputError("betti numbers up to dimension " + std::to_string(kmax) +
                         " need a complex built with max_dim >= " + std::to_string(kmax + 1) +
                         " (built with " + std::to_string(complex.max_dim()) + ")");
    }
    // rank[k] = rank of the boundary map in dimension k; rank[0] = 0.
    std::vector<std::size_t> rank(static_cast<std::size_t>(kmax) + 2, 0);
    std::vector<char> cleared;
    std::vector<char> pivots;
    for (int k = kmax + 1; k >= 1; --k) {
        rank[static_cast<std::size_t>(k)] =
            reduce_boundary(complex, k, cleared.empty() ? nullptr : &cleared, &pivots);
        cleared.swap(pivots);
    }
    std::vector<std::int64_t> betti(static_cast<std::size_t>(kmax) + 1);
    for (int k = 0; k <= kmax; ++k) {
        const auto uk = static_cast<std::size_t>(k);
        betti[uk] = static_cast<std::int64_t>(complex.count(k)) - static_cast<std::int64_t>(rank[uk]) -
                    static_cast<std::int64_t>(rank[uk + 1]);
    }
    return BettiProfile::from_betti(std::move(betti));
}

std::int64_t total_features(const BettiProfile& profile) noexcept {
    return std::accumulate(profile.betti.begin(), profile.betti.end(), std::int64_t{0});
}

}  // namespace topocover
