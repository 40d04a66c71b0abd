#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "topocover/point_cloud.hpp"

namespace topocover::mathdice {

/// Dice of one game. The target (dodecahedral) die is always the last die.
struct DiceConfig {
    std::vector<std::vector<int>> faces;

    std::size_t dice_count() const noexcept { return faces.size(); }
    std::size_t target_die_index() const noexcept { return faces.size() - 1; }
    std::size_t roll_count() const noexcept;

    /// n = 3..5: n-1 ordinary dice plus a d12. n = 6: three ordinary dice,
    /// two dice with faces {1,2,3}, plus a d12.
    static DiceConfig preset(int n);

    /// "3".."6" as above, or "5-mixed": three ordinary dice, one {1,2,3} die
    /// and a d12 (the 5-dice configuration whose class-1 complex has
    /// betti numbers 1, 0, 725, 4522, 12).
    static DiceConfig named_preset(std::string_view name);
};

inline constexpr std::size_t kDefaultEnumerationBudget = 10'000'000;

/// Maximum number of non-target dice that can be combined with + and - to hit
/// the target exactly (0 if none). values.back() is the target.
int solve_roll(std::span<const int> values);

/// 1 iff every non-target die is used in some exact signed sum.
Label label_roll(std::span<const int> values);

struct MathDiceDataset {
    DiceConfig config;
    LabeledPointCloud cloud;
};

/// One point per roll in lexicographic product order. Throws ResourceError
/// when the number of rolls exceeds `budget`, InputError on an invalid config.
MathDiceDataset enumerate_dataset(const DiceConfig& config,
                                  std::size_t budget = kDefaultEnumerationBudget);

}  // namespace topocover::mathdice
