#include "topocover/mathdice.hpp"

#include <algorithm>
#include <string>

#include "topocover/errors.hpp"
#include "topocover/parallel.hpp"

namespace topocover::mathdice {

namespace {

std::vector<int> range_faces(int count) {
    std::vector<int> f(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) f[static_cast<std::size_t>(i)] = i + 1;
    return f;
}

void validate(const DiceConfig& config) {
    if (config.faces.size() < 2) throw InputError("a game needs at least one die plus the target die");
    for (std::size_t i = 0; i < config.faces.size(); ++i) {
        if (config.faces[i].empty()) throw InputError("die " + std::to_string(i) + " has no faces");
    }
    if (config.faces.back() != range_faces(12)) throw InputError("target die must have faces 1..12");
}

}  // namespace

DiceConfig DiceConfig::named_preset(std::string_view name) {
    if (name == "5-mixed") {
        DiceConfig config;
        for (int i = 0; i < 3; ++i) config.faces.push_back(range_faces(6));
        config.faces.push_back(range_faces(3));
        config.faces.push_back(range_faces(12));
        return config;
    }
    if (name.size() == 1 && name[0] >= '3' && name[0] <= '6') return preset(name[0] - '0');
    throw InputError("unknown Math Dice preset '" + std::string(name) + "'");
}

std::size_t DiceConfig::roll_count() const noexcept {
    std::size_t n = 1;
    for (const auto& f : faces) n *= f.size();
    return n;
}

DiceConfig DiceConfig::preset(int n) {
    DiceConfig config;
    if (n >= 3 && n <= 5) {
        for (int i = 0; i < n - 1; ++i) config.faces.push_back(range_faces(6));
    } else if (n == 6) {
        for (int i = 0; i < 3; ++i) config.faces.push_back(range_faces(6));
        for (int i = 0; i < 2; ++i) config.faces.push_back(range_faces(3));
    } else {
        throw InputError("no Math Dice preset for " + std::to_string(n) + " dice (presets cover 3..6)");
    }
    config.faces.push_back(range_faces(12));
    return config;
}

int solve_roll(std::span<const int> values) {
    if (values.size() < 2) throw InputError("a roll needs at least one die plus the target");
    const std::size_t m = values.size() - 1;
    const int target = values.back();
    // Walk all {+1, -1, 0}^m assignments as base-3 counters.
    std::vector<int> sign(m, 0);
    int best = 0;
    for (;;) {
        int sum = 0;
        int used = 0;
        for (std::size_t i = 0; i < m; ++i) {
            if (sign[i] == 1) {
                sum += values[i];
                ++used;
            } else if (sign[i] == 2) {
                sum -= values[i];
                ++used;
            }
        }
        if (sum == target) best = std::max(best, used);
        std::size_t i = 0;
        while (i < m && sign[i] == 2) sign[i++] = 0;
        if (i == m) break;
        ++sign[i];
    }
    return best;
}

Label label_roll(std::span<const int> values) {
    return solve_roll(values) == static_cast<int>(values.size()) - 1 ? 1 : 0;
}

MathDiceDataset enumerate_dataset(const DiceConfig& config, std::size_t budget) {
    validate(config);
    const std::size_t n = config.dice_count();
    const std::size_t rolls = config.roll_count();
    if (rolls > budget) {
        throw ResourceError("Math Dice enumeration of " + std::to_string(rolls) + " rolls exceeds budget " +
                            std::to_string(budget));
    }
    std::vector<double> coords(rolls * n);
    std::vector<Label> labels(rolls);
    parallel_for(0, rolls, [&](std::size_t r) {
        // Mixed-radix decode; the last die varies fastest.
        std::vector<int> values(n);
        std::size_t rest = r;
        for (std::size_t i = n; i-- > 0;) {
            const auto& f = config.faces[i];
            values[i] = f[rest % f.size()];
            rest /= f.size();
        }
        for (std::size_t i = 0; i < n; ++i) coords[r * n + i] = values[i];
        labels[r] = label_roll(values);
    });
    return {config, LabeledPointCloud(n, std::move(coords), std::move(labels))};
}

}  // namespace topocover::mathdice
