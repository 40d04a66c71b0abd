#include "topocover/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>

#include "topocover/errors.hpp"

namespace topocover {

std::string_view to_string(Normalization normalization) noexcept {
    return normalization == Normalization::ZScore ? "zscore" : "none";
}

Normalization normalization_from_string(std::string_view name) {
    if (name == "none") return Normalization::None;
    if (name == "zscore") return Normalization::ZScore;
    throw InputError("unknown normalization '" + std::string(name) + "' (expected none or zscore)");
}

void DatasetDescriptor::validate() const {
    if (row_limit && *row_limit == 0) throw InputError("row_limit must be positive");
    if (feature_columns) {
        if (feature_columns->empty()) throw InputError("feature column list is empty");
        for (const auto& c : *feature_columns) {
            if (c == label_column) throw InputError("label column is listed among the feature columns");
        }
    }
    if (!has_header) {
        auto named = [](const ColumnRef& c) { return std::holds_alternative<std::string>(c); };
        if (named(label_column) ||
            (feature_columns && std::any_of(feature_columns->begin(), feature_columns->end(), named))) {
            throw InputError("columns can only be referenced by name when the file has a header");
        }
    }
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    for (auto& f : fields) {
        while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
        while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.remove_suffix(1);
    }
    return fields;
}

std::optional<double> parse_number(std::string_view field) {
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) return std::nullopt;
    return value;
}

std::size_t resolve(const ColumnRef& ref, const std::vector<std::string>& header, std::size_t columns) {
    if (const auto* index = std::get_if<std::size_t>(&ref)) {
        if (*index >= columns) {
            throw InputError("column index " + std::to_string(*index) + " outside the " + std::to_string(columns) +
                             " columns of the file");
        }
        return *index;
    }
    const auto& name = std::get<std::string>(ref);
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InputError("no column named '" + name + "' in the header");
    return static_cast<std::size_t>(it - header.begin());
}

struct Row {
    std::size_t line = 0;
    Label label = 0;
    std::vector<double> features;
};

}  // namespace

LoadedDataset load_csv(const DatasetDescriptor& descriptor) {
    descriptor.validate();
    std::ifstream in(descriptor.path);
    if (!in) throw InputError("cannot open '" + descriptor.path.string() + "'");

    LoadedDataset result;
    std::vector<std::string> header;
    std::size_t label_index = 0;
    std::vector<std::size_t> feature_index;
    std::size_t columns = 0;
    bool resolved = false;

    auto resolve_columns = [&](std::size_t count) {
        columns = count;
        label_index = resolve(descriptor.label_column, header, columns);
        if (descriptor.feature_columns) {
            for (const auto& ref : *descriptor.feature_columns) feature_index.push_back(resolve(ref, header, columns));
        } else {
            for (std::size_t c = 0; c < columns; ++c) {
                if (c != label_index) feature_index.push_back(c);
            }
        }
        if (feature_index.empty()) throw InputError("no feature columns selected");
        if (std::find(feature_index.begin(), feature_index.end(), label_index) != feature_index.end()) {
            throw InputError("label column is listed among the feature columns");
        }
        for (std::size_t c : feature_index) {
            result.feature_names.push_back(header.empty() ? "x" + std::to_string(c) : header[c]);
        }
        resolved = true;
    };

    std::mt19937_64 rng(descriptor.seed);
    std::vector<Row> reservoir;
    std::string line;
    std::size_t line_number = 0;
    std::size_t data_rows = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_fields(line);
        if (descriptor.has_header && header.empty() && !resolved) {
            for (auto f : fields) header.emplace_back(f);
            resolve_columns(header.size());
            continue;
        }
        if (!resolved) resolve_columns(fields.size());
        if (fields.size() != columns) {
            throw InputError("line " + std::to_string(line_number) + ": expected " + std::to_string(columns) +
                             " fields, found " + std::to_string(fields.size()));
        }

        Row row;
        row.line = line_number;
        const auto label_value = parse_number(fields[label_index]);
        if (!label_value || (*label_value != 0.0 && *label_value != 1.0)) {
            throw InputError("line " + std::to_string(line_number) + ": label value '" +
                             std::string(fields[label_index]) + "' is not 0 or 1");
        }
        row.label = *label_value == 1.0 ? 1 : 0;
        row.features.reserve(feature_index.size());
        for (std::size_t c : feature_index) {
            const auto value = parse_number(fields[c]);
            if (!value) {
                throw InputError("line " + std::to_string(line_number) + ": field " + std::to_string(c) + " ('" +
                                 std::string(fields[c]) + "') is not a number");
            }
            row.features.push_back(*value);
        }

        // Algorithm R: row t (0-based) replaces a uniform slot in [0, t].
        const std::size_t slot_count = descriptor.row_limit.value_or(static_cast<std::size_t>(-1));
        std::size_t slot = data_rows;
        if (data_rows >= slot_count) {
            std::uniform_int_distribution<std::size_t> pick(0, data_rows);
            slot = pick(rng);
        }
        ++data_rows;
        if (slot >= slot_count) continue;
        if (slot < reservoir.size()) {
            reservoir[slot] = std::move(row);
        } else {
            reservoir.push_back(std::move(row));
        }
    }
    if (reservoir.empty()) throw InputError("'" + descriptor.path.string() + "' contains no data rows");

    std::sort(reservoir.begin(), reservoir.end(), [](const Row& a, const Row& b) { return a.line < b.line; });
    std::vector<double> coords;
    std::vector<Label> labels;
    coords.reserve(reservoir.size() * feature_index.size());
    labels.reserve(reservoir.size());
    for (const auto& row : reservoir) {
        coords.insert(coords.end(), row.features.begin(), row.features.end());
        labels.push_back(row.label);
    }
    result.rows_read = data_rows;
    result.cloud = LabeledPointCloud(feature_index.size(), std::move(coords), std::move(labels));
    if (descriptor.normalization == Normalization::ZScore) {
        result.cloud = zscore(result.cloud, &result.warnings);
    }
    return result;
}

LabeledPointCloud zscore(const LabeledPointCloud& cloud, std::vector<std::string>* warnings) {
    const std::size_t n = cloud.size();
    const std::size_t d = cloud.dimension();
    if (n == 0) return cloud;
    std::vector<double> coords = cloud.coords();
    for (std::size_t k = 0; k < d; ++k) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += coords[i * d + k];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = coords[i * d + k] - mean;
            var += c * c;
        }
        var /= static_cast<double>(n);
        const double sd = std::sqrt(var);
        const bool constant = !(sd > 0.0);
        if (constant && warnings) {
            warnings->push_back("feature " + std::to_string(k) + " has zero variance; centred only");
        }
        for (std::size_t i = 0; i < n; ++i) {
            double& v = coords[i * d + k];
            v -= mean;
            if (!constant) v /= sd;
        }
    }
    return LabeledPointCloud(d, std::move(coords), cloud.labels());
}

std::pair<LabeledPointCloud, LabeledPointCloud> train_test_split(const LabeledPointCloud& cloud, double fraction,
                                                                 std::uint64_t seed, bool stratified) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw InputError("train fraction must lie in (0, 1)");
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;

    auto take = [&](std::vector<std::size_t> pool) {
        std::shuffle(pool.begin(), pool.end(), rng);
        auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(pool.size())));
        k = std::clamp<std::size_t>(k, 1, pool.size() - 1);
        train.insert(train.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
        test.insert(test.end(), pool.begin() + static_cast<std::ptrdiff_t>(k), pool.end());
    };

    if (stratified) {
        for (Label c : {Label{0}, Label{1}}) {
            auto members = cloud.indices_of(c);
            if (members.size() < 2) {
                throw InputError("class " + std::to_string(c) + " has " + std::to_string(members.size()) +
                                 " points; a split needs at least two");
            }
            take(std::move(members));
        }
    } else {
        if (cloud.size() < 2) throw InputError("a split needs at least two points");
        std::vector<std::size_t> all(cloud.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        take(std::move(all));
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {cloud.subset(train), cloud.subset(test)};
}

void write_labeled_csv(std::ostream& out, const LabeledPointCloud& cloud,
                       const std::vector<std::string>& feature_names) {
    if (!feature_names.empty() && feature_names.size() != cloud.dimension()) {
        throw InputError("feature name count does not match the cloud dimension");
    }
    out << "label";
    for (std::size_t k = 0; k < cloud.dimension(); ++k) {
        out << ',' << (feature_names.empty() ? "x" + std::to_string(k) : feature_names[k]);
    }
    out << '\n';
    char buffer[64];
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        out << static_cast<int>(cloud.label(i));
        for (double v : cloud.point(i)) {
            const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, v);
            out << ',' << std::string_view(buffer, static_cast<std::size_t>(ptr - buffer));
        }
        out << '\n';
    }
}

void write_labeled_csv(const std::filesystem::path& path, const LabeledPointCloud& cloud,
                       const std::vector<std::string>& feature_names) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    write_labeled_csv(out, cloud, feature_names);
    if (!out) throw InputError("write to '" + path.string() + "' failed");
}

}  // namespace topocover
