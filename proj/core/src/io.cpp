#include "topocover/io.hpp"

#include <charconv>
#include <ostream>

#include "topocover/errors.hpp"

#ifndef TOPOCOVER_VERSION
#define TOPOCOVER_VERSION "0.0.0"
#endif

namespace topocover::io {

std::string_view library_version() noexcept { return TOPOCOVER_VERSION; }

std::string format_double(double value) {
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
    return std::string(buffer, ptr);
}

namespace {

void check_version(const json& doc, std::string_view what) {
    if (!doc.contains("format_version") || doc.at("format_version").get<int>() != kFormatVersion) {
        throw InputError(std::string(what) + " document has an unsupported format_version");
    }
}

std::string coordinates_string(std::span<const double> p) {
    std::string s;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (k) s += ' ';
        s += format_double(p[k]);
    }
    return s;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string optional_cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

json cover_to_json(const ClassCover& cover) {
    json balls = json::array();
    for (std::size_t i = 0; i < cover.size(); ++i) {
        const auto c = cover.center(i);
        balls.push_back({{"center", std::vector<double>(c.begin(), c.end())}, {"radius", cover.balls()[i].radius}});
    }
    const auto& meta = cover.metadata();
    return {{"format_version", kFormatVersion},
            {"class", static_cast<int>(cover.class_label())},
            {"dimension", cover.dimension()},
            {"balls", std::move(balls)},
            {"metadata",
             {{"subsampled", meta.subsampled},
              {"seed", meta.seed ? json(*meta.seed) : json(nullptr)},
              {"dropped_points", meta.dropped_points}}}};
}

ClassCover cover_from_json(const json& doc) {
    try {
        check_version(doc, "cover");
        const int cls = doc.at("class").get<int>();
        if (cls != 0 && cls != 1) throw InputError("cover class must be 0 or 1");
        const auto d = doc.at("dimension").get<std::size_t>();
        std::vector<double> coords;
        std::vector<Ball> balls;
        for (const auto& b : doc.at("balls")) {
            const auto center = b.at("center").get<std::vector<double>>();
            if (center.size() != d) throw InputError("ball center has the wrong dimension");
            balls.push_back({balls.size(), b.at("radius").get<double>()});
            coords.insert(coords.end(), center.begin(), center.end());
        }
        auto cloud = std::make_shared<const LabeledPointCloud>(
            d, std::move(coords), std::vector<Label>(balls.size(), static_cast<Label>(cls)));
        CoverMetadata meta;
        const auto& m = doc.at("metadata");
        meta.subsampled = m.at("subsampled").get<bool>();
        if (!m.at("seed").is_null()) meta.seed = m.at("seed").get<std::uint64_t>();
        meta.dropped_points = m.at("dropped_points").get<std::vector<std::size_t>>();
        return ClassCover(std::move(cloud), static_cast<Label>(cls), std::move(balls), std::move(meta));
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed cover document: ") + e.what());
    }
}

void write_graphml(std::ostream& out, const ClassCover& cover, const SkeletonGraph& graph) {
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
        << "  <key id=\"center\" for=\"node\" attr.name=\"center\" attr.type=\"string\"/>\n"
        << "  <key id=\"radius\" for=\"node\" attr.name=\"radius\" attr.type=\"double\"/>\n"
        << "  <key id=\"class\" for=\"graph\" attr.name=\"class\" attr.type=\"int\"/>\n"
        << "  <graph id=\"skeleton\" edgedefault=\"undirected\">\n"
        << "    <data key=\"class\">" << static_cast<int>(cover.class_label()) << "</data>\n";
    for (std::size_t i = 0; i < graph.node_count; ++i) {
        out << "    <node id=\"n" << i << "\"><data key=\"center\">" << coordinates_string(cover.center(i))
            << "</data><data key=\"radius\">" << format_double(cover.balls()[i].radius) << "</data></node>\n";
    }
    for (std::size_t e = 0; e < graph.edges.size(); ++e) {
        out << "    <edge id=\"e" << e << "\" source=\"n" << graph.edges[e].first << "\" target=\"n"
            << graph.edges[e].second << "\"/>\n";
    }
    out << "  </graph>\n</graphml>\n";
}

void write_dot(std::ostream& out, const ClassCover& cover, const SkeletonGraph& graph) {
    out << "graph skeleton_class_" << static_cast<int>(cover.class_label()) << " {\n";
    for (std::size_t i = 0; i < graph.node_count; ++i) {
        out << "  n" << i << " [center=\"" << coordinates_string(cover.center(i)) << "\", radius="
            << format_double(cover.balls()[i].radius) << "];\n";
    }
    for (const auto& [a, b] : graph.edges) out << "  n" << a << " -- n" << b << ";\n";
    out << "}\n";
}

json betti_to_json(const BettiProfile& profile) {
    return {{"betti", profile.betti}, {"total", profile.total}, {"field", "GF(2)"}};
}

BettiProfile betti_from_json(const json& doc) {
    try {
        auto profile = BettiProfile::from_betti(doc.at("betti").get<std::vector<std::int64_t>>());
        if (doc.contains("total") && doc.at("total").get<std::int64_t>() != profile.total) {
            throw InputError("betti document total does not match the betti numbers");
        }
        return profile;
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed betti document: ") + e.what());
    }
}

void write_simplex_counts_csv(std::ostream& out, const SimplicialComplex& complex) {
    out << "dimension,simplices\n";
    for (int k = 0; k <= complex.max_dim(); ++k) out << k << ',' << complex.count(k) << '\n';
}

json report_to_json(const EvaluationReport& report) {
    const auto& c = report.confusion;
    const auto& s = report.status;
    return {{"total_accuracy", report.total_accuracy},
            {"true_positive_rate", optional_number(report.true_positive_rate)},
            {"false_positive_rate", optional_number(report.false_positive_rate)},
            {"f1_score", optional_number(report.f1_score)},
            {"out_of_cover_proportion", report.out_of_cover_proportion},
            {"confused_proportion", report.confused_proportion},
            {"confusion",
             {{"true_positive", c.true_positive},
              {"false_positive", c.false_positive},
              {"true_negative", c.true_negative},
              {"false_negative", c.false_negative}}},
            {"status",
             {{"only_class_0", s.only_class0},
              {"only_class_1", s.only_class1},
              {"confused", s.confused},
              {"outside", s.outside}}}};
}

std::string report_csv_header() {
    return "total_accuracy,true_positive_rate,false_positive_rate,f1_score,out_of_cover_proportion,"
           "confused_proportion,tp,fp,tn,fn";
}

std::string report_csv_row(const EvaluationReport& r) {
    const auto& c = r.confusion;
    return format_double(r.total_accuracy) + ',' + optional_cell(r.true_positive_rate) + ',' +
           optional_cell(r.false_positive_rate) + ',' + optional_cell(r.f1_score) + ',' +
           format_double(r.out_of_cover_proportion) + ',' + format_double(r.confused_proportion) + ',' +
           std::to_string(c.true_positive) + ',' + std::to_string(c.false_positive) + ',' +
           std::to_string(c.true_negative) + ',' + std::to_string(c.false_negative);
}

json model_to_json(const nn::MlpModel& model) {
    json layers = json::array();
    for (const auto& l : model.layers()) {
        json rows = json::array();
        for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
            std::vector<double> row(static_cast<std::size_t>(l.weights.cols()));
            for (Eigen::Index c = 0; c < l.weights.cols(); ++c) row[static_cast<std::size_t>(c)] = l.weights(r, c);
            rows.push_back(std::move(row));
        }
        layers.push_back({{"weights", std::move(rows)},
                          {"bias", std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size())}});
    }
    return {{"format_version", kFormatVersion},
            {"input_dim", model.input_dim()},
            {"layer_dims", model.layer_dims()},
            {"head", nn::to_string(model.head())},
            {"layers", std::move(layers)}};
}

nn::MlpModel model_from_json(const json& doc) {
    try {
        check_version(doc, "model");
        std::vector<nn::DenseLayer> layers;
        for (const auto& l : doc.at("layers")) {
            const auto rows = l.at("weights").get<std::vector<std::vector<double>>>();
            const auto bias = l.at("bias").get<std::vector<double>>();
            nn::DenseLayer layer;
            const auto cols = rows.empty() ? 0 : rows.front().size();
            layer.weights.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
            for (std::size_t r = 0; r < rows.size(); ++r) {
                if (rows[r].size() != cols) throw InputError("ragged weight matrix");
                for (std::size_t c = 0; c < cols; ++c) {
                    layer.weights(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
                }
            }
            layer.bias = Eigen::Map<const Eigen::VectorXd>(bias.data(), static_cast<Eigen::Index>(bias.size()));
            layers.push_back(std::move(layer));
        }
        nn::MlpModel model(doc.at("input_dim").get<std::size_t>(), std::move(layers),
                           nn::head_from_string(doc.at("head").get<std::string>()));
        if (doc.contains("layer_dims") && doc.at("layer_dims").get<std::vector<std::size_t>>() != model.layer_dims()) {
            throw InputError("layer_dims do not match the stored weights");
        }
        return model;
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed model document: ") + e.what());
    }
}

std::string accuracy_csv_header() { return "structure,mean,min,max"; }

std::string accuracy_csv_row(std::string_view structure, const nn::AccuracyStats& stats) {
    return "\"" + std::string(structure) + "\"," + format_double(stats.mean) + ',' + format_double(stats.min) + ',' +
           format_double(stats.max);
}

}  // namespace topocover::io
