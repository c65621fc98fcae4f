#include "porogen/pipeline/manifest.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "porogen/core/errors.hpp"
#include "porogen/core/io.hpp"

namespace porogen::pipeline {

namespace {

// RFC 4180 quoting: fields holding commas or quotes are wrapped in double
// quotes with embedded quotes doubled.
std::string csv_field(const std::string& value) {
    if (value.find_first_of(",\"\n") == std::string::npos) return value;
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"' && cur.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

void write_manifest_csv(const std::filesystem::path& path, const std::vector<ManifestRow>& rows) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write manifest: " + path.string());
    out << "path,depth_index,porosity,class,augmented,source_id\n";
    out.precision(10);
    for (const auto& r : rows) {
        out << csv_field(r.path) << ',' << r.depth_index << ',' << r.porosity << ','
            << r.porosity_class << ',' << (r.augmented ? 1 : 0) << ',' << csv_field(r.source_id)
            << '\n';
    }
}

std::vector<ManifestRow> read_manifest_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read manifest: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("empty manifest: " + path.string());
    std::vector<ManifestRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != 6) throw ValidationError("malformed manifest row: " + line);
        ManifestRow r;
        r.path = f[0];
        r.depth_index = std::stoi(f[1]);
        r.porosity = std::stod(f[2]);
        r.porosity_class = std::stoi(f[3]);
        r.augmented = f[4] == "1" || f[4] == "true";
        r.source_id = f[5];
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_manifest_json(const std::filesystem::path& path, const std::vector<ManifestRow>& rows) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : rows) {
        j.push_back({{"path", r.path},
                     {"depth_index", r.depth_index},
                     {"porosity", r.porosity},
                     {"class", r.porosity_class},
                     {"augmented", r.augmented},
                     {"source_id", r.source_id}});
    }
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write manifest: " + path.string());
    out << j.dump(2) << '\n';
}

std::vector<ManifestRow> read_manifest_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read manifest: " + path.string());
    nlohmann::json j;
    in >> j;
    std::vector<ManifestRow> rows;
    for (const auto& e : j) {
        ManifestRow r;
        r.path = e.at("path").get<std::string>();
        r.depth_index = e.at("depth_index").get<int>();
        r.porosity = e.at("porosity").get<double>();
        r.porosity_class = e.at("class").get<int>();
        r.augmented = e.at("augmented").get<bool>();
        r.source_id = e.at("source_id").get<std::string>();
        rows.push_back(std::move(r));
    }
    return rows;
}

std::filesystem::path corpus_patch_path(int depth_index, int porosity_class, int patch_index) {
    return std::filesystem::path("depth_" + std::to_string(depth_index)) /
           ("class_" + std::to_string(porosity_class)) /
           ("patch_" + std::to_string(patch_index) + ".png");
}

std::filesystem::path save_corpus(const std::filesystem::path& root,
                                  const std::vector<PatchRecord>& records, int n_depths) {
    std::filesystem::create_directories(root);
    std::vector<ManifestRow> rows;
    std::map<std::pair<int, int>, int> counters;
    for (const auto& rec : records) {
        if (rec.depth.n_depths != n_depths)
            throw ValidationError("record depth table does not match corpus depth count");
        int cls = rec.porosity_class < 0 ? 0 : rec.porosity_class;
        int k = counters[{rec.depth.index, cls}]++;
        auto rel = corpus_patch_path(rec.depth.index, cls, k);
        std::filesystem::create_directories(root / rel.parent_path());
        write_image(root / rel, rec.image);
        ManifestRow row;
        row.path = rel.generic_string();
        row.depth_index = rec.depth.index;
        row.porosity = rec.porosity;
        row.porosity_class = rec.porosity_class;
        row.augmented = rec.augmented;
        row.source_id = rec.source_id;
        rows.push_back(std::move(row));
    }
    write_manifest_csv(root / "manifest.csv", rows);
    write_manifest_json(root / "manifest.json", rows);
    return root / "manifest.csv";
}

std::vector<PatchRecord> load_corpus(const std::filesystem::path& manifest_path, int n_depths) {
    auto rows = manifest_path.extension() == ".json" ? read_manifest_json(manifest_path)
                                                     : read_manifest_csv(manifest_path);
    auto root = manifest_path.parent_path();
    std::vector<PatchRecord> records;
    for (const auto& r : rows) {
        PatchRecord rec;
        rec.image = read_image(root / r.path);
        rec.porosity = r.porosity;
        rec.depth = DepthLabel(r.depth_index, n_depths);
        rec.porosity_class = r.porosity_class;
        rec.augmented = r.augmented;
        rec.source_id = r.source_id;
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace porogen::pipeline
