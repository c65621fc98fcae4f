#include "porogen/pipeline/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "porogen/core/errors.hpp"

namespace porogen::pipeline {

namespace {

const std::set<std::string> kKnownKeys = {
    "corpus_dir",      "work_dir",       "depth_table",  "patch_size",     "n_classes",
    "target_per_class", "min_class_size", "rev_threshold", "w_phi",         "w_k",
    "arch",            "toy",            "epochs",       "batch_size",     "seg_epochs",
    "synth_image_size", "synth_per_depth", "pixel_size",  "seed"};

}  // namespace

PipelineConfig validate_config_json(const nlohmann::json& j) {
    std::vector<std::string> errors;
    if (!j.is_object()) throw ValidationError("config must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (!kKnownKeys.count(key)) errors.push_back("unknown key: " + key);

    PipelineConfig c;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) {
            try {
                field = j.at(key).get<std::decay_t<decltype(field)>>();
            } catch (const nlohmann::json::exception&) {
                errors.push_back(std::string("bad value type for key: ") + key);
            }
        }
    };
    std::string corpus = c.corpus_dir.string(), work = c.work_dir.string();
    get("corpus_dir", corpus);
    get("work_dir", work);
    c.corpus_dir = corpus;
    c.work_dir = work;
    get("patch_size", c.patch_size);
    get("n_classes", c.n_classes);
    get("target_per_class", c.target_per_class);
    get("min_class_size", c.min_class_size);
    get("rev_threshold", c.rev_threshold);
    get("w_phi", c.w_phi);
    get("w_k", c.w_k);
    get("arch", c.arch);
    get("toy", c.toy);
    get("epochs", c.epochs);
    get("batch_size", c.batch_size);
    get("seg_epochs", c.seg_epochs);
    get("synth_image_size", c.synth_image_size);
    get("synth_per_depth", c.synth_per_depth);
    get("pixel_size", c.pixel_size);
    get("seed", c.seed);

    if (j.contains("depth_table")) {
        if (!j.at("depth_table").is_array()) {
            errors.push_back("depth_table must be an array");
        } else {
            for (const auto& e : j.at("depth_table")) {
                DepthTableEntry d;
                try {
                    d.depth_m = e.at("depth_m").get<double>();
                    d.core_porosity = e.at("core_porosity").get<double>();
                    d.core_permeability = e.at("core_permeability").get<double>();
                } catch (const nlohmann::json::exception&) {
                    errors.push_back("depth_table entries need depth_m, core_porosity, "
                                     "core_permeability");
                    break;
                }
                if (d.core_porosity <= 0.0 || d.core_porosity >= 1.0)
                    errors.push_back("core_porosity must lie in (0,1)");
                if (d.core_permeability <= 0.0)
                    errors.push_back("core_permeability must be positive");
                c.depth_table.push_back(d);
            }
        }
    }
    if (c.depth_table.empty()) {
        // Two synthetic depths so the toy pipeline runs out of the box.
        c.depth_table = {{2400.0, 0.20, 30.0}, {2500.0, 0.25, 60.0}};
    }

    if (c.batch_size < 2 || c.batch_size % 2 != 0)
        errors.push_back("batch_size must be even (the adversarial step splits it in half)");
    if (c.epochs < 1) errors.push_back("epochs must be >= 1");
    if (c.seg_epochs < 1) errors.push_back("seg_epochs must be >= 1");
    if (c.n_classes < 1) errors.push_back("n_classes must be >= 1");
    if (c.target_per_class < 1) errors.push_back("target_per_class must be >= 1");
    if (c.min_class_size < 1) errors.push_back("min_class_size must be >= 1");
    if (c.rev_threshold <= 0.0) errors.push_back("rev_threshold must be positive");
    if (c.pixel_size <= 0.0) errors.push_back("pixel_size must be positive");
    if (c.w_phi < 0.0 || c.w_k < 0.0 || std::abs(c.w_phi + c.w_k - 1.0) > 1e-9)
        errors.push_back("w_phi and w_k must be non-negative and sum to 1");
    if (c.arch != "original" && c.arch != "model-a" && c.arch != "model-b" && c.arch != "modelA" &&
        c.arch != "modelB")
        errors.push_back("arch must be one of original|modelA|modelB");
    if (c.synth_image_size < 16) errors.push_back("synth_image_size must be >= 16");
    if (c.synth_per_depth < 1) errors.push_back("synth_per_depth must be >= 1");
    if (c.patch_size < 0) errors.push_back("patch_size must be >= 0 (0 = auto)");

    if (!errors.empty()) {
        std::string msg = "config errors:";
        for (const auto& e : errors) msg += "\n  - " + e;
        throw ValidationError(msg);
    }
    if (c.arch == "modelA") c.arch = "model-a";
    if (c.arch == "modelB") c.arch = "model-b";
    return c;
}

PipelineConfig validate_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ValidationError("cannot read config file: " + file.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("config parse error: " + std::string(e.what()));
    }
    return validate_config_json(j);
}

nlohmann::json normalized_dump(const PipelineConfig& c) {
    nlohmann::json j;
    j["corpus_dir"] = c.corpus_dir.string();
    j["work_dir"] = c.work_dir.string();
    auto& table = j["depth_table"] = nlohmann::json::array();
    for (const auto& d : c.depth_table)
        table.push_back({{"depth_m", d.depth_m},
                         {"core_porosity", d.core_porosity},
                         {"core_permeability", d.core_permeability}});
    j["patch_size"] = c.patch_size;
    j["n_classes"] = c.n_classes;
    j["target_per_class"] = c.target_per_class;
    j["min_class_size"] = c.min_class_size;
    j["rev_threshold"] = c.rev_threshold;
    j["w_phi"] = c.w_phi;
    j["w_k"] = c.w_k;
    j["arch"] = c.arch;
    j["toy"] = c.toy;
    j["epochs"] = c.epochs;
    j["batch_size"] = c.batch_size;
    j["seg_epochs"] = c.seg_epochs;
    j["synth_image_size"] = c.synth_image_size;
    j["synth_per_depth"] = c.synth_per_depth;
    j["pixel_size"] = c.pixel_size;
    j["seed"] = c.seed;
    j["provenance"] = {
        {"target_per_class", "default: 160 images per retained porosity class"},
        {"min_class_size", "default: classes under 20 images are excluded"},
        {"rev_threshold", "default: 0.06 porosity standard deviation cutoff"},
        {"w_phi", "default: equal weighting of the porosity error term (0.5)"},
        {"w_k", "default: equal weighting of the permeability error term (0.5)"},
        {"epochs", "default: 200 adversarial training epochs"},
        {"batch_size", "default: minibatch of 16, split half real / half generated"},
    };
    return j;
}

std::string config_hash(const PipelineConfig& c) {
    std::string s = normalized_dump(c).dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    std::ostringstream out;
    out << std::hex << h;
    return out.str();
}

}  // namespace porogen::pipeline
