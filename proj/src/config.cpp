#include "stmmc/config.hpp"

#include "stmmc/io.hpp"

#include <json.hpp>

#include <charconv>
#include <sstream>

namespace stmmc {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_integer(const std::string& key, const std::string& value) {
    T out{};
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw ConfigError("config key '" + key + "': expected an integer, got '" + value + "'");
    }
    return out;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        return parse_real(value, "config key '" + key + "'");
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") {
        return true;
    }
    if (value == "false" || value == "0" || value == "no" || value == "off") {
        return false;
    }
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + value + "'");
}

std::vector<Index> parse_dims(const std::string& key, const std::string& value) {
    std::vector<Index> dims;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        dims.push_back(parse_integer<Index>(key, trim(item)));
    }
    if (dims.empty()) {
        throw ConfigError("config key '" + key + "': empty width list");
    }
    return dims;
}

std::string bool_string(bool b) {
    return b ? "true" : "false";
}

} // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text) {
    std::map<std::string, std::string> out;
    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) {
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        }
        out[key] = trim(line.substr(eq + 1));
    }
    return out;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
    TrainConfig& t = cfg.train;
    if (key == "epochs") {
        t.epochs = parse_integer<int>(key, value);
    } else if (key == "learning_rate") {
        t.learning_rate = parse_double(key, value);
    } else if (key == "seed") {
        t.seed = parse_integer<std::uint64_t>(key, value);
    } else if (key == "hidden_dims") {
        t.hidden_dims = parse_dims(key, value);
    } else if (key == "pca_dim") {
        t.pca_dim = parse_integer<int>(key, value);
    } else if (key == "k_neighbors" || key == "K") {
        t.k_neighbors = parse_integer<int>(key, value);
    } else if (key == "m_keep") {
        t.m_keep = parse_integer<int>(key, value);
    } else if (key == "theta1") {
        t.loss_weights.theta1 = parse_double(key, value);
    } else if (key == "theta2") {
        t.loss_weights.theta2 = parse_double(key, value);
    } else if (key == "use_image_modality") {
        t.use_image_modality = parse_bool(key, value);
    } else if (key == "use_contrastive") {
        t.use_contrastive = parse_bool(key, value);
    } else if (key == "use_smoothing") {
        t.use_smoothing = parse_bool(key, value);
    } else if (key == "b_smooth") {
        t.b_smooth = parse_integer<int>(key, value);
    } else if (key == "n_clusters") {
        t.n_clusters = parse_integer<int>(key, value);
    } else if (key == "normalize") {
        t.normalize = parse_bool(key, value);
    } else if (key == "scale") {
        t.scale = parse_bool(key, value);
    } else if (key == "cluster_pca_dim") {
        t.cluster_pca_dim = parse_integer<int>(key, value);
    } else if (key == "patch_width") {
        t.patch_width = parse_integer<int>(key, value);
    } else if (key == "expr_path") {
        cfg.expr_path = value;
    } else if (key == "coord_path") {
        cfg.coord_path = value;
    } else if (key == "feat_path") {
        cfg.feat_path = value;
    } else if (key == "image_path") {
        cfg.image_path = value;
    } else if (key == "out_dir") {
        cfg.out_dir = value;
    } else if (key == "write_checkpoint") {
        cfg.write_checkpoint = parse_bool(key, value);
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
    RunConfig cfg;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        nlohmann::json manifest;
        try {
            manifest = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(path.string() + ": invalid JSON manifest: " + e.what());
        }
        if (!manifest.contains("config") || !manifest["config"].is_object()) {
            throw ConfigError(path.string() + ": manifest has no 'config' object");
        }
        for (const auto& [key, value] : manifest["config"].items()) {
            apply_setting(cfg, key, value.is_string() ? value.get<std::string>() : value.dump());
        }
        return cfg;
    }
    for (const auto& [key, value] : parse_key_values(text)) {
        apply_setting(cfg, key, value);
    }
    return cfg;
}

std::string to_key_values(const RunConfig& cfg) {
    const TrainConfig& t = cfg.train;
    std::string dims;
    for (std::size_t i = 0; i < t.hidden_dims.size(); ++i) {
        dims += (i ? "," : "") + std::to_string(t.hidden_dims[i]);
    }
    std::ostringstream out;
    out << "expr_path = " << cfg.expr_path << "\n"
        << "coord_path = " << cfg.coord_path << "\n"
        << "feat_path = " << cfg.feat_path << "\n"
        << "image_path = " << cfg.image_path << "\n"
        << "out_dir = " << cfg.out_dir << "\n"
        << "write_checkpoint = " << bool_string(cfg.write_checkpoint) << "\n"
        << "epochs = " << t.epochs << "\n"
        << "learning_rate = " << format_real(t.learning_rate) << "\n"
        << "seed = " << t.seed << "\n"
        << "hidden_dims = " << dims << "\n"
        << "pca_dim = " << t.pca_dim << "\n"
        << "k_neighbors = " << t.k_neighbors << "\n"
        << "m_keep = " << t.m_keep << "\n"
        << "theta1 = " << format_real(t.loss_weights.theta1) << "\n"
        << "theta2 = " << format_real(t.loss_weights.theta2) << "\n"
        << "use_image_modality = " << bool_string(t.use_image_modality) << "\n"
        << "use_contrastive = " << bool_string(t.use_contrastive) << "\n"
        << "use_smoothing = " << bool_string(t.use_smoothing) << "\n"
        << "b_smooth = " << t.b_smooth << "\n"
        << "n_clusters = " << t.n_clusters << "\n"
        << "normalize = " << bool_string(t.normalize) << "\n"
        << "scale = " << bool_string(t.scale) << "\n"
        << "cluster_pca_dim = " << t.cluster_pca_dim << "\n"
        << "patch_width = " << t.patch_width << "\n";
    return out.str();
}

} // namespace stmmc
