#include "qnas/config.hpp"

#include <fstream>
#include <functional>
#include <nlohmann/json.hpp>
#include <vector>

#include "qnas/errors.hpp"

namespace qnas {

using nlohmann::json;

namespace {

struct KeyHandler {
    const char* name;
    std::function<void(RunConfig&, const json&)> apply;
    std::function<json(const RunConfig&)> render;
};

int as_int(const json& v, const char* key) {
    if (!v.is_number_integer())
        throw ConfigError(std::string("config: \"") + key + "\" must be an integer");
    return v.get<int>();
}

double as_double(const json& v, const char* key) {
    if (!v.is_number())
        throw ConfigError(std::string("config: \"") + key + "\" must be a number");
    return v.get<double>();
}

std::uint64_t as_seed(const json& v, const char* key) {
    if (!v.is_number_integer())
        throw ConfigError(std::string("config: \"") + key + "\" must be an integer");
    return v.get<std::uint64_t>();
}

std::string as_string(const json& v, const char* key) {
    if (!v.is_string())
        throw ConfigError(std::string("config: \"") + key + "\" must be a string");
    return v.get<std::string>();
}

std::vector<KeyHandler> handlers() {
    std::vector<KeyHandler> out;
    auto add = [&](const char* name, std::function<void(RunConfig&, const json&)> apply,
                   std::function<json(const RunConfig&)> render) {
        out.push_back({name, std::move(apply), std::move(render)});
    };

    add("master_seed",
        [](RunConfig& c, const json& v) { c.ga.master_seed = as_seed(v, "master_seed"); },
        [](const RunConfig& c) { return json(c.ga.master_seed); });
    add("ga.population_size",
        [](RunConfig& c, const json& v) { c.ga.population_size = as_int(v, "ga.population_size"); },
        [](const RunConfig& c) { return json(c.ga.population_size); });
    add("ga.elite_k", [](RunConfig& c, const json& v) { c.ga.elite_k = as_int(v, "ga.elite_k"); },
        [](const RunConfig& c) { return json(c.ga.elite_k); });
    add("ga.generations",
        [](RunConfig& c, const json& v) { c.ga.generations = as_int(v, "ga.generations"); },
        [](const RunConfig& c) { return json(c.ga.generations); });
    add("ga.epochs_per_generation",
        [](RunConfig& c, const json& v) {
            c.ga.epochs_per_generation = as_int(v, "ga.epochs_per_generation");
        },
        [](const RunConfig& c) { return json(c.ga.epochs_per_generation); });
    add("ga.rot_mutation_rate",
        [](RunConfig& c, const json& v) {
            c.ga.rot_mutation_rate = as_double(v, "ga.rot_mutation_rate");
        },
        [](const RunConfig& c) { return json(c.ga.rot_mutation_rate); });
    add("ga.fixed_gate_mutation_rate",
        [](RunConfig& c, const json& v) {
            c.ga.fixed_gate_mutation_rate = as_double(v, "ga.fixed_gate_mutation_rate");
        },
        [](const RunConfig& c) { return json(c.ga.fixed_gate_mutation_rate); });
    add("ga.param_perturb_sigma",
        [](RunConfig& c, const json& v) {
            c.ga.param_perturb_sigma = as_double(v, "ga.param_perturb_sigma");
        },
        [](const RunConfig& c) { return json(c.ga.param_perturb_sigma); });
    add("ga.max_genes",
        [](RunConfig& c, const json& v) { c.ga.max_genes = as_int(v, "ga.max_genes"); },
        [](const RunConfig& c) { return json(c.ga.max_genes); });
    add("circuit.n_qubits",
        [](RunConfig& c, const json& v) { c.model.n_qubits = as_int(v, "circuit.n_qubits"); },
        [](const RunConfig& c) { return json(c.model.n_qubits); });
    add("circuit.depth",
        [](RunConfig& c, const json& v) { c.model.depth = as_int(v, "circuit.depth"); },
        [](const RunConfig& c) { return json(c.model.depth); });
    add("nn.hidden_width",
        [](RunConfig& c, const json& v) { c.model.hidden_width = as_int(v, "nn.hidden_width"); },
        [](const RunConfig& c) { return json(c.model.hidden_width); });
    add("nn.angle_scale",
        [](RunConfig& c, const json& v) { c.model.angle_scale = as_double(v, "nn.angle_scale"); },
        [](const RunConfig& c) { return json(c.model.angle_scale); });
    add("train.batch_size",
        [](RunConfig& c, const json& v) {
            const int b = as_int(v, "train.batch_size");
            if (b < 1) throw ConfigError("config: \"train.batch_size\" must be >= 1");
            c.train.batch_size = static_cast<std::size_t>(b);
        },
        [](const RunConfig& c) { return json(c.train.batch_size); });
    add("train.learning_rate",
        [](RunConfig& c, const json& v) {
            c.train.learning_rate = as_double(v, "train.learning_rate");
            if (!(c.train.learning_rate > 0.0))
                throw ConfigError("config: \"train.learning_rate\" must be positive");
        },
        [](const RunConfig& c) { return json(c.train.learning_rate); });
    add("train.threads",
        [](RunConfig& c, const json& v) {
            c.train.threads = as_int(v, "train.threads");
            if (c.train.threads < 0) throw ConfigError("config: \"train.threads\" must be >= 0");
        },
        [](const RunConfig& c) { return json(c.train.threads); });
    add("dataset.path",
        [](RunConfig& c, const json& v) { c.dataset_path = as_string(v, "dataset.path"); },
        [](const RunConfig& c) { return json(c.dataset_path); });
    add("dataset.test_path",
        [](RunConfig& c, const json& v) {
            c.dataset_test_path = as_string(v, "dataset.test_path");
        },
        [](const RunConfig& c) { return json(c.dataset_test_path); });
    add("dataset.kind",
        [](RunConfig& c, const json& v) { c.dataset_kind = as_string(v, "dataset.kind"); },
        [](const RunConfig& c) { return json(c.dataset_kind); });
    add("split.fractions",
        [](RunConfig& c, const json& v) {
            if (!v.is_array() || v.size() != 3)
                throw ConfigError("config: \"split.fractions\" must be [train, val, test]");
            c.split_spec.train_fraction = as_double(v[0], "split.fractions[0]");
            c.split_spec.val_fraction = as_double(v[1], "split.fractions[1]");
            c.split_spec.test_fraction = as_double(v[2], "split.fractions[2]");
        },
        [](const RunConfig& c) {
            return json::array({c.split_spec.train_fraction, c.split_spec.val_fraction,
                                c.split_spec.test_fraction});
        });
    add("split.seed",
        [](RunConfig& c, const json& v) { c.split_spec.shuffle_seed = as_seed(v, "split.seed"); },
        [](const RunConfig& c) { return json(c.split_spec.shuffle_seed); });
    add("split.caps",
        [](RunConfig& c, const json& v) {
            if (!v.is_array() || v.size() != 3)
                throw ConfigError("config: \"split.caps\" must be [train, val, test] (0 = uncapped)");
            for (int i = 0; i < 3; ++i)
                if (as_int(v[static_cast<std::size_t>(i)], "split.caps") < 0)
                    throw ConfigError("config: \"split.caps\" entries must be >= 0");
            c.split_spec.train_cap = v[0].get<std::size_t>();
            c.split_spec.val_cap = v[1].get<std::size_t>();
            c.split_spec.test_cap = v[2].get<std::size_t>();
        },
        [](const RunConfig& c) {
            return json::array({c.split_spec.train_cap, c.split_spec.val_cap,
                                c.split_spec.test_cap});
        });
    add("out.dir", [](RunConfig& c, const json& v) { c.out_dir = as_string(v, "out.dir"); },
        [](const RunConfig& c) { return json(c.out_dir); });
    add("out.recon_samples",
        [](RunConfig& c, const json& v) {
            c.recon_samples = as_int(v, "out.recon_samples");
            if (c.recon_samples < 1)
                throw ConfigError("config: \"out.recon_samples\" must be >= 1");
        },
        [](const RunConfig& c) { return json(c.recon_samples); });
    return out;
}

void apply_key(RunConfig& config, const std::string& key, const json& value) {
    static const auto known = handlers();
    for (const auto& handler : known) {
        if (key == handler.name) {
            handler.apply(config, value);
            return;
        }
    }
    std::string valid;
    for (const auto& handler : known) {
        if (!valid.empty()) valid += ", ";
        valid += handler.name;
    }
    throw ConfigError("config: unknown key \"" + key + "\"; valid keys: " + valid);
}

}  // namespace

RunConfig parse_config(const std::string& path,
                       const std::map<std::string, std::string>& overrides) {
    RunConfig config;  // paper defaults
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw ConfigError("config: cannot open \"" + path + "\"");
        json j;
        try {
            j = json::parse(std::string(std::istreambuf_iterator<char>(in),
                                        std::istreambuf_iterator<char>()));
        } catch (const json::parse_error& e) {
            throw ConfigError("config: \"" + path + "\" is not valid JSON: " + e.what());
        }
        if (!j.is_object()) throw ConfigError("config: \"" + path + "\" must hold a JSON object");
        for (const auto& [key, value] : j.items()) apply_key(config, key, value);
    }
    for (const auto& [key, text] : overrides) {
        json value;
        try {
            value = json::parse(text);
        } catch (const json::parse_error&) {
            value = json(text);  // plain strings (e.g. paths) arrive unquoted
        }
        apply_key(config, key, value);
    }
    validate_run_config(config);
    return config;
}

void validate_run_config(const RunConfig& config) {
    validate_ga_config(config.ga);
    validate_model_config(config.model);
    validate_split_spec(config.split_spec);
    if (config.dataset_kind != "mnist" && config.dataset_kind != "fashion_mnist")
        throw ConfigError("config: \"dataset.kind\" must be \"mnist\" or \"fashion_mnist\"");
    if (!config.dataset_test_path.empty() && config.split_spec.test_fraction > 0.0)
        throw ConfigError(
            "config: provide either \"dataset.test_path\" or a nonzero test fraction, not both");
}

std::string config_to_json(const RunConfig& config) {
    json j;
    for (const auto& handler : handlers()) j[handler.name] = handler.render(config);
    return j.dump(2);
}

RunConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    RunConfig config;
    for (const auto& [key, value] : j.items()) apply_key(config, key, value);
    validate_run_config(config);
    return config;
}

DatasetTag dataset_tag(const RunConfig& config) {
    return config.dataset_kind == "fashion_mnist" ? DatasetTag::FashionMnist : DatasetTag::Mnist;
}

}  // namespace qnas
