#include "qnas/checkpoint.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>

#include "qnas/errors.hpp"

namespace qnas {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int b64_value(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
}

std::string b64_encode(std::span<const std::uint8_t> bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    for (std::size_t i = 0; i < bytes.size(); i += 3) {
        std::uint32_t chunk = std::uint32_t{bytes[i]} << 16;
        if (i + 1 < bytes.size()) chunk |= std::uint32_t{bytes[i + 1]} << 8;
        if (i + 2 < bytes.size()) chunk |= std::uint32_t{bytes[i + 2]};
        out.push_back(kB64Alphabet[(chunk >> 18) & 0x3f]);
        out.push_back(kB64Alphabet[(chunk >> 12) & 0x3f]);
        out.push_back(i + 1 < bytes.size() ? kB64Alphabet[(chunk >> 6) & 0x3f] : '=');
        out.push_back(i + 2 < bytes.size() ? kB64Alphabet[chunk & 0x3f] : '=');
    }
    return out;
}

std::vector<std::uint8_t> b64_decode(const std::string& text) {
    if (text.size() % 4 != 0) throw ParseError("base64: length not a multiple of 4");
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        std::uint32_t chunk = 0;
        int pad = 0;
        for (int k = 0; k < 4; ++k) {
            const char c = text[i + static_cast<std::size_t>(k)];
            chunk <<= 6;
            if (c == '=') {
                ++pad;
            } else {
                const int v = b64_value(c);
                if (v < 0 || pad > 0) throw ParseError("base64: invalid character");
                chunk |= static_cast<std::uint32_t>(v);
            }
        }
        out.push_back(static_cast<std::uint8_t>((chunk >> 16) & 0xff));
        if (pad < 2) out.push_back(static_cast<std::uint8_t>((chunk >> 8) & 0xff));
        if (pad < 1) out.push_back(static_cast<std::uint8_t>(chunk & 0xff));
    }
    return out;
}

}  // namespace

std::string encode_doubles(std::span<const double> values) {
    std::vector<std::uint8_t> bytes(values.size() * sizeof(double));
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::uint64_t bits;
        std::memcpy(&bits, &values[i], sizeof(bits));
        for (int k = 0; k < 8; ++k)
            bytes[i * 8 + static_cast<std::size_t>(k)] =
                static_cast<std::uint8_t>(bits >> (8 * k));
    }
    return b64_encode(bytes);
}

std::vector<double> decode_doubles(const std::string& text) {
    const auto bytes = b64_decode(text);
    if (bytes.size() % sizeof(double) != 0)
        throw ParseError("decode_doubles: payload is not a whole number of doubles");
    std::vector<double> values(bytes.size() / sizeof(double));
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::uint64_t bits = 0;
        for (int k = 0; k < 8; ++k)
            bits |= std::uint64_t{bytes[i * 8 + static_cast<std::size_t>(k)]} << (8 * k);
        std::memcpy(&values[i], &bits, sizeof(bits));
    }
    return values;
}

namespace {

json array_entry(std::span<const double> values, std::initializer_list<int> shape) {
    json j;
    j["shape"] = shape;
    j["data"] = encode_doubles(values);
    return j;
}

std::vector<double> read_array(const json& j, const char* name, std::size_t expected) {
    if (!j.contains(name)) throw ParseError(std::string("checkpoint: missing array \"") + name + "\"");
    auto values = decode_doubles(j[name]["data"].get<std::string>());
    if (values.size() != expected)
        throw ParseError(std::string("checkpoint: array \"") + name + "\" has " +
                         std::to_string(values.size()) + " values, expected " +
                         std::to_string(expected));
    return values;
}

}  // namespace

std::string individual_to_json(const Individual& ind) {
    const auto& m = ind.model;
    json j;
    j["id"] = ind.id;
    j["parent_id"] = ind.parent_id ? json(*ind.parent_id) : json(nullptr);
    j["birth_generation"] = ind.birth_generation;
    if (ind.fitness.has_value()) {
        j["fitness"] = std::isfinite(*ind.fitness) ? json(*ind.fitness) : json(nullptr);
    }
    j["mutation_log"] = ind.mutation_log;
    j["genome"] = json::parse(serialize_genome(m.genome));
    j["angle_scale"] = m.angle_scale;
    json params;
    params["enc1.w"] = array_entry(m.enc1.weights, {m.enc1.out_dim, m.enc1.in_dim});
    params["enc1.b"] = array_entry(m.enc1.biases, {m.enc1.out_dim});
    params["enc2.w"] = array_entry(m.enc2.weights, {m.enc2.out_dim, m.enc2.in_dim});
    params["enc2.b"] = array_entry(m.enc2.biases, {m.enc2.out_dim});
    params["q"] = array_entry(m.q_params, {m.genome.n_params});
    params["dec1.w"] = array_entry(m.dec1.weights, {m.dec1.out_dim, m.dec1.in_dim});
    params["dec1.b"] = array_entry(m.dec1.biases, {m.dec1.out_dim});
    params["dec2.w"] = array_entry(m.dec2.weights, {m.dec2.out_dim, m.dec2.in_dim});
    params["dec2.b"] = array_entry(m.dec2.biases, {m.dec2.out_dim});
    j["params"] = std::move(params);
    json adam;
    adam["learning_rate"] = ind.adam.learning_rate;
    adam["beta1"] = ind.adam.beta1;
    adam["beta2"] = ind.adam.beta2;
    adam["epsilon"] = ind.adam.epsilon;
    adam["step_count"] = ind.adam.step_count;
    adam["m"] = array_entry(ind.adam.m, {static_cast<int>(ind.adam.m.size())});
    adam["v"] = array_entry(ind.adam.v, {static_cast<int>(ind.adam.v.size())});
    j["adam"] = std::move(adam);
    return j.dump();
}

Individual individual_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("checkpoint: ") + e.what());
    }
    Individual ind;
    ind.id = j.at("id").get<int>();
    if (!j.at("parent_id").is_null()) ind.parent_id = j["parent_id"].get<int>();
    ind.birth_generation = j.at("birth_generation").get<int>();
    if (j.contains("fitness")) {
        ind.fitness = j["fitness"].is_null() ? std::numeric_limits<double>::infinity()
                                             : j["fitness"].get<double>();
    }
    ind.mutation_log = j.at("mutation_log").get<std::vector<std::string>>();

    auto& m = ind.model;
    m.genome = deserialize_genome(j.at("genome").dump());
    m.angle_scale = j.at("angle_scale").get<double>();

    const json& params = j.at("params");
    auto load_layer = [&](DenseLayer& layer, const char* w_name, const char* b_name,
                          Activation act) {
        const auto& shape = params.at(w_name).at("shape");
        layer.out_dim = shape.at(0).get<int>();
        layer.in_dim = shape.at(1).get<int>();
        layer.activation = act;
        layer.weights = read_array(params, w_name,
                                   static_cast<std::size_t>(layer.out_dim) *
                                       static_cast<std::size_t>(layer.in_dim));
        layer.biases = read_array(params, b_name, static_cast<std::size_t>(layer.out_dim));
    };
    load_layer(m.enc1, "enc1.w", "enc1.b", Activation::Rectifier);
    load_layer(m.enc2, "enc2.w", "enc2.b", Activation::Identity);
    m.q_params = read_array(params, "q", static_cast<std::size_t>(m.genome.n_params));
    load_layer(m.dec1, "dec1.w", "dec1.b", Activation::Rectifier);
    load_layer(m.dec2, "dec2.w", "dec2.b", Activation::Sigmoid);

    const json& adam = j.at("adam");
    ind.adam.learning_rate = adam.at("learning_rate").get<double>();
    ind.adam.beta1 = adam.at("beta1").get<double>();
    ind.adam.beta2 = adam.at("beta2").get<double>();
    ind.adam.epsilon = adam.at("epsilon").get<double>();
    ind.adam.step_count = adam.at("step_count").get<long>();
    ind.adam.m = decode_doubles(adam.at("m").at("data").get<std::string>());
    ind.adam.v = decode_doubles(adam.at("v").at("data").get<std::string>());
    return ind;
}

void save_checkpoint(const std::string& dir, int generation,
                     const std::vector<Individual>& population) {
    fs::create_directories(dir);
    for (const auto& ind : population) {
        char name[32];
        std::snprintf(name, sizeof(name), "ind_%04d.json", ind.id);
        std::ofstream out(fs::path(dir) / name);
        if (!out) throw ConfigError("checkpoint: cannot write to \"" + dir + "\"");
        out << individual_to_json(ind) << '\n';
    }
    json meta;
    meta["generation"] = generation;
    meta["count"] = population.size();
    std::ofstream out(fs::path(dir) / "meta.json");
    out << meta.dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::string& dir) {
    std::ifstream meta_in(fs::path(dir) / "meta.json");
    if (!meta_in) throw ConfigError("checkpoint: no meta.json in \"" + dir + "\"");
    json meta = json::parse(std::string(std::istreambuf_iterator<char>(meta_in),
                                        std::istreambuf_iterator<char>()));
    Checkpoint checkpoint;
    checkpoint.generation = meta.at("generation").get<int>();
    const auto count = meta.at("count").get<std::size_t>();

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (name.rfind("ind_", 0) == 0) files.push_back(entry.path());
    }
    if (files.size() != count)
        throw ConfigError("checkpoint: \"" + dir + "\" has " + std::to_string(files.size()) +
                          " individuals, meta says " + std::to_string(count));
    std::sort(files.begin(), files.end());
    for (const auto& path : files) {
        std::ifstream in(path);
        checkpoint.population.push_back(individual_from_json(
            std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>())));
    }
    return checkpoint;
}

int latest_checkpoint_generation(const std::string& run_dir) {
    const fs::path base = fs::path(run_dir) / "checkpoints";
    int latest = -1;
    if (!fs::is_directory(base)) return latest;
    for (const auto& entry : fs::directory_iterator(base)) {
        const auto name = entry.path().filename().string();
        if (name.rfind("gen", 0) != 0) continue;
        if (!fs::exists(entry.path() / "meta.json")) continue;  // incomplete
        latest = std::max(latest, std::atoi(name.c_str() + 3));
    }
    return latest;
}

}  // namespace qnas
