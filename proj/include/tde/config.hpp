#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tde/errors.hpp"
#include "tde/fixedpoint.hpp"
#include "tde/systems.hpp"

namespace tde {

// JSON configuration schema (system keys: kind, alphabet, forbidden, rules,
// alpha, factors). Parse errors and key problems report the offending path.

inline Angle angle_from_config(const nlohmann::json& j, const std::string& path) {
    require(j.is_string(), errc::config_error, path + ": alpha must be a string");
    std::string s = j.get<std::string>();
    if (s == "sqrt2m1" || s == "sqrt2-1") return sqrt2_minus_1();
    if (s == "golden") return golden_conjugate();
    return angle_from_hex(s);
}

inline System system_from_json(const nlohmann::json& j, const SystemOptions& opts,
                               const std::string& path = "system") {
    require(j.is_object(), errc::config_error, path + ": expected an object");
    require(j.contains("kind") && j["kind"].is_string(), errc::config_error,
            path + ".kind: required string");
    std::string kind = j["kind"].get<std::string>();
    auto get_int = [&](const char* key) {
        require(j.contains(key) && j[key].is_number_integer(), errc::config_error,
                path + "." + key + ": required integer");
        return j[key].get<int>();
    };
    if (kind == "full_shift") return System::full_shift(get_int("alphabet"), opts);
    if (kind == "sft") {
        require(j.contains("forbidden") && j["forbidden"].is_array(), errc::config_error,
                path + ".forbidden: required array of words");
        std::vector<std::string> forb;
        for (const auto& w : j["forbidden"]) {
            require(w.is_string(), errc::config_error, path + ".forbidden: entries must be strings");
            forb.push_back(w.get<std::string>());
        }
        return System::sft(get_int("alphabet"), std::move(forb), opts);
    }
    if (kind == "substitution") {
        require(j.contains("rules") && j["rules"].is_object(), errc::config_error,
                path + ".rules: required object mapping symbols to words");
        std::map<char, std::string> rules;
        for (auto it = j["rules"].begin(); it != j["rules"].end(); ++it) {
            require(it.key().size() == 1, errc::config_error,
                    path + ".rules: keys must be single symbols");
            require(it.value().is_string(), errc::config_error,
                    path + ".rules: values must be words");
            rules[it.key()[0]] = it.value().get<std::string>();
        }
        return System::substitution(std::move(rules), opts);
    }
    if (kind == "rotation") {
        // canonical key: alpha_bits (hex fixed-point fraction or a named
        // constant); "alpha" is accepted as an alias
        const char* key = j.contains("alpha_bits") ? "alpha_bits" : "alpha";
        require(j.contains(key), errc::config_error, path + ".alpha_bits: required");
        return System::rotation(angle_from_config(j[key], path + "." + key), opts);
    }
    if (kind == "product") {
        require(j.contains("factors") && j["factors"].is_array() && j["factors"].size() == 2,
                errc::config_error, path + ".factors: required array of exactly 2 systems");
        return System::product(system_from_json(j["factors"][0], opts, path + ".factors[0]"),
                               system_from_json(j["factors"][1], opts, path + ".factors[1]"));
    }
    fail(errc::config_error, path + ".kind: unknown kind '" + kind + "'");
}

struct PipelineConfig {
    nlohmann::json raw;

    System system;
    SystemOptions sys_opts;

    int D = 1;
    double delta = 0.2;
    double eta = 0.05;
    long L = 0;  // 0 = auto
    std::uint64_t seed = 1;
    long pairs = 10000;
    long window = 16;
    long samples = 600;
    std::string out_dir = "out";

    // widim command
    std::vector<double> widim_epsilons{0.3, 0.1, 0.05};
    long widim_k_max = 20;

    // aperiodic / tower command
    long N = 2;

    // obstruct command
    long obstruct_maps = 100;
    int obstruct_nodes = 61;
    double obstruct_epsilon = 0.9;
    std::optional<nlohmann::json> obstruct_cert;
};

inline PipelineConfig load_config(const std::string& json_text) {
    PipelineConfig cfg;
    try {
        cfg.raw = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        fail(errc::config_error, std::string("config parse: ") + e.what());
    }
    const auto& j = cfg.raw;
    require(j.is_object(), errc::config_error, "config: top level must be an object");

    if (j.contains("window_cap")) {
        require(j["window_cap"].is_number_integer() && j["window_cap"].get<long>() >= 4,
                errc::config_error, "window_cap: integer >= 4");
        cfg.sys_opts.window_cap = j["window_cap"].get<int>();
    }
    require(j.contains("system"), errc::config_error, "system: required");
    cfg.system = system_from_json(j["system"], cfg.sys_opts);

    auto opt_num = [&](const char* key, auto& slot, double lo, double hi) {
        if (!j.contains(key)) return;
        require(j[key].is_number(), errc::config_error, std::string(key) + ": must be a number");
        double v = j[key].get<double>();
        require(v >= lo && v <= hi, errc::config_error,
                std::string(key) + ": out of range [" + std::to_string(lo) + "," + std::to_string(hi) + "]");
        slot = static_cast<std::remove_reference_t<decltype(slot)>>(v);
    };
    opt_num("D", cfg.D, 1, 64);
    opt_num("delta", cfg.delta, 1e-9, 1.0);
    opt_num("eta", cfg.eta, 1e-9, 1.0);
    opt_num("seed", cfg.seed, 0, 1.8e19);
    opt_num("pairs", cfg.pairs, 1, 1e9);
    opt_num("window", cfg.window, 1, 4096);
    opt_num("samples", cfg.samples, 1, 1e7);
    opt_num("N", cfg.N, 1, 64);
    require(cfg.delta > 0, errc::config_error, "delta: must be positive");
    require(cfg.eta > 0, errc::config_error, "eta: must be positive");

    if (j.contains("L")) {
        if (j["L"].is_string()) {
            require(j["L"].get<std::string>() == "auto", errc::config_error, "L: integer or \"auto\"");
            cfg.L = 0;
        } else {
            require(j["L"].is_number_integer() && j["L"].get<long>() >= 1, errc::config_error,
                    "L: integer >= 1 or \"auto\"");
            cfg.L = j["L"].get<long>();
        }
    }
    if (j.contains("out")) {
        require(j["out"].is_string(), errc::config_error, "out: must be a path string");
        cfg.out_dir = j["out"].get<std::string>();
    }
    if (j.contains("widim")) {
        const auto& w = j["widim"];
        require(w.is_object(), errc::config_error, "widim: must be an object");
        if (w.contains("epsilons")) {
            require(w["epsilons"].is_array(), errc::config_error, "widim.epsilons: array of numbers");
            cfg.widim_epsilons.clear();
            for (const auto& e : w["epsilons"]) {
                require(e.is_number() && e.get<double>() > 0, errc::config_error,
                        "widim.epsilons: positive numbers");
                cfg.widim_epsilons.push_back(e.get<double>());
            }
        }
        if (w.contains("k_max")) {
            require(w["k_max"].is_number_integer() && w["k_max"].get<long>() >= 1, errc::config_error,
                    "widim.k_max: integer >= 1");
            cfg.widim_k_max = w["k_max"].get<long>();
        }
    }
    if (j.contains("obstruct")) {
        const auto& o = j["obstruct"];
        require(o.is_object(), errc::config_error, "obstruct: must be an object");
        if (o.contains("maps")) cfg.obstruct_maps = o["maps"].get<long>();
        if (o.contains("nodes")) cfg.obstruct_nodes = o["nodes"].get<int>();
        if (o.contains("epsilon")) cfg.obstruct_epsilon = o["epsilon"].get<double>();
        require(cfg.obstruct_maps >= 1 && cfg.obstruct_nodes >= 3, errc::config_error,
                "obstruct: maps >= 1, nodes >= 3");
        require(cfg.obstruct_epsilon > 0 && cfg.obstruct_epsilon < 1, errc::config_error,
                "obstruct.epsilon: in (0,1)");
        if (o.contains("cert")) cfg.obstruct_cert = o["cert"];
    }
    return cfg;
}

inline PipelineConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), errc::config_error, "cannot open config file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return load_config(text);
}

}  // namespace tde
