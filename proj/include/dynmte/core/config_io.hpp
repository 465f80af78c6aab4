#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "dynmte/core/error.hpp"
#include "dynmte/core/types.hpp"

namespace dynmte {

using json = nlohmann::json;

namespace detail {

inline void reject_unknown_keys(const json& j, std::initializer_list<const char*> known, const char* what) {
    if (!j.is_object()) throw ValidationError("core-data", std::string(what) + " must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw ValidationError("core-data", std::string("unknown field '") + key + "' in " + what);
    }
}

template <class T>
void read_field(const json& j, const char* key, T& out, const char* what) {
    auto it = j.find(key);
    if (it == j.end()) return;
    try {
        out = it->template get<T>();
    } catch (const json::exception& e) {
        throw ValidationError("core-data", std::string("field '") + key + "' in " + what + ": " + e.what());
    }
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("core-data", "cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("core-data", "'" + path + "' is not valid JSON: " + e.what());
    }
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("core-data", "cannot write '" + path + "'");
    out << text;
    if (!out) throw IoError("core-data", "write failed for '" + path + "'");
}

}  // namespace detail

inline json to_json(const EstimationConfig& c) {
    return json{{"basis_degree", c.basis_degree},       {"mixing_model", c.mixing_model},
                {"quadrature_nodes", c.quadrature_nodes}, {"bootstrap_reps", c.bootstrap_reps},
                {"trim", c.trim},                         {"seed", c.seed}};
}

/// Missing fields keep their defaults; unknown fields are rejected.
inline EstimationConfig estimation_config_from_json(const json& j) {
    detail::reject_unknown_keys(j, {"basis_degree", "mixing_model", "quadrature_nodes", "bootstrap_reps", "trim", "seed"},
                                "estimation config");
    EstimationConfig c;
    detail::read_field(j, "basis_degree", c.basis_degree, "estimation config");
    detail::read_field(j, "mixing_model", c.mixing_model, "estimation config");
    detail::read_field(j, "quadrature_nodes", c.quadrature_nodes, "estimation config");
    detail::read_field(j, "bootstrap_reps", c.bootstrap_reps, "estimation config");
    detail::read_field(j, "trim", c.trim, "estimation config");
    detail::read_field(j, "seed", c.seed, "estimation config");
    c.validate();
    return c;
}

inline EstimationConfig load_estimation_config(const std::string& path) {
    return estimation_config_from_json(detail::read_json_file(path));
}

inline void save_estimation_config(const EstimationConfig& c, const std::string& path) {
    detail::write_text_file(path, to_json(c).dump(2) + "\n");
}

}  // namespace dynmte
