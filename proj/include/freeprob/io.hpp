#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "freeprob/common.hpp"
#include "freeprob/entropic_ot.hpp"
#include "freeprob/finite_free.hpp"
#include "freeprob/measure.hpp"
#include "freeprob/permuton_ldp.hpp"
#include "freeprob/polynomial.hpp"
#include "freeprob/subordination.hpp"

namespace freeprob {

// insertion-ordered so reports serialize with stable key order
using json = nlohmann::ordered_json;

/// Shortest representation carrying 17 significant digits; round-trips
/// every finite double exactly.
inline std::string fmt17(double v) {
    require_finite(v, "serialized number");
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline void json_escape(const std::string& s, std::string& out) {
    out += '"';
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
}

inline void dump_json_to(const json& v, std::string& out, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    const std::string pad1(static_cast<std::size_t>(indent + 1) * 2, ' ');
    switch (v.type()) {
        case json::value_t::object: {
            if (v.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = v.begin(); it != v.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad1;
                json_escape(it.key(), out);
                out += ": ";
                dump_json_to(it.value(), out, indent + 1);
            }
            out += "\n" + pad + "}";
            return;
        }
        case json::value_t::array: {
            if (v.empty()) {
                out += "[]";
                return;
            }
            bool scalars = true;
            for (const auto& e : v)
                if (e.is_structured()) scalars = false;
            if (scalars) {
                out += "[";
                bool first = true;
                for (const auto& e : v) {
                    if (!first) out += ", ";
                    first = false;
                    dump_json_to(e, out, indent);
                }
                out += "]";
            } else {
                out += "[\n";
                bool first = true;
                for (const auto& e : v) {
                    if (!first) out += ",\n";
                    first = false;
                    out += pad1;
                    dump_json_to(e, out, indent + 1);
                }
                out += "\n" + pad + "]";
            }
            return;
        }
        case json::value_t::string:
            json_escape(v.get_ref<const std::string&>(), out);
            return;
        case json::value_t::number_float:
            out += fmt17(v.get<double>());
            return;
        default:
            out += v.dump();
            return;
    }
}

}  // namespace detail

/// Deterministic serialization: insertion-ordered keys, two-space indent,
/// floating-point numbers through fmt17.
inline std::string dump_json(const json& v) {
    std::string out;
    detail::dump_json_to(v, out, 0);
    out += '\n';
    return out;
}

inline json measure_to_json(const DiscreteMeasure& m) {
    json j;
    j["schema"] = 1;
    j["atoms"] = m.atoms();
    j["weights"] = m.weights();
    return j;
}

/// Accepts {"atoms": [...]} with optional "weights" (uniform when absent).
inline DiscreteMeasure measure_from_json(const json& j) {
    require(j.is_object() && j.contains("atoms") && j["atoms"].is_array(),
            "measure JSON needs an \"atoms\" array");
    std::vector<double> atoms;
    for (const auto& a : j["atoms"]) {
        require(a.is_number(), "atoms must be numbers");
        atoms.push_back(a.get<double>());
    }
    if (!j.contains("weights")) return make_uniform_measure(atoms);
    require(j["weights"].is_array(), "\"weights\" must be an array");
    std::vector<double> weights;
    for (const auto& w : j["weights"]) {
        require(w.is_number(), "weights must be numbers");
        weights.push_back(w.get<double>());
    }
    return make_measure(atoms, weights);
}

inline DiscreteMeasure measure_from_json_text(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    require(!j.is_discarded(), "input is not valid JSON");
    return measure_from_json(j);
}

inline json poly_to_json(const MonicPoly& p) {
    json j;
    j["schema"] = 1;
    j["coeffs"] = p.coeffs;
    return j;
}

/// {"coeffs": [c0, ..., 1]} ascending, monic.
inline MonicPoly poly_from_json(const json& j) {
    require(j.is_object() && j.contains("coeffs") && j["coeffs"].is_array(),
            "polynomial JSON needs a \"coeffs\" array");
    std::vector<double> c;
    for (const auto& v : j["coeffs"]) {
        require(v.is_number(), "coefficients must be numbers");
        c.push_back(v.get<double>());
    }
    return MonicPoly(std::move(c));
}

inline json subordination_to_json(const SubordinationSolution& s) {
    json j;
    j["schema"] = 1;
    switch (s.kind) {
        case ConvolutionKind::additive: j["kind"] = "add"; break;
        case ConvolutionKind::multiplicative: j["kind"] = "mul"; break;
        case ConvolutionKind::compression: j["kind"] = "comp"; break;
    }
    j["z"] = s.z;
    j["omega"] = s.omega;
    j["omega_mu"] = s.omega_mu;
    j["omega_nu"] = s.omega_nu;
    if (s.kind == ConvolutionKind::compression) j["tau"] = s.tau;
    j["residual"] = s.residual;
    return j;
}

inline json coupling_to_json(const CouplingSolution& c) {
    json j;
    j["schema"] = 1;
    j["rows"] = c.rows;
    j["cols"] = c.cols;
    j["pi"] = c.pi;
    j["value"] = c.value;
    j["a"] = c.a_pot;
    j["b"] = c.b_pot;
    j["iterations"] = c.iterations;
    j["marginal_residual"] = c.marginal_residual;
    return j;
}

/// CSV table with a header row; numbers through fmt17.
inline std::string to_csv(const std::vector<std::string>& header,
                          const std::vector<std::vector<double>>& rows) {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out += ',';
        out += header[i];
    }
    out += '\n';
    for (const auto& row : rows) {
        require(row.size() == header.size(), "CSV rows must match the header width");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += fmt17(row[i]);
        }
        out += '\n';
    }
    return out;
}

inline std::string to_csv(const std::vector<AsymptoticRow>& rows) {
    std::vector<std::vector<double>> table;
    table.reserve(rows.size());
    for (const auto& r : rows)
        table.push_back({static_cast<double>(r.n), r.value, r.error});
    return to_csv({"N", "value", "error"}, table);
}

inline std::string to_csv(const std::vector<LdpRow>& rows) {
    std::vector<std::vector<double>> table;
    table.reserve(rows.size());
    for (const auto& r : rows)
        table.push_back({static_cast<double>(r.N), r.log_probability, r.rate, r.gap});
    return to_csv({"N", "log_probability", "rate", "gap"}, table);
}

}  // namespace freeprob
