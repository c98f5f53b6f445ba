#pragma once
// Field serialization: one CSV file per field, node-major (x fastest), with a
// single JSON header line. Values are written with shortest round-trip
// formatting so that read(write(f)) reproduces every double bit for bit.

#include <riesz/grid.hpp>

#include <json.hpp>

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>

namespace riesz {

namespace detail {

inline std::string fmt_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
    double v;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::runtime_error("field_io: malformed numeric token '" + s + "'");
    return v;
}

// infinities appear in half-line geometry; JSON numbers cannot carry them
inline nlohmann::json endpoint_to_json(double v) {
    if (v == inf) return "inf";
    if (v == -inf) return "-inf";
    return nlohmann::json(fmt_double(v));
}
inline double endpoint_from_json(const nlohmann::json& j) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return inf;
    if (s == "-inf") return -inf;
    return parse_double(s);
}

inline nlohmann::json header_common(const GridSpec& s, const char* kind, int components) {
    nlohmann::json h;
    h["schema"] = "riesz-field-v1";
    h["kind"] = kind;
    h["n"] = s.n;
    h["L"] = fmt_double(s.L);
    h["m"] = s.m;
    h["components"] = components;
    return h;
}

inline GridSpec spec_from_header(const nlohmann::json& h) {
    return GridSpec(h.at("n").get<int>(), parse_double(h.at("L").get<std::string>()),
                    h.at("m").get<int>());
}

inline nlohmann::json read_header(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.size() < 2 || line[0] != '#')
        throw std::runtime_error("field_io: missing header line");
    auto h = nlohmann::json::parse(line.substr(1));
    if (h.at("schema").get<std::string>() != "riesz-field-v1")
        throw std::runtime_error("field_io: unknown schema");
    return h;
}

} // namespace detail

inline void write_field(const std::string& path, const ScalarField& f) {
    auto h = detail::header_common(f.spec, "scalar", 1);
    h["support_radius"] = f.support_radius
                              ? detail::endpoint_to_json(*f.support_radius)
                              : nlohmann::json(nullptr);
    if (f.tail) {
        h["tail"] = {{"coef", detail::fmt_double(f.tail->coef)},
                     {"expo", detail::fmt_double(f.tail->expo)}};
    }
    if (f.geometry) {
        nlohmann::json g = nlohmann::json::array();
        for (auto& p : f.geometry->iv)
            g.push_back({detail::endpoint_to_json(p.first),
                         detail::endpoint_to_json(p.second)});
        h["geometry"] = g;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("field_io: cannot open '" + path + "' for writing");
    out << "#" << h.dump() << "\n";
    for (double v : f.values) out << detail::fmt_double(v) << "\n";
}

inline void write_field(const std::string& path, const VectorField& v) {
    auto h = detail::header_common(v.spec, "vector", v.spec.n);
    h["support_radius"] = v.support_radius
                              ? detail::endpoint_to_json(*v.support_radius)
                              : nlohmann::json(nullptr);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("field_io: cannot open '" + path + "' for writing");
    out << "#" << h.dump() << "\n";
    for (std::size_t k = 0; k < v.spec.size(); ++k) {
        out << detail::fmt_double(v.comp[0][k]);
        if (v.spec.n == 2) out << "," << detail::fmt_double(v.comp[1][k]);
        out << "\n";
    }
}

inline ScalarField read_scalar_field(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("field_io: cannot open '" + path + "'");
    auto h = detail::read_header(in);
    if (h.at("kind").get<std::string>() != "scalar")
        throw std::runtime_error("field_io: expected a scalar field in '" + path + "'");
    ScalarField f(detail::spec_from_header(h));
    std::string line;
    for (std::size_t k = 0; k < f.values.size(); ++k) {
        if (!std::getline(in, line))
            throw std::runtime_error("field_io: truncated value block in '" + path + "'");
        f.values[k] = detail::parse_double(line);
    }
    if (!h.at("support_radius").is_null())
        f.support_radius = detail::endpoint_from_json(h.at("support_radius"));
    if (h.contains("tail"))
        f.tail = TailInfo{detail::parse_double(h["tail"].at("coef").get<std::string>()),
                          detail::parse_double(h["tail"].at("expo").get<std::string>())};
    if (h.contains("geometry")) {
        IntervalSet E;
        for (auto& p : h["geometry"])
            E.iv.push_back({detail::endpoint_from_json(p.at(0)),
                            detail::endpoint_from_json(p.at(1))});
        f.geometry = std::move(E);
    }
    return f;
}

inline VectorField read_vector_field(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("field_io: cannot open '" + path + "'");
    auto h = detail::read_header(in);
    if (h.at("kind").get<std::string>() != "vector")
        throw std::runtime_error("field_io: expected a vector field in '" + path + "'");
    VectorField v(detail::spec_from_header(h));
    std::string line;
    for (std::size_t k = 0; k < v.spec.size(); ++k) {
        if (!std::getline(in, line))
            throw std::runtime_error("field_io: truncated value block in '" + path + "'");
        if (v.spec.n == 1) {
            v.comp[0][k] = detail::parse_double(line);
        } else {
            const auto c = line.find(',');
            if (c == std::string::npos)
                throw std::runtime_error("field_io: missing component in '" + path + "'");
            v.comp[0][k] = detail::parse_double(line.substr(0, c));
            v.comp[1][k] = detail::parse_double(line.substr(c + 1));
        }
    }
    if (!h.at("support_radius").is_null())
        v.support_radius = detail::endpoint_from_json(h.at("support_radius"));
    return v;
}

} // namespace riesz
