#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "jumppat/matrix.hpp"

namespace jumppat {

// Matrix interchange format: {"dim": d, "entries": [[re, im], ...]} row-major.
// Float entries are JSON numbers; exact entries are rational strings like
// "3/4", which keeps golden files human-diffable.
inline nlohmann::json matrix_to_json(const CMatrix& m) {
    if (!m.square()) throw ConfigError("interchange format expects square matrices");
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& v : m.data()) entries.push_back({v.real(), v.imag()});
    return {{"dim", m.rows()}, {"entries", entries}};
}

inline nlohmann::json matrix_to_json(const XMatrix& m) {
    if (!m.square()) throw ConfigError("interchange format expects square matrices");
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& v : m.data()) entries.push_back({v.re.get_str(), v.im.get_str()});
    return {{"dim", m.rows()}, {"entries", entries}};
}

template <class S>
Matrix<S> matrix_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("dim") || !j.contains("entries"))
        throw ConfigError("matrix JSON needs 'dim' and 'entries'");
    const Index dim = j.at("dim").get<Index>();
    const auto& entries = j.at("entries");
    if (dim < 1 || !entries.is_array() || static_cast<Index>(entries.size()) != dim * dim)
        throw ConfigError("matrix JSON entry count does not match dim^2");
    Matrix<S> m(dim, dim);
    for (Index i = 0; i < dim * dim; ++i) {
        const auto& e = entries[static_cast<std::size_t>(i)];
        if (!e.is_array() || e.size() != 2)
            throw ConfigError("matrix JSON entries must be [re, im] pairs");
        if constexpr (FieldTraits<S>::is_exact) {
            std::string re = e[0].is_string() ? e[0].get<std::string>() : e[0].dump();
            std::string im = e[1].is_string() ? e[1].get<std::string>() : e[1].dump();
            m.data()[static_cast<std::size_t>(i)] =
                ExactComplex(parse_rational(re), parse_rational(im));
        } else {
            if (!e[0].is_number() || !e[1].is_number())
                throw ConfigError("float matrix JSON entries must be numeric");
            m.data()[static_cast<std::size_t>(i)] = Complex(e[0].get<double>(), e[1].get<double>());
        }
    }
    return m;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write file '" + path.string() + "'");
    os << content;
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot read file '" + path.string() + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

template <class S>
void save_matrix(const std::filesystem::path& path, const Matrix<S>& m) {
    write_text_file(path, matrix_to_json(m).dump(2) + "\n");
}

template <class S>
Matrix<S> load_matrix(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("invalid JSON in '" + path.string() + "': " + e.what());
    }
    return matrix_from_json<S>(j);
}

}  // namespace jumppat
