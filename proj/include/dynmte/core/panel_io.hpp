#pragma once

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dynmte/core/error.hpp"
#include "dynmte/core/types.hpp"

namespace dynmte {

/// Column names used to read a panel. Period columns are `<prefix><t>` for t = 1, 2, ...
struct PanelSchema {
    std::string id = "id";
    std::array<std::string, 3> x = {"x1", "x2", "x3"};
    std::string z_prefix = "z";
    std::string d_prefix = "d";
    std::string y_prefix = "y";
};

namespace detail {

inline std::string_view trim_ws(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        cells.push_back(trim_ws(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

inline double parse_real(std::string_view cell, std::size_t row, const std::string& column) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw ValidationError("core-data", "row " + std::to_string(row) + ": column " + column +
                                               " is not a number: '" + std::string(cell) + "'");
    }
    return v;
}

inline std::uint8_t parse_bit(std::string_view cell, std::size_t row, const std::string& column) {
    double v = parse_real(cell, row, column);
    if (v != 0.0 && v != 1.0) {
        throw ValidationError("core-data", "row " + std::to_string(row) + ": column " + column +
                                               " must be 0 or 1, got '" + std::string(cell) + "'");
    }
    return static_cast<std::uint8_t>(v);
}

/// Shortest text that reads back to the same double, capped at 17 significant digits.
inline std::string format_real(double v) {
    char buf[32];
    for (int digits = 1; digits < 17; ++digits) {
        std::snprintf(buf, sizeof buf, "%.*g", digits, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

/// Reads a panel CSV. t_max is the number of consecutive periods t = 1, 2, ...
/// for which the z column is present; d and y must then exist for each of them.
inline PanelDataset load_panel(const std::string& path, const PanelSchema& schema = {}) {
    std::ifstream in(path);
    if (!in) throw IoError("core-data", "cannot open '" + path + "'");

    std::string header_line;
    if (!std::getline(in, header_line)) throw ValidationError("core-data", "'" + path + "' is empty");
    auto header = detail::split_csv_line(header_line);
    std::map<std::string, std::size_t, std::less<>> column_of;
    for (std::size_t c = 0; c < header.size(); ++c) column_of.emplace(std::string(header[c]), c);

    auto need = [&](const std::string& name) {
        auto it = column_of.find(name);
        if (it == column_of.end()) throw ValidationError("core-data", "missing column '" + name + "' in '" + path + "'");
        return it->second;
    };

    need(schema.id);
    std::array<std::size_t, 3> x_col{need(schema.x[0]), need(schema.x[1]), need(schema.x[2])};
    std::size_t t_max = 0;
    while (column_of.count(schema.z_prefix + std::to_string(t_max + 1))) ++t_max;
    if (t_max == 0) throw ValidationError("core-data", "missing column '" + schema.z_prefix + "1' in '" + path + "'");

    std::vector<std::size_t> z_col, d_col, y_col;
    for (std::size_t t = 1; t <= t_max; ++t) {
        z_col.push_back(need(schema.z_prefix + std::to_string(t)));
        d_col.push_back(need(schema.d_prefix + std::to_string(t)));
        y_col.push_back(need(schema.y_prefix + std::to_string(t)));
    }

    std::vector<Covariates> x;
    std::vector<std::vector<double>> z(t_max);
    std::vector<std::vector<std::uint8_t>> d(t_max), y(t_max);
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (detail::trim_ws(line).empty()) continue;
        ++row;
        auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size()) {
            throw ValidationError("core-data", "row " + std::to_string(row) + ": expected " +
                                                   std::to_string(header.size()) + " cells, got " +
                                                   std::to_string(cells.size()));
        }
        Covariates xi{};
        for (int k = 0; k < 3; ++k) xi[k] = detail::parse_real(cells[x_col[k]], row, schema.x[k]);
        x.push_back(xi);
        for (std::size_t t = 0; t < t_max; ++t) {
            const auto ts = std::to_string(t + 1);
            z[t].push_back(detail::parse_real(cells[z_col[t]], row, schema.z_prefix + ts));
            d[t].push_back(detail::parse_bit(cells[d_col[t]], row, schema.d_prefix + ts));
            y[t].push_back(detail::parse_bit(cells[y_col[t]], row, schema.y_prefix + ts));
        }
    }
    return PanelDataset(std::move(x), std::move(z), std::move(d), std::move(y));
}

/// Canonical header: id,x1,x2,x3,z1..zT,d1..dT,y1..yT.
inline std::string panel_header(std::size_t t_max) {
    std::string h = "id,x1,x2,x3";
    for (const char* p : {"z", "d", "y"}) {
        for (std::size_t t = 1; t <= t_max; ++t) h += "," + std::string(p) + std::to_string(t);
    }
    return h;
}

inline void write_panel(std::ostream& out, const PanelDataset& data) {
    out << panel_header(data.t_max()) << '\n';
    for (std::size_t i = 0; i < data.n(); ++i) {
        out << (i + 1);
        for (double v : data.x(i)) out << ',' << detail::format_real(v);
        for (std::size_t t = 1; t <= data.t_max(); ++t) out << ',' << detail::format_real(data.z(t)[i]);
        for (std::size_t t = 1; t <= data.t_max(); ++t) out << ',' << int(data.d(t)[i]);
        for (std::size_t t = 1; t <= data.t_max(); ++t) out << ',' << int(data.y(t)[i]);
        out << '\n';
    }
}

inline void save_panel(const PanelDataset& data, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("core-data", "cannot write '" + path + "'");
    write_panel(out, data);
    out.flush();
    if (!out) throw IoError("core-data", "write failed for '" + path + "'");
}

}  // namespace dynmte
