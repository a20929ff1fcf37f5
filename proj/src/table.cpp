#include "illiquid/table.hpp"

#include "illiquid/error.hpp"

#include <cmath>
#include <cstdio>

namespace illiquid {

void Table::add(std::vector<Cell> row) {
    if (row.size() != header.size())
        throw Error(Errc::invalid_argument, "table: row has " + std::to_string(row.size()) + " cells, header has " +
                                                std::to_string(header.size()));
    rows.push_back(std::move(row));
}

std::string format_cell(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) {
        if (std::isnan(*d)) return "nan";
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.9g", *d);
        return buf;
    }
    if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
    return std::get<std::string>(c);
}

void write_csv(std::ostream& os, const Table& t) {
    for (std::size_t n = 0; n < t.header.size(); ++n) os << (n ? "," : "") << t.header[n];
    os << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t n = 0; n < row.size(); ++n) os << (n ? "," : "") << format_cell(row[n]);
        os << '\n';
    }
}

void write_json(std::ostream& os, const Table& t) {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& row : t.rows) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (std::size_t n = 0; n < row.size(); ++n) {
            const Cell& c = row[n];
            if (const auto* d = std::get_if<double>(&c)) {
                // round-trip through the CSV text so both formats carry identical digits
                obj[t.header[n]] = std::isfinite(*d) ? nlohmann::ordered_json(std::stod(format_cell(c)))
                                                     : nlohmann::ordered_json(nullptr);
            } else if (const auto* i = std::get_if<std::int64_t>(&c)) {
                obj[t.header[n]] = *i;
            } else {
                obj[t.header[n]] = std::get<std::string>(c);
            }
        }
        out.push_back(std::move(obj));
    }
    os << out.dump(2) << '\n';
}

void write_table(std::ostream& os, const Table& t, OutputFormat format) {
    if (format == OutputFormat::json)
        write_json(os, t);
    else
        write_csv(os, t);
}

}  // namespace illiquid
