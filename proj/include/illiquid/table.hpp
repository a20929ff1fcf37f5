#pragma once

#include "illiquid/config.hpp"

#include <cstdint>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace illiquid {

using Cell = std::variant<double, std::int64_t, std::string>;

/// Column-labelled rows. Doubles print with 9 significant digits.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row);  // throws Error{invalid_argument} on a width mismatch
};

std::string format_cell(const Cell& c);

void write_csv(std::ostream& os, const Table& t);

/// One JSON object per row, as an array.
void write_json(std::ostream& os, const Table& t);

void write_table(std::ostream& os, const Table& t, OutputFormat format);

}  // namespace illiquid
