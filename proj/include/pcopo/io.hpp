#pragma once
// CSV (with '#' metadata block) and JSON export, full round-trip precision.

#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace pcopo {

using Metadata = std::vector<std::pair<std::string, std::string>>;

// 17 significant digits: enough to round-trip an IEEE double exactly.
std::string format_full(double v);

void write_csv(std::ostream& os, const Metadata& meta, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);
void write_csv_file(const std::string& path, const Metadata& meta,
                    const std::vector<std::string>& columns,
                    const std::vector<std::vector<double>>& rows);

// JSON document (schema_version 1) with the same content.
std::string to_json(const Metadata& meta, const std::vector<std::string>& columns,
                    const std::vector<std::vector<double>>& rows);

}  // namespace pcopo
