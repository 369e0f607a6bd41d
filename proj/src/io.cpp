#include "pcopo/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace pcopo {

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(std::ostream& os, const Metadata& meta, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
    for (const auto& [k, v] : meta) os << "# " << k << " = " << v << "\n";
    for (size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << "\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_full(row[i]);
        os << "\n";
    }
}

void write_csv_file(const std::string& path, const Metadata& meta,
                    const std::vector<std::string>& columns,
                    const std::vector<std::vector<double>>& rows) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open output file '" + path + "'");
    write_csv(f, meta, columns, rows);
    if (!f.good()) throw std::runtime_error("write failed for '" + path + "'");
}

std::string to_json(const Metadata& meta, const std::vector<std::string>& columns,
                    const std::vector<std::vector<double>>& rows) {
    nlohmann::json j;
    j["schema_version"] = 1;
    nlohmann::json jm = nlohmann::json::object();
    for (const auto& [k, v] : meta) jm[k] = v;
    j["metadata"] = jm;
    j["columns"] = columns;
    nlohmann::json jr = nlohmann::json::array();
    for (const auto& row : rows) {
        nlohmann::json jrow = nlohmann::json::array();
        for (double v : row) {
            if (std::isnan(v)) jrow.push_back(nullptr);  // JSON has no NaN
            else jrow.push_back(v);
        }
        jr.push_back(std::move(jrow));
    }
    j["rows"] = std::move(jr);
    return j.dump(2);
}

}  // namespace pcopo
