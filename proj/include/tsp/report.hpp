#ifndef TSP_REPORT_HPP
#define TSP_REPORT_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "tsp/eval.hpp"

namespace tsp {

// Comment line prepended to every result CSV; states how SNR is defined so
// reported sweeps are unambiguous.
extern const char* kSnrDefinitionNote;

// Columns: method,<x_name>,accuracy,n,config_hash. Doubles are printed with
// 17 significant digits so a re-parse reproduces the table exactly.
std::string table_to_csv(const ResultTable& table);
ResultTable table_from_csv(const std::string& text, const std::string& name);

// Accuracy-vs-x line chart, one polyline per method. Returns an empty string
// for an empty table. Output is byte-stable for identical tables.
std::string render_svg(const ResultTable& table, const std::string& title);

// Writes <stem>.csv and, when the table has rows, <stem>.svg into out_dir;
// warns on stderr for empty tables. Returns the written paths.
std::vector<std::filesystem::path> emit_report(
    const ResultTable& table, const std::filesystem::path& out_dir,
    const std::string& stem, const std::string& title);

}  // namespace tsp

#endif  // TSP_REPORT_HPP
