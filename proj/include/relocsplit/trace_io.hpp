#pragma once

#include "relocsplit/family.hpp"

#include <optional>
#include <string>
#include <vector>

namespace relocsplit {

/// Columns n,gamma,residual,dist_to_fix,err_to_limit followed by x_0.. and
/// one flattened group per block name (z_0.., y_0.., w_0..). Numbers use 17
/// significant digits; a missing optional value is an empty field.
void write_trace_csv(const std::string& path, const IterateTrace& trace,
                     const std::vector<std::string>& block_names);
std::string trace_csv_text(const IterateTrace& trace, const std::vector<std::string>& block_names);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::optional<double>>> rows;

  /// Throws IoError when the column is absent or has an empty entry.
  std::vector<double> column(const std::string& name) const;
};

/// Throws IoError on unreadable or malformed files.
CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text);

}  // namespace relocsplit
