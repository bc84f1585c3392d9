#include "relocsplit/trace_io.hpp"

#include "relocsplit/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace relocsplit {

namespace {

void put_number(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

void put_optional(std::string& out, const std::optional<double>& v) {
  if (v) put_number(out, *v);
}

}  // namespace

std::string trace_csv_text(const IterateTrace& trace, const std::vector<std::string>& block_names) {
  std::string out = "n,gamma,residual,dist_to_fix,err_to_limit";
  const TraceRow* first = trace.empty() ? nullptr : &trace.rows.front();
  const Index xdim = first ? first->x.size() : 0;
  for (Index i = 0; i < xdim; ++i) out += ",x_" + std::to_string(i);
  std::vector<Index> block_dims;
  for (const auto& name : block_names) {
    Index d = 0;
    if (first) {
      auto it = first->blocks.find(name);
      if (it == first->blocks.end()) throw MissingBlocks("trace has no block '" + name + "'");
      d = it->second.size();
    }
    block_dims.push_back(d);
    for (Index i = 0; i < d; ++i) out += "," + name + "_" + std::to_string(i);
  }
  out += '\n';

  for (const auto& row : trace.rows) {
    out += std::to_string(row.n);
    out += ',';
    put_number(out, row.gamma);
    out += ',';
    put_number(out, row.residual);
    out += ',';
    put_optional(out, row.dist_to_fix);
    out += ',';
    put_optional(out, row.err_to_limit);
    for (Index i = 0; i < row.x.size(); ++i) {
      out += ',';
      put_number(out, row.x(i));
    }
    for (std::size_t b = 0; b < block_names.size(); ++b) {
      auto it = row.blocks.find(block_names[b]);
      if (it == row.blocks.end() || it->second.size() != block_dims[b]) {
        throw MissingBlocks("trace row " + std::to_string(row.n) + " lacks block '" + block_names[b] + "'");
      }
      for (Index i = 0; i < it->second.size(); ++i) {
        out += ',';
        put_number(out, it->second(i));
      }
    }
    out += '\n';
  }
  return out;
}

void write_trace_csv(const std::string& path, const IterateTrace& trace,
                     const std::vector<std::string>& block_names) {
  const std::string text = trace_csv_text(trace, block_names);
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open '" + path + "' for writing");
  file << text;
  if (!file.flush()) throw IoError("failed writing '" + path + "'");
}

std::vector<double> CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw IoError("CSV has no column '" + name + "'");
  const auto idx = static_cast<std::size_t>(it - header.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!rows[r][idx]) {
      throw IoError("column '" + name + "' is empty in data row " + std::to_string(r + 1));
    }
    out.push_back(*rows[r][idx]);
  }
  return out;
}

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  const auto split = [](const std::string& s) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(s);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!s.empty() && s.back() == ',') fields.emplace_back();
    return fields;
  };
  if (!std::getline(in, line)) throw IoError("CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.header = split(line);
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != table.header.size()) {
      throw IoError("CSV line " + std::to_string(lineno) + " has " + std::to_string(fields.size()) +
                    " fields, expected " + std::to_string(table.header.size()));
    }
    std::vector<std::optional<double>> row;
    row.reserve(fields.size());
    for (const auto& f : fields) {
      if (f.empty()) {
        row.emplace_back();
        continue;
      }
      char* end = nullptr;
      const double v = std::strtod(f.c_str(), &end);
      if (*end != '\0') throw IoError("CSV line " + std::to_string(lineno) + ": bad number '" + f + "'");
      row.emplace_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot read '" + path + "'");
  std::stringstream buf;
  buf << file.rdbuf();
  return parse_csv(buf.str());
}

}  // namespace relocsplit
