#include "pdpap/io.hpp"

#include "pdpap/error.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

namespace pdpap::io {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t'))
    text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
    text.remove_suffix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigError("not a number: '" + std::string(text) + "'");
  return value;
}

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    parts.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos)
      break;
    start = pos + 1;
  }
  return parts;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open " + path.string());
  return in;
}

} // namespace

void write_log_header(std::ostream& out) { out << log_header << '\n'; }

void write_log_row(std::ostream& out, const LogRow& row) {
  out << row.k;
  for (double v : {row.t_sec, row.c, row.relerr, row.J_exact, row.J_inexact, row.res_pde,
                   row.res_adj, row.res_x, row.res_y})
    out << ',' << format_double(v);
  out << '\n';
}

IterationLog read_log_csv(std::istream& in) {
  IterationLog log;
  std::string line;
  if (!std::getline(in, line))
    return log;
  if (std::string_view(line).substr(0, 2) != "k,")
    throw ConfigError("log CSV is missing its header");
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    const auto cells = split(line, ',');
    if (cells.size() != 10)
      throw ConfigError("log CSV row has " + std::to_string(cells.size()) + " columns");
    LogRow row;
    const auto [ptr, ec] =
        std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), row.k);
    if (ec != std::errc())
      throw ConfigError("bad iteration index in log CSV");
    double* targets[] = {&row.t_sec,     &row.c,       &row.relerr, &row.J_exact, &row.J_inexact,
                         &row.res_pde,   &row.res_adj, &row.res_x,  &row.res_y};
    for (std::size_t c = 0; c < 9; ++c)
      *targets[c] = parse_double(cells[c + 1]);
    log.push_back(row);
  }
  return log;
}

IterationLog read_log_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_log_csv(in);
}

void write_control(std::ostream& out, const ControlParam& x) {
  out << "c = " << format_double(x.c) << '\n';
  if (x.a) {
    out << "a = ";
    for (Eigen::Index k = 0; k < x.a->size(); ++k)
      out << (k ? "," : "") << format_double((*x.a)[k]);
    out << '\n';
  }
}

void write_control(const std::filesystem::path& path, const ControlParam& x) {
  std::ofstream out(path);
  if (!out)
    throw ConfigError("cannot write " + path.string());
  write_control(out, x);
}

ControlParam read_control(std::istream& in) {
  ControlParam x;
  bool have_c = false;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (line.empty() || line[0] == '#' || eq == std::string::npos)
      continue;
    std::string_view key = std::string_view(line).substr(0, eq);
    while (!key.empty() && key.back() == ' ')
      key.remove_suffix(1);
    const std::string_view value = std::string_view(line).substr(eq + 1);
    if (key == "c") {
      x.c = parse_double(value);
      have_c = true;
    } else if (key == "a") {
      const auto cells = split(value, ',');
      GridFunction a(static_cast<Eigen::Index>(cells.size()));
      for (std::size_t k = 0; k < cells.size(); ++k)
        a[static_cast<Eigen::Index>(k)] = parse_double(cells[k]);
      x.a = std::move(a);
    } else {
      throw ConfigError("unknown control key '" + std::string(key) + "'");
    }
  }
  if (!have_c)
    throw ConfigError("control file has no c entry");
  return x;
}

ControlParam read_control(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_control(in);
}

void write_fields(std::ostream& out, const std::vector<GridFunction>& fields,
                  std::string_view prefix) {
  out << "node";
  for (std::size_t i = 0; i < fields.size(); ++i)
    out << ',' << prefix << (i + 1);
  out << '\n';
  const Eigen::Index n = fields.empty() ? 0 : fields.front().size();
  for (Eigen::Index k = 0; k < n; ++k) {
    out << k;
    for (const auto& f : fields)
      out << ',' << format_double(f[k]);
    out << '\n';
  }
}

std::vector<GridFunction> read_fields(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw ConfigError("field file is empty");
  const std::size_t m = split(line, ',').size() - 1;
  std::vector<std::vector<double>> columns(m);
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    const auto cells = split(line, ',');
    if (cells.size() != m + 1)
      throw ConfigError("field file row has the wrong number of columns");
    for (std::size_t i = 0; i < m; ++i)
      columns[i].push_back(parse_double(cells[i + 1]));
  }
  std::vector<GridFunction> fields;
  for (const auto& col : columns)
    fields.push_back(Eigen::Map<const GridFunction>(col.data(), static_cast<Eigen::Index>(col.size())));
  return fields;
}

} // namespace pdpap::io
