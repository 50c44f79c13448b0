#include "evonarx/dataset_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace evonarx {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& text, const std::string& path, int line,
                    const char* what) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE)
    throw ParseError(path + ":" + std::to_string(line) + ": malformed " + what +
                     " '" + text + "'");
  if (!std::isfinite(v))
    throw ParseError(path + ":" + std::to_string(line) + ": non-finite " + what);
  return v;
}

std::string metadata_field(const std::string& header, const std::string& key,
                           const std::string& path) {
  const std::string token = key + "=";
  const auto pos = header.find(token);
  if (pos == std::string::npos)
    throw ParseError(path + ":1: metadata key '" + key + "' missing");
  const auto start = pos + token.size();
  auto stop = header.find(' ', start);
  if (stop == std::string::npos) stop = header.size();
  return header.substr(start, stop - start);
}

}  // namespace

void save_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  out << "# nominal_input=" << format_double(data.nominal_input)
      << " nominal_output=" << format_double(data.nominal_output)
      << " sample_period=" << format_double(data.sample_period) << "\n";
  out << "u,y\n";
  for (std::size_t i = 0; i < data.inputs.size(); ++i)
    out << format_double(data.inputs[i]) << ',' << format_double(data.targets[i])
        << '\n';
  if (!out) throw ParseError("write to '" + path + "' failed");
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");

  Dataset data;
  data.name = std::filesystem::path(path).stem().string();

  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw ParseError(path + ":1: expected metadata line starting with '# '");
  data.nominal_input = parse_double(metadata_field(line, "nominal_input", path),
                                    path, 1, "nominal_input");
  data.nominal_output = parse_double(
      metadata_field(line, "nominal_output", path), path, 1, "nominal_output");
  data.sample_period = parse_double(metadata_field(line, "sample_period", path),
                                    path, 1, "sample_period");
  if (data.nominal_output <= 0.0)
    throw ParseError(path + ":1: nominal_output must be > 0");

  if (!std::getline(in, line) || line != "u,y")
    throw ParseError(path + ":2: expected column header 'u,y'");

  int lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": expected two comma-separated columns");
    if (line.find(',', comma + 1) != std::string::npos)
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": expected exactly two columns");
    data.inputs.push_back(
        parse_double(line.substr(0, comma), path, lineno, "u value"));
    data.targets.push_back(
        parse_double(line.substr(comma + 1), path, lineno, "y value"));
  }
  if (data.inputs.empty())
    throw ParseError(path + ": no data rows");
  return data;
}

}  // namespace evonarx
