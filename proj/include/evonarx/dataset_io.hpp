#pragma once

#include <stdexcept>
#include <string>

#include "evonarx/plant.hpp"

namespace evonarx {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// CSV interchange format, bit-exact round trip:
//   # nominal_input=<v> nominal_output=<v> sample_period=<v>
//   u,y
//   <u>,<y>
//   ...
// Values are written with shortest-round-trip formatting.
void save_csv(const Dataset& data, const std::string& path);
Dataset load_csv(const std::string& path);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

}  // namespace evonarx
