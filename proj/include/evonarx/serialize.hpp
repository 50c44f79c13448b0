#pragma once

#include <string>

#include <json.hpp>

#include "evonarx/algorithms.hpp"
#include "evonarx/genome.hpp"

namespace evonarx {

// Stable-key-order JSON (insertion order preserved) so emitted files are
// byte-reproducible.
using Json = nlohmann::ordered_json;

Json genome_to_json(const Genome& g);
Genome genome_from_json(const Json& j);

Genome load_genome_file(const std::string& path);
void save_genome_file(const Genome& g, const std::string& path);

Json record_to_json(const FitnessRecord& rec);

}  // namespace evonarx
