#include "evonarx/serialize.hpp"

#include <fstream>

#include "evonarx/dataset_io.hpp"

namespace evonarx {

namespace {

Json neuron_to_json(const Neuron& n) {
  Json j;
  j["activation"] =
      n.activation == Activation::BipolarSigmoid ? "bipolar_sigmoid" : "linear";
  j["weights"] = n.weights;
  return j;
}

Neuron neuron_from_json(const Json& j) {
  Neuron n;
  const std::string act = j.at("activation").get<std::string>();
  if (act == "bipolar_sigmoid")
    n.activation = Activation::BipolarSigmoid;
  else if (act == "linear")
    n.activation = Activation::Linear;
  else
    throw ParseError("unknown activation '" + act + "'");
  n.weights = j.at("weights").get<std::vector<double>>();
  if (n.weights.empty()) throw ParseError("neuron without weights");
  return n;
}

}  // namespace

Json genome_to_json(const Genome& g) {
  Json j;
  j["du"] = g.du;
  j["dy"] = g.dy;
  Json layers = Json::array();
  for (const auto& layer : g.hidden) {
    Json jl = Json::array();
    for (const Neuron& n : layer) jl.push_back(neuron_to_json(n));
    layers.push_back(std::move(jl));
  }
  j["hidden_layers"] = std::move(layers);
  j["output"] = neuron_to_json(g.output);
  return j;
}

Genome genome_from_json(const Json& j) {
  Genome g;
  g.du = j.at("du").get<int>();
  g.dy = j.at("dy").get<int>();
  for (const auto& jl : j.at("hidden_layers")) {
    std::vector<Neuron> layer;
    for (const auto& jn : jl) layer.push_back(neuron_from_json(jn));
    g.hidden.push_back(std::move(layer));
  }
  g.output = neuron_from_json(j.at("output"));
  if (const auto fault = structural_fault(g))
    throw ParseError("genome file invalid: " + *fault);
  return g;
}

Genome load_genome_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open genome file '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("genome file '" + path + "': " + e.what());
  }
  if (j.contains("genome")) return genome_from_json(j.at("genome"));
  return genome_from_json(j);
}

void save_genome_file(const Genome& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  out << genome_to_json(g).dump(2) << "\n";
}

Json record_to_json(const FitnessRecord& rec) {
  Json j;
  j["fitness"] = rec.fitness;
  j["mean_error"] = rec.mean_error;
  j["neurons"] = rec.neuron_count;
  j["delay_sum"] = rec.delay_sum;
  j["diverged"] = rec.diverged;
  return j;
}

}  // namespace evonarx
