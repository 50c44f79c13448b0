#include "evonarx/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "evonarx/dataset_io.hpp"

namespace evonarx {

const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::Dnas1: return "dnas1";
    case Algorithm::Dnas2: return "dnas2";
    case Algorithm::Dnas3: return "dnas3";
    case Algorithm::Dnas4: return "dnas4";
    case Algorithm::Exhaustive: return "exhaustive";
  }
  return "?";
}

std::optional<Algorithm> algorithm_from_name(const std::string& name) {
  if (name == "dnas1") return Algorithm::Dnas1;
  if (name == "dnas2") return Algorithm::Dnas2;
  if (name == "dnas3") return Algorithm::Dnas3;
  if (name == "dnas4") return Algorithm::Dnas4;
  if (name == "exhaustive") return Algorithm::Exhaustive;
  return std::nullopt;
}

NasConfig defaults_for(Algorithm a) {
  NasConfig cfg;
  cfg.algorithm = a;
  switch (a) {
    case Algorithm::Dnas1:
      cfg.duFixed = 5;
      cfg.dyFixed = 5;
      break;
    case Algorithm::Dnas2:
    case Algorithm::Dnas3:
      break;
    case Algorithm::Dnas4:
      cfg.generations = 8;  // trainings dominate cost; keep desk runs short
      break;
    case Algorithm::Exhaustive:
      break;
  }
  return cfg;
}

NasConfig preset(const std::string& name) {
  const auto paper = [](Algorithm a) {
    NasConfig cfg = defaults_for(a);
    cfg.calls = 100;
    cfg.generations = 100;
    if (a == Algorithm::Dnas4) {
      cfg.calls = 46;
      cfg.generations = 25;
    }
    return cfg;
  };
  if (name == "paper-dnas1") return paper(Algorithm::Dnas1);
  if (name == "paper-dnas2") return paper(Algorithm::Dnas2);
  if (name == "paper-dnas3") return paper(Algorithm::Dnas3);
  if (name == "paper-dnas4") return paper(Algorithm::Dnas4);
  if (name == "paper-exhaustive") {
    NasConfig cfg = defaults_for(Algorithm::Exhaustive);
    cfg.gridNeuronsMax = 25;
    cfg.gridDu = {1, 5, 10, 25, 50};
    cfg.gridDy = {1, 5, 10, 25, 50};
    cfg.gridRepeats = 10;
    return cfg;
  }
  throw ConfigError("unknown preset '" + name + "'");
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {
      "paper-dnas1", "paper-dnas2", "paper-dnas3", "paper-dnas4",
      "paper-exhaustive"};
  return names;
}

namespace {

void check_probability(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0))
    throw ConfigError(std::string(name) + " must lie in [0, 1], got " +
                      format_double(v));
}

}  // namespace

void validate(const NasConfig& cfg) {
  if (cfg.maxLay < 1) throw ConfigError("maxLay must be >= 1");
  if (cfg.maxNinLay < 1) throw ConfigError("maxNinLay must be >= 1");
  if (cfg.duMax < 0 || cfg.dyMax < 0)
    throw ConfigError("delay caps must be >= 0");
  if (cfg.duFixed && (*cfg.duFixed < 0 || *cfg.duFixed > cfg.duMax))
    throw ConfigError("duFixed outside [0, duMax]");
  if (cfg.dyFixed && (*cfg.dyFixed < 0 || *cfg.dyFixed > cfg.dyMax))
    throw ConfigError("dyFixed outside [0, dyMax]");
  if (cfg.popSize < 1) throw ConfigError("popSize must be >= 1");
  check_probability(cfg.pCross, "pCross");
  check_probability(cfg.pMutW, "pMutW");
  check_probability(cfg.pMut, "pMut");
  check_probability(cfg.pMutNewN, "pMutNewN");
  check_probability(cfg.pMutD, "pMutD");
  check_probability(cfg.pMutDelN, "pMutDelN");
  check_probability(cfg.pRetrain, "pRetrain");
  if (cfg.p1 < 0.0 || cfg.p2 < 0.0 || cfg.p3 < 0.0)
    throw ConfigError("fitness weights must be non-negative");
  if (!(cfg.minDelta > 0.0) || !(cfg.maxDelta > 0.0))
    throw ConfigError("minDelta and maxDelta must be positive");
  if (cfg.minDelta > cfg.maxDelta)
    throw ConfigError("minDelta must not exceed maxDelta");
  if (!(cfg.minW < cfg.maxW)) throw ConfigError("minW must be < maxW");
  if (cfg.hmBest < 1) throw ConfigError("hmBest must be >= 1");
  if (cfg.hmBest > cfg.popSize)
    throw ConfigError("hmBest must not exceed popSize");
  if (cfg.generations < 0) throw ConfigError("generations must be >= 0");
  if (cfg.calls < 1) throw ConfigError("calls must be >= 1");
  if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
  if (cfg.trainEpochs < 1) throw ConfigError("trainEpochs must be >= 1");
  if (cfg.gridNeuronsMax < 1) throw ConfigError("gridNeuronsMax must be >= 1");
  if (cfg.gridRepeats < 1) throw ConfigError("gridRepeats must be >= 1");
  for (int d : cfg.gridDu)
    if (d < 0) throw ConfigError("grid du values must be >= 0");
  for (int d : cfg.gridDy)
    if (d < 0) throw ConfigError("grid dy values must be >= 0");
  if (cfg.gridDu.empty() || cfg.gridDy.empty())
    throw ConfigError("grid delay sets must not be empty");
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double to_double(const std::string& v, const std::string& key) {
  const char* begin = v.c_str();
  char* end = nullptr;
  errno = 0;
  const double x = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE)
    throw ConfigError("bad numeric value for " + key + ": '" + v + "'");
  return x;
}

int to_int(const std::string& v, const std::string& key) {
  const double x = to_double(v, key);
  const int i = static_cast<int>(x);
  if (static_cast<double>(i) != x)
    throw ConfigError(key + " must be an integer, got '" + v + "'");
  return i;
}

std::vector<int> to_int_list(const std::string& v, const std::string& key) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_int(trim(item), key));
  if (out.empty()) throw ConfigError(key + " must list at least one value");
  return out;
}

TrainerKind to_trainer(const std::string& v, const std::string& key) {
  if (v == "lm") return TrainerKind::LevenbergMarquardt;
  if (v == "br") return TrainerKind::BayesianRegularization;
  if (v == "scg") return TrainerKind::ScaledConjugateGradient;
  throw ConfigError(key + " must be one of lm, br, scg; got '" + v + "'");
}

void apply_key(NasConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "algorithm") {
    const auto a = algorithm_from_name(value);
    if (!a) throw ConfigError("unknown algorithm '" + value + "'");
    cfg.algorithm = *a;
  } else if (key == "maxLay") cfg.maxLay = to_int(value, key);
  else if (key == "maxNinLay") cfg.maxNinLay = to_int(value, key);
  else if (key == "du" || key == "duMax") cfg.duMax = to_int(value, key);
  else if (key == "dy" || key == "dyMax") cfg.dyMax = to_int(value, key);
  else if (key == "duFixed") {
    if (value == "none") cfg.duFixed.reset();
    else cfg.duFixed = to_int(value, key);
  } else if (key == "dyFixed") {
    if (value == "none") cfg.dyFixed.reset();
    else cfg.dyFixed = to_int(value, key);
  } else if (key == "popSize") cfg.popSize = to_int(value, key);
  else if (key == "pCross") cfg.pCross = to_double(value, key);
  else if (key == "p1") cfg.p1 = to_double(value, key);
  else if (key == "p2") cfg.p2 = to_double(value, key);
  else if (key == "p3") cfg.p3 = to_double(value, key);
  else if (key == "fitnessBase") cfg.fitnessBase = to_double(value, key);
  else if (key == "minDelta") cfg.minDelta = to_double(value, key);
  else if (key == "maxDelta") cfg.maxDelta = to_double(value, key);
  else if (key == "pMutW") cfg.pMutW = to_double(value, key);
  else if (key == "pMut") cfg.pMut = to_double(value, key);
  else if (key == "pMutNewN") cfg.pMutNewN = to_double(value, key);
  else if (key == "pMutD") cfg.pMutD = to_double(value, key);
  else if (key == "pMutDelN") cfg.pMutDelN = to_double(value, key);
  else if (key == "minW") cfg.minW = to_double(value, key);
  else if (key == "maxW") cfg.maxW = to_double(value, key);
  else if (key == "hmBest") cfg.hmBest = to_int(value, key);
  else if (key == "pRetrain") cfg.pRetrain = to_double(value, key);
  else if (key == "generations") cfg.generations = to_int(value, key);
  else if (key == "calls") cfg.calls = to_int(value, key);
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(
      std::strtoull(value.c_str(), nullptr, 10));
  else if (key == "threads") cfg.threads = to_int(value, key);
  else if (key == "trainEpochs") cfg.trainEpochs = to_int(value, key);
  else if (key == "trainDamping") cfg.trainDamping = to_double(value, key);
  else if (key == "trainL2") cfg.trainL2 = to_double(value, key);
  else if (key == "gridNeuronsMax") cfg.gridNeuronsMax = to_int(value, key);
  else if (key == "gridDu") cfg.gridDu = to_int_list(value, key);
  else if (key == "gridDy") cfg.gridDy = to_int_list(value, key);
  else if (key == "gridRepeats") cfg.gridRepeats = to_int(value, key);
  else if (key == "gridTrainer") cfg.gridTrainer = to_trainer(value, key);
  else if (key == "dataset") cfg.dataset = value;
  else throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

NasConfig parse_config_text(const std::string& text, NasConfig base) {
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      apply_key(base, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(lineno) + ": " +
                        e.what());
    }
  }
  validate(base);
  return base;
}

NasConfig parse_config_file(const std::string& path, NasConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), std::move(base));
}

std::string config_to_text(const NasConfig& cfg) {
  std::ostringstream out;
  out << "algorithm = " << algorithm_name(cfg.algorithm) << "\n";
  out << "maxLay = " << cfg.maxLay << "\n";
  out << "maxNinLay = " << cfg.maxNinLay << "\n";
  out << "duMax = " << cfg.duMax << "\n";
  out << "dyMax = " << cfg.dyMax << "\n";
  out << "duFixed = " << (cfg.duFixed ? std::to_string(*cfg.duFixed) : "none")
      << "\n";
  out << "dyFixed = " << (cfg.dyFixed ? std::to_string(*cfg.dyFixed) : "none")
      << "\n";
  out << "popSize = " << cfg.popSize << "\n";
  out << "pCross = " << format_double(cfg.pCross) << "\n";
  out << "p1 = " << format_double(cfg.p1) << "\n";
  out << "p2 = " << format_double(cfg.p2) << "\n";
  out << "p3 = " << format_double(cfg.p3) << "\n";
  out << "fitnessBase = " << format_double(cfg.fitnessBase) << "\n";
  out << "minDelta = " << format_double(cfg.minDelta) << "\n";
  out << "maxDelta = " << format_double(cfg.maxDelta) << "\n";
  out << "pMutW = " << format_double(cfg.pMutW) << "\n";
  out << "pMut = " << format_double(cfg.pMut) << "\n";
  out << "pMutNewN = " << format_double(cfg.pMutNewN) << "\n";
  out << "pMutD = " << format_double(cfg.pMutD) << "\n";
  out << "pMutDelN = " << format_double(cfg.pMutDelN) << "\n";
  out << "minW = " << format_double(cfg.minW) << "\n";
  out << "maxW = " << format_double(cfg.maxW) << "\n";
  out << "hmBest = " << cfg.hmBest << "\n";
  out << "pRetrain = " << format_double(cfg.pRetrain) << "\n";
  out << "generations = " << cfg.generations << "\n";
  out << "calls = " << cfg.calls << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "threads = " << cfg.threads << "\n";
  out << "trainEpochs = " << cfg.trainEpochs << "\n";
  out << "trainDamping = " << format_double(cfg.trainDamping) << "\n";
  out << "trainL2 = " << format_double(cfg.trainL2) << "\n";
  out << "gridNeuronsMax = " << cfg.gridNeuronsMax << "\n";
  out << "gridDu = ";
  for (std::size_t i = 0; i < cfg.gridDu.size(); ++i)
    out << (i ? "," : "") << cfg.gridDu[i];
  out << "\n";
  out << "gridDy = ";
  for (std::size_t i = 0; i < cfg.gridDy.size(); ++i)
    out << (i ? "," : "") << cfg.gridDy[i];
  out << "\n";
  out << "gridRepeats = " << cfg.gridRepeats << "\n";
  out << "gridTrainer = " << trainer_name(cfg.gridTrainer) << "\n";
  out << "dataset = " << cfg.dataset << "\n";
  return out.str();
}

}  // namespace evonarx
