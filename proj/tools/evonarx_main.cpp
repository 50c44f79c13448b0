// Command-line entry point: dataset generation from the surrogate plant,
// seeded NAS experiment runs, the exhaustive-search baseline, verification of
// trained genomes against datasets, and re-reporting of result bundles.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "evonarx/algorithms.hpp"
#include "evonarx/config.hpp"
#include "evonarx/dataset_io.hpp"
#include "evonarx/kernels.hpp"
#include "evonarx/serialize.hpp"

namespace {

using namespace evonarx;

namespace fs = std::filesystem;

Json config_to_json(const NasConfig& cfg) {
  Json j;
  j["algorithm"] = algorithm_name(cfg.algorithm);
  j["maxLay"] = cfg.maxLay;
  j["maxNinLay"] = cfg.maxNinLay;
  j["duMax"] = cfg.duMax;
  j["dyMax"] = cfg.dyMax;
  j["duFixed"] = cfg.duFixed ? Json(*cfg.duFixed) : Json(nullptr);
  j["dyFixed"] = cfg.dyFixed ? Json(*cfg.dyFixed) : Json(nullptr);
  j["popSize"] = cfg.popSize;
  j["pCross"] = cfg.pCross;
  j["p1"] = cfg.p1;
  j["p2"] = cfg.p2;
  j["p3"] = cfg.p3;
  j["fitnessBase"] = cfg.fitnessBase;
  j["minDelta"] = cfg.minDelta;
  j["maxDelta"] = cfg.maxDelta;
  j["pMutW"] = cfg.pMutW;
  j["pMut"] = cfg.pMut;
  j["pMutNewN"] = cfg.pMutNewN;
  j["pMutD"] = cfg.pMutD;
  j["pMutDelN"] = cfg.pMutDelN;
  j["minW"] = cfg.minW;
  j["maxW"] = cfg.maxW;
  j["hmBest"] = cfg.hmBest;
  j["pRetrain"] = cfg.pRetrain;
  j["generations"] = cfg.generations;
  j["calls"] = cfg.calls;
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["trainEpochs"] = cfg.trainEpochs;
  j["trainDamping"] = cfg.trainDamping;
  j["trainL2"] = cfg.trainL2;
  j["gridNeuronsMax"] = cfg.gridNeuronsMax;
  j["gridDu"] = cfg.gridDu;
  j["gridDy"] = cfg.gridDy;
  j["gridRepeats"] = cfg.gridRepeats;
  j["gridTrainer"] = trainer_name(cfg.gridTrainer);
  j["dataset"] = cfg.dataset;
  return j;
}

Dataset resolve_dataset(const NasConfig& cfg) {
  if (!cfg.dataset.empty()) return load_csv(cfg.dataset);
  SurrogatePlantParams params;
  return generate_dataset(params, learning_schedule(), 3000.0, 1.0, nullptr,
                          "learning");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

// Shared config-layer flags for run/exhaustive.
struct ConfigCli {
  std::string config_file;
  std::string preset_name;
  std::string algorithm;
  std::vector<std::string> overrides;  // key=value
  int calls = -1;
  int generations = -1;
  long long seed = -1;
  int threads = -1;
  std::string dataset;
  std::string out_dir = "results";

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_file, "key=value config file");
    cmd->add_option("--preset", preset_name,
                    "named preset (paper-dnas1..4, paper-exhaustive)");
    cmd->add_option("--algorithm", algorithm, "dnas1|dnas2|dnas3|dnas4");
    cmd->add_option("--calls", calls, "independent seeded calls");
    cmd->add_option("--generations", generations, "generations per call");
    cmd->add_option("--seed", seed, "master seed");
    cmd->add_option("--threads", threads, "evaluation/training threads");
    cmd->add_option("--dataset", dataset, "learning dataset CSV");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--set", overrides, "extra key=value overrides")
        ->take_all();
  }

  NasConfig build(Algorithm fallback) const {
    NasConfig cfg;
    if (!preset_name.empty()) {
      cfg = preset(preset_name);
    } else if (!algorithm.empty()) {
      const auto a = algorithm_from_name(algorithm);
      if (!a) throw ConfigError("unknown algorithm '" + algorithm + "'");
      cfg = defaults_for(*a);
    } else {
      cfg = defaults_for(fallback);
    }
    if (!config_file.empty()) cfg = parse_config_file(config_file, cfg);
    if (!algorithm.empty()) {
      const auto a = algorithm_from_name(algorithm);
      if (!a) throw ConfigError("unknown algorithm '" + algorithm + "'");
      cfg.algorithm = *a;
    }
    std::string text;
    for (const auto& kv : overrides) text += kv + "\n";
    if (calls >= 0) text += "calls = " + std::to_string(calls) + "\n";
    if (generations >= 0)
      text += "generations = " + std::to_string(generations) + "\n";
    if (seed >= 0) text += "seed = " + std::to_string(seed) + "\n";
    if (threads >= 0) text += "threads = " + std::to_string(threads) + "\n";
    if (!dataset.empty()) text += "dataset = " + dataset + "\n";
    return parse_config_text(text, cfg);
  }
};

int cmd_generate_data(const std::string& out_dir, const std::string& schedule,
                      double duration, double sample_period, double noise_std,
                      long long seed, const std::string& custom_file) {
  fs::create_directories(out_dir);
  SurrogatePlantParams params;
  params.noise_std = noise_std;

  std::vector<std::pair<std::string, RodSchedule>> work;
  if (!custom_file.empty()) {
    std::ifstream in(custom_file);
    if (!in) throw ParseError("cannot open schedule file '" + custom_file + "'");
    RodSchedule sched;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line[0] == '#') continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos)
        throw ParseError(custom_file + ":" + std::to_string(lineno) +
                         ": expected 't,z'");
      sched.steps.emplace_back(std::stod(line.substr(0, comma)),
                               std::stod(line.substr(comma + 1)));
    }
    work.emplace_back(fs::path(custom_file).stem().string(), std::move(sched));
  } else if (schedule == "all") {
    for (const auto& name : bundled_schedule_names())
      work.emplace_back(name, bundled_schedule(name));
  } else {
    work.emplace_back(schedule, bundled_schedule(schedule));
  }

  for (const auto& [name, sched] : work) {
    RngStream noise(derive_seed(static_cast<std::uint64_t>(seed), 0xda7a, 0, 0));
    Dataset data = generate_dataset(params, sched, duration, sample_period,
                                    noise_std > 0.0 ? &noise : nullptr, name);
    const fs::path path = fs::path(out_dir) / (name + ".csv");
    save_csv(data, path.string());
    std::cout << "wrote " << path.string() << " (" << data.inputs.size()
              << " samples)\n";
  }
  return 0;
}

}  // namespace

namespace {

int cmd_run_full(const ConfigCli& cli) {
  const NasConfig cfg = cli.build(Algorithm::Dnas3);
  if (cfg.algorithm == Algorithm::Exhaustive)
    throw ConfigError("use the 'exhaustive' subcommand for grid search");
  const Dataset data = resolve_dataset(cfg);
  const fs::path out(cli.out_dir);
  fs::create_directories(out);

  std::vector<RunResult> results(static_cast<std::size_t>(cfg.calls));
  std::vector<bool> failed(static_cast<std::size_t>(cfg.calls), false);
  int ok_calls = 0;
  for (int c = 0; c < cfg.calls; ++c) {
    try {
      results[static_cast<std::size_t>(c)] =
          run_algorithm(cfg, data, call_seed(cfg.seed, c));
      ++ok_calls;
    } catch (const std::exception& e) {
      failed[static_cast<std::size_t>(c)] = true;
      std::cerr << "call " << c << " failed: " << e.what() << "\n";
    }
  }
  if (ok_calls == 0) {
    std::cerr << "all calls failed\n";
    return 1;
  }

  // Per-generation CSV.
  {
    std::string csv =
        "call,generation,best_fitness,mean_fitness,mean_error,population\n";
    for (int c = 0; c < cfg.calls; ++c) {
      if (failed[static_cast<std::size_t>(c)]) continue;
      const auto& hist = results[static_cast<std::size_t>(c)].per_generation;
      for (std::size_t g = 0; g < hist.size(); ++g) {
        csv += std::to_string(c) + "," + std::to_string(g) + "," +
               format_double(hist[g].best_fitness) + "," +
               format_double(hist[g].mean_fitness) + "," +
               format_double(hist[g].mean_error) + "," +
               std::to_string(hist[g].population) + "\n";
      }
    }
    write_text(out / "generations.csv", csv);
  }

  // Per-call best genomes + summary rows.
  Json calls = Json::array();
  std::map<int, int> best_histogram;
  double err_sum = 0.0, neuron_sum = 0.0, du_sum = 0.0, dy_sum = 0.0;
  for (int c = 0; c < cfg.calls; ++c) {
    const auto ci = static_cast<std::size_t>(c);
    Json row;
    row["call"] = c;
    row["seed"] = call_seed(cfg.seed, c);
    row["failed"] = static_cast<bool>(failed[ci]);
    if (!failed[ci]) {
      const RunResult& r = results[ci];
      row["best"] = record_to_json(r.best_record);
      if (r.best_trainer) row["trainer"] = trainer_name(*r.best_trainer);
      row["generations"] =
          static_cast<int>(r.per_generation.size()) - 1;

      Json genome_file;
      genome_file["call"] = c;
      genome_file["seed"] = call_seed(cfg.seed, c);
      genome_file["record"] = record_to_json(r.best_record);
      if (r.best_trainer) genome_file["trainer"] = trainer_name(*r.best_trainer);
      genome_file["genome"] = genome_to_json(r.best);
      write_text(out / ("best_call" + std::to_string(c) + ".json"),
                 genome_file.dump(2) + "\n");

      best_histogram[r.best_record.neuron_count]++;
      err_sum += r.best_record.mean_error;
      neuron_sum += r.best_record.neuron_count;
      du_sum += r.best.du;
      dy_sum += r.best.dy;
    }
    calls.push_back(std::move(row));
  }

  // Indicators over completed calls (Table-5-style averages).
  Json indicators;
  indicators["calls_completed"] = ok_calls;
  indicators["avg_mean_error"] = err_sum / ok_calls;
  indicators["avg_best_neurons"] = neuron_sum / ok_calls;
  indicators["avg_best_du"] = du_sum / ok_calls;
  indicators["avg_best_dy"] = dy_sum / ok_calls;

  Json hist_json;
  {
    std::string csv = "neurons,count\n";
    for (const auto& [n, count] : best_histogram) {
      csv += std::to_string(n) + "," + std::to_string(count) + "\n";
      hist_json[std::to_string(n)] = count;
    }
    write_text(out / "histogram.csv", csv);
  }

  Json summary;
  summary["config"] = config_to_json(cfg);
  Json dataset_meta;
  dataset_meta["name"] = data.name;
  dataset_meta["samples"] = data.inputs.size();
  dataset_meta["nominal_input"] = data.nominal_input;
  dataset_meta["nominal_output"] = data.nominal_output;
  dataset_meta["sample_period"] = data.sample_period;
  summary["dataset"] = std::move(dataset_meta);
  summary["kernel_backend"] = kern::backend_name(kern::active_backend());
  summary["calls"] = std::move(calls);
  summary["indicators"] = std::move(indicators);
  summary["best_neuron_histogram"] = std::move(hist_json);
  write_text(out / "summary.json", summary.dump(2) + "\n");
  write_text(out / "config.txt", config_to_text(cfg));

  // Wall-clock lives in its own file so everything above is byte-reproducible.
  {
    std::string csv = "call,wall_seconds\n";
    double total = 0.0;
    for (int c = 0; c < cfg.calls; ++c) {
      if (failed[static_cast<std::size_t>(c)]) continue;
      const double w = results[static_cast<std::size_t>(c)].wall_seconds;
      csv += std::to_string(c) + "," + format_double(w) + "\n";
      total += w;
    }
    csv += "average," + format_double(total / ok_calls) + "\n";
    write_text(out / "timing.csv", csv);
  }

  std::cout << "completed " << ok_calls << "/" << cfg.calls << " calls; "
            << "avg best mean error "
            << format_double(err_sum / ok_calls) << ", avg best neurons "
            << format_double(neuron_sum / ok_calls) << "\n"
            << "results in " << out.string() << "\n";
  return 0;
}

int cmd_exhaustive_full(const ConfigCli& cli) {
  NasConfig cfg = cli.build(Algorithm::Exhaustive);
  cfg.algorithm = Algorithm::Exhaustive;
  const Dataset data = resolve_dataset(cfg);
  const fs::path out(cli.out_dir);
  fs::create_directories(out);

  const ExhaustiveResult res = exhaustive_search(cfg, data, cfg.seed);

  std::string csv = "neurons,du,dy,best_fitness,best_mean_error\n";
  Json points = Json::array();
  for (const auto& p : res.points) {
    csv += std::to_string(p.neurons) + "," + std::to_string(p.du) + "," +
           std::to_string(p.dy) + "," + format_double(p.best_fitness) + "," +
           format_double(p.best_mean_error) + "\n";
    Json jp;
    jp["neurons"] = p.neurons;
    jp["du"] = p.du;
    jp["dy"] = p.dy;
    jp["best_fitness"] = p.best_fitness;
    jp["best_mean_error"] = p.best_mean_error;
    points.push_back(std::move(jp));
  }
  write_text(out / "grid.csv", csv);

  const GridPoint& win = res.points[res.winner];
  Json summary;
  summary["config"] = config_to_json(cfg);
  summary["dataset"] = data.name;
  summary["points"] = std::move(points);
  Json winner;
  winner["neurons"] = win.neurons;
  winner["du"] = win.du;
  winner["dy"] = win.dy;
  winner["best_fitness"] = win.best_fitness;
  winner["best_mean_error"] = win.best_mean_error;
  summary["winner"] = std::move(winner);
  write_text(out / "exhaustive.json", summary.dump(2) + "\n");

  Json genome_file;
  genome_file["record"] = Json{{"fitness", win.best_fitness},
                               {"mean_error", win.best_mean_error}};
  genome_file["genome"] = genome_to_json(win.best_genome);
  write_text(out / "best_grid.json", genome_file.dump(2) + "\n");
  write_text(out / "timing.csv",
             "total,wall_seconds\ntotal," + format_double(res.wall_seconds) + "\n");

  std::cout << "grid winner: " << win.neurons << " neurons, du=" << win.du
            << ", dy=" << win.dy << ", fitness "
            << format_double(win.best_fitness) << "\nresults in "
            << out.string() << "\n";
  return 0;
}

int cmd_verify(const std::string& genome_path,
               const std::vector<std::string>& dataset_paths,
               const std::string& report_path) {
  const Genome g = load_genome_file(genome_path);
  Json rows = Json::array();
  std::cout << "dataset,mean_error\n";
  for (const auto& path : dataset_paths) {
    const Dataset data = load_csv(path);
    if (static_cast<int>(data.inputs.size()) <= std::max(g.du, g.dy))
      throw ParseError("dataset '" + path +
                       "' shorter than the genome's delay levels");
    const SimResult sim = simulate_closed_loop(
        g, data.inputs, data.nominal_input, data.nominal_output);
    Json row;
    row["dataset"] = data.name;
    if (sim.diverged) {
      row["diverged"] = true;
      std::cout << data.name << ",diverged\n";
    } else {
      const double err = mean_error(sim.outputs, data.targets);
      row["mean_error"] = err;
      std::cout << data.name << "," << format_double(err) << "\n";
    }
    rows.push_back(std::move(row));
  }
  if (!report_path.empty()) {
    Json report;
    report["genome"] = genome_path;
    report["results"] = std::move(rows);
    write_text(report_path, report.dump(2) + "\n");
  }
  return 0;
}

int cmd_report(const std::string& dir) {
  const fs::path summary_path = fs::path(dir) / "summary.json";
  std::ifstream in(summary_path);
  if (!in) throw ParseError("cannot open '" + summary_path.string() + "'");
  Json summary;
  in >> summary;

  const auto& calls = summary.at("calls");
  int ok = 0;
  double err = 0.0, neurons = 0.0;
  std::map<int, int> hist;
  for (const auto& row : calls) {
    if (row.at("failed").get<bool>()) continue;
    ++ok;
    const auto& best = row.at("best");
    err += best.at("mean_error").get<double>();
    neurons += best.at("neurons").get<int>();
    hist[best.at("neurons").get<int>()]++;
  }
  if (ok == 0) {
    std::cerr << "no completed calls in bundle\n";
    return 1;
  }
  std::cout << "algorithm: "
            << summary.at("config").at("algorithm").get<std::string>() << "\n";
  std::cout << "calls completed: " << ok << "\n";
  std::cout << "average best mean error: " << format_double(err / ok) << "\n";
  std::cout << "average best neuron count: " << format_double(neurons / ok)
            << "\n";
  std::cout << "best-neuron histogram:\n";
  for (const auto& [n, count] : hist)
    std::cout << "  " << n << " neurons: " << count << "\n";

  // Cross-check against the stored indicators.
  const auto& ind = summary.at("indicators");
  const double stored = ind.at("avg_mean_error").get<double>();
  if (std::fabs(stored - err / ok) > 1e-12) {
    std::cerr << "indicator mismatch: stored " << stored << " recomputed "
              << err / ok << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evolutionary architecture search for recurrent NARX models"};
  app.require_subcommand(1);

  // generate-data
  auto* gen = app.add_subcommand("generate-data",
                                 "generate surrogate-plant datasets as CSV");
  std::string gen_out = "data";
  std::string gen_schedule = "all";
  std::string gen_custom;
  double gen_duration = 3000.0, gen_period = 1.0, gen_noise = 0.0;
  long long gen_seed = 1;
  gen->add_option("--out", gen_out, "output directory");
  gen->add_option("--schedule", gen_schedule,
                  "all|learning|verification-1|verification-2");
  gen->add_option("--custom-schedule", gen_custom, "CSV of t,z rod targets");
  gen->add_option("--duration", gen_duration, "seconds to simulate");
  gen->add_option("--sample-period", gen_period, "sample period, s");
  gen->add_option("--noise-std", gen_noise, "measurement noise stddev");
  gen->add_option("--seed", gen_seed, "noise seed");

  // run
  auto* run = app.add_subcommand("run", "run a NAS algorithm over seeded calls");
  ConfigCli run_cli;
  run_cli.attach(run);

  // exhaustive
  auto* exh = app.add_subcommand("exhaustive", "grid-search baseline");
  ConfigCli exh_cli;
  exh_cli.attach(exh);
  int exh_grid_neurons = -1;
  std::string exh_grid_du, exh_grid_dy, exh_trainer;
  int exh_repeats = -1;
  exh->add_option("--grid-neurons", exh_grid_neurons, "neurons 1..N");
  exh->add_option("--grid-du", exh_grid_du, "comma list of du values");
  exh->add_option("--grid-dy", exh_grid_dy, "comma list of dy values");
  exh->add_option("--repeats", exh_repeats, "trainings per grid point");
  exh->add_option("--trainer", exh_trainer, "lm|br|scg");

  // verify
  auto* ver = app.add_subcommand("verify",
                                 "simulate a trained genome on datasets");
  std::string ver_genome, ver_report;
  std::vector<std::string> ver_datasets;
  ver->add_option("--genome", ver_genome, "genome JSON file")->required();
  ver->add_option("--dataset", ver_datasets, "dataset CSV (repeatable)")
      ->required()
      ->take_all();
  ver->add_option("--report", ver_report, "optional JSON report path");

  // report
  auto* rep = app.add_subcommand("report", "summarise a result bundle");
  std::string rep_dir = "results";
  rep->add_option("--dir", rep_dir, "result bundle directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed())
      return cmd_generate_data(gen_out, gen_schedule, gen_duration, gen_period,
                               gen_noise, gen_seed, gen_custom);
    if (run->parsed()) return cmd_run_full(run_cli);
    if (exh->parsed()) {
      if (exh_grid_neurons > 0)
        exh_cli.overrides.push_back("gridNeuronsMax=" +
                                    std::to_string(exh_grid_neurons));
      if (!exh_grid_du.empty()) exh_cli.overrides.push_back("gridDu=" + exh_grid_du);
      if (!exh_grid_dy.empty()) exh_cli.overrides.push_back("gridDy=" + exh_grid_dy);
      if (exh_repeats > 0)
        exh_cli.overrides.push_back("gridRepeats=" + std::to_string(exh_repeats));
      if (!exh_trainer.empty())
        exh_cli.overrides.push_back("gridTrainer=" + exh_trainer);
      return cmd_exhaustive_full(exh_cli);
    }
    if (ver->parsed()) return cmd_verify(ver_genome, ver_datasets, ver_report);
    if (rep->parsed()) return cmd_report(rep_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
