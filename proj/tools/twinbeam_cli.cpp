// twinbeam: exact twin-beam photon statistics, heralded-state figures of
// merit, Monte Carlo experiment synthesis, and the estimation pipeline for
// measured joint counts.

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "twinbeam/twinbeam.hpp"

namespace {

using nlohmann::ordered_json;
using namespace twinbeam;

constexpr int kExitUsage = 2;
constexpr int kExitFormat = 3;
constexpr int kExitStatistics = 4;

int fail(const char* type, const std::string& message, int code) {
  ordered_json j;
  j["error"] = {{"type", type}, {"message", message}};
  std::cerr << j.dump() << '\n';
  return code;
}

ModeRegime parse_regime(const std::string& s) {
  return s == "sm" ? ModeRegime::single_mode : ModeRegime::multimode;
}

DetectorKind parse_detector(const std::string& s) {
  return s == "bucket" ? DetectorKind::bucket : DetectorKind::pnr;
}

Arm parse_arm(const std::string& s) {
  return s == "signal" ? Arm::signal : Arm::idler;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os = open_output(path);
  os << text;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string regime = "mm";
  double mean_n = 0.0;
  double eta = 0.02;  // the few-percent heralding regime of TES experiments
  std::string detector = "pnr";
  int herald_n = 1;
  int order = 2;
  double tail_tol = kDefaultTailTolerance;
  std::string out;
  std::string dist_out;
};

int run_simulate(const SimulateArgs& args) {
  const PdcSource source{parse_regime(args.regime), args.mean_n};
  const CutoffResult cut = auto_cutoff(source, args.tail_tol);
  const JointDistribution joint = pdc_joint(source, cut.n_max);
  HeraldSpec spec;
  spec.detector = {parse_detector(args.detector), args.eta};
  spec.condition_n = args.herald_n;
  const double herald_p = herald_probability(joint, spec);
  const PhotonDistribution heralded = heralded_state(joint, spec);
  const int moment_order = std::max(args.order, 5);
  const MomentSet moments = moment_set(heralded, moment_order);
  const double parity_exact = parity(heralded);
  const std::vector<double> parity_series =
      mgf_partial_sums(moments, 2.0, args.order);
  const MgfCurve curve = mgf_curve_exact(heralded, 21);

  ordered_json j;
  j["schema"] = 1;
  j["params"] = {{"regime", args.regime},   {"mean_n", args.mean_n},
                 {"eta", args.eta},         {"detector", args.detector},
                 {"herald_n", args.herald_n}, {"order", args.order},
                 {"tail_tol", args.tail_tol}};
  j["n_max"] = cut.n_max;
  j["cutoff_capped"] = cut.cap_hit;
  j["herald_probability"] = herald_p;
  if (args.herald_n == 1)
    j["preparation_probability"] =
        preparation_probability(source, args.eta);
  j["mean_heralded"] = moments.mean();
  ordered_json g;
  for (int m = 2; m <= moment_order; ++m)
    g["g" + std::to_string(m)] = moments.order(m);
  j["g"] = g;
  j["parity"] = parity_exact;
  j["parity_series"] = parity_series;
  j["mgf"] = {{"mu", curve.mu}, {"value", curve.value}};
  j["flags"] = {{"sub_poissonian", moments.order(2) < 1.0},
                {"negative_parity", parity_exact < 0.0}};
  emit(args.out, j.dump(2) + "\n");

  if (!args.dist_out.empty()) {
    std::ofstream os = open_output(args.dist_out);
    write_distribution_csv(
        os, heralded,
        {{"regime", args.regime},
         {"mean_n", detail::format_double(args.mean_n)},
         {"eta", detail::format_double(args.eta)},
         {"detector", args.detector},
         {"herald_n", std::to_string(args.herald_n)},
         {"n_max", std::to_string(cut.n_max)}});
  }
  return 0;
}

// ------------------------------------------------------------------- sweep

struct SweepArgs {
  std::string quantity = "heralded-g2-pnr";
  std::string regime = "mm";
  int order = 2;
  double eta_min = 0.01, eta_max = 1.0;
  std::size_t eta_points = 50;
  double mean_min = 0.01, mean_max = 3.0;
  std::size_t mean_points = 50;
  double tail_tol = kDefaultTailTolerance;
  std::string out;
};

SweepQuantity parse_quantity(const std::string& s) {
  if (s == "heralded-g2-pnr") return SweepQuantity::heralded_g2_pnr;
  if (s == "heralded-g2-bucket") return SweepQuantity::heralded_g2_bucket;
  if (s == "parity-exact") return SweepQuantity::parity_exact;
  if (s == "parity-truncated") return SweepQuantity::parity_truncated;
  if (s == "prep-probability") return SweepQuantity::prep_probability;
  return SweepQuantity::mean_heralded;
}

int run_sweep(const SweepArgs& args) {
  SweepGrid grid;
  grid.eta_axis = lin_spaced(args.eta_min, args.eta_max, args.eta_points);
  grid.mean_axis = log_spaced(args.mean_min, args.mean_max, args.mean_points);
  grid.quantity = parse_quantity(args.quantity);
  grid.regime = parse_regime(args.regime);
  grid.truncation_order = args.order;
  grid.tail_tolerance = args.tail_tol;
  const SweepResult result = evaluate_sweep(grid);

  Metadata metadata{{"quantity", args.quantity},
                    {"regime", args.regime},
                    {"eta_min", detail::format_double(args.eta_min)},
                    {"eta_max", detail::format_double(args.eta_max)},
                    {"eta_points", std::to_string(args.eta_points)},
                    {"mean_min", detail::format_double(args.mean_min)},
                    {"mean_max", detail::format_double(args.mean_max)},
                    {"mean_points", std::to_string(args.mean_points)},
                    {"tail_tol", detail::format_double(args.tail_tol)}};
  if (grid.quantity == SweepQuantity::parity_truncated)
    metadata.emplace_back("order", std::to_string(args.order));

  std::ostringstream buf;
  write_sweep_csv(buf, result, metadata);
  emit(args.out, buf.str());
  return 0;
}

// ------------------------------------------------------------------ sample

struct SampleArgs {
  std::string regime = "mm";
  double mean_n = 0.0;
  double eta_signal = 1.0, eta_idler = 1.0;
  std::string detector_signal = "pnr", detector_idler = "pnr";
  std::uint64_t pulses = 0;
  std::uint64_t seed = 0;
  double tail_tol = kDefaultTailTolerance;
  std::string out;
};

int run_sample(const SampleArgs& args) {
  ExperimentConfig config;
  config.source = {parse_regime(args.regime), args.mean_n};
  config.eta_signal = args.eta_signal;
  config.eta_idler = args.eta_idler;
  config.detector_signal = parse_detector(args.detector_signal);
  config.detector_idler = parse_detector(args.detector_idler);
  config.pulses = args.pulses;
  config.seed = args.seed;
  config.tail_tolerance = args.tail_tol;
  const JointCounts counts = sample_run(config);

  std::ostringstream buf;
  write_counts_csv(buf, counts,
                   {{"seed", std::to_string(args.seed)},
                    {"regime", args.regime},
                    {"mean_n", detail::format_double(args.mean_n)},
                    {"eta_signal", detail::format_double(args.eta_signal)},
                    {"eta_idler", detail::format_double(args.eta_idler)},
                    {"detector_signal", args.detector_signal},
                    {"detector_idler", args.detector_idler},
                    {"tail_tol", detail::format_double(args.tail_tol)}});
  emit(args.out, buf.str());
  return 0;
}

// ---------------------------------------------------------------- estimate

struct EstimateArgs {
  std::string input;
  std::string herald_arm = "idler";
  int herald_n = 1;
  int order = 2;
  int resamples = 1000;
  double level = 0.68;
  std::uint64_t seed = 0;
  std::uint64_t min_events = 100;
  std::string out;
};

int run_estimate(const EstimateArgs& args) {
  std::ifstream is = open_input(args.input);
  const CountsFile file = read_counts_csv(is);
  PipelineOptions opts;
  opts.resamples = args.resamples;
  opts.level = args.level;
  opts.seed = args.seed;
  opts.min_events_per_order = args.min_events;
  opts.herald_n = args.herald_n;
  const EstimateReport report =
      parity_pipeline(file.counts, parse_arm(args.herald_arm), args.order, opts);

  ordered_json body = report_to_json(report);
  ordered_json j;
  j["schema"] = body["schema"];
  j["params"] = {{"input", args.input},
                 {"herald_arm", args.herald_arm},
                 {"herald_n", args.herald_n},
                 {"order", args.order},
                 {"resamples", args.resamples},
                 {"level", args.level},
                 {"seed", args.seed},
                 {"min_events", args.min_events}};
  ordered_json input_meta;
  for (const auto& [key, value] : file.metadata) input_meta[key] = value;
  j["input_metadata"] = input_meta;
  for (const auto& [key, value] : body.items())
    if (key != "schema") j[key] = value;
  emit(args.out, j.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"twin-beam photon statistics toolkit"};
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* c_sim = app.add_subcommand(
      "simulate", "Exact heralded-state figures of merit for one parameter point");
  c_sim->add_option("--regime", sim.regime, "Source regime")
      ->check(CLI::IsMember({"sm", "mm"}))
      ->required();
  c_sim->add_option("--mean-n", sim.mean_n, "Mean photon number per pulse")
      ->required();
  c_sim->add_option("--eta", sim.eta, "Herald arm efficiency")
      ->capture_default_str();
  c_sim->add_option("--detector", sim.detector, "Herald detector kind")
      ->check(CLI::IsMember({"pnr", "bucket"}))
      ->capture_default_str();
  c_sim->add_option("--herald", sim.herald_n, "Herald outcome (photon count)")
      ->capture_default_str();
  c_sim->add_option("--order", sim.order, "Parity series truncation order")
      ->capture_default_str();
  c_sim->add_option("--tail-tol", sim.tail_tol, "Truncation tail tolerance")
      ->capture_default_str();
  c_sim->add_option("--out", sim.out, "Metrics JSON path (default stdout)");
  c_sim->add_option("--dist-out", sim.dist_out,
                    "Write the heralded distribution CSV here");

  SweepArgs swp;
  CLI::App* c_swp = app.add_subcommand(
      "sweep", "Evaluate a figure of merit over the (eta, mean_n) plane");
  c_swp->add_option("--quantity", swp.quantity, "Quantity to evaluate")
      ->check(CLI::IsMember({"heralded-g2-pnr", "heralded-g2-bucket",
                             "parity-exact", "parity-truncated",
                             "prep-probability", "mean-heralded"}))
      ->required();
  c_swp->add_option("--regime", swp.regime, "Source regime")
      ->check(CLI::IsMember({"sm", "mm"}))
      ->required();
  c_swp->add_option("--order", swp.order, "Order for parity-truncated")
      ->capture_default_str();
  c_swp->add_option("--eta-min", swp.eta_min, "Efficiency axis start")
      ->capture_default_str();
  c_swp->add_option("--eta-max", swp.eta_max, "Efficiency axis end")
      ->capture_default_str();
  c_swp->add_option("--eta-points", swp.eta_points, "Efficiency axis points")
      ->capture_default_str();
  c_swp->add_option("--mean-min", swp.mean_min, "Mean axis start (log-spaced)")
      ->capture_default_str();
  c_swp->add_option("--mean-max", swp.mean_max, "Mean axis end")
      ->capture_default_str();
  c_swp->add_option("--mean-points", swp.mean_points, "Mean axis points")
      ->capture_default_str();
  c_swp->add_option("--tail-tol", swp.tail_tol, "Truncation tail tolerance")
      ->capture_default_str();
  c_swp->add_option("--out", swp.out, "CSV path (default stdout)");

  SampleArgs smp;
  CLI::App* c_smp = app.add_subcommand(
      "sample", "Monte Carlo run producing a joint counts file");
  c_smp->add_option("--regime", smp.regime, "Source regime")
      ->check(CLI::IsMember({"sm", "mm"}))
      ->required();
  c_smp->add_option("--mean-n", smp.mean_n, "Mean photon number per pulse")
      ->required();
  c_smp->add_option("--eta-signal", smp.eta_signal, "Signal arm efficiency")
      ->capture_default_str();
  c_smp->add_option("--eta-idler", smp.eta_idler, "Idler arm efficiency")
      ->capture_default_str();
  c_smp->add_option("--detector-signal", smp.detector_signal,
                    "Signal detector kind")
      ->check(CLI::IsMember({"pnr", "bucket"}))
      ->capture_default_str();
  c_smp->add_option("--detector-idler", smp.detector_idler,
                    "Idler detector kind")
      ->check(CLI::IsMember({"pnr", "bucket"}))
      ->capture_default_str();
  c_smp->add_option("--pulses", smp.pulses, "Number of pulses")->required();
  c_smp->add_option("--seed", smp.seed, "RNG seed")->capture_default_str();
  c_smp->add_option("--tail-tol", smp.tail_tol, "Truncation tail tolerance")
      ->capture_default_str();
  c_smp->add_option("--out", smp.out, "Counts CSV path (default stdout)");

  EstimateArgs est;
  CLI::App* c_est = app.add_subcommand(
      "estimate", "Run the reconstruction pipeline on a joint counts file");
  c_est->add_option("input", est.input, "Counts CSV file")->required();
  c_est->add_option("--herald-arm", est.herald_arm, "Arm carrying the herald")
      ->check(CLI::IsMember({"signal", "idler"}))
      ->capture_default_str();
  c_est->add_option("--herald-n", est.herald_n, "Herald outcome (photon count)")
      ->capture_default_str();
  c_est->add_option("--order", est.order, "Series truncation order")
      ->capture_default_str();
  c_est->add_option("--resamples", est.resamples, "Bootstrap resamples")
      ->capture_default_str();
  c_est->add_option("--level", est.level, "Bootstrap confidence level")
      ->capture_default_str();
  c_est->add_option("--seed", est.seed, "Bootstrap RNG seed")
      ->capture_default_str();
  c_est->add_option("--min-events", est.min_events,
                    "Minimum herald-slice events per series order")
      ->capture_default_str();
  c_est->add_option("--out", est.out, "Report JSON path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail("InvalidArgument", e.what(), kExitUsage);
  }

  try {
    if (c_sim->parsed()) return run_simulate(sim);
    if (c_swp->parsed()) return run_sweep(swp);
    if (c_smp->parsed()) return run_sample(smp);
    return run_estimate(est);
  } catch (const CsvFormatError& e) {
    return fail("CsvFormatError", e.what(), kExitFormat);
  } catch (const InvalidArgument& e) {
    return fail("InvalidArgument", e.what(), kExitUsage);
  } catch (const ZeroHeraldProbability& e) {
    return fail("ZeroHeraldProbability", e.what(), kExitStatistics);
  } catch (const ZeroMeanState& e) {
    return fail("ZeroMeanState", e.what(), kExitStatistics);
  } catch (const CarNotAboveUnity& e) {
    return fail("CarNotAboveUnity", e.what(), kExitStatistics);
  } catch (const ZeroSingles& e) {
    return fail("ZeroSingles", e.what(), kExitStatistics);
  } catch (const NoHeraldEvents& e) {
    return fail("NoHeraldEvents", e.what(), kExitStatistics);
  } catch (const EmptyData& e) {
    return fail("EmptyData", e.what(), kExitStatistics);
  } catch (const InsufficientData& e) {
    return fail("InsufficientData", e.what(), kExitStatistics);
  } catch (const Error& e) {
    return fail("Error", e.what(), kExitUsage);
  } catch (const std::exception& e) {
    return fail("InternalError", e.what(), 1);
  }
}
