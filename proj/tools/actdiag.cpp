// actdiag: command-line front end for the activation-diversity toolkit.
//
// Exit status: 0 on success, 1 on usage errors, 2 on data or estimation errors.
// Results go to --out files or standard output; diagnostics go to standard error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "actdiag/analysis.hpp"
#include "actdiag/density.hpp"
#include "actdiag/error.hpp"
#include "actdiag/manifest.hpp"
#include "actdiag/ranking.hpp"
#include "actdiag/report_json.hpp"
#include "actdiag/tensor_io.hpp"
#include "actdiag/toy_io.hpp"
#include "actdiag/toylab.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

/// Usage problem detected after parsing (conflicting or out-of-range flags).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    std::cout.flush();
  } else {
    actdiag::write_file_bytes(out_path, {reinterpret_cast<const unsigned char*>(text.data()), text.size()});
  }
}

std::string lower_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext;
}

json read_json_file(const fs::path& path) {
  const auto bytes = actdiag::read_file_bytes(path);
  json j = json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (j.is_discarded()) throw actdiag::Error(actdiag::ErrorKind::MalformedReport, "not valid JSON: " + path.string());
  return j;
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeArgs {
  std::string input;
  std::string layer;
  std::size_t bins = 100;
  std::size_t k = 3;
  std::string mode = "paper";
  bool no_jitter = false;
  bool no_normalize = false;
  double jitter_scale = 1e-10;
  std::optional<std::size_t> max_samples;
  std::uint64_t seed = 0;
  bool clamp_negative = false;
  bool include_diagonal = false;
  bool force_full_mi = false;
  std::size_t threads = 0;
  std::string full_mi;
  std::string out;
};

actdiag::ActivationMatrix load_matrix(const std::string& input, const std::string& layer) {
  const fs::path path(input);
  const auto ext = lower_extension(path);
  if (ext == ".csv") return actdiag::read_csv(path);
  if (ext == ".json") {
    const auto manifest = actdiag::read_manifest(path);
    if (layer.empty() && manifest.layers.size() != 1) {
      throw UsageError("manifest lists several layers; choose one with --layer");
    }
    return actdiag::load_layer(layer.empty() ? manifest.layers.front() : manifest.layer(layer));
  }
  return actdiag::read_array(path);
}

int run_analyze(const AnalyzeArgs& a) {
  actdiag::EstimatorConfig cfg;
  cfg.n_bins = a.bins;
  cfg.k = a.k;
  const auto mode = actdiag::parse_mi_mode(a.mode);
  if (!mode) throw UsageError("--mode must be paper or ksg");
  cfg.mi_mode = *mode;
  cfg.normalize = !a.no_normalize;
  cfg.jitter = !a.no_jitter;
  cfg.jitter_scale = a.jitter_scale;
  cfg.max_samples = a.max_samples;
  cfg.seed = a.seed;
  cfg.clamp_negative = a.clamp_negative;

  actdiag::AnalyzeOptions opts;
  opts.diagonal = a.include_diagonal ? actdiag::DiagonalPolicy::Included : actdiag::DiagonalPolicy::Excluded;
  opts.force_full_mi = a.force_full_mi || !a.full_mi.empty();
  opts.threads = a.threads;

  const auto m = load_matrix(a.input, a.layer);
  const auto report = actdiag::analyze(m, cfg, opts);
  if (!a.full_mi.empty()) {
    const auto& mi = *report.mi;
    actdiag::write_file_bytes(a.full_mi, actdiag::encode_npy(mi.n, mi.n, mi.values));
  }
  emit(actdiag::dump(actdiag::report_to_json(report)), a.out);
  return 0;
}

// ---------------------------------------------------------------------------
// density

struct DensityArgs {
  std::string input;
  std::size_t max_components = 5;
  std::uint64_t seed = 0;
  std::string out;
};

int run_density(const DensityArgs& a) {
  const fs::path path(a.input);
  std::vector<double> values;
  if (lower_extension(path) == ".json") {
    const auto report = actdiag::report_from_json(read_json_file(path));
    values = report.pair_values();
    if (values.empty()) {
      throw actdiag::Error(actdiag::ErrorKind::MalformedReport,
                           "report carries no per-pair MI values (histogram only or a single neuron)");
    }
  } else {
    const auto m = actdiag::read_csv(path);
    values.assign(m.data().begin(), m.data().end());
  }
  actdiag::DensityFitOptions opts;
  opts.max_components = a.max_components;
  opts.seed = a.seed;
  const auto model = actdiag::fit_density(values, opts);
  emit(actdiag::dump(actdiag::density_to_json(model)), a.out);
  return 0;
}

// ---------------------------------------------------------------------------
// rank

struct RankArgs {
  std::string extrinsic;
  std::vector<std::string> reports;
  bool raw_mi = false;
  std::string out;
};

std::vector<std::pair<std::string, double>> read_extrinsic(const fs::path& path) {
  const auto bytes = actdiag::read_file_bytes(path);
  std::istringstream in(std::string(bytes.begin(), bytes.end()));
  std::vector<std::pair<std::string, double>> rows;
  std::string line;
  bool header = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw actdiag::Error(actdiag::ErrorKind::RaggedRows, path.string() + ":" + std::to_string(line_no) +
                                                               ": expected two cells model_id,metric");
    }
    std::string id = line.substr(0, comma), cell = line.substr(comma + 1);
    if (header) {
      header = false;
      if (id != "model_id" || cell != "metric") {
        throw actdiag::Error(actdiag::ErrorKind::MalformedHeader, path.string() + ": header must be model_id,metric");
      }
      continue;
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || cell.find_first_not_of(" \t", used) != std::string::npos) {
      throw actdiag::Error(actdiag::ErrorKind::NonNumericCell, path.string() + ":" + std::to_string(line_no) +
                                                                   ": metric '" + cell + "' is not a number");
    }
    rows.emplace_back(std::move(id), v);
  }
  return rows;
}

int run_rank(const RankArgs& a) {
  const auto extrinsic = read_extrinsic(a.extrinsic);
  std::vector<actdiag::ModelReport> reports;
  for (const auto& file : a.reports) {
    reports.push_back({fs::path(file).stem().string(), actdiag::report_from_json(read_json_file(file))});
  }
  const auto orientation = a.raw_mi ? actdiag::MiOrientation::Raw : actdiag::MiOrientation::NegateMi;
  const auto result = actdiag::rank_models(reports, extrinsic, orientation);
  emit(actdiag::dump(actdiag::ranking_to_json(result)), a.out);
  return 0;
}

// ---------------------------------------------------------------------------
// toy train / toy sweep

struct ToyOverrides {
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> n_train;
  std::optional<std::size_t> probe_samples;
  std::string mode = "paper";
};

void apply_overrides(const ToyOverrides& o, actdiag::toy::CirclesConfig& circles, actdiag::toy::Hyperparameters& hyper,
                     actdiag::EstimatorConfig& est, std::size_t& probe_samples) {
  if (o.epochs) hyper.epochs = *o.epochs;
  if (o.n_train) circles.n_train = *o.n_train;
  if (o.probe_samples) probe_samples = *o.probe_samples;
  const auto mode = actdiag::parse_mi_mode(o.mode);
  if (!mode) throw UsageError("--mode must be paper or ksg");
  est.mi_mode = *mode;
}

actdiag::toy::Variant parse_variant_flag(const std::string& text) {
  const auto v = actdiag::toy::parse_variant(text);
  if (!v) throw UsageError("--variant must be base, spurious or shuffled");
  return *v;
}

struct TrainArgs {
  std::string variant = "base";
  std::optional<double> alpha;
  std::optional<double> beta;
  std::uint64_t seed = 0;
  std::string dump_dir;
  std::string out;
  ToyOverrides overrides;
};

int run_toy_train(const TrainArgs& a) {
  using namespace actdiag::toy;
  const Variant v = parse_variant_flag(a.variant);
  if (a.alpha && v != Variant::Spurious) throw UsageError("--alpha applies only to --variant spurious");
  if (a.beta && v != Variant::Shuffled) throw UsageError("--beta applies only to --variant shuffled");

  RunConfig cfg;
  cfg.circles = default_circles(v);
  if (a.alpha) cfg.circles.alpha = a.alpha;
  if (a.beta) cfg.circles.beta = a.beta;
  cfg.circles.seed = a.seed;
  cfg.hyper = default_hyper(v);
  apply_overrides(a.overrides, cfg.circles, cfg.hyper, cfg.estimator, cfg.probe_samples);

  const auto run = run_toy(cfg);
  if (!a.dump_dir.empty()) {
    const fs::path dir(a.dump_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw actdiag::Error(actdiag::ErrorKind::IoFailure, "cannot create '" + dir.string() + "': " + ec.message());
    json manifest;
    manifest["schema"] = actdiag::kManifestSchema;
    manifest["model"] = "toy-" + std::string(to_string(v)) + "-seed" + std::to_string(a.seed);
    manifest["layers"] = json::array();
    for (std::size_t l = 0; l < run.activations.size(); ++l) {
      const auto& acts = run.activations[l];
      const std::string file = "hidden_" + std::to_string(l) + ".npy";
      actdiag::write_array(acts, dir / file);
      manifest["layers"].push_back({{"name", "hidden_" + std::to_string(l)},
                                    {"path", file},
                                    {"samples", acts.samples()},
                                    {"neurons", acts.neurons()}});
    }
    manifest["seed"] = a.seed;
    const std::string text = actdiag::dump(manifest);
    actdiag::write_file_bytes(dir / "manifest.json", {reinterpret_cast<const unsigned char*>(text.data()), text.size()});
  }
  emit(actdiag::dump(run_to_json(cfg, run.record)), a.out);
  return 0;
}

struct SweepArgs {
  std::string variant;
  std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};
  std::size_t seeds = 5;
  std::size_t threads = 0;
  std::string out;
  std::string csv;
  ToyOverrides overrides;
};

int run_toy_sweep(const SweepArgs& a) {
  using namespace actdiag::toy;
  const Variant v = parse_variant_flag(a.variant);
  if (v == Variant::Base) throw UsageError("toy sweep needs --variant spurious or shuffled");
  if (a.grid.size() < 2) throw UsageError("--grid needs at least two values");
  for (double g : a.grid) {
    if (!(g >= 0.0 && g <= 1.0)) throw UsageError("--grid values must lie in [0, 1]");
  }
  if (a.seeds == 0) throw UsageError("--seeds must be positive");

  SweepOptions opts = default_sweep(v);
  opts.grid = a.grid;
  opts.seeds.clear();
  for (std::size_t s = 0; s < a.seeds; ++s) opts.seeds.push_back(s);
  opts.threads = a.threads;
  apply_overrides(a.overrides, opts.circles, opts.hyper, opts.estimator, opts.probe_samples);

  const auto result = run_sweep(opts);
  if (!a.csv.empty()) emit(sweep_to_csv(result), a.csv);
  emit(actdiag::dump(sweep_to_json(result)), a.out);
  return 0;
}

void add_toy_overrides(CLI::App* cmd, ToyOverrides& o) {
  cmd->add_option("--epochs", o.epochs, "Training epochs (default per variant)")->check(CLI::PositiveNumber);
  cmd->add_option("--n-train", o.n_train, "Training rows (default per variant)")->check(CLI::PositiveNumber);
  cmd->add_option("--probe-samples", o.probe_samples, "Rows of the activation probe set (default 1000)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--mode", o.mode, "MI estimator form: paper or ksg")->capture_default_str();
}

// ---------------------------------------------------------------------------
// convert

struct ConvertArgs {
  std::string csv;
  std::string npy;
};

int run_convert(const ConvertArgs& a) {
  actdiag::write_array(actdiag::read_csv(a.csv), a.npy);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Activation-diversity diagnostics: neuron entropy and pairwise mutual information", "actdiag"};
  app.require_subcommand(1);

  AnalyzeArgs analyze;
  auto* c_analyze = app.add_subcommand("analyze", "Entropy and pairwise MI of an activation matrix");
  c_analyze->add_option("matrix", analyze.input, "Input .npy, .csv, or exporter manifest .json")->required();
  c_analyze->add_option("--layer", analyze.layer, "Layer name when the input is a manifest");
  c_analyze->add_option("--bins", analyze.bins, "Entropy bins")->check(CLI::PositiveNumber)->capture_default_str();
  c_analyze->add_option("--k", analyze.k, "Neighbour count")->check(CLI::PositiveNumber)->capture_default_str();
  c_analyze->add_option("--mode", analyze.mode, "MI estimator form: paper or ksg")->capture_default_str();
  c_analyze->add_flag("--no-jitter", analyze.no_jitter, "Disable tie-breaking jitter");
  c_analyze->add_flag("--no-normalize", analyze.no_normalize, "Skip per-column z-scoring before MI");
  c_analyze->add_option("--jitter-scale", analyze.jitter_scale, "Jitter amplitude relative to column range")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_analyze->add_option("--max-samples", analyze.max_samples, "Seeded row subsample cap")->check(CLI::PositiveNumber);
  c_analyze->add_option("--seed", analyze.seed, "Seed for jitter and subsampling")->capture_default_str();
  c_analyze->add_flag("--clamp-negative", analyze.clamp_negative, "Clamp negative MI estimates to zero");
  c_analyze->add_flag("--include-diagonal", analyze.include_diagonal, "Estimate I(A_i; A_i) on the diagonal");
  c_analyze->add_flag("--force-full-mi", analyze.force_full_mi, "Keep the full matrix even for very wide layers");
  c_analyze->add_option("--threads", analyze.threads, "Worker threads (0 = all cores)")->capture_default_str();
  c_analyze->add_option("--full-mi", analyze.full_mi, "Also write the N x N MI matrix as .npy");
  c_analyze->add_option("--out", analyze.out, "Report JSON path (default: stdout)");

  DensityArgs density;
  auto* c_density = app.add_subcommand("density", "Gaussian-mixture density of MI values");
  c_density->add_option("input", density.input, "Report .json or a CSV of values")->required();
  c_density->add_option("--max-components", density.max_components, "Largest mixture size tried")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_density->add_option("--seed", density.seed, "Seed for k-means++ initialisation")->capture_default_str();
  c_density->add_option("--out", density.out, "Density JSON path (default: stdout)");

  RankArgs rank;
  auto* c_rank = app.add_subcommand("rank", "Kendall tau between an extrinsic metric and report measures");
  c_rank->add_option("--extrinsic", rank.extrinsic, "CSV with header model_id,metric")->required();
  c_rank->add_option("reports", rank.reports, "Report JSON files; file stems are model ids")->required();
  c_rank->add_flag("--raw-mi", rank.raw_mi, "Correlate mean MI without negating it");
  c_rank->add_option("--out", rank.out, "Ranking JSON path (default: stdout)");

  auto* c_toy = app.add_subcommand("toy", "Concentric-circles toy experiments");
  c_toy->require_subcommand(1);

  TrainArgs train;
  auto* c_train = c_toy->add_subcommand("train", "Train one toy model and analyse its hidden layers");
  c_train->add_option("--variant", train.variant, "base, spurious or shuffled")->capture_default_str();
  auto* o_alpha = c_train->add_option("--alpha", train.alpha, "Spurious-feature agreement fraction")
                      ->check(CLI::Range(0.0, 1.0));
  auto* o_beta =
      c_train->add_option("--beta", train.beta, "Fraction of training labels redrawn")->check(CLI::Range(0.0, 1.0));
  o_alpha->excludes(o_beta);
  c_train->add_option("--seed", train.seed, "Data, initialisation and jitter seed")->capture_default_str();
  c_train->add_option("--dump-activations", train.dump_dir, "Write per-layer .npy files and a manifest here");
  c_train->add_option("--out", train.out, "Run JSON path (default: stdout)");
  add_toy_overrides(c_train, train.overrides);

  SweepArgs sweep;
  auto* c_sweep = c_toy->add_subcommand("sweep", "Grid of alpha or beta settings over several seeds");
  c_sweep->add_option("--variant", sweep.variant, "spurious or shuffled")->required();
  c_sweep->add_option("--grid", sweep.grid, "Comma-separated settings")->delimiter(',')->capture_default_str();
  c_sweep->add_option("--seeds", sweep.seeds, "Seeds 0..n-1 per setting")->capture_default_str();
  c_sweep->add_option("--threads", sweep.threads, "Parallel runs (0 = all cores)")->capture_default_str();
  c_sweep->add_option("--out", sweep.out, "Sweep JSON path (default: stdout)");
  c_sweep->add_option("--csv", sweep.csv, "Also write one CSV row per setting x seed");
  add_toy_overrides(c_sweep, sweep.overrides);

  ConvertArgs convert;
  auto* c_convert = app.add_subcommand("convert", "Convert a numeric CSV to .npy");
  c_convert->add_option("csv", convert.csv, "Input CSV")->required();
  c_convert->add_option("npy", convert.npy, "Output .npy")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "actdiag: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (c_analyze->parsed()) return run_analyze(analyze);
    if (c_density->parsed()) return run_density(density);
    if (c_rank->parsed()) return run_rank(rank);
    if (c_train->parsed()) return run_toy_train(train);
    if (c_sweep->parsed()) return run_toy_sweep(sweep);
    if (c_convert->parsed()) return run_convert(convert);
  } catch (const UsageError& e) {
    std::cerr << "actdiag: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const actdiag::Error& e) {
    std::cerr << "actdiag: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "actdiag: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
