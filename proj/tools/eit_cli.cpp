#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "eit/forward_sim.hpp"
#include "eit/io.hpp"

namespace fs = std::filesystem;
using eit::io::Json;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

eit::BoundaryArc parse_arc(const std::string& s) {
  if (s == "full") return eit::BoundaryArc::whole();
  if (s == "upper") return eit::BoundaryArc::between(0.0, eit::kTwoPi / 2);
  if (s == "lower") return eit::BoundaryArc::between(eit::kTwoPi / 2, eit::kTwoPi);
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw eit::ConfigError("arc must be full, upper, lower or theta1,theta2");
  try {
    return eit::BoundaryArc::between(std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1)));
  } catch (const std::logic_error&) {
    throw eit::ConfigError("cannot parse arc '" + s + "'");
  }
}

Json resolve_phantom(const std::string& arg) {
  if (fs::exists(arg)) return eit::io::to_json(eit::io::phantom_from_json(eit::io::read_json(arg)));
  return eit::io::to_json(eit::io::phantom_from_json(Json{{"preset", arg}}));
}

struct Manifest {
  std::string command;
  Json resolved;
  Json inputs = Json::object();
  Json outputs = Json::object();
  double seconds = 0.0;

  void input(const std::string& name, const fs::path& path) {
    inputs[name] = {{"path", fs::absolute(path).string()}, {"hash", eit::io::file_hash(path)}};
  }

  void output(const fs::path& dir, const std::string& name, std::string_view text) {
    eit::io::write_text(dir / name, text);
    outputs[name] = eit::io::hex64(eit::io::fnv1a64(text));
  }

  void write(const fs::path& dir) const {
    eit::io::write_json(dir / "manifest.json", {{"tool", "eit-cli"},
                                                {"version", kVersion},
                                                {"command", command},
                                                {"resolved", resolved},
                                                {"inputs", inputs},
                                                {"outputs", outputs},
                                                {"timing", {{"seconds", seconds}}}});
  }
};

// simulate

Json resolve_simulate(const std::string& phantom, const std::string& arc, double eps, std::uint64_t seed,
                      double fine_h, double h, bool inverse_crime) {
  if (!(eps >= 0.0)) throw eit::ConfigError("noise level must be non-negative");
  if (!(fine_h > 0.0 && h > 0.0 && fine_h < 1.0 && h < 1.0)) throw eit::ConfigError("mesh sizes must lie in (0, 1)");
  return {{"phantom", resolve_phantom(phantom)},
          {"arc", eit::io::to_json(parse_arc(arc))},
          {"noise_level", eps},
          {"seed", seed},
          {"fine_h", fine_h},
          {"h", h},
          {"inverse_crime", inverse_crime}};
}

int run_simulate(const Json& r, const fs::path& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto phantom = eit::io::phantom_from_json(r.at("phantom"));
  const auto arc = eit::io::arc_from_json(r.at("arc"));
  const double h = r.at("h").get<double>(), fine_h = r.at("fine_h").get<double>();
  const bool crime = r.at("inverse_crime").get<bool>();
  eit::DescentParams defaults;
  eit::validate(phantom, defaults.c);

  const auto recon_mesh = eit::generate_disk_mesh(h);
  const auto fine_mesh = crime && fine_h == h ? recon_mesh : eit::generate_disk_mesh(fine_h);
  eit::SimulationOptions opt{r.at("noise_level").get<double>(), r.at("seed").get<std::uint64_t>(), crime};
  auto data = eit::simulate(eit::rasterize(phantom, fine_mesh), arc, recon_mesh, opt);
  data.phantom = phantom;

  Manifest m{"simulate", r};
  m.output(out, "dataset.json", Json{{"mesh", {{"h", h}}}, {"data", eit::io::to_json(data)}}.dump(2) + "\n");
  m.output(out, "mesh.json", eit::io::to_json(*recon_mesh).dump() + "\n");
  m.output(out, "phantom.json", r.at("phantom").dump(2) + "\n");
  const auto truth = eit::rasterize(phantom, recon_mesh);
  m.output(out, "sigma_true.csv", eit::io::field_csv(truth));
  m.output(out, "sigma_true.vtk", eit::io::field_vtk(truth, "sigma"));
  m.seconds = seconds_since(t0);
  m.write(out);
  std::cout << "wrote " << data.size() << " patterns, " << data.theta.size() << " samples each, noise std "
            << data.noise_std << " to " << out.string() << "\n";
  return 0;
}

// dataset loading

struct LoadedData {
  eit::CauchyDataSet data;
  eit::MeshPtr mesh;
};

LoadedData load_dataset(const fs::path& path) {
  const Json j = eit::io::read_json(path);
  if (!j.contains("data") || !j.contains("mesh")) throw eit::ConfigError(path.string() + ": not a dataset file");
  LoadedData d{eit::io::dataset_from_json(j.at("data")), nullptr};
  const Json& jm = j.at("mesh");
  d.mesh = jm.contains("nodes") ? eit::io::mesh_from_json(jm) : eit::generate_disk_mesh(jm.at("h").get<double>());
  return d;
}

// reconstruct / tv

struct ReconFlags {
  std::string data, config, prior, emit_prior;
  std::optional<double> delta_r, alpha;
  std::optional<int> max_iters;
  std::optional<bool> refine;
  double sigma0 = 1.0;
};

eit::PriorMask load_prior(const ReconFlags& f, eit::PriorMask base) {
  if (!f.prior.empty()) base = eit::io::prior_from_json(eit::io::read_json(f.prior), base);
  if (f.delta_r) {
    base.dilation = *f.delta_r;
    base.validate();
  }
  return base;
}

Json resolve_sparsity(const ReconFlags& f, bool refine_default) {
  eit::ReconConfig cfg;
  cfg.descent.refinement.enabled = refine_default;
  if (!f.config.empty()) cfg = eit::io::recon_config_from_json(eit::io::read_json(f.config), cfg);
  cfg.prior = load_prior(f, cfg.prior);
  if (f.alpha) cfg.alpha = *f.alpha;
  if (f.max_iters) cfg.descent.max_iters = *f.max_iters;
  if (f.refine) cfg.descent.refinement.enabled = *f.refine;
  cfg.validate();
  return eit::io::to_json(cfg);
}

Json resolve_tv(const ReconFlags& f) {
  eit::TVConfig cfg;
  if (!f.config.empty()) cfg = eit::io::tv_config_from_json(eit::io::read_json(f.config), cfg);
  if (!f.prior.empty() || f.delta_r) throw eit::ConfigError("the TV method takes no prior");
  if (f.alpha) cfg.alpha = *f.alpha;
  if (f.max_iters) cfg.descent.max_iters = *f.max_iters;
  if (f.refine) cfg.descent.refinement.enabled = *f.refine;
  cfg.validate();
  return eit::io::to_json(cfg);
}

eit::Region threshold_region(const eit::Field& delta_gamma) {
  const eit::Mesh& mesh = *delta_gamma.mesh;
  const double peak = delta_gamma.values.maxCoeff();
  const eit::Vector avg = eit::triangle_average(mesh, delta_gamma.values);
  eit::Region region;
  if (!(peak > 0.0)) return region;
  for (Eigen::Index t = 0; t < mesh.num_triangles(); ++t) {
    if (avg[t] <= 0.5 * peak) continue;
    eit::Points tri(2, 3);
    for (int k = 0; k < 3; ++k) tri.col(k) = mesh.nodes().col(mesh.triangles()(k, t));
    region.polygons.push_back(tri);
  }
  return region;
}

int run_reconstruct(const Json& r, const fs::path& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string method = r.at("method").get<std::string>();
  const fs::path data_path = r.at("data").get<std::string>();
  const auto loaded = load_dataset(data_path);
  const auto sigma0 = eit::Field::constant(loaded.mesh, r.at("sigma0").get<double>());

  eit::ReconResult res;
  if (method == "sparsity") {
    res = eit::reconstruct(loaded.data, loaded.mesh, sigma0, eit::io::recon_config_from_json(r.at("config")));
  } else if (method == "tv") {
    res = eit::reconstruct_tv(loaded.data, loaded.mesh, sigma0, eit::io::tv_config_from_json(r.at("config")));
  } else {
    throw eit::ConfigError("unknown method '" + method + "'");
  }
  const double seconds = seconds_since(t0);

  const eit::Field sigma(res.delta_gamma.mesh, res.sigma0.values + res.delta_gamma.values);
  Json summary = {{"method", method},
                  {"iterations", res.log.size()},
                  {"termination", eit::to_string(res.termination)},
                  {"refinements", res.refinements},
                  {"runtime_s", seconds}};
  eit::FieldMetrics fm = eit::metrics(sigma);
  summary["sigma_E_region"] = "domain";
  summary["support_overlap"] = nullptr;
  if (loaded.data.phantom && !loaded.data.phantom->inclusions.empty()) {
    const auto support = eit::phantom_region(*loaded.data.phantom);
    fm = eit::metrics(sigma, [&](const Eigen::Vector2d& x) { return support.contains(x); });
    summary["sigma_E_region"] = "true_support";
    summary["support_overlap"] = eit::support_overlap(res.delta_gamma, *loaded.data.phantom);
  }
  summary["sigma_E"] = fm.sigma_E;
  summary["sigma_max"] = fm.sigma_max;

  Manifest m{method == "tv" ? "tv" : "reconstruct", r};
  m.input("data", data_path);
  m.output(out, "delta_gamma.csv", eit::io::field_csv(res.delta_gamma));
  m.output(out, "sigma.csv", eit::io::field_csv(sigma));
  m.output(out, "diagnostics.csv", eit::io::diagnostics_csv(res.log));
  m.output(out, "sigma.vtk", eit::io::field_vtk(sigma, "sigma"));
  m.output(out, "mesh.json", eit::io::to_json(*res.delta_gamma.mesh).dump() + "\n");
  if (r.contains("emit_prior") && !r.at("emit_prior").get<std::string>().empty()) {
    eit::PriorMask prior;
    prior.region = threshold_region(res.delta_gamma);
    eit::io::write_json(r.at("emit_prior").get<std::string>(), eit::io::to_json(prior));
  }
  eit::io::write_json(out / "summary.json", summary);
  m.seconds = seconds;
  m.write(out);

  std::cout << method << ": " << res.log.size() << " iterations, " << eit::to_string(res.termination)
            << ", sigma_E " << fm.sigma_E << ", sigma_max " << fm.sigma_max << "\n";
  if (res.termination == eit::Termination::NonFinite) throw NumericalFailure("objective became non-finite");
  return 0;
}

// sweep-dr

int run_sweep(const Json& r, const fs::path& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path data_path = r.at("data").get<std::string>();
  const auto loaded = load_dataset(data_path);
  if (!loaded.data.phantom) throw eit::ConfigError("sweep-dr needs a dataset simulated from a phantom");
  const auto cfg = eit::io::recon_config_from_json(r.at("config"));
  const auto sigma0 = eit::Field::constant(loaded.mesh, r.at("sigma0").get<double>());
  const auto drs = r.at("delta_r").get<std::vector<double>>();
  const bool no_prior = r.at("no_prior_row").get<bool>();
  const int jobs = std::max(1, r.at("jobs").get<int>());

  // One task per row; rows are independent and written back in order.
  std::vector<std::function<std::vector<eit::SweepRow>()>> tasks;
  for (double dr : drs) {
    tasks.push_back([&, dr] { return eit::delta_r_sweep(*loaded.data.phantom, loaded.data, loaded.mesh, sigma0, cfg, {dr}); });
  }
  if (no_prior) {
    tasks.push_back([&] { return eit::delta_r_sweep(*loaded.data.phantom, loaded.data, loaded.mesh, sigma0, cfg, {}, true); });
  }
  std::vector<eit::SweepRow> rows(tasks.size());
  for (std::size_t begin = 0; begin < tasks.size(); begin += static_cast<std::size_t>(jobs)) {
    std::vector<std::future<std::vector<eit::SweepRow>>> running;
    const std::size_t end = std::min(tasks.size(), begin + static_cast<std::size_t>(jobs));
    for (std::size_t k = begin; k < end; ++k) running.push_back(std::async(std::launch::async, tasks[k]));
    for (std::size_t k = begin; k < end; ++k) rows[k] = running[k - begin].get().front();
  }

  Manifest m{"sweep-dr", r};
  m.input("data", data_path);
  m.output(out, "sweep.csv", eit::sweep_csv(rows));
  m.seconds = seconds_since(t0);
  m.write(out);
  std::cout << eit::sweep_csv(rows);
  for (const auto& row : rows) {
    if (row.termination == eit::Termination::NonFinite) throw NumericalFailure("a sweep run became non-finite");
  }
  return 0;
}

// report

struct ReportRow {
  std::string run, method, termination;
  double sigma_E = 0.0, sigma_max = 0.0, runtime = 0.0;
  std::optional<double> overlap;
  long iterations = 0;
};

std::string report_csv(const std::vector<std::string>& dirs) {
  std::vector<ReportRow> rows;
  for (const auto& d : dirs) {
    const Json s = eit::io::read_json(fs::path(d) / "summary.json");
    ReportRow row{d,
                  s.at("method").get<std::string>(),
                  s.at("termination").get<std::string>(),
                  s.at("sigma_E").get<double>(),
                  s.at("sigma_max").get<double>(),
                  s.at("runtime_s").get<double>(),
                  s.at("support_overlap").is_null() ? std::nullopt
                                                    : std::optional<double>(s.at("support_overlap").get<double>()),
                  s.at("iterations").get<long>()};
    rows.push_back(row);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.sigma_max < b.sigma_max; });
  std::ostringstream os;
  os.precision(10);
  os << "run,method,sigma_E,sigma_max,support_overlap,runtime_s,iterations,termination\n";
  for (const auto& r : rows) {
    os << r.run << ',' << r.method << ',' << r.sigma_E << ',' << r.sigma_max << ',';
    if (r.overlap) os << *r.overlap;
    os << ',' << r.runtime << ',' << r.iterations << ',' << r.termination << '\n';
  }
  return os.str();
}

// rerun

int run_manifest(const fs::path& manifest_path, const fs::path& out) {
  const Json m = eit::io::read_json(manifest_path);
  const std::string command = m.at("command").get<std::string>();
  for (const auto& [name, in] : m.at("inputs").items()) {
    if (eit::io::file_hash(in.at("path").get<std::string>()) != in.at("hash").get<std::string>()) {
      throw eit::ConfigError("input '" + name + "' changed since the manifest was written");
    }
  }
  const Json& r = m.at("resolved");
  int code = 0;
  if (command == "simulate") {
    code = run_simulate(r, out);
  } else if (command == "reconstruct" || command == "tv") {
    Json rr = r;
    rr["emit_prior"] = "";
    code = run_reconstruct(rr, out);
  } else if (command == "sweep-dr") {
    code = run_sweep(r, out);
  } else {
    throw eit::ConfigError("manifest has unknown command '" + command + "'");
  }
  const Json fresh = eit::io::read_json(out / "manifest.json");
  int mismatches = 0;
  for (const auto& [name, hash] : m.at("outputs").items()) {
    if (!fresh.at("outputs").contains(name) || fresh.at("outputs").at(name) != hash) {
      std::cerr << "output " << name << " differs from the manifest\n";
      ++mismatches;
    }
  }
  if (mismatches > 0) throw NumericalFailure("rerun did not reproduce the recorded outputs");
  std::cout << "reproduced " << m.at("outputs").size() << " outputs\n";
  return code;
}

void add_recon_flags(CLI::App* cmd, ReconFlags& f, bool with_prior) {
  cmd->add_option("--data", f.data, "dataset.json written by simulate")->required()->check(CLI::ExistingFile);
  cmd->add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--alpha", f.alpha, "regularization parameter");
  cmd->add_option("--max-iters", f.max_iters, "iteration limit");
  cmd->add_option("--refine", f.refine, "local mesh refinement (true/false)");
  cmd->add_option("--sigma0", f.sigma0, "constant background conductivity");
  if (with_prior) {
    cmd->add_option("--prior", f.prior, "prior mask JSON")->check(CLI::ExistingFile);
    cmd->add_option("--delta-r", f.delta_r, "relative dilation of the prior region");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparsity-regularized partial-data EIT on the unit disk"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string out;

  auto* sim = app.add_subcommand("simulate", "simulate Cauchy data from a phantom");
  std::string phantom = "circular", arc = "full";
  double eps = 1e-2, fine_h = 0.01, h = 0.033;
  std::uint64_t seed = 0;
  bool crime = false;
  sim->add_option("--phantom", phantom, "preset name (circular, kite, multi_bump) or phantom JSON")->capture_default_str();
  sim->add_option("--arc", arc, "full, upper, lower or theta1,theta2")->capture_default_str();
  sim->add_option("--eps", eps, "relative noise level")->capture_default_str();
  sim->add_option("--seed", seed, "noise seed")->capture_default_str();
  sim->add_option("--fine-h", fine_h, "edge length of the simulation mesh")->capture_default_str();
  sim->add_option("--mesh-h", h, "edge length of the reconstruction mesh")->capture_default_str();
  sim->add_flag("--allow-inverse-crime", crime, "permit simulating on the reconstruction mesh");
  sim->add_option("--out", out, "output directory")->required();

  ReconFlags rf;
  std::string method = "sparsity";
  auto* rec = app.add_subcommand("reconstruct", "sparsity (or TV) reconstruction");
  add_recon_flags(rec, rf, true);
  rec->add_option("--method", method, "sparsity or tv")->check(CLI::IsMember({"sparsity", "tv"}))->capture_default_str();
  rec->add_option("--out", out, "output directory")->required();

  ReconFlags tf;
  auto* tv = app.add_subcommand("tv", "smoothed total-variation reconstruction");
  add_recon_flags(tv, tf, false);
  tv->add_option("--emit-prior", tf.emit_prior, "write a prior mask from the half-maximum support");
  tv->add_option("--out", out, "output directory")->required();

  ReconFlags sf;
  std::vector<double> drs{-0.25, -0.1, 0.0, 0.1, 0.25};
  bool no_prior_row = false;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  auto* sweep = app.add_subcommand("sweep-dr", "prior dilation sweep on phantom data");
  add_recon_flags(sweep, sf, true);
  sweep->add_option("--delta-rs", drs, "dilations to sweep")->delimiter(',')->capture_default_str();
  sweep->add_flag("--no-prior-row", no_prior_row, "append a run without prior");
  sweep->add_option("--jobs", jobs, "concurrent runs")->capture_default_str();
  sweep->add_option("--out", out, "output directory")->required();

  std::vector<std::string> runs;
  std::string report_out;
  auto* rep = app.add_subcommand("report", "compare finished runs");
  rep->add_option("runs", runs, "run directories")->required()->check(CLI::ExistingDirectory);
  rep->add_option("--out", report_out, "CSV file (stdout when omitted)");

  std::string manifest;
  auto* rerun = app.add_subcommand("rerun", "repeat a run from its manifest and compare outputs");
  rerun->add_option("manifest", manifest, "manifest.json")->required()->check(CLI::ExistingFile);
  rerun->add_option("--out", out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*sim) return run_simulate(resolve_simulate(phantom, arc, eps, seed, fine_h, h, crime), out);
    if (*rec) {
      const bool has_prior = !rf.prior.empty();
      Json r = {{"method", method},
                {"data", fs::absolute(rf.data).string()},
                {"sigma0", rf.sigma0},
                {"config", method == "tv" ? resolve_tv(rf) : resolve_sparsity(rf, has_prior)}};
      return run_reconstruct(r, out);
    }
    if (*tv) {
      Json r = {{"method", "tv"},
                {"data", fs::absolute(tf.data).string()},
                {"sigma0", tf.sigma0},
                {"config", resolve_tv(tf)},
                {"emit_prior", tf.emit_prior}};
      return run_reconstruct(r, out);
    }
    if (*sweep) {
      Json r = {{"data", fs::absolute(sf.data).string()},
                {"sigma0", sf.sigma0},
                {"config", resolve_sparsity(sf, true)},
                {"delta_r", drs},
                {"no_prior_row", no_prior_row},
                {"jobs", jobs}};
      return run_sweep(r, out);
    }
    if (*rep) {
      const std::string csv = report_csv(runs);
      if (report_out.empty()) {
        std::cout << csv;
      } else {
        eit::io::write_text(report_out, csv);
      }
      return 0;
    }
    if (*rerun) return run_manifest(manifest, out);
  } catch (const eit::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const eit::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
