#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "ndgdm/experiment.hpp"

namespace {

int run(const ndgdm::ExperimentConfig& config) {
  using namespace ndgdm;
  namespace fs = std::filesystem;

  if (!config.out_dir.empty()) fs::create_directories(config.out_dir);

  std::vector<ResultRow> rows;
  try {
    std::printf("%8s %5s %5s %5s %3s %-10s %6s %10s %10s %10s %8s\n", "Th", "N", "Thi", "ThH",
                "p", "precond", "iter", "MFl", "Mcomm", "kappa", "sec");
    rows = run_experiment(config, [&](const ResultRow& row, const SolveReport& report) {
      std::printf("%8d %5d %5d %5d %3d %-10s %6lld %10.2f %10.2f %10.3g %8.3f\n", row.th,
                  row.n_subdomains, row.thi, row.thh, row.degree, row.preconditioner.c_str(),
                  row.iter, row.mfl, row.mcomm, row.kappa, row.seconds);
      // first crossing of the 1e-6 residual level, informational only
      for (size_t i = 0; i < report.residual_history.size(); ++i) {
        if (report.residual_history[i] <= 1e-6) {
          std::printf("%56s r_rel<=1e-6 at iteration %zu\n", "", i);
          break;
        }
      }
      if (!config.out_dir.empty()) {
        const std::string name = "residual_" + config.problem + "_p" +
                                 std::to_string(row.degree) + "_Th" + std::to_string(row.th) +
                                 "_" + row.preconditioner + ".csv";
        write_residual_history(report, (fs::path(config.out_dir) / name).string());
      }
    });
  } catch (const ndgdm::SolveFailure& failure) {
    std::cerr << "error: " << failure.what() << '\n';
    return 2;
  }

  if (!config.out_dir.empty()) {
    emit_report(rows, ReportFormat::csv, (fs::path(config.out_dir) / "rows.csv").string());
    emit_report(rows, ReportFormat::markdown, (fs::path(config.out_dir) / "rows.md").string());
    save_config(config, (fs::path(config.out_dir) / "config.txt").string());
    std::printf("wrote %s/rows.csv and rows.md\n", config.out_dir.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Interior-penalty DG benchmark driver: two-level additive and hybrid "
      "Schwarz preconditioned conjugate gradients"};

  std::string config_path;
  app.add_option("--config", config_path, "experiment configuration file (key=value lines)");

  ndgdm::ExperimentConfig config;
  bool respect = false, no_respect = false;
  app.add_option("--problem", config.problem, "laplace|stripes");
  app.add_option("--p", config.degree, "polynomial degree");
  app.add_option("--cw", config.penalty, "penalty constant");
  app.add_option("--zeta", config.zeta, "diffusion contrast for stripes");
  std::vector<int> mesh_sizes;
  app.add_option("--mesh-n", mesh_sizes, "uniform mesh parameter(s) n");
  std::string mesh_file;
  app.add_option("--mesh-file", mesh_file, "mesh file instead of generated meshes");
  app.add_option("--target", config.target, "elements per subdomain");
  app.add_option("--m", config.parts_per_subdomain, "coarse elements per subdomain");
  std::vector<std::string> preconds;
  app.add_option("--precond", preconds, "one_level|additive|hybrid (repeatable)");
  app.add_flag("--respect-materials", respect, "single-material subdomains");
  app.add_flag("--no-respect-materials", no_respect, "ignore material interfaces");
  app.add_option("--tol", config.tol, "relative preconditioned residual tolerance");
  app.add_option("--seed", config.seed, "partitioner tie-break seed");
  app.add_option("--out", config.out_dir, "output directory for csv/markdown reports");

  try {
    app.parse(argc, argv);
    if (!config_path.empty()) {
      auto loaded = ndgdm::load_config(config_path);
      // command-line values override the file
      for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg.rfind("--problem", 0) == 0) loaded.problem = config.problem;
        else if (arg.rfind("--p", 0) == 0 && arg.size() <= 3) loaded.degree = config.degree;
        else if (arg.rfind("--cw", 0) == 0) loaded.penalty = config.penalty;
        else if (arg.rfind("--zeta", 0) == 0) loaded.zeta = config.zeta;
        else if (arg.rfind("--target", 0) == 0) loaded.target = config.target;
        else if (arg.rfind("--m", 0) == 0 && arg.size() <= 3)
          loaded.parts_per_subdomain = config.parts_per_subdomain;
        else if (arg.rfind("--tol", 0) == 0) loaded.tol = config.tol;
        else if (arg.rfind("--seed", 0) == 0) loaded.seed = config.seed;
        else if (arg.rfind("--out", 0) == 0) loaded.out_dir = config.out_dir;
      }
      config = loaded;
    }
    if (!mesh_sizes.empty()) config.mesh_sizes = mesh_sizes;
    if (!mesh_file.empty()) config.mesh_file = mesh_file;
    if (!preconds.empty()) config.preconditioners = preconds;
    if (respect) config.respect_materials = true;
    if (no_respect) config.respect_materials = false;
    if (config.mesh_sizes.empty() && config.mesh_file.empty()) config.mesh_sizes = {24};
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    return run(config);
  } catch (const ndgdm::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
