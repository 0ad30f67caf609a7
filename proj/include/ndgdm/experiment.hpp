#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ndgdm/krylov.hpp"

namespace ndgdm {

/// One experiment sweep: a problem, one polynomial degree, a mesh sequence,
/// and a set of preconditioners, fully determined by the seed.
struct ExperimentConfig {
  std::string problem = "laplace";
  double zeta = 1.0;
  int degree = 1;
  double penalty = 20.0;               ///< C_W
  std::vector<int> mesh_sizes;         ///< grid parameters n
  std::string mesh_file;               ///< overrides mesh_sizes when set
  int target = 100;                    ///< elements per subdomain
  int parts_per_subdomain = 1;         ///< coarse elements per subdomain
  std::vector<std::string> preconditioners = {"additive", "hybrid"};
  bool respect_materials = false;
  double tol = -1.0;                   ///< negative: problem default
  unsigned seed = 1;
  std::string out_dir;
};

void validate(const ExperimentConfig& config);

/// Flat `key=value` file with `#` comments; lossless round trip.
ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& config, const std::string& path);

struct ResultRow {
  int th = 0;          ///< fine elements
  int n_subdomains = 0;
  int thi = 0;         ///< elements per subdomain, rounded
  int thh = 0;         ///< coarse elements
  int degree = 0;
  std::string preconditioner;
  long long iter = 0;
  double mfl = 0.0;    ///< flops per core / 1e6
  double mcomm = 0.0;  ///< communication ops / 1e6
  double kappa = 0.0;  ///< Ritz condition estimate from the solve
  double seconds = 0.0;
};

/// Builds mesh, partition, system and preconditioners per configuration and
/// runs cg from the oscillatory initial iterate. Deterministic up to the
/// wall-time column. Throws SolveFailure, with the configuration in the
/// message, if cg exhausts its budget.
std::vector<ResultRow> run_experiment(
    const ExperimentConfig& config,
    const std::function<void(const ResultRow&, const SolveReport&)>& on_row = nullptr);

enum class ReportFormat { csv, markdown };

/// CSV header: Th,N,Thi,ThH,p,precond,iter,MFl,Mcomm,kappa,seconds.
/// Markdown groups rows into one block per preconditioner.
void emit_report(const std::vector<ResultRow>& rows, ReportFormat format,
                 const std::string& path);

std::vector<ResultRow> parse_result_csv(const std::string& path);

}  // namespace ndgdm
